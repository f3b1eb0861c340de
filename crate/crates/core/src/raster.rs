//! Rasters of amoebas and of their images in the unit disk, complement
//! components, the convexity check, and SVG/PPM output.

use std::collections::VecDeque;
use std::fmt::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{norm2, rho};
use crate::sampler::ShellSample;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("no points to rasterize")]
    EmptyBox,
    #[error("bounding box must have positive width and height")]
    DegenerateBox,
    #[error("resolution must be at least 16x16, got {0}x{1}")]
    Resolution(usize, usize),
    #[error("projection ({0}, {1}) does not fit points of dimension {2}")]
    Projection(usize, usize, usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

const MIN_SIDE: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct Raster {
    /// `[xmin, xmax, ymin, ymax]`.
    pub bbox: [f64; 4],
    pub width: usize,
    pub height: usize,
    /// Row-major occupancy, row 0 at the top (`y = ymax`).
    pub mask: Vec<bool>,
    /// What was rasterized, for example a variety and its projection.
    pub provenance: String,
    /// Whether the raster shows the unit disk, whose boundary is drawn.
    pub disk: bool,
}

impl Raster {
    pub fn empty(bbox: [f64; 4], width: usize, height: usize, provenance: &str) -> Result<Self, RasterError> {
        if width < MIN_SIDE || height < MIN_SIDE {
            return Err(RasterError::Resolution(width, height));
        }
        if !(bbox[1] > bbox[0] && bbox[3] > bbox[2]) || !bbox.iter().all(|v| v.is_finite()) {
            return Err(RasterError::DegenerateBox);
        }
        Ok(Raster { bbox, width, height, mask: vec![false; width * height], provenance: provenance.to_string(), disk: false })
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.mask[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, v: bool) {
        self.mask[row * self.width + col] = v;
    }

    pub fn occupied(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    /// Cell containing `(x, y)`, if inside the box. The upper edges belong
    /// to the last row and column.
    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let [x0, x1, y0, y1] = self.bbox;
        if !(x >= x0 && x <= x1 && y >= y0 && y <= y1) {
            return None;
        }
        let c = (((x - x0) / (x1 - x0)) * self.width as f64).floor() as usize;
        let r = (((y1 - y) / (y1 - y0)) * self.height as f64).floor() as usize;
        Some((c.min(self.width - 1), r.min(self.height - 1)))
    }

    /// Center of a cell in box coordinates.
    pub fn center(&self, col: usize, row: usize) -> (f64, f64) {
        let [x0, x1, y0, y1] = self.bbox;
        (
            x0 + (col as f64 + 0.5) * (x1 - x0) / self.width as f64,
            y1 - (row as f64 + 0.5) * (y1 - y0) / self.height as f64,
        )
    }

    /// Marks the cells of the given points, in parallel over chunks.
    pub fn mark_points(&mut self, points: &[[f64; 2]]) {
        let this = &*self;
        let merged = points
            .par_chunks(4096)
            .map(|chunk| {
                let mut m = vec![false; this.mask.len()];
                for p in chunk {
                    if let Some((c, r)) = this.cell_of(p[0], p[1]) {
                        m[r * this.width + c] = true;
                    }
                }
                m
            })
            .reduce(
                || vec![false; this.mask.len()],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x |= y);
                    a
                },
            );
        self.mask.iter_mut().zip(merged).for_each(|(x, y)| *x |= y);
    }

    /// Intersection over union of the occupied cells of two rasters of the
    /// same shape.
    pub fn iou(&self, other: &Raster) -> f64 {
        assert_eq!((self.width, self.height), (other.width, other.height));
        let mut inter = 0usize;
        let mut union = 0usize;
        for (a, b) in self.mask.iter().zip(&other.mask) {
            inter += (*a && *b) as usize;
            union += (*a || *b) as usize;
        }
        if union == 0 { 1.0 } else { inter as f64 / union as f64 }
    }

    /// Raster of the cells whose center satisfies `inside`.
    pub fn from_predicate(
        bbox: [f64; 4],
        width: usize,
        height: usize,
        provenance: &str,
        inside: impl Fn(f64, f64) -> bool,
    ) -> Result<Self, RasterError> {
        let mut r = Raster::empty(bbox, width, height, provenance)?;
        for row in 0..height {
            for col in 0..width {
                let (x, y) = r.center(col, row);
                r.set(col, row, inside(x, y));
            }
        }
        Ok(r)
    }
}

fn project(samples: &[ShellSample], projection: (usize, usize)) -> Result<Vec<[f64; 2]>, RasterError> {
    let mut out = Vec::new();
    for s in samples {
        for p in &s.points {
            let l = p.log();
            if projection.0 >= l.len() || projection.1 >= l.len() || projection.0 == projection.1 {
                return Err(RasterError::Projection(projection.0, projection.1, l.len()));
            }
            out.push([l[projection.0], l[projection.1]]);
        }
    }
    Ok(out)
}

/// Marks every cell holding at least one projected `Log` point.
pub fn rasterize_amoeba(
    samples: &[ShellSample],
    bbox: [f64; 4],
    resolution: (usize, usize),
    projection: (usize, usize),
) -> Result<Raster, RasterError> {
    let pts = project(samples, projection)?;
    rasterize_points(&pts, bbox, resolution, &format!("Log, coordinates ({}, {})", projection.0, projection.1))
}

/// Marks every cell holding at least one of the points.
pub fn rasterize_points(
    points: &[[f64; 2]],
    bbox: [f64; 4],
    resolution: (usize, usize),
    provenance: &str,
) -> Result<Raster, RasterError> {
    if points.is_empty() {
        return Err(RasterError::EmptyBox);
    }
    let mut r = Raster::empty(bbox, resolution.0, resolution.1, provenance)?;
    r.mark_points(points);
    Ok(r)
}

/// Image of the projected points under `ρ(x) = x / (1 + ‖x‖)` in the unit disk.
pub fn rho_disk_image(points: &[[f64; 2]], resolution: (usize, usize), provenance: &str) -> Result<Raster, RasterError> {
    if points.is_empty() {
        return Err(RasterError::EmptyBox);
    }
    let mapped: Vec<[f64; 2]> = points
        .iter()
        .map(|p| {
            let q = rho(&p[..]);
            [q[0], q[1]]
        })
        .collect();
    let mut r = rasterize_points(&mapped, [-1.0, 1.0, -1.0, 1.0], resolution, provenance)?;
    r.disk = true;
    Ok(r)
}

/// Projected `Log` points of shell samples, for [`rho_disk_image`].
pub fn projected_logs(samples: &[ShellSample], projection: (usize, usize)) -> Result<Vec<[f64; 2]>, RasterError> {
    project(samples, projection)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    /// `(col, row)` cells, in scan order.
    pub cells: Vec<(usize, usize)>,
    pub unbounded: bool,
}

/// 4-connected components of the unoccupied cells, in scan order of their
/// first cell. Components touching the border are flagged unbounded.
pub fn complement_components(r: &Raster) -> Vec<Region> {
    let (w, h) = (r.width, r.height);
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    for start in 0..w * h {
        if r.mask[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut cells = Vec::new();
        let mut unbounded = false;
        while let Some(i) = queue.pop_front() {
            let (c, row) = (i % w, i / w);
            cells.push((c, row));
            unbounded |= c == 0 || row == 0 || c == w - 1 || row == h - 1;
            let mut push = |j: usize| {
                if !r.mask[j] && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            };
            if c > 0 {
                push(i - 1);
            }
            if c + 1 < w {
                push(i + 1);
            }
            if row > 0 {
                push(i - w);
            }
            if row + 1 < h {
                push(i + w);
            }
        }
        cells.sort_by_key(|&(c, row)| (row, c));
        out.push(Region { cells, unbounded });
    }
    out
}

/// Cells of the region at Chebyshev distance more than `margin` cells from
/// every occupied cell.
pub fn eroded_core(region: &Region, r: &Raster, margin: usize) -> Vec<(usize, usize)> {
    // Distance transform by two passes of the Chebyshev metric.
    let (w, h) = (r.width, r.height);
    let big = usize::MAX / 2;
    let mut d: Vec<usize> = r.mask.iter().map(|&b| if b { 0 } else { big }).collect();
    for row in 0..h {
        for c in 0..w {
            let i = row * w + c;
            let mut v = d[i];
            if c > 0 {
                v = v.min(d[i - 1] + 1);
            }
            if row > 0 {
                v = v.min(d[i - w] + 1);
                if c > 0 {
                    v = v.min(d[i - w - 1] + 1);
                }
                if c + 1 < w {
                    v = v.min(d[i - w + 1] + 1);
                }
            }
            d[i] = v;
        }
    }
    for row in (0..h).rev() {
        for c in (0..w).rev() {
            let i = row * w + c;
            let mut v = d[i];
            if c + 1 < w {
                v = v.min(d[i + 1] + 1);
            }
            if row + 1 < h {
                v = v.min(d[i + w] + 1);
                if c + 1 < w {
                    v = v.min(d[i + w + 1] + 1);
                }
                if c > 0 {
                    v = v.min(d[i + w - 1] + 1);
                }
            }
            d[i] = v;
        }
    }
    region.cells.iter().copied().filter(|&(c, row)| d[row * w + c] > margin).collect()
}

/// Whether the segment between two cell centers passes through an
/// occupied cell, walked at a quarter of a cell.
pub fn segment_hits_occupied(r: &Raster, a: (usize, usize), b: (usize, usize)) -> bool {
    let (ax, ay) = (a.0 as f64 + 0.5, a.1 as f64 + 0.5);
    let (bx, by) = (b.0 as f64 + 0.5, b.1 as f64 + 0.5);
    let len = ((bx - ax).powi(2) + (by - ay).powi(2)).sqrt();
    let steps = (4.0 * len).ceil() as usize;
    (0..=steps).any(|k| {
        let t = if steps == 0 { 0.0 } else { k as f64 / steps as f64 };
        let (x, y) = (ax + t * (bx - ax), ay + t * (by - ay));
        let (c, row) = (x.floor() as usize, y.floor() as usize);
        c < r.width && row < r.height && r.get(c, row)
    })
}

/// Default number of sampled pairs per region.
pub const CONVEXITY_PAIRS: usize = 10_000;
/// Erosion margin, in cells, absorbing the raggedness of a sampled boundary.
pub const CONVEXITY_MARGIN: usize = 2;

/// Number of sampled pairs of cells in the eroded core of `region` whose
/// connecting segment crosses an occupied cell.
///
/// Eroding a convex region keeps it convex, while one-cell teeth of the
/// rasterized boundary would otherwise block segments running along it.
pub fn convexity_violations(region: &Region, r: &Raster, pairs: usize, seed: u64) -> usize {
    let core = eroded_core(region, r, CONVEXITY_MARGIN);
    if core.len() < 2 {
        return 0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..pairs)
        .filter(|_| {
            let a = core[rng.random_range(0..core.len())];
            let b = core[rng.random_range(0..core.len())];
            segment_hits_occupied(r, a, b)
        })
        .count()
}

const FILL: &str = "#1f4e79";
const BOUNDARY: &str = "#888888";

/// SVG 1.1 document with one rect per horizontal run of occupied cells.
pub fn render_svg(r: &Raster) -> String {
    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = r.width,
        h = r.height
    )
    .unwrap();
    writeln!(s, "<desc>{}</desc>", escape(&r.provenance)).unwrap();
    writeln!(s, r#"<g fill="{FILL}" shape-rendering="crispEdges">"#).unwrap();
    for row in 0..r.height {
        let mut c = 0;
        while c < r.width {
            if !r.get(c, row) {
                c += 1;
                continue;
            }
            let start = c;
            while c < r.width && r.get(c, row) {
                c += 1;
            }
            writeln!(s, r#"<rect x="{start}" y="{row}" width="{}" height="1"/>"#, c - start).unwrap();
        }
    }
    writeln!(s, "</g>").unwrap();
    if r.disk {
        writeln!(
            s,
            r#"<circle cx="{}" cy="{}" r="{}" fill="none" stroke="{BOUNDARY}" stroke-width="1"/>"#,
            r.width as f64 / 2.0,
            r.height as f64 / 2.0,
            r.width.min(r.height) as f64 / 2.0
        )
        .unwrap();
    }
    writeln!(s, "</svg>").unwrap();
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn write_svg(r: &Raster, path: &Path) -> Result<(), RasterError> {
    std::fs::write(path, render_svg(r))?;
    Ok(())
}

/// Binary PPM (P6): occupied cells in the fill color on white.
pub fn render_ppm(r: &Raster) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", r.width, r.height).into_bytes();
    let fill = [0x1f, 0x4e, 0x79];
    for &b in &r.mask {
        out.extend_from_slice(if b { &fill } else { &[255, 255, 255] });
    }
    out
}

pub fn write_ppm(r: &Raster, path: &Path) -> Result<(), RasterError> {
    std::fs::write(path, render_ppm(r))?;
    Ok(())
}

/// Whether all points map strictly inside the unit disk under `ρ`.
pub fn rho_inside_disk(points: &[[f64; 2]]) -> bool {
    points.iter().all(|p| norm2(&rho(&p[..])) < 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn annulus() -> Raster {
        Raster::from_predicate([-1.0, 1.0, -1.0, 1.0], 64, 64, "annulus", |x, y| {
            let r = (x * x + y * y).sqrt();
            (0.3..0.5).contains(&r)
        })
        .unwrap()
    }

    #[test]
    fn empty_and_bad_inputs() {
        assert!(matches!(rasterize_points(&[], [0.0, 1.0, 0.0, 1.0], (32, 32), ""), Err(RasterError::EmptyBox)));
        assert!(matches!(Raster::empty([0.0, 0.0, 0.0, 1.0], 32, 32, ""), Err(RasterError::DegenerateBox)));
        assert!(matches!(Raster::empty([0.0, 1.0, 0.0, 1.0], 8, 32, ""), Err(RasterError::Resolution(8, 32))));
    }

    #[test]
    fn points_land_in_their_cells() {
        let r = rasterize_points(&[[0.0, 0.0], [1.0, 1.0], [0.49, 0.51]], [0.0, 1.0, 0.0, 1.0], (16, 16), "").unwrap();
        assert!(r.get(0, 15));
        assert!(r.get(15, 0));
        assert!(r.get(7, 7));
        assert_eq!(r.occupied(), 3);
    }

    #[test]
    fn diagonal_components() {
        // The line x + y = 0 splits the box into two 4-connected halves.
        let r = Raster::from_predicate([-5.0, 5.0, -5.0, 5.0], 64, 64, "", |x, y| (x + y).abs() < 0.2).unwrap();
        let comps = complement_components(&r);
        assert_eq!(comps.len(), 2);
        assert!(comps.iter().all(|c| c.unbounded));
        for c in &comps {
            assert_eq!(convexity_violations(c, &r, 2000, 1), 0);
        }
    }

    #[test]
    fn full_raster_has_no_components() {
        let r = Raster::from_predicate([0.0, 1.0, 0.0, 1.0], 16, 16, "", |_, _| true).unwrap();
        assert!(complement_components(&r).is_empty());
    }

    #[test]
    fn annulus_region_is_not_convex() {
        let r = annulus();
        let inv = Raster { mask: r.mask.iter().map(|b| !b).collect(), ..r.clone() };
        let comps = complement_components(&inv);
        assert_eq!(comps.len(), 1);
        let ring = &comps[0];
        assert!(!ring.unbounded);
        assert!(convexity_violations(ring, &inv, 2000, 1) > 0);
        // The disk inside the annulus is convex.
        let disk = complement_components(&r).into_iter().find(|c| !c.unbounded).unwrap();
        assert_eq!(convexity_violations(&disk, &r, 2000, 1), 0);
    }

    #[test]
    fn single_cell_region() {
        let r = Raster::from_predicate([0.0, 1.0, 0.0, 1.0], 16, 16, "", |x, y| !(x > 0.5 && x < 0.5625 && y > 0.5 && y < 0.5625)).unwrap();
        let comps = complement_components(&r);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].cells.len(), 1);
        assert_eq!(convexity_violations(&comps[0], &r, 100, 1), 0);
    }

    #[test]
    fn checkerboard_svg() {
        let r = Raster::from_predicate([0.0, 16.0, 0.0, 16.0], 16, 16, "checker", |x, y| (x.floor() as i64 + y.floor() as i64) % 2 == 0).unwrap();
        let svg = render_svg(&r);
        assert_eq!(svg.matches("<rect").count(), 128);
        assert_eq!(svg, render_svg(&r));
        let full = Raster::from_predicate([0.0, 1.0, 0.0, 1.0], 16, 16, "", |_, _| true).unwrap();
        assert_eq!(render_svg(&full).matches("<rect").count(), 16);
    }

    #[test]
    fn ppm_header_and_size() {
        let r = annulus();
        let p = render_ppm(&r);
        assert!(p.starts_with(b"P6\n64 64\n255\n"));
        assert_eq!(p.len(), 13 + 64 * 64 * 3);
    }

    #[test]
    fn rho_image_stays_in_disk() {
        let pts = vec![[1e6, 0.0], [-3.0, 4.0], [0.0, 0.0]];
        assert!(rho_inside_disk(&pts));
        let r = rho_disk_image(&pts, (64, 64), "").unwrap();
        assert!(r.disk);
        assert_eq!(r.occupied(), 3);
        assert!(render_svg(&r).contains("<circle"));
    }
}
