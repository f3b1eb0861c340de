//! Finite unions of cells on the unit sphere.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::geometry::{angle_between, dot, geodesic_segment_distance, norm2, RationalSlope};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    Vertex,
    /// Great-circle arc; samples are ordered from the first slope to the second.
    Arc,
    /// A full great circle.
    Circle,
    Higher,
}

/// Generators of the cone over a cell, when known exactly.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ConeSpan {
    pub rays: Vec<Vec<f64>>,
    pub lines: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "CellJson", try_from = "CellJson")]
pub struct Cell {
    pub kind: CellKind,
    pub dim: usize,
    /// Vertex slope, arc endpoint slopes, or cone generators; empty when the
    /// bounding data is not rational.
    pub slopes: Vec<RationalSlope>,
    /// Representative unit vectors.
    pub samples: Vec<Vec<f64>>,
    pub cone: Option<ConeSpan>,
}

#[derive(Serialize, Deserialize)]
struct CellJson {
    kind: String,
    dim: usize,
    slopes: Vec<RationalSlope>,
    samples: Vec<Vec<f64>>,
}

impl From<Cell> for CellJson {
    fn from(c: Cell) -> Self {
        let kind = match c.kind {
            CellKind::Vertex => "vertex".to_string(),
            CellKind::Arc => "arc".to_string(),
            CellKind::Circle | CellKind::Higher => format!("cell_{}", c.dim),
        };
        CellJson { kind, dim: c.dim, slopes: c.slopes, samples: c.samples }
    }
}

impl TryFrom<CellJson> for Cell {
    type Error = String;
    fn try_from(j: CellJson) -> Result<Self, String> {
        let kind = match j.kind.as_str() {
            "vertex" => CellKind::Vertex,
            "arc" => CellKind::Arc,
            "cell_1" => CellKind::Circle,
            k if k.starts_with("cell_") => CellKind::Higher,
            k => return Err(format!("unknown cell kind {k}")),
        };
        Ok(Cell { kind, dim: j.dim, slopes: j.slopes, samples: j.samples, cone: None })
    }
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = norm2(v);
    v.iter().map(|x| x / n).collect()
}

/// `count` points along the shorter great-circle arc from `a` to `b`.
pub fn slerp_samples(a: &[f64], b: &[f64], count: usize) -> Vec<Vec<f64>> {
    let a = unit(a);
    let b = unit(b);
    let omega = angle_between(&a, &b);
    (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            if omega < 1e-12 {
                return a.clone();
            }
            let (sa, sb) = (((1.0 - t) * omega).sin(), (t * omega).sin());
            let v: Vec<f64> = a.iter().zip(&b).map(|(x, y)| sa * x + sb * y).collect();
            unit(&v)
        })
        .collect()
}

/// Points `cos θ e1 + sin θ e2` for `θ` evenly spaced on `[0, span]`.
fn planar_samples(e1: &[f64], e2: &[f64], span: f64, count: usize, closed: bool) -> Vec<Vec<f64>> {
    let steps = if closed { count } else { count - 1 };
    (0..count)
        .map(|i| {
            let th = span * i as f64 / steps as f64;
            e1.iter().zip(e2).map(|(x, y)| th.cos() * x + th.sin() * y).collect()
        })
        .collect()
}

/// Component of `v` orthogonal to the unit vector `e`, normalized.
fn orthogonalize(v: &[f64], e: &[f64]) -> Vec<f64> {
    let c = dot(v, e);
    unit(&v.iter().zip(e).map(|(x, y)| x - c * y).collect::<Vec<_>>())
}

impl Cell {
    pub fn vertex(slope: RationalSlope) -> Self {
        let d = slope.direction::<f64>().into_vec();
        Cell { kind: CellKind::Vertex, dim: 0, slopes: vec![slope], samples: vec![d], cone: None }
    }

    /// A vertex at an arbitrary direction, with its slope when one is known.
    pub fn vertex_at(direction: Vec<f64>, slope: Option<RationalSlope>) -> Self {
        Cell { kind: CellKind::Vertex, dim: 0, slopes: slope.into_iter().collect(), samples: vec![direction], cone: None }
    }

    /// Shorter arc between two rational endpoints.
    pub fn arc(a: RationalSlope, b: RationalSlope) -> Self {
        let da = a.direction::<f64>().into_vec();
        let db = b.direction::<f64>().into_vec();
        let samples = slerp_samples(&da, &db, 17);
        let cone = ConeSpan { rays: vec![da, db], lines: vec![] };
        Cell { kind: CellKind::Arc, dim: 1, slopes: vec![a, b], samples, cone: Some(cone) }
    }

    /// Half great circle from `l` to `-l` passing through the side of `r`.
    pub fn semicircle(l: RationalSlope, r: &[f64]) -> Self {
        let e1 = l.direction::<f64>().into_vec();
        let e2 = orthogonalize(r, &e1);
        let samples = planar_samples(&e1, &e2, std::f64::consts::PI, 33, false);
        let cone = ConeSpan { rays: vec![r.to_vec()], lines: vec![e1] };
        Cell { kind: CellKind::Arc, dim: 1, slopes: vec![l.clone(), l.neg()], samples, cone: Some(cone) }
    }

    /// Great circle in the plane spanned by two lines.
    pub fn circle(a: RationalSlope, b: RationalSlope) -> Self {
        let e1 = a.direction::<f64>().into_vec();
        let e2 = orthogonalize(&b.direction::<f64>().into_vec(), &e1);
        let samples = planar_samples(&e1, &e2, std::f64::consts::TAU, 64, true);
        let cone = ConeSpan { rays: vec![], lines: vec![e1, e2] };
        Cell { kind: CellKind::Circle, dim: 1, slopes: vec![a, b], samples, cone: Some(cone) }
    }

    /// Angular distance from a unit vector to the cell.
    pub fn distance_to(&self, d: &[f64]) -> f64 {
        match self.kind {
            CellKind::Vertex => angle_between(d, &self.samples[0]),
            CellKind::Arc | CellKind::Circle => {
                if let Some(c) = &self.cone {
                    if self.kind == CellKind::Arc && c.lines.is_empty() && c.rays.len() == 2 {
                        return geodesic_segment_distance(d, &c.rays[0], &c.rays[1]);
                    }
                }
                let closed = self.kind == CellKind::Circle;
                polyline_distance(d, &self.samples, closed)
            }
            CellKind::Higher => match &self.cone {
                Some(c) => cone_distance(d, c),
                None => self.samples.iter().map(|s| angle_between(d, s)).fold(f64::INFINITY, f64::min),
            },
        }
    }

    fn sort_key(&self) -> (usize, CellKind, Vec<Vec<i64>>, Vec<i64>) {
        let slopes = self.slopes.iter().map(|s| s.as_slice().to_vec()).collect();
        let first = self.samples.first().map(|s| s.iter().map(|x| (x * 1e9).round() as i64).collect());
        (self.dim, self.kind, slopes, first.unwrap_or_default())
    }
}

/// Distance to a chain of geodesic segments through consecutive samples.
pub fn polyline_distance(d: &[f64], samples: &[Vec<f64>], closed: bool) -> f64 {
    if samples.len() == 1 {
        return angle_between(d, &samples[0]);
    }
    let mut best = f64::INFINITY;
    for w in samples.windows(2) {
        best = best.min(geodesic_segment_distance(d, &w[0], &w[1]));
    }
    if closed {
        best = best.min(geodesic_segment_distance(d, &samples[samples.len() - 1], &samples[0]));
    }
    best
}

/// Angle between `d` and the nearest point of `cone(rays) + span(lines)`,
/// found by checking the orthogonal projection onto every face.
fn cone_distance(d: &[f64], c: &ConeSpan) -> f64 {
    let k = c.rays.len().min(16);
    let n = d.len();
    let dv = DVector::from_column_slice(d);
    let mut best_norm: f64 = 0.0;
    for mask in 0u32..(1 << k) {
        let chosen: Vec<&Vec<f64>> = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| &c.rays[i]).collect();
        let cols = chosen.len() + c.lines.len();
        if cols == 0 || cols > n {
            continue;
        }
        let mut m = DMatrix::<f64>::zeros(n, cols);
        for (j, v) in chosen.iter().map(|v| v.as_slice()).chain(c.lines.iter().map(|v| v.as_slice())).enumerate() {
            m.set_column(j, &DVector::from_column_slice(v));
        }
        let svd = m.clone().svd(true, true);
        let Ok(coef) = svd.solve(&dv, 1e-12) else { continue };
        if (0..chosen.len()).any(|j| coef[j] < -1e-12) {
            continue;
        }
        let proj = &m * &coef;
        let resid = (&dv - &proj).norm();
        // Only projections orthogonal to the face span are nearest points.
        if resid.is_finite() && proj.dot(&dv) > 0.0 {
            best_norm = best_norm.max(proj.norm().min(1.0));
        }
    }
    if best_norm == 0.0 {
        return std::f64::consts::FRAC_PI_2
            .max(c.rays.iter().map(|r| angle_between(d, &unit(r))).fold(f64::INFINITY, f64::min));
    }
    best_norm.acos()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SphericalComplex {
    pub cells: Vec<Cell>,
}

impl SphericalComplex {
    pub fn new(mut cells: Vec<Cell>) -> Self {
        cells.sort_by_key(|a| a.sort_key());
        SphericalComplex { cells }
    }

    pub fn ambient_dim(&self) -> Option<usize> {
        self.cells.first().map(|c| c.samples[0].len())
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| c.kind == CellKind::Vertex)
    }

    pub fn arcs(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| c.kind == CellKind::Arc)
    }

    pub fn count(&self, kind: CellKind) -> usize {
        self.cells.iter().filter(|c| c.kind == kind).count()
    }

    /// Angular distance from a unit vector to the union of the cells.
    pub fn distance_to(&self, d: &[f64]) -> f64 {
        self.cells.iter().map(|c| c.distance_to(d)).fold(f64::INFINITY, f64::min)
    }

    pub fn all_samples(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.cells.iter().flat_map(|c| c.samples.iter())
    }

    /// Symmetric Hausdorff distance, measured from the samples of each side
    /// to the cells of the other.
    pub fn hausdorff(&self, other: &SphericalComplex) -> f64 {
        let ab = self.all_samples().map(|s| other.distance_to(s)).fold(0.0, f64::max);
        let ba = other.all_samples().map(|s| self.distance_to(s)).fold(0.0, f64::max);
        ab.max(ba)
    }

    /// Hausdorff distance between the vertex sets only.
    pub fn vertex_hausdorff(&self, other: &SphericalComplex) -> f64 {
        let a: Vec<&Vec<f64>> = self.vertices().map(|c| &c.samples[0]).collect();
        let b: Vec<&Vec<f64>> = other.vertices().map(|c| &c.samples[0]).collect();
        if a.is_empty() && b.is_empty() {
            return 0.0;
        }
        if a.is_empty() || b.is_empty() {
            return std::f64::consts::PI;
        }
        let side = |x: &[&Vec<f64>], y: &[&Vec<f64>]| {
            x.iter()
                .map(|p| y.iter().map(|q| angle_between(p, q)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        };
        side(&a, &b).max(side(&b, &a))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("complex serializes")
    }
}

/// Maximum cell dimension and whether every cell of lower dimension lies in
/// a cell of higher dimension.
pub fn complex_dim_and_homogeneity(s: &SphericalComplex) -> (usize, bool) {
    let dim = s.cells.iter().map(|c| c.dim).max().unwrap_or(0);
    let homogeneous = s.cells.iter().filter(|c| c.dim < dim).all(|c| {
        s.cells
            .iter()
            .filter(|o| o.dim > c.dim)
            .any(|o| c.samples.iter().all(|p| o.distance_to(p) <= 1e-6))
    });
    (dim, homogeneous)
}
