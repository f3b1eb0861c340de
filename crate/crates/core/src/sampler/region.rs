//! Dense fills of a bounded window of an amoeba, for rasterization.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::param::eval_map;
use super::{run_pool, HypersurfaceSolver, Mode, SamplerError, VarietySpec};
use crate::expr::Expression;
use crate::geometry::log_map;

#[derive(Clone, Debug, PartialEq)]
pub struct RegionOptions {
    /// Coordinates shown on the two raster axes.
    pub projection: (usize, usize),
    /// Largest image size of a parameter cell, in raster cells.
    pub cell_fraction: f64,
    /// Phases per solved slice for implicit curves.
    pub phases: usize,
    pub max_depth: usize,
    pub residual_bound: f64,
    pub workers: usize,
    pub seed: u64,
}

impl Default for RegionOptions {
    fn default() -> Self {
        RegionOptions {
            projection: (0, 1),
            cell_fraction: 1.0,
            phases: 256,
            max_depth: 40,
            residual_bound: 1e-8,
            workers: 1,
            seed: 0,
        }
    }
}

/// Window `[x0, x1] × [y0, y1]` at `w × h` cells, over `Log` points or,
/// with `rho`, over their images in the unit disk.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Window {
    bbox: [f64; 4],
    w: f64,
    h: f64,
    rho: bool,
    /// Largest `Log` norm shown in the disk view.
    reach: f64,
}

impl Window {
    fn view(&self, p: [f64; 2]) -> [f64; 2] {
        if self.rho {
            let s = 1.0 + p[0].hypot(p[1]);
            [p[0] / s, p[1] / s]
        } else {
            p
        }
    }

    fn to_cells(&self, p: [f64; 2]) -> [f64; 2] {
        let p = self.view(p);
        let [x0, x1, y0, y1] = self.bbox;
        [(p[0] - x0) / (x1 - x0) * self.w, (p[1] - y0) / (y1 - y0) * self.h]
    }

    /// Raster cell of a point, rows counted from the top, with the same
    /// arithmetic as `Raster::cell_of`.
    fn cell_index(&self, p: [f64; 2]) -> Option<usize> {
        let [x, y] = self.view(p);
        let [x0, x1, y0, y1] = self.bbox;
        if !(x >= x0 && x <= x1 && y >= y0 && y <= y1) {
            return None;
        }
        let (w, h) = (self.w as usize, self.h as usize);
        let c = (((x - x0) / (x1 - x0)) * self.w).floor() as usize;
        let r = (((y1 - y) / (y1 - y0)) * self.h).floor() as usize;
        Some(r.min(h - 1) * w + c.min(w - 1))
    }

    /// Side code of a point outside the window grown by a quarter of its
        /// size: bit 0 left, 1 right, 2 below, 3 above. In the disk view, bit 0
    /// marks points beyond a quarter more than the reach.
    fn outside(&self, p: [f64; 2]) -> u8 {
        if self.rho {
            return (p[0].hypot(p[1]) > 1.25 * self.reach) as u8;
        }
        let c = self.to_cells(p);
        let (mx, my) = (0.25 * self.w, 0.25 * self.h);
        (c[0] < -mx) as u8 | ((c[0] > self.w + mx) as u8) << 1 | ((c[1] < -my) as u8) << 2 | ((c[1] > self.h + my) as u8) << 3
    }
}

/// Keeps the first point of each window cell, in order, dropping points
/// outside the window.
fn thin(win: &Window, parts: Vec<Vec<[f64; 2]>>) -> Vec<[f64; 2]> {
    let (w, h) = (win.w as usize, win.h as usize);
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    for p in parts.into_iter().flatten() {
        let Some(i) = win.cell_index(p) else { continue };
        if !seen[i] {
            seen[i] = true;
            out.push(p);
        }
    }
    out
}

fn project(z: &[Complex64], proj: (usize, usize)) -> Option<[f64; 2]> {
    let l = log_map(z);
    let p = [*l.get(proj.0)?, *l.get(proj.1)?];
    (p[0].is_finite() && p[1].is_finite()).then_some(p)
}

#[derive(Clone, Debug)]
struct Rect {
    lo: Vec<f64>,
    hi: Vec<f64>,
    depth: usize,
}

impl Rect {
    fn corners(&self) -> Vec<Vec<f64>> {
        let d = self.lo.len();
        (0..1usize << d)
            .map(|mask| (0..d).map(|a| if mask >> a & 1 == 1 { self.hi[a] } else { self.lo[a] }).collect())
            .collect()
    }

    fn split(&self, axis: usize) -> [Rect; 2] {
        let mid = 0.5 * (self.lo[axis] + self.hi[axis]);
        let mut a = self.clone();
        let mut b = self.clone();
        a.hi[axis] = mid;
        b.lo[axis] = mid;
        a.depth += 1;
        b.depth += 1;
        [a, b]
    }

    fn widest(&self) -> usize {
        (0..self.lo.len()).max_by(|&a, &b| (self.hi[a] - self.lo[a]).total_cmp(&(self.hi[b] - self.lo[b]))).unwrap_or(0)
    }
}

struct ParamFill<'a> {
    map: &'a [Expression],
    win: Window,
    opts: &'a RegionOptions,
}

/// Depth below which windows are never pruned, so that coarse cells whose
/// corners happen to fall outside are still explored.
const PRUNE_DEPTH: usize = 10;

impl ParamFill<'_> {
    /// Parameters `t_i = e^{s_i + i φ_i}` from `(s_1, φ_1, ...)`.
    fn image(&self, q: &[f64]) -> Option<[f64; 2]> {
        let t: Vec<Complex64> = q.chunks(2).map(|c| Complex64::from_polar(c[0].exp(), c[1])).collect();
        project(&eval_map(self.map, &t)?, self.opts.projection)
    }

    fn fill(&self, root: Rect, out: &mut Vec<[f64; 2]>) {
        let mut stack = vec![root];
        while let Some(r) = stack.pop() {
            let d = r.lo.len();
            let imgs: Vec<Option<[f64; 2]>> = r.corners().iter().map(|c| self.image(c)).collect();
            let at_limit = r.depth >= self.opts.max_depth;
            // Overflowing corners are far outside on some side.
            let side = imgs.iter().fold(0xffu8, |m, p| m & p.map_or(0xff, |p| self.win.outside(p)));
            if r.depth >= PRUNE_DEPTH && side != 0 {
                continue;
            }
            if imgs.iter().any(Option::is_none) {
                if !at_limit {
                    let [a, b] = r.split(r.widest());
                    stack.push(b);
                    stack.push(a);
                }
                continue;
            }
            let imgs: Vec<[f64; 2]> = imgs.into_iter().flatten().collect();
            let cells: Vec<[f64; 2]> = imgs.iter().map(|p| self.win.to_cells(*p)).collect();
            let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for c in &cells {
                for k in 0..2 {
                    lo[k] = lo[k].min(c[k]);
                    hi[k] = hi[k].max(c[k]);
                }
            }
            let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]);
            if extent <= self.opts.cell_fraction || at_limit {
                out.extend(imgs.iter().copied());
                continue;
            }
            // Split the parameter axis whose image moves the most.
            let mut best = (0, f64::NEG_INFINITY);
            for a in 0..d {
                let mut m: f64 = 0.0;
                for (i, c) in cells.iter().enumerate() {
                    if i >> a & 1 == 0 {
                        let o = cells[i | 1 << a];
                        m = m.max((o[0] - c[0]).abs().max((o[1] - c[1]).abs()));
                    }
                }
                if m > best.1 {
                    best = (a, m);
                }
            }
            let [a, b] = r.split(best.0);
            stack.push(b);
            stack.push(a);
        }
    }
}

/// Points of the amoeba's projection covering the window densely enough
/// that every occupied raster cell receives at least one point.
///
/// `bbox` is `[xmin, xmax, ymin, ymax]` and `resolution` is `(w, h)`.
pub fn amoeba_region_points(
    spec: &VarietySpec,
    bbox: [f64; 4],
    resolution: (usize, usize),
    opts: &RegionOptions,
) -> Result<Vec<[f64; 2]>, SamplerError> {
    let [x0, x1, y0, y1] = bbox;
    if !(x1 > x0 && y1 > y0) || resolution.0 == 0 || resolution.1 == 0 {
        return Err(SamplerError::InvalidSpec("degenerate window".into()));
    }
    let win = Window { bbox, w: resolution.0 as f64, h: resolution.1 as f64, rho: false, reach: 0.0 };
    let reach = bbox.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    region_points(spec, win, reach, opts)
}

/// Points of the amoeba's projection with `‖x‖ ≤ reach`, dense enough that
/// every cell of a `resolution` raster of the unit disk under
/// `ρ(x) = x / (1 + ‖x‖)` receives at least one point. Returns `Log` points.
pub fn rho_region_points(
    spec: &VarietySpec,
    resolution: (usize, usize),
    reach: f64,
    opts: &RegionOptions,
) -> Result<Vec<[f64; 2]>, SamplerError> {
    if !(reach > 0.0 && reach.is_finite()) || resolution.0 == 0 || resolution.1 == 0 {
        return Err(SamplerError::InvalidSpec("degenerate window".into()));
    }
    let win = Window { bbox: [-1.0, 1.0, -1.0, 1.0], w: resolution.0 as f64, h: resolution.1 as f64, rho: true, reach };
    let pts = region_points(spec, win, reach, opts)?;
    Ok(pts.into_iter().filter(|p| p[0].hypot(p[1]) <= reach).collect())
}

fn region_points(spec: &VarietySpec, win: Window, reach: f64, opts: &RegionOptions) -> Result<Vec<[f64; 2]>, SamplerError> {
    let n = spec.ambient_dim();
    if opts.projection.0 >= n || opts.projection.1 >= n || opts.projection.0 == opts.projection.1 {
        return Err(SamplerError::InvalidSpec("projection coordinates out of range".into()));
    }
    match &spec.mode {
        Mode::Parametrized { map, params } => {
            let s = 2.0 * reach + 2.0;
            let root = Rect {
                lo: (0..*params).flat_map(|_| [-s, -std::f64::consts::PI]).collect(),
                hi: (0..*params).flat_map(|_| [s, std::f64::consts::PI]).collect(),
                depth: 0,
            };
            // Fixed breadth-first split into independent tasks.
            let mut tasks = vec![root];
            while tasks.len() < 256 {
                tasks = tasks.iter().flat_map(|r| r.split(r.widest())).collect();
            }
            let fill = ParamFill { map, win, opts };
            let parts: Vec<Vec<[f64; 2]>> = run_pool(opts.workers, || {
                tasks
                    .par_iter()
                    .map(|r| {
                        let mut out = Vec::new();
                        fill.fill(r.clone(), &mut out);
                        out
                    })
                    .collect()
            })?;
            Ok(thin(&win, parts))
        }
        Mode::Implicit { equations, .. } if equations.len() == 1 => {
            let solver = HypersurfaceSolver::new(&equations[0]);
            if n == 2 {
                implicit_curve(&solver, win, reach, opts)
            } else {
                implicit_random(&solver, win, reach, opts)
            }
        }
        Mode::Implicit { .. } => {
            Err(SamplerError::InvalidSpec("regions of implicit systems need a parametrization".into()))
        }
    }
}

/// Plane curves: slices along both axes, `cell_fraction` of a cell apart,
/// with the roots of consecutive phases bridged.
fn implicit_curve(
    solver: &HypersurfaceSolver,
    win: Window,
    reach: f64,
    opts: &RegionOptions,
) -> Result<Vec<[f64; 2]>, SamplerError> {
    let phases = if solver.is_polynomial() { opts.phases } else { (opts.phases / 16).max(8) };
    let frac = opts.cell_fraction.max(1e-3);
    let mut slices: Vec<(usize, f64)> = Vec::new();
    for &j in &solver.eligible {
        let (lo, hi, cells) = if j == 1 { (win.bbox[0], win.bbox[1], win.w) } else { (win.bbox[2], win.bbox[3], win.h) };
        let step = (hi - lo) / cells * frac;
        if win.rho {
            // Away from the origin ρ contracts by at least 1 + |v|.
            let mut v = 0.5 * step;
            while v < reach {
                slices.push((j, v));
                slices.push((j, -v));
                v += step * (1.0 + v);
            }
        } else {
            // Slices through cell centers, never on cell boundaries.
            let count = ((hi - lo) / step).ceil() as usize;
            slices.extend((0..count).map(|i| (j, lo + (i as f64 + 0.5) * step)));
        }
    }
    let parts: Vec<Vec<[f64; 2]>> = run_pool(opts.workers, || {
        slices
            .par_iter()
            .map(|&(j, v)| {
                let mut out = Vec::new();
                let mut x = vec![0.0; 2];
                x[1 - j] = v;
                let mut first = Vec::new();
                let mut prev: Vec<[f64; 2]> = Vec::new();
                for m in 0..=phases {
                    let cur: Vec<[f64; 2]> = if m == phases {
                        first.clone()
                    } else {
                        let mut th = vec![0.0; 2];
                        th[1 - j] = std::f64::consts::TAU * m as f64 / phases as f64;
                        solver
                            .solve_slice(j, &x, &th, reach + 1.0)
                            .into_iter()
                            .filter(|s| s.residual <= opts.residual_bound)
                            .map(|s| [s.log[0], s.log[1]])
                            .collect()
                    };
                    for &p in &cur {
                        if m < phases {
                            out.push(p);
                        }
                        bridge(&win, &prev, p, j, frac, &mut out);
                    }
                    if m == 0 {
                        first = cur.clone();
                    }
                    prev = cur;
                }
                out
            })
            .collect()
    })?;
    Ok(thin(&win, parts))
}

/// Longest gap, in cells, filled between roots of consecutive phases.
const MAX_BRIDGE: f64 = 16.0;

/// Fills the segment between `p` and the root of the previous phase it
/// continues. On a slice only coordinate `j` moves, so every value between
/// the two is attained. The partner must be unambiguous: less than half as
/// far as any other previous root.
fn bridge(win: &Window, prev: &[[f64; 2]], p: [f64; 2], j: usize, frac: f64, out: &mut Vec<[f64; 2]>) {
    let mut d: Vec<(f64, usize)> = prev.iter().enumerate().map(|(i, q)| ((q[j] - p[j]).abs(), i)).collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0));
    let Some(&(best, i)) = d.first() else { return };
    if d.get(1).is_some_and(|&(second, _)| best >= 0.5 * second) {
        return;
    }
    let q = prev[i];
    let (a, b) = (win.to_cells(q), win.to_cells(p));
    let gap = (a[0] - b[0]).abs().max((a[1] - b[1]).abs());
    if gap <= frac || gap > MAX_BRIDGE {
        return;
    }
    let steps = (gap / frac).ceil() as usize;
    for k in 1..steps {
        let t = k as f64 / steps as f64;
        out.push([q[0] + t * (p[0] - q[0]), q[1] + t * (p[1] - q[1])]);
    }
}

/// Hypersurfaces in three or more variables: random slices through the window.
fn implicit_random(
    solver: &HypersurfaceSolver,
    win: Window,
    reach: f64,
    opts: &RegionOptions,
) -> Result<Vec<[f64; 2]>, SamplerError> {
    if solver.eligible.is_empty() {
        return Ok(vec![]);
    }
    let n = solver.arity();
    let tasks = 64u64;
    let per_task = (4.0 * win.w * win.h / opts.cell_fraction.max(1e-3)) as usize / tasks as usize + 1;
    let parts: Vec<Vec<[f64; 2]>> = run_pool(opts.workers, || {
        (0..tasks)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(super::task_seed(opts.seed, u64::MAX, t));
                let mut out = Vec::new();
                for _ in 0..per_task {
                    let j = solver.eligible[rng.random_range(0..solver.eligible.len())];
                    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-reach..reach)).collect();
                    let th: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
                    for s in solver.solve_slice(j, &x, &th, reach + 1.0) {
                        if s.residual <= opts.residual_bound {
                            out.push([s.log[opts.projection.0], s.log[opts.projection.1]]);
                        }
                    }
                }
                out
            })
            .collect()
    })?;
    Ok(thin(&win, parts))
}
