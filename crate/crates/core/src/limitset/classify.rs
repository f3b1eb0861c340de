//! Classification of direction components into vertices, arcs and cells.

use std::collections::HashSet;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{angle_between, direction_of, dot, rational_slope_of, Direction, RationalSlope};
use crate::polyhedra::{Cell, CellKind};

use super::cloud::{angular_diameter, cluster_points, mean_direction};
use super::LimitSetError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyParams {
    /// Components of angular diameter at most `2 eps_point` are vertices.
    pub eps_point: f64,
    /// Largest angle from a great circle for a point to count on an arc.
    pub tol_arc: f64,
    /// Slope height bound and tolerance for vertex directions.
    pub vertex_q: i64,
    pub vertex_tol: f64,
    /// Slope height bound and tolerance for arc endpoints.
    pub endpoint_q: i64,
    pub endpoint_tol: f64,
    /// Largest angular gap inside one arc.
    pub arc_gap: f64,
    pub seed: u64,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams {
            eps_point: 2e-2,
            tol_arc: 1e-2,
            vertex_q: 12,
            vertex_tol: 5e-3,
            endpoint_q: 6,
            endpoint_tol: 8e-2,
            arc_gap: 5e-2,
            seed: 0x00c1_a55e,
        }
    }
}

const MIN_POINTS: usize = 10;
const MAX_ARCS: usize = 32;
/// Share of a component that arcs must explain for it to count as 1-dimensional.
const ARC_COVERAGE: f64 = 0.9;

/// Least-squares slope of `log N(ε)` against `log(1/ε)`, with `N(ε)` the
/// number of occupied cubes of side `ε`.
pub fn box_counting_dim(points: &[Vec<f64>], scales: &[f64]) -> Result<f64, LimitSetError> {
    if points.len() < 100 {
        return Err(LimitSetError::TooFewPoints(points.len()));
    }
    let mut s: Vec<f64> = scales.to_vec();
    s.sort_by(f64::total_cmp);
    s.dedup();
    if s.len() < 3 || s[0] <= 0.0 || !s.iter().all(|v| v.is_finite()) {
        return Err(LimitSetError::DegenerateScales);
    }
    let xy: Vec<(f64, f64)> = s
        .iter()
        .map(|&e| {
            let cells: HashSet<Vec<i64>> =
                points.iter().map(|p| p.iter().map(|x| (x / e).floor() as i64).collect()).collect();
            ((1.0 / e).ln(), (cells.len() as f64).ln())
        })
        .collect();
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}

/// Scales for box counting on a set of the given angular diameter.
pub fn default_scales(diameter: f64) -> Vec<f64> {
    let d = diameter.max(1e-3);
    vec![d / 8.0, d / 16.0, d / 32.0, d / 64.0]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Vertex,
    Arcs,
    Higher,
}

/// A great-circle arc fitted to part of a component.
#[derive(Clone, Debug, PartialEq)]
pub struct FittedArc {
    /// Orthonormal basis of the circle's plane.
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
    /// The arc runs over `cos θ e1 + sin θ e2` for `θ` in `[lo, hi]`.
    pub lo: f64,
    pub hi: f64,
    /// Whether the run closes up into a full circle.
    pub closed: bool,
    pub members: Vec<usize>,
}

impl FittedArc {
    pub fn at(&self, th: f64) -> Vec<f64> {
        self.e1.iter().zip(&self.e2).map(|(a, b)| th.cos() * a + th.sin() * b).collect()
    }

    pub fn start(&self) -> Vec<f64> {
        self.at(self.lo)
    }

    pub fn end(&self) -> Vec<f64> {
        self.at(self.hi)
    }

    pub fn samples(&self, count: usize) -> Vec<Vec<f64>> {
        (0..count).map(|i| self.at(self.lo + (self.hi - self.lo) * i as f64 / (count - 1) as f64)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentClass {
    pub kind: ComponentKind,
    pub cells: Vec<Cell>,
    pub arcs: Vec<FittedArc>,
    /// Box-counting estimate, or the kind's dimension when not measured.
    pub dim_estimate: f64,
    pub low_confidence: bool,
    pub points: usize,
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// Angle from `p` to the great circle of the plane `(e1, e2)`.
fn circle_distance(p: &[f64], e1: &[f64], e2: &[f64]) -> f64 {
    let (a, b) = (dot(p, e1), dot(p, e2));
    (a * a + b * b).sqrt().min(1.0).acos()
}

/// Best-fit plane of the points: top two right singular vectors.
fn fit_plane(points: &[&Vec<f64>]) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = points[0].len();
    let m = DMatrix::from_fn(points.len(), n, |i, j| points[i][j]);
    let svd = m.svd(false, true);
    let vt = svd.v_t?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    if order.len() < 2 {
        return None;
    }
    let e1: Vec<f64> = vt.row(order[0]).iter().copied().collect();
    let e2: Vec<f64> = vt.row(order[1]).iter().copied().collect();
    Some((e1, e2))
}

/// The longest run of angles with consecutive gaps at most `gap`, as
/// `(lo, hi, members, closed)` with `hi - lo` possibly exceeding `π`.
fn longest_run(mut th: Vec<(f64, usize)>, gap: f64) -> (f64, f64, Vec<usize>, bool) {
    th.sort_by(|a, b| a.0.total_cmp(&b.0));
    let m = th.len();
    // The largest gap on the circle, including the wrap-around one.
    let mut cut = m - 1;
    let mut widest = th[0].0 + std::f64::consts::TAU - th[m - 1].0;
    for i in 0..m - 1 {
        let g = th[i + 1].0 - th[i].0;
        if g > widest {
            widest = g;
            cut = i;
        }
    }
    if widest <= gap {
        let members = th.iter().map(|t| t.1).collect();
        return (-std::f64::consts::PI, std::f64::consts::PI, members, true);
    }
    // Unroll the circle starting just after the widest gap.
    let mut seq: Vec<(f64, usize)> = Vec::with_capacity(m);
    for k in 0..m {
        let (t, i) = th[(cut + 1 + k) % m];
        let base = if cut + 1 + k >= m { std::f64::consts::TAU } else { 0.0 };
        seq.push((t + base, i));
    }
    let mut best = (0usize, 0usize);
    let mut start = 0;
    for k in 1..=m {
        if k == m || seq[k].0 - seq[k - 1].0 > gap {
            if k - start > best.1 - best.0 {
                best = (start, k);
            }
            start = k;
        }
    }
    let run = &seq[best.0..best.1];
    (run[0].0, run[run.len() - 1].0, run.iter().map(|t| t.1).collect(), false)
}

/// Greedy extraction of great-circle arcs; returns the arcs and the
/// indices left unexplained.
pub fn extract_arcs(points: &[Vec<f64>], p: &ClassifyParams) -> (Vec<FittedArc>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut remaining: Vec<usize> = (0..points.len()).collect();
    let mut arcs = Vec::new();
    while remaining.len() >= MIN_POINTS && arcs.len() < MAX_ARCS {
        let mut best: Option<(Vec<f64>, Vec<f64>, usize)> = None;
        for _ in 0..200 {
            let a = &points[remaining[rng.random_range(0..remaining.len())]];
            let b = &points[remaining[rng.random_range(0..remaining.len())]];
            let ang = angle_between(a, b);
            if ang < 2.0 * p.eps_point || ang > std::f64::consts::PI - 0.05 {
                continue;
            }
            let c = dot(a, b);
            let e2 = unit(&b.iter().zip(a.iter()).map(|(x, y)| x - c * y).collect::<Vec<_>>());
            let count = remaining.iter().filter(|&&i| circle_distance(&points[i], a, &e2) <= p.tol_arc).count();
            if best.as_ref().is_none_or(|b| count > b.2) {
                best = Some((a.clone(), e2, count));
            }
        }
        let Some((mut e1, mut e2, _)) = best else { break };
        // Refit the plane to the inliers, twice.
        for _ in 0..2 {
            let inl: Vec<&Vec<f64>> =
                remaining.iter().map(|&i| &points[i]).filter(|q| circle_distance(q, &e1, &e2) <= p.tol_arc).collect();
            if inl.len() < 3 {
                break;
            }
            if let Some((a, b)) = fit_plane(&inl) {
                e1 = a;
                e2 = b;
            }
        }
        let inliers: Vec<(f64, usize)> = remaining
            .iter()
            .filter(|&&i| circle_distance(&points[i], &e1, &e2) <= p.tol_arc)
            .map(|&i| (dot(&points[i], &e2).atan2(dot(&points[i], &e1)), i))
            .collect();
        if inliers.len() < MIN_POINTS {
            break;
        }
        let (lo, hi, members, closed) = longest_run(inliers, p.arc_gap);
        if members.len() < MIN_POINTS || hi - lo <= 2.0 * p.eps_point {
            break;
        }
        let taken: HashSet<usize> = members.iter().copied().collect();
        remaining.retain(|i| !taken.contains(i));
        arcs.push(FittedArc { e1, e2, lo, hi, closed, members });
    }
    (arcs, remaining)
}

fn slope_within(d: &[f64], q: i64, tol: f64) -> Option<RationalSlope> {
    rational_slope_of(&direction_of(d).ok()?, q, tol)
}

/// Cell for a fitted arc, with rational endpoint slopes when both snap.
pub fn arc_cell(a: &FittedArc, p: &ClassifyParams) -> Cell {
    if a.closed {
        return Cell { kind: CellKind::Circle, dim: 1, slopes: vec![], samples: a.samples(64), cone: None };
    }
    let count = (((a.hi - a.lo) / 0.05).ceil() as usize).clamp(9, 129);
    let ends = [a.start(), a.end()];
    let slopes: Vec<RationalSlope> = ends.iter().filter_map(|e| slope_within(e, p.endpoint_q, p.endpoint_tol)).collect();
    let slopes = if slopes.len() == 2 { slopes } else { vec![] };
    Cell { kind: CellKind::Arc, dim: 1, slopes, samples: a.samples(count), cone: None }
}

/// Vertex cell at `d`, carrying its slope if one lies within tolerance.
pub fn vertex_cell(d: Vec<f64>, p: &ClassifyParams) -> Cell {
    let s = slope_within(&d, p.vertex_q, p.vertex_tol);
    Cell::vertex_at(d, s)
}

/// Meeting points of arcs whose endpoints cluster together, found as the
/// direction closest to all of their great circles.
fn junctions(arcs: &mut [FittedArc], p: &ClassifyParams) -> Vec<Vec<f64>> {
    let mut ends: Vec<Vec<f64>> = Vec::new();
    let mut owner: Vec<(usize, bool)> = Vec::new();
    for (i, a) in arcs.iter().enumerate() {
        if a.closed {
            continue;
        }
        ends.push(a.start());
        owner.push((i, false));
        ends.push(a.end());
        owner.push((i, true));
    }
    let mut out = Vec::new();
    for group in cluster_points(&ends, 3.0 * p.eps_point) {
        let distinct: HashSet<usize> = group.iter().map(|&g| owner[g].0).collect();
        if distinct.len() < 2 {
            continue;
        }
        let members: Vec<Vec<f64>> = group.iter().map(|&g| ends[g].clone()).collect();
        let mean = mean_direction(&members);
        let n = mean.len();
        let mut sum = DMatrix::<f64>::zeros(n, n);
        for &i in &distinct {
            let (e1, e2) = (&arcs[i].e1, &arcs[i].e2);
            for r in 0..n {
                for c in 0..n {
                    sum[(r, c)] += e1[r] * e1[c] + e2[r] * e2[c];
                }
            }
        }
        let eig = SymmetricEigen::new(sum);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let gap = eig.eigenvalues[order[0]] - eig.eigenvalues[order.get(1).copied().unwrap_or(order[0])];
        let mut j: Vec<f64> = eig.eigenvectors.column(order[0]).iter().copied().collect();
        if dot(&j, &mean) < 0.0 {
            j.iter_mut().for_each(|x| *x = -*x);
        }
        if !(gap > 0.1) || angle_between(&j, &mean) > 3.0 * p.eps_point {
            j = mean;
        }
        // Move the clustered endpoints onto the junction.
        for &g in &group {
            let (i, is_end) = owner[g];
            let a = &mut arcs[i];
            let th = dot(&j, &a.e2).atan2(dot(&j, &a.e1));
            let mid = 0.5 * (a.lo + a.hi);
            let th = mid + (th - mid + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
            if is_end {
                a.hi = th.max(a.lo);
            } else {
                a.lo = th.min(a.hi);
            }
        }
        out.push(j);
    }
    out
}

/// Classifies one component of a direction cloud.
pub fn classify_component(points: &[Vec<f64>], p: &ClassifyParams) -> ComponentClass {
    let n = points.len();
    if n < MIN_POINTS {
        let c = vertex_cell(mean_direction(points), p);
        return ComponentClass {
            kind: ComponentKind::Vertex,
            cells: vec![c],
            arcs: vec![],
            dim_estimate: 0.0,
            low_confidence: true,
            points: n,
        };
    }
    let diameter = angular_diameter(points);
    if diameter <= 2.0 * p.eps_point {
        return ComponentClass {
            kind: ComponentKind::Vertex,
            cells: vec![vertex_cell(mean_direction(points), p)],
            arcs: vec![],
            dim_estimate: 0.0,
            low_confidence: false,
            points: n,
        };
    }
    let (mut arcs, left) = extract_arcs(points, p);
    let covered = 1.0 - left.len() as f64 / n as f64;
    if !arcs.is_empty() && covered >= ARC_COVERAGE && arcs.len() < MAX_ARCS {
        let joints = junctions(&mut arcs, p);
        let mut cells: Vec<Cell> = arcs.iter().map(|a| arc_cell(a, p)).collect();
        cells.extend(joints.into_iter().map(|j| vertex_cell(j, p)));
        return ComponentClass {
            kind: ComponentKind::Arcs,
            cells,
            arcs,
            dim_estimate: 1.0,
            low_confidence: false,
            points: n,
        };
    }
    let (dim_estimate, low_confidence) = match box_counting_dim(points, &default_scales(diameter)) {
        Ok(d) => (d, false),
        Err(_) => (f64::NAN, true),
    };
    let step = (n / 200).max(1);
    let samples: Vec<Vec<f64>> = points.iter().step_by(step).cloned().collect();
    let dim = if dim_estimate.is_finite() { dim_estimate.round().max(1.0) as usize } else { 2 };
    let cell = Cell { kind: CellKind::Higher, dim, slopes: vec![], samples, cone: None };
    ComponentClass { kind: ComponentKind::Higher, cells: vec![cell], arcs: vec![], dim_estimate, low_confidence, points: n }
}

/// Unit vector of `v`, for constructing test inputs.
pub fn normalized(v: &[f64]) -> Vec<f64> {
    direction_of(v).map(Direction::into_vec).unwrap_or_else(|_| v.to_vec())
}
