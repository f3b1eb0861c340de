//! Balance of spherical complexes and the halfspace bounds on exponents
//! that a set of limit directions imposes.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{FromPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::complex::SphericalComplex;
use super::linalg::nullspace;
use super::polytope::{halfspace_intersection, int_to_q, RationalConvexPolyhedron, RationalHalfspace};
use super::PolyhedraError;
use crate::expr::{Exponent, SeriesTruncation};
use crate::geometry::{angle_between, RationalSlope};
use crate::scalar::Rational;

/// Number of random normals tried on top of the exhaustive candidates.
pub const RANDOM_NORMALS: usize = 10_000;

const MARGIN_TOL: f64 = 1e-9;
const MAX_EXHAUSTIVE_POINTS: usize = 48;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalanceReport {
    /// The complex meets both open hemispheres of every hyperplane of its span.
    pub balanced: bool,
    pub span_dim: usize,
    /// Smallest over tested normals of `min(max u.d, -min u.d)`.
    pub min_margin: f64,
    pub normals_tested: usize,
}

/// Orthonormal basis of the span of `points` (as rows), via SVD.
fn span_basis(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = points[0].len();
    let m = DMatrix::from_fn(points.len(), n, |i, j| points[i][j]);
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let smax = svd.singular_values.max();
    (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 1e-9 * smax.max(1e-300))
        .map(|i| vt.row(i).iter().copied().collect())
        .collect()
}

/// Unit normal (within `R^s`) of the hyperplane through the given points,
/// or `None` when they are dependent.
fn hyperplane_normal(pts: &[&Vec<f64>], s: usize) -> Option<Vec<f64>> {
    if pts.is_empty() {
        return (s == 1).then(|| vec![1.0]);
    }
    let m = DMatrix::<f64>::from_fn(s, s, |i, j| if i < pts.len() { pts[i][j] } else { 0.0 });
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let largest = svd.singular_values[order[s - 1]];
    if svd.singular_values[order[1]] < 1e-9 * largest {
        return None;
    }
    Some(vt.row(order[0]).iter().copied().collect())
}

/// Visits the `k`-subsets of `0..m` in lexicographic order, at most `limit`.
fn combinations(m: usize, k: usize, limit: usize, visit: &mut impl FnMut(&[usize])) {
    if k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    for _ in 0..limit {
        visit(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] < i + m - k) else { return };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Tests whether 0 lies in the interior of the convex hull of the complex
/// within its linear span.
pub fn balance_check(s: &SphericalComplex) -> BalanceReport {
    balance_of_points(&s.all_samples().cloned().collect::<Vec<_>>())
}

pub fn balance_of_points(points: &[Vec<f64>]) -> BalanceReport {
    if points.is_empty() {
        return BalanceReport { balanced: false, span_dim: 0, min_margin: 0.0, normals_tested: 0 };
    }
    let basis = span_basis(points);
    let s = basis.len();
    let coords: Vec<Vec<f64>> =
        points.iter().map(|p| basis.iter().map(|b| b.iter().zip(p).map(|(x, y)| x * y).sum()).collect()).collect();

    // Distinct representatives for the exhaustive part.
    let mut reps: Vec<&Vec<f64>> = Vec::new();
    for c in &coords {
        if reps.iter().all(|r| angle_between(r, c) > 1e-9) {
            reps.push(c);
        }
    }
    if reps.len() > MAX_EXHAUSTIVE_POINTS {
        let step = reps.len() as f64 / MAX_EXHAUSTIVE_POINTS as f64;
        reps = (0..MAX_EXHAUSTIVE_POINTS).map(|i| reps[(i as f64 * step) as usize]).collect();
    }

    let mut normals: Vec<Vec<f64>> = Vec::new();
    combinations(reps.len(), s.saturating_sub(1), 200_000, &mut |idx| {
        let pts: Vec<&Vec<f64>> = idx.iter().map(|&i| reps[i]).collect();
        if let Some(u) = hyperplane_normal(&pts, s) {
            normals.push(u);
        }
    });
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut drawn = 0;
    while drawn < RANDOM_NORMALS && s > 0 {
        let u: Vec<f64> = (0..s).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            normals.push(u.iter().map(|x| x / n).collect());
            drawn += 1;
        }
    }
    let mut min_margin = f64::INFINITY;
    for u in &normals {
        let (lo, hi) = coords.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
            let v: f64 = u.iter().zip(c).map(|(a, b)| a * b).sum();
            (lo.min(v), hi.max(v))
        });
        min_margin = min_margin.min(hi.min(-lo));
    }
    BalanceReport { balanced: min_margin > MARGIN_TOL, span_dim: s, min_margin, normals_tested: normals.len() }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonBound {
    pub polyhedron: RationalConvexPolyhedron,
    /// Compact in the ambient space.
    pub compact: bool,
    /// Compact after restricting to the linear span of the slopes.
    pub compact_in_span: bool,
    pub span_dim: usize,
    /// The polyhedron intersected with the span of the slopes.
    pub span_polyhedron: RationalConvexPolyhedron,
}

/// Intersection of the halfspaces `<u, α> <= -b` over the given slopes.
pub fn newton_bound_from_vertices(verts: &[(RationalSlope, f64)]) -> Result<NewtonBound, PolyhedraError> {
    let n = verts.first().ok_or(PolyhedraError::EmptySupport)?.0.dim();
    let mut hs = Vec::with_capacity(verts.len());
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for (u, b) in verts {
        let normal: Vec<Rational> = u.as_slice().iter().map(|&x| Rational::from_integer(x.into())).collect();
        let bound = -Rational::from_f64(*b).ok_or(PolyhedraError::NonFiniteBound)?;
        rows.push(normal.clone());
        hs.push(RationalHalfspace::new(normal, bound)?);
    }
    let polyhedron = halfspace_intersection(n, &hs)?;
    let perp = nullspace(n, &rows);
    let mut span_hs = hs.clone();
    for w in &perp {
        let wq = int_to_q(w);
        let neg: Vec<Rational> = wq.iter().map(|x| -x).collect();
        span_hs.push(RationalHalfspace::new(wq, Rational::zero())?);
        span_hs.push(RationalHalfspace::new(neg, Rational::zero())?);
    }
    let span_polyhedron = halfspace_intersection(n, &span_hs)?;
    Ok(NewtonBound {
        compact: polyhedron.is_compact(),
        compact_in_span: span_polyhedron.is_compact(),
        span_dim: n - perp.len(),
        polyhedron,
        span_polyhedron,
    })
}

/// Exponents of the truncation that violate `b + <u, α> <= 0`.
pub fn support_halfspace_violations(s: &SeriesTruncation, u: &RationalSlope, b: f64) -> Vec<Exponent> {
    s.poly
        .terms()
        .map(|(e, _)| e)
        .filter(|e| {
            let ip: BigInt = e.iter().zip(u.as_slice()).map(|(&a, &w)| BigInt::from(a) * BigInt::from(w)).sum();
            match Rational::from_f64(b) {
                Some(bq) => bq + Rational::from_integer(ip) > Rational::zero(),
                None => true,
            }
        })
        .cloned()
        .collect()
}
