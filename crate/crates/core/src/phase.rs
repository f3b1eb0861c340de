//! Phase limit sets: argument clouds on the torus, geodesic circles with
//! rational slopes, and box-counting dimension of the closure.

use std::collections::HashSet;
use std::f64::consts::{PI, TAU};
use std::fmt::Write;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{angle_between, arg_angles, direction_of, norm2, RationalSlope};
use crate::sampler::ShellSample;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PhaseError {
    #[error("no sample points with log-norm at least the cutoff")]
    EmptyAfterCutoff,
    #[error("box counting needs at least 3 distinct positive scales")]
    DegenerateScales,
    #[error("closure dimension needs at least {MIN_POINTS} points, got {0}")]
    TooFewPoints(usize),
}

/// Smallest cloud accepted by [`closure_dimension`].
pub const MIN_POINTS: usize = 1000;
/// Share of the cloud a circle must capture to be reported.
pub const CIRCLE_COVERAGE: f64 = 0.05;
pub const CIRCLE_TOL: f64 = 5e-2;

#[derive(Clone, Debug, PartialEq, Default)]
pub struct PhaseCloud {
    /// Angles in `[0, 2π)`.
    pub angles: Vec<Vec<f64>>,
    /// Radius of the shell each point came from.
    pub radii: Vec<f64>,
}

impl PhaseCloud {
    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// One line per point: `R θ1 ... θn`.
    pub fn to_lines(&self) -> String {
        let mut s = String::new();
        for (a, r) in self.angles.iter().zip(&self.radii) {
            write!(s, "{r:?}").unwrap();
            for t in a {
                write!(s, " {t:?}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    /// Adds `shift` to every point, modulo `2π`.
    pub fn translated(&self, shift: &[f64]) -> PhaseCloud {
        PhaseCloud {
            angles: self.angles.iter().map(|a| a.iter().zip(shift).map(|(x, s)| wrap(x + s)).collect()).collect(),
            radii: self.radii.clone(),
        }
    }
}

fn wrap(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU { 0.0 } else { w }
}

/// Signed difference of two angles, in `[-π, π)`.
fn wrapped_diff(a: f64) -> f64 {
    (a + PI).rem_euclid(TAU) - PI
}

/// Arguments of every sample point with `‖Log z‖ ≥ cutoff`.
pub fn phase_cloud(samples: &[ShellSample], cutoff: f64) -> Result<PhaseCloud, PhaseError> {
    phase_cloud_filtered(samples, |l| norm2(l) >= cutoff)
}

/// Arguments of the points with `‖Log z‖ ≥ cutoff` whose log direction lies
/// within `angle` of `direction`: the phases along one tentacle.
pub fn phase_cloud_near(
    samples: &[ShellSample],
    cutoff: f64,
    direction: &[f64],
    angle: f64,
) -> Result<PhaseCloud, PhaseError> {
    let d = direction_of(direction).map(|d| d.into_vec()).unwrap_or_else(|_| direction.to_vec());
    phase_cloud_filtered(samples, |l| {
        norm2(l) >= cutoff && direction_of(l).is_ok_and(|u| angle_between(u.as_slice(), &d) <= angle)
    })
}

fn phase_cloud_filtered(samples: &[ShellSample], keep: impl Fn(&[f64]) -> bool) -> Result<PhaseCloud, PhaseError> {
    let mut cloud = PhaseCloud::default();
    for s in samples {
        for p in &s.points {
            if keep(&p.log()) {
                cloud.angles.push(arg_angles(&p.z));
                cloud.radii.push(s.radius);
            }
        }
    }
    if cloud.is_empty() {
        return Err(PhaseError::EmptyAfterCutoff);
    }
    Ok(cloud)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicCircle {
    pub slope: RationalSlope,
    /// The point of the circle used as origin: the first coordinate with the
    /// largest slope entry is zero, and the rest are in `[0, 2π)`.
    pub offset: Vec<f64>,
    pub points: usize,
    /// Share of the whole cloud on this circle.
    pub coverage: f64,
}

/// Primitive integer vectors with entries in `[-q, q]`, one per pair `±s`.
pub fn candidate_slopes(n: usize, q: i64) -> Vec<RationalSlope> {
    let mut out = Vec::new();
    let mut v = vec![-q; n];
    loop {
        if let Some(first) = v.iter().find(|&&x| x != 0) {
            if *first > 0 {
                if let Some(s) = RationalSlope::primitive_of(&v) {
                    if s.as_slice() == v.as_slice() {
                        out.push(s);
                    }
                }
            }
        }
        let Some(i) = (0..n).rev().find(|&i| v[i] < q) else { break };
        v[i] += 1;
        v[i + 1..].iter_mut().for_each(|x| *x = -q);
    }
    out.sort_by_key(|s| (s.max_abs(), s.as_slice().to_vec()));
    out
}

/// Coset `θ0 + t s` of a one-parameter subgroup.
struct Coset<'a> {
    s: &'a [i64],
    base: Vec<f64>,
    /// Coordinate with the largest `|s_j|`, used to solve for `t`.
    j: usize,
}

impl<'a> Coset<'a> {
    fn new(s: &'a [i64], base: Vec<f64>) -> Self {
        let j = (0..s.len()).max_by_key(|&i| (s[i].abs(), std::cmp::Reverse(i))).unwrap_or(0);
        Coset { s, base, j }
    }

    /// Parameter of the closest coset point, matched on coordinate `j`, and
    /// the max-metric distance to it.
    fn nearest(&self, th: &[f64]) -> (f64, f64) {
        let sj = self.s[self.j] as f64;
        let m = self.s[self.j].unsigned_abs();
        let d = th[self.j] - self.base[self.j];
        let mut best = (0.0, f64::INFINITY);
        for k in 0..m {
            let t = (d + TAU * k as f64) / sj;
            let dist = th
                .iter()
                .zip(&self.base)
                .zip(self.s)
                .map(|((x, b), &si)| wrapped_diff(x - b - t * si as f64).abs())
                .fold(0.0, f64::max);
            if dist < best.1 {
                best = (t, dist);
            }
        }
        best
    }

    /// Same coset with base point on the hyperplane `θ_j = 0`, chosen as the
    /// smallest of the `|s_j|` candidates.
    fn canonical_offset(&self) -> Vec<f64> {
        let sj = self.s[self.j] as f64;
        let m = self.s[self.j].unsigned_abs();
        let mut best: Option<Vec<f64>> = None;
        for k in 0..m {
            let t = (-self.base[self.j] + TAU * k as f64) / sj;
            let mut p: Vec<f64> = self.base.iter().zip(self.s).map(|(b, &si)| wrap(b + t * si as f64)).collect();
            p[self.j] = 0.0;
            for x in p.iter_mut() {
                if TAU - *x < 1e-12 {
                    *x = 0.0;
                }
            }
            if best.as_ref().is_none_or(|b| p.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()) == Some(std::cmp::Ordering::Less)) {
                best = Some(p);
            }
        }
        best.unwrap_or_else(|| self.base.clone())
    }
}

const ANCHORS: usize = 128;
const MAX_CIRCLES: usize = 64;

/// Greedily extracts geodesic circles with primitive slopes of height at
/// most `q` that each hold at least 5% of the cloud within `tol`.
///
/// For every candidate slope, cosets through up to 128 evenly spaced cloud
/// points are scored by how many points lie within `tol`; the best coset
/// over all slopes is refined by the mean residual of its points, those
/// points are removed, and the search repeats.
pub fn detect_geodesic_circles(cloud: &PhaseCloud, q: i64, tol: f64) -> Vec<GeodesicCircle> {
    let Some(n) = cloud.angles.first().map(Vec::len) else { return vec![] };
    let total = cloud.len();
    let need = ((CIRCLE_COVERAGE * total as f64).ceil() as usize).max(1);
    let slopes = candidate_slopes(n, q);
    let mut alive: Vec<usize> = (0..total).collect();
    let mut out = Vec::new();
    while out.len() < MAX_CIRCLES && alive.len() >= need {
        let step = (alive.len() / ANCHORS).max(1);
        let mut best: Option<(usize, usize, usize)> = None;
        for (si, s) in slopes.iter().enumerate() {
            for a in (0..alive.len()).step_by(step) {
                let c = Coset::new(s.as_slice(), cloud.angles[alive[a]].clone());
                let count = alive.iter().filter(|&&i| c.nearest(&cloud.angles[i]).1 <= tol).count();
                if best.is_none_or(|(_, _, b)| count > b) {
                    best = Some((si, a, count));
                }
            }
        }
        let Some((si, a, count)) = best else { break };
        if count < need {
            break;
        }
        let s = slopes[si].as_slice();
        let mut c = Coset::new(s, cloud.angles[alive[a]].clone());
        // Two passes of refinement by the circular mean of residuals.
        for _ in 0..2 {
            let mut sum = vec![(0.0, 0.0); n];
            for &i in &alive {
                let th = &cloud.angles[i];
                let (t, d) = c.nearest(th);
                if d <= tol {
                    for (k, acc) in sum.iter_mut().enumerate() {
                        let r = wrapped_diff(th[k] - c.base[k] - t * s[k] as f64);
                        acc.0 += r.cos();
                        acc.1 += r.sin();
                    }
                }
            }
            let base: Vec<f64> = c.base.iter().zip(&sum).map(|(b, (x, y))| wrap(b + y.atan2(*x))).collect();
            c = Coset::new(s, base);
        }
        let (on, off): (Vec<usize>, Vec<usize>) = alive.iter().partition(|&&i| c.nearest(&cloud.angles[i]).1 <= tol);
        if on.len() < need {
            break;
        }
        out.push(GeodesicCircle {
            slope: slopes[si].clone(),
            offset: c.canonical_offset(),
            points: on.len(),
            coverage: on.len() as f64 / total as f64,
        });
        alive = off;
    }
    out
}

/// Default box sizes for the torus, `2π/8` down to `2π/64`.
pub fn default_torus_scales() -> Vec<f64> {
    vec![TAU / 8.0, TAU / 16.0, TAU / 32.0, TAU / 64.0]
}

/// Box-counting dimension on the flat torus with the max metric: the
/// least-squares slope of `log N(ε)` against `log(1/ε)`, with `N(ε)` the
/// number of occupied boxes of side `ε`.
pub fn closure_dimension(cloud: &PhaseCloud, scales: &[f64]) -> Result<f64, PhaseError> {
    if cloud.len() < MIN_POINTS {
        return Err(PhaseError::TooFewPoints(cloud.len()));
    }
    let mut s: Vec<f64> = scales.to_vec();
    s.sort_by(f64::total_cmp);
    s.dedup();
    if s.len() < 3 || s[0] <= 0.0 || !s.iter().all(|v| v.is_finite()) {
        return Err(PhaseError::DegenerateScales);
    }
    let xy: Vec<(f64, f64)> = s
        .iter()
        .map(|&e| {
            // Boxes wrap around, so sides are adjusted to divide 2π evenly.
            let m = (TAU / e).round().max(1.0);
            let side = TAU / m;
            let boxes: HashSet<Vec<i64>> = cloud
                .angles
                .iter()
                .map(|a| a.iter().map(|x| ((x / side).floor() as i64).rem_euclid(m as i64)).collect())
                .collect();
            ((1.0 / side).ln(), (boxes.len() as f64).ln())
        })
        .collect();
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TentacleReport {
    pub direction: Vec<f64>,
    pub points: usize,
    pub closure_dimension: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseReport {
    pub points: usize,
    pub cutoff: f64,
    pub closure_dimension: Option<f64>,
    pub circles: Vec<GeodesicCircle>,
    pub tentacles: Vec<TentacleReport>,
}

impl PhaseReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("phase report serializes")
    }
}

/// Phase cloud summary: closure dimension of the whole cloud, detected
/// circles, and closure dimension of the cloud near each given direction.
pub fn phase_report(
    samples: &[ShellSample],
    cutoff: f64,
    q: i64,
    tentacles: &[Vec<f64>],
    tentacle_angle: f64,
) -> Result<PhaseReport, PhaseError> {
    let cloud = phase_cloud(samples, cutoff)?;
    let scales = default_torus_scales();
    let tentacles = tentacles
        .iter()
        .map(|d| {
            let c = phase_cloud_near(samples, cutoff, d, tentacle_angle).unwrap_or_default();
            TentacleReport { direction: d.clone(), points: c.len(), closure_dimension: closure_dimension(&c, &scales).ok() }
        })
        .collect();
    Ok(PhaseReport {
        points: cloud.len(),
        cutoff,
        closure_dimension: closure_dimension(&cloud, &scales).ok(),
        circles: detect_geodesic_circles(&cloud, q, CIRCLE_TOL),
        tentacles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::sampler::{sample_schedule, SamplerConfig, VarietySpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(angles: Vec<Vec<f64>>) -> PhaseCloud {
        let radii = vec![1.0; angles.len()];
        PhaseCloud { angles, radii }
    }

    #[test]
    fn slopes_up_to_height_one() {
        let s: Vec<Vec<i64>> = candidate_slopes(2, 1).iter().map(|s| s.as_slice().to_vec()).collect();
        assert_eq!(s, vec![vec![0, 1], vec![1, -1], vec![1, 0], vec![1, 1]]);
        assert_eq!(candidate_slopes(3, 1).len(), 13);
    }

    #[test]
    fn antidiagonal_circle() {
        let c = cloud((0..2000).map(|i| {
            let t = TAU * i as f64 / 2000.0;
            vec![wrap(t), wrap(-t)]
        }).collect());
        let found = detect_geodesic_circles(&c, 2, CIRCLE_TOL);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].slope.as_slice(), &[1, -1]);
        assert!(found[0].offset.iter().all(|x| x.abs() < 1e-9), "{:?}", found[0].offset);
        assert_eq!(found[0].points, 2000);
    }

    #[test]
    fn uniform_noise_has_no_circles() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = cloud((0..5000).map(|_| vec![rng.random_range(0.0..TAU), rng.random_range(0.0..TAU)]).collect());
        assert!(detect_geodesic_circles(&c, 2, CIRCLE_TOL).is_empty());
        let d = closure_dimension(&c, &default_torus_scales()).unwrap();
        assert!((d - 2.0).abs() < 0.25, "{d}");
    }

    #[test]
    fn translation_moves_offsets_only() {
        let c = cloud((0..3000).map(|i| {
            let t = TAU * i as f64 / 1500.0;
            if i % 2 == 0 { vec![wrap(t), 1.0] } else { vec![wrap(t), wrap(2.0 + t)] }
        }).collect());
        let shift = [0.3, 2.5];
        let a = detect_geodesic_circles(&c, 1, CIRCLE_TOL);
        let b = detect_geodesic_circles(&c.translated(&shift), 1, CIRCLE_TOL);
        let slopes = |v: &[GeodesicCircle]| {
            let mut s: Vec<Vec<i64>> = v.iter().map(|c| c.slope.as_slice().to_vec()).collect();
            s.sort();
            s
        };
        assert_eq!(slopes(&a), vec![vec![1, 0], vec![1, 1]]);
        assert_eq!(slopes(&a), slopes(&b));
        let flat = a.iter().find(|c| c.slope.as_slice() == [1, 0]).unwrap();
        let moved = b.iter().find(|c| c.slope.as_slice() == [1, 0]).unwrap();
        assert!(wrapped_diff(moved.offset[1] - flat.offset[1] - 2.5).abs() < 1e-6);
    }

    #[test]
    fn circle_is_one_dimensional() {
        let c = cloud((0..5000).map(|i| vec![TAU * i as f64 / 5000.0, 0.5]).collect());
        let d = closure_dimension(&c, &default_torus_scales()).unwrap();
        assert!((d - 1.0).abs() < 0.2, "{d}");
        assert_eq!(closure_dimension(&c, &[0.1, 0.1, 0.2]), Err(PhaseError::DegenerateScales));
    }

    #[test]
    fn hyperbola_phases_are_antidiagonal() {
        let spec = VarietySpec::hypersurface(parse_expression("z1*z2-1", 2).unwrap());
        let s = sample_schedule(&spec, &[20.0, 40.0], 500, 3, &SamplerConfig::default()).unwrap();
        let c = phase_cloud(&s, 0.0).unwrap();
        for a in &c.angles {
            assert!(wrapped_diff(a[0] + a[1]).abs() < 1e-9);
        }
        let found = detect_geodesic_circles(&c, 2, CIRCLE_TOL);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].slope.as_slice(), &[1, -1]);
        assert_eq!(phase_cloud(&s, 1e9), Err(PhaseError::EmptyAfterCutoff));
    }
}
