//! The maps Log, Arg and ρ, sphere geometry, and rational slope recognition.

use std::fmt;

use num_complex::Complex;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("cannot take the direction of the zero vector")]
    ZeroVector,
    #[error("point lies outside the open unit ball")]
    OutsideBall,
}

/// Coordinatewise `log |z_j|`.
pub fn log_map<T: Real>(z: &[Complex<T>]) -> Vec<T> {
    z.iter().map(|c| c.norm().ln()).collect()
}

/// Coordinatewise unit phase `z_j / |z_j|`.
pub fn arg_map<T: Real>(z: &[Complex<T>]) -> Vec<Complex<T>> {
    z.iter().map(|c| c / c.norm()).collect()
}

/// Coordinatewise argument as an angle in `[0, 2π)`.
pub fn arg_angles<T: Real>(z: &[Complex<T>]) -> Vec<T> {
    z.iter().map(|c| wrap_angle(c.arg())).collect()
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle<T: Real>(a: T) -> T {
    let tau = T::TAU();
    let w = a % tau;
    let w = if w < T::zero() { w + tau } else { w };
    if w >= tau {
        T::zero()
    } else {
        w
    }
}

pub fn norm2<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |acc, &v| acc.hypot(v))
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// `ρ(x) = x / (1 + ‖x‖₂)`.
pub fn rho<T: Real>(x: &[T]) -> Vec<T> {
    let s = T::one() + norm2(x);
    x.iter().map(|&v| v / s).collect()
}

/// Inverse of [`rho`] on the open unit ball.
pub fn rho_inverse<T: Real>(y: &[T]) -> Result<Vec<T>, GeometryError> {
    let r = norm2(y);
    if r >= T::one() {
        return Err(GeometryError::OutsideBall);
    }
    let s = T::one() / (T::one() - r);
    Ok(y.iter().map(|&v| v * s).collect())
}

/// A unit vector on `S^{n-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Direction<T>(Vec<T>);

impl<T: Real> Direction<T> {
    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn neg(&self) -> Self {
        Direction(self.0.iter().map(|&v| -v).collect())
    }
}

impl<T> std::ops::Index<usize> for Direction<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

pub fn direction_of<T: Real>(x: &[T]) -> Result<Direction<T>, GeometryError> {
    let r = norm2(x);
    if !(r > T::zero()) || !r.is_finite() {
        return Err(GeometryError::ZeroVector);
    }
    Ok(Direction(x.iter().map(|&v| v / r).collect()))
}

/// Angle between two unit vectors, computed as `2 atan2(|a-b|, |a+b|)`,
/// which stays accurate for nearly equal and nearly antipodal inputs.
pub fn angular_distance<T: Real>(a: &Direction<T>, b: &Direction<T>) -> T {
    angle_between(a.as_slice(), b.as_slice())
}

/// Angle between two unit vectors given as slices.
pub fn angle_between<T: Real>(a: &[T], b: &[T]) -> T {
    let mut d = T::zero();
    let mut s = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        d = d.hypot(x - y);
        s = s.hypot(x + y);
    }
    T::lit(2.0) * d.atan2(s)
}

/// Angular distance from a unit vector `d` to the shorter great-circle arc
/// between unit vectors `a` and `b`.
pub fn geodesic_segment_distance(d: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let da = angle_between(d, a);
    let db = angle_between(d, b);
    let ab = angle_between(a, b);
    if ab < 1e-12 || ab > std::f64::consts::PI - 1e-9 {
        return da.min(db);
    }
    // Orthonormal frame (a, e) of the plane of the arc.
    let c = dot(a, b);
    let mut e: Vec<f64> = b.iter().zip(a).map(|(y, x)| y - c * x).collect();
    let en = norm2(&e);
    e.iter_mut().for_each(|v| *v /= en);
    let pa = dot(d, a);
    let pe = dot(d, &e);
    let theta = pe.atan2(pa);
    if (0.0..=ab).contains(&theta) {
        let inplane = pa.hypot(pe);
        inplane.clamp(-1.0, 1.0).acos()
    } else {
        da.min(db)
    }
}

/// A nonzero primitive integer vector.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct RationalSlope(Vec<i64>);

impl RationalSlope {
    /// Returns `None` unless `v` is nonzero with coprime entries.
    pub fn new(v: Vec<i64>) -> Option<Self> {
        let g = v.iter().fold(0i64, |g, &x| g.gcd(&x));
        (g == 1).then_some(RationalSlope(v))
    }

    /// Divides out the content of a nonzero integer vector.
    pub fn primitive_of(v: &[i64]) -> Option<Self> {
        let g = v.iter().fold(0i64, |g, &x| g.gcd(&x));
        if g == 0 {
            return None;
        }
        Some(RationalSlope(v.iter().map(|x| x / g).collect()))
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn neg(&self) -> Self {
        RationalSlope(self.0.iter().map(|x| -x).collect())
    }

    pub fn max_abs(&self) -> i64 {
        self.0.iter().map(|x| x.abs()).max().unwrap_or(0)
    }

    pub fn direction<T: Real>(&self) -> Direction<T> {
        let v: Vec<T> = self.0.iter().map(|&x| T::lit(x as f64)).collect();
        direction_of(&v).expect("slopes are nonzero")
    }
}

impl TryFrom<Vec<i64>> for RationalSlope {
    type Error = String;
    fn try_from(v: Vec<i64>) -> Result<Self, String> {
        RationalSlope::new(v).ok_or_else(|| "slope must be a primitive nonzero vector".into())
    }
}

impl From<RationalSlope> for Vec<i64> {
    fn from(s: RationalSlope) -> Vec<i64> {
        s.0
    }
}

impl fmt::Display for RationalSlope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Calls `visit` on every primitive vector of `[-q, q]^n`.
fn for_each_primitive(n: usize, q: i64, mut visit: impl FnMut(&[i64])) {
    let mut v = vec![-q; n];
    loop {
        if v.iter().fold(0i64, |g, &x| g.gcd(&x)) == 1 {
            visit(&v);
        }
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            if v[i] < q {
                v[i] += 1;
                break;
            }
            v[i] = -q;
            i += 1;
        }
    }
}

/// Closest primitive vector with `‖p‖∞ ≤ q` to `d`, with its angle.
/// Ties go to the smaller `‖p‖∞`, then to the lexicographically smaller vector.
pub fn best_rational_slope<T: Real>(d: &Direction<T>, q: i64) -> (RationalSlope, f64) {
    let target: Vec<f64> = d.as_slice().iter().map(|x| x.to_f64_lossy()).collect();
    let mut best: Option<(f64, i64, Vec<i64>)> = None;
    for_each_primitive(target.len(), q.max(1), |p| {
        let pf: Vec<f64> = p.iter().map(|&x| x as f64).collect();
        let n = norm2(&pf);
        let u: Vec<f64> = pf.iter().map(|x| x / n).collect();
        let ang = angle_between(&target, &u);
        let m = p.iter().map(|x| x.abs()).max().unwrap_or(0);
        let better = match &best {
            None => true,
            Some((ba, bm, bp)) => {
                if (ang - ba).abs() > 1e-14 {
                    ang < *ba
                } else if m != *bm {
                    m < *bm
                } else {
                    p < bp.as_slice()
                }
            }
        };
        if better {
            best = Some((ang, m, p.to_vec()));
        }
    });
    let (ang, _, p) = best.expect("at least one primitive vector");
    (RationalSlope(p), ang)
}

/// The best slope of [`best_rational_slope`] if its angle is within `tol`.
pub fn rational_slope_of<T: Real>(d: &Direction<T>, q: i64, tol: f64) -> Option<RationalSlope> {
    let (p, ang) = best_rational_slope(d, q);
    (ang <= tol).then_some(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    type C = Complex<f64>;

    #[test]
    fn log_and_arg() {
        assert_eq!(log_map(&[C::new(1.0, 0.0), C::new(1.0, 0.0)]), vec![0.0, 0.0]);
        let l: Vec<f64> = log_map(&[C::new(E, 0.0), C::new(E * E, 0.0)]);
        assert!((l[0] - 1.0).abs() < 1e-15 && (l[1] - 2.0).abs() < 1e-15);
        let z = [C::new(0.0, 2.0), C::new(-3.0, 0.0)];
        let l: Vec<f64> = log_map(&z);
        assert!((l[0] - 2f64.ln()).abs() < 1e-15 && (l[1] - 3f64.ln()).abs() < 1e-15);
        let a = arg_map(&z);
        assert!((a[0] - C::new(0.0, 1.0)).norm() < 1e-15);
        assert!((a[1] - C::new(-1.0, 0.0)).norm() < 1e-15);
        let a = arg_angles(&[C::from_polar(7.0, -0.5)]);
        assert!((a[0] - (2.0 * PI - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(&[0.0, 0.0]), vec![0.0, 0.0]);
        let r = rho(&[3.0f64, 4.0]);
        assert!((r[0] - 0.5).abs() < 1e-15 && (r[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!(norm2(&rho(&[1e9, 0.0])) < 1.0);
        assert!(norm2(&rho(&[1e9, 0.0])) > 1.0 - 1e-8);
        assert_eq!(rho_inverse(&[1.0, 0.0]), Err(GeometryError::OutsideBall));
    }

    #[test]
    fn directions_and_angles() {
        let d = direction_of(&[3.0f64, 4.0]).unwrap();
        assert!((d[0] - 0.6).abs() < 1e-15 && (d[1] - 0.8).abs() < 1e-15);
        assert_eq!(direction_of(&[-7.0, 0.0]).unwrap().as_slice(), &[-1.0, 0.0]);
        assert_eq!(direction_of(&[0.0, 0.0]), Err(GeometryError::ZeroVector));
        let e1 = direction_of(&[1.0, 0.0]).unwrap();
        let e2 = direction_of(&[0.0, 1.0]).unwrap();
        assert_eq!(angular_distance(&e1, &e1), 0.0);
        assert!((angular_distance(&e1, &e2) - PI / 2.0).abs() < 1e-15);
        assert!((angular_distance(&e1, &e1.neg()) - PI).abs() < 1e-15);
        let df = direction_of(&[1.0f32, 1.0, 1.0]).unwrap();
        assert!((df[2] - 1.0 / 3f32.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn slope_recognition() {
        let d = direction_of(&[1.0, 1.0]).unwrap();
        assert_eq!(rational_slope_of(&d, 20, 1e-6).unwrap().as_slice(), &[1, 1]);
        let d = direction_of(&[1.0, -1.0]).unwrap();
        assert_eq!(rational_slope_of(&d, 20, 1e-6).unwrap().as_slice(), &[1, -1]);
        let d = direction_of(&[1.0, 2f64.sqrt()]).unwrap();
        assert_eq!(rational_slope_of(&d, 20, 1e-6), None);
    }

    #[test]
    fn arc_distance() {
        let a = [1.0, 0.0, 0.0];
        let b = [0.0, 1.0, 0.0];
        let mid = [0.5f64.sqrt(), 0.5f64.sqrt(), 0.0];
        assert!(geodesic_segment_distance(&mid, &a, &b) < 1e-12);
        let up = [0.0, 0.0, 1.0];
        assert!((geodesic_segment_distance(&up, &a, &b) - PI / 2.0).abs() < 1e-12);
        let back = [-1.0, 0.0, 0.0];
        assert!((geodesic_segment_distance(&back, &a, &b) - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn slope_type() {
        assert!(RationalSlope::new(vec![2, 4]).is_none());
        assert!(RationalSlope::new(vec![0, 0]).is_none());
        assert_eq!(RationalSlope::primitive_of(&[2, -4]).unwrap().as_slice(), &[1, -2]);
        let s: RationalSlope = serde_json::from_str("[1,-1]").unwrap();
        assert_eq!(serde_json::to_string(&s).unwrap(), "[1,-1]");
        assert!(serde_json::from_str::<RationalSlope>("[2,2]").is_err());
    }
}
