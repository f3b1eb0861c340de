//! Shell sampling of parametrized varieties by target-driven least squares.
//!
//! Each parameter is written as `t = ±e^p ± i e^q`, which reaches both very
//! small and very large parameters and keeps `Re t` and `Im t` independently
//! resolvable. A random target `y` on the radius-`R` sphere is approached by
//! Levenberg–Marquardt on `‖Log g(t) − y‖²`, and the result is kept when it
//! lands in the shell band. Rays in parameter space complement the targets
//! on parts of the amoeba too thin to be hit.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{sample_chunks, shell_band, Drawer, Mode, SamplePoint, SamplerConfig, SamplerError, ShellSample, VarietySpec};
use crate::expr::Expression;
use crate::geometry::{log_map, norm2};

const STARTS: usize = 10;
const LM_STEPS: usize = 60;
const RETARGETS: usize = 2;

/// Point `g(t)` of the image, or `None` when it leaves the torus or overflows.
pub(crate) fn eval_map(map: &[Expression], t: &[Complex64]) -> Option<Vec<Complex64>> {
    let mut out = Vec::with_capacity(map.len());
    for e in map {
        let v = e.eval(t).ok()?;
        if v.norm() == 0.0 || !v.norm().is_finite() {
            return None;
        }
        out.push(v);
    }
    Some(out)
}

#[derive(Clone, Copy)]
struct Signs(u32);

fn params_of(theta: &[f64], signs: Signs) -> Vec<Complex64> {
    theta
        .chunks(2)
        .enumerate()
        .map(|(i, pq)| {
            let sa = if signs.0 & (1 << (2 * i)) != 0 { -1.0 } else { 1.0 };
            let sb = if signs.0 & (1 << (2 * i + 1)) != 0 { -1.0 } else { 1.0 };
            Complex64::new(sa * pq[0].exp(), sb * pq[1].exp())
        })
        .collect()
}

struct Lm<'a> {
    map: &'a [Expression],
    signs: Signs,
}

impl Lm<'_> {
    fn log_image(&self, theta: &[f64]) -> Option<Vec<f64>> {
        let t = params_of(theta, self.signs);
        let z = eval_map(self.map, &t)?;
        let l = log_map(&z);
        l.iter().all(|v| v.is_finite()).then_some(l)
    }

    fn residual(&self, theta: &[f64], y: &[f64]) -> Option<DVector<f64>> {
        let l = self.log_image(theta)?;
        Some(DVector::from_iterator(y.len(), l.iter().zip(y).map(|(a, b)| a - b)))
    }

    /// Minimizes `‖Log g − y‖²` from `theta`; returns the final parameters.
    fn solve(&self, mut theta: Vec<f64>, y: &[f64]) -> Option<Vec<f64>> {
        let n = y.len();
        let m = theta.len();
        let mut r = self.residual(&theta, y)?;
        let mut cost = r.norm_squared();
        let mut mu = 1e-3;
        for _ in 0..LM_STEPS {
            if cost < 1e-20 {
                break;
            }
            let mut jac = DMatrix::<f64>::zeros(n, m);
            for k in 0..m {
                let h = 1e-6 * (1.0 + theta[k].abs());
                let mut tp = theta.clone();
                tp[k] += h;
                let rp = self.residual(&tp, y)?;
                jac.set_column(k, &((rp - &r) / h));
            }
            let jtj = jac.transpose() * &jac;
            let g = jac.transpose() * &r;
            let mut improved = false;
            for _ in 0..8 {
                let mut a = jtj.clone();
                for d in 0..m {
                    a[(d, d)] += mu * (jtj[(d, d)] + 1e-9);
                }
                let Some(step) = a.lu().solve(&(-&g)) else {
                    mu *= 10.0;
                    continue;
                };
                let cand: Vec<f64> = theta.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
                if let Some(rc) = self.residual(&cand, y) {
                    let c = rc.norm_squared();
                    if c < cost {
                        let small = step.norm() < 1e-12 * (1.0 + DVector::from_column_slice(&theta).norm());
                        theta = cand;
                        r = rc;
                        cost = c;
                        mu = (mu / 3.0).max(1e-12);
                        improved = true;
                        if small {
                            return Some(theta);
                        }
                        break;
                    }
                }
                mu *= 4.0;
            }
            if !improved {
                break;
            }
        }
        Some(theta)
    }
}

struct ParamDrawer<'a> {
    map: &'a [Expression],
    params: usize,
    radius: f64,
    band: f64,
    /// Whether the amoeba has full dimension, in which case only points
    /// that hit their target are kept; nearest points to unreachable
    /// targets would pile up on the amoeba's boundary.
    full_dim: bool,
}

/// Largest rank of `d(Log ∘ g)` over a fixed set of parameters.
fn generic_rank(map: &[Expression], params: usize) -> usize {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a2b);
    let n = map.len();
    let mut best = 0;
    for _ in 0..16 {
        let lm = Lm { map, signs: Signs(rng.random_range(0..(1u32 << (2 * params)))) };
        let theta: Vec<f64> = (0..2 * params).map(|_| rng.random_range(-2.0..2.0)).collect();
        let Some(l0) = lm.log_image(&theta) else { continue };
        let mut jac = DMatrix::<f64>::zeros(n, theta.len());
        let mut ok = true;
        for k in 0..theta.len() {
            let mut tp = theta.clone();
            tp[k] += 1e-6;
            match lm.log_image(&tp) {
                Some(l) => {
                    for r in 0..n {
                        jac[(r, k)] = (l[r] - l0[r]) / 1e-6;
                    }
                }
                None => ok = false,
            }
        }
        if !ok {
            continue;
        }
        let sv = jac.svd(false, false).singular_values;
        let top = sv.iter().copied().fold(0.0, f64::max);
        best = best.max(sv.iter().filter(|&&v| v > 1e-6 * top).count());
    }
    best
}

/// Starting value for one log-Cartesian coordinate. Besides uniform values,
/// coordinates near `|y_j|` or `ln |y_j|` put the start past the plateaus where
/// one of `Re t`, `Im t` dominates the other and the gradient vanishes.
fn start_coordinate(rng: &mut ChaCha8Rng, y: &[f64], reach: f64) -> f64 {
    let j = rng.random_range(0..y.len());
    let noise = rng.random_range(-1.0..1.0);
    match rng.random_range(0..3) {
        0 => rng.random_range(-reach..reach),
        1 => y[j].abs() + noise,
        _ => (y[j].abs() + 1.0).ln() + noise,
    }
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = norm2(&v);
        if s > 1e-3 && s <= 1.0 {
            return v.iter().map(|x| x / s).collect();
        }
    }
}

impl Drawer for ParamDrawer<'_> {
    fn draw(&self, rng: &mut ChaCha8Rng, out: &mut Vec<SamplePoint>) {
        // Full-dimensional amoebas reject targets outside the image, so
        // targets need a larger share to balance the rays.
        let ray_share = if self.full_dim { 0.25 } else { 0.5 };
        if rng.random_bool(ray_share) {
            self.ray_draw(rng, out);
        } else {
            self.target_draw(rng, out);
        }
    }
}

impl ParamDrawer<'_> {
    /// Follows a random ray `t = e^{λ a + c + iφ}` in parameter space and
    /// keeps one of the parameters where `‖Log g‖` crosses `R`. These reach
    /// thin tentacles that carry no area on the shell.
    fn ray_draw(&self, rng: &mut ChaCha8Rng, out: &mut Vec<SamplePoint>) {
        let m = self.params;
        let a = random_unit(rng, m);
        let c: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let phi: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        let at = |lam: f64| -> Vec<Complex64> {
            (0..m).map(|i| Complex64::from_polar((lam * a[i] + c[i]).exp(), phi[i])).collect()
        };
        let h = |lam: f64| -> Option<f64> { Some(norm2(&log_map(&eval_map(self.map, &at(lam))?)) - self.radius) };
        let reach = self.radius + self.band + 2.0;
        let steps = (4.0 * reach).ceil() as usize;
        let mut crossings = Vec::new();
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..=steps {
            let lam = -reach + 2.0 * reach * i as f64 / steps as f64;
            let cur = h(lam).map(|v| (lam, v));
            if let (Some((l0, v0)), Some((l1, v1))) = (prev, cur) {
                if (v0 <= 0.0) != (v1 <= 0.0) {
                    crossings.push((l0, v0, l1, v1));
                }
            }
            prev = cur;
        }
        if crossings.is_empty() {
            return;
        }
        let (mut lo, mut vlo, mut hi, _) = crossings[rng.random_range(0..crossings.len())];
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let Some(v) = h(mid) else { return };
            if v.abs() <= 1e-9 * self.radius {
                lo = mid;
                break;
            }
            if (v <= 0.0) == (vlo <= 0.0) {
                lo = mid;
                vlo = v;
            } else {
                hi = mid;
            }
        }
        let t = at(lo);
        if let Some(z) = eval_map(self.map, &t) {
            if (norm2(&log_map(&z)) - self.radius).abs() <= self.band {
                out.push(SamplePoint { z, residual: 0.0, params: t });
            }
        }
    }

    fn target_draw(&self, rng: &mut ChaCha8Rng, out: &mut Vec<SamplePoint>) {
        let n = self.map.len();
        let y: Vec<f64> = random_unit(rng, n).iter().map(|v| v * self.radius).collect();
        let reach = self.radius + self.band;
        for _ in 0..STARTS {
            let signs = Signs(rng.random_range(0..(1u32 << (2 * self.params))));
            let theta: Vec<f64> = (0..2 * self.params).map(|_| start_coordinate(rng, &y, reach)).collect();
            let lm = Lm { map: self.map, signs };
            if lm.log_image(&theta).is_none() {
                continue;
            }
            let Some(mut theta) = lm.solve(theta, &y) else { continue };
            if self.full_dim {
                let Some(l) = lm.log_image(&theta) else { continue };
                let miss: Vec<f64> = l.iter().zip(&y).map(|(a, b)| a - b).collect();
                if norm2(&miss) <= 1e-6 * (1.0 + self.radius) {
                    let t = params_of(&theta, signs);
                    if let Some(z) = eval_map(self.map, &t) {
                        out.push(SamplePoint { z, residual: 0.0, params: t });
                        return;
                    }
                }
                continue;
            }
            for _ in 0..=RETARGETS {
                let Some(l) = lm.log_image(&theta) else { break };
                let r = norm2(&l);
                if (r - self.radius).abs() <= self.band {
                    let t = params_of(&theta, signs);
                    if let Some(z) = eval_map(self.map, &t) {
                        out.push(SamplePoint { z, residual: 0.0, params: t });
                        return;
                    }
                    break;
                }
                if !(r > 1e-9) {
                    break;
                }
                let target: Vec<f64> = l.iter().map(|v| v * self.radius / r).collect();
                match lm.solve(theta.clone(), &target) {
                    Some(t) => theta = t,
                    None => break,
                }
            }
        }
    }
}

/// Points `g(t)` with `‖Log g(t)‖` in the shell band, from a mix of target
/// draws and parameter rays.
pub fn sample_parametrized(
    spec: &VarietySpec,
    radius: f64,
    count: usize,
    seed: u64,
    cfg: &SamplerConfig,
) -> Result<ShellSample, SamplerError> {
    sample_parametrized_indexed(spec, radius, count, seed, 0, cfg)
}

pub(crate) fn sample_parametrized_indexed(
    spec: &VarietySpec,
    radius: f64,
    count: usize,
    seed: u64,
    shell_index: u64,
    cfg: &SamplerConfig,
) -> Result<ShellSample, SamplerError> {
    let Mode::Parametrized { map, params } = &spec.mode else {
        return Err(SamplerError::WrongMode("parametrized"));
    };
    let full_dim = generic_rank(map, *params) >= map.len();
    let drawer = ParamDrawer { map, params: *params, radius, band: shell_band(radius), full_dim };
    let cfg = SamplerConfig { draws_per_point: cfg.draws_per_point.min(50), ..cfg.clone() };
    sample_chunks(&drawer, radius, count, seed, shell_index, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression_list;

    fn spec(text: &str) -> VarietySpec {
        let map = parse_expression_list(text, 1).unwrap();
        VarietySpec::parametrized(map, 1).unwrap()
    }

    #[test]
    fn exponential_curve_shell() {
        let s = sample_parametrized(&spec("(t, exp(t))"), 10.0, 200, 1, &SamplerConfig::default()).unwrap();
        let d = shell_band(10.0);
        for p in &s.points {
            let t = p.z[0];
            let x = t.norm().ln();
            let y = t.re;
            let r2 = x * x + y * y;
            assert!(r2 >= (10.0 - d) * (10.0 - d) - 1e-9 && r2 <= (10.0 + d) * (10.0 + d) + 1e-9);
            assert!((p.z[1] - t.exp()).norm() <= 1e-9 * p.z[1].norm());
            assert_eq!(p.residual, 0.0);
        }
    }

    #[test]
    fn thin_tentacle_is_reached() {
        let s = sample_parametrized(&spec("(t, exp(t))"), 50.0, 400, 4, &SamplerConfig::default()).unwrap();
        let left = s.points.iter().filter(|p| p.log()[0] < -49.0).count();
        assert!(left > 10, "{left}");
    }

    #[test]
    fn diagonal_shell() {
        let s = sample_parametrized(&spec("(t, t)"), 5.0, 50, 2, &SamplerConfig::default()).unwrap();
        let d = shell_band(5.0);
        for p in &s.points {
            let l = p.z[0].norm().ln().abs();
            assert!((l * 2f64.sqrt() - 5.0).abs() <= d + 1e-9);
        }
    }

    #[test]
    fn space_curve_nonempty() {
        let s = sample_parametrized(&spec("(t, exp(t), t+1)"), 20.0, 20, 3, &SamplerConfig::default()).unwrap();
        assert_eq!(s.points.len(), 20);
    }

    #[test]
    fn deterministic() {
        let a = sample_parametrized(&spec("(t, exp(t))"), 30.0, 40, 5, &SamplerConfig { chunk: 7, ..Default::default() });
        let b = sample_parametrized(
            &spec("(t, exp(t))"),
            30.0,
            40,
            5,
            &SamplerConfig { chunk: 7, workers: 3, ..Default::default() },
        );
        assert_eq!(a.unwrap().to_lines(), b.unwrap().to_lines());
    }
}
