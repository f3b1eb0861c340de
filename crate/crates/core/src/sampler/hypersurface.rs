//! Shell sampling of hypersurfaces `f = 0` by solving for one coordinate.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::roots::{LogPoly, LogSum};
use super::{sample_chunks, shell_band, Drawer, SamplePoint, SamplerConfig, SamplerError, ShellSample};
use crate::expr::{Expression, LaurentPolynomial};
use crate::geometry::norm2;

/// Newton steps per start for analytic equations.
const NEWTON_STEPS: usize = 50;
const START_CIRCLES: usize = 8;
const STARTS_PER_CIRCLE: usize = 32;

#[derive(Clone, Debug)]
enum Equation {
    Poly(LaurentPolynomial),
    Analytic,
}

/// A point of the hypersurface with its log-moduli, phases and residual.
#[derive(Clone, Debug)]
pub struct Solution {
    pub log: Vec<f64>,
    pub phase: Vec<f64>,
    pub residual: f64,
}

impl Solution {
    pub fn point(&self) -> Vec<Complex64> {
        self.log.iter().zip(&self.phase).map(|(&x, &t)| Complex64::from_polar(x.exp(), t)).collect()
    }
}

/// Solves `f = 0` for one coordinate with the others fixed.
#[derive(Clone, Debug)]
pub struct HypersurfaceSolver {
    eq: Equation,
    expr: Expression,
    n: usize,
    /// Coordinates that can be solved for.
    pub eligible: Vec<usize>,
}

impl HypersurfaceSolver {
    pub fn new(f: &Expression) -> Self {
        let n = f.arity();
        match f.to_laurent() {
            Ok(p) => {
                let eligible = (0..n).filter(|&j| p.degree_range(j).is_some_and(|(lo, hi)| hi > lo)).collect();
                HypersurfaceSolver { eq: Equation::Poly(p), expr: f.clone(), n, eligible }
            }
            Err(_) => {
                let eligible = (0..n).filter(|&j| f.root().depends_on(j)).collect();
                HypersurfaceSolver { eq: Equation::Analytic, expr: f.clone(), n, eligible }
            }
        }
    }

    pub fn is_polynomial(&self) -> bool {
        matches!(self.eq, Equation::Poly(_))
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    /// All solutions in coordinate `j`, given log-moduli `x` and phases `th`
    /// of the other coordinates (entry `j` of both is ignored). `reach`
    /// bounds the log-modulus of the starts used for analytic equations.
    pub fn solve_slice(&self, j: usize, x: &[f64], th: &[f64], reach: f64) -> Vec<Solution> {
        match &self.eq {
            Equation::Poly(p) => self.solve_poly(p, j, x, th),
            Equation::Analytic => self.solve_analytic(j, x, th, reach),
        }
    }

    fn slice_poly(p: &LaurentPolynomial, j: usize, x: &[f64], th: &[f64]) -> LogPoly {
        let mut sums: std::collections::BTreeMap<i64, LogSum> = std::collections::BTreeMap::new();
        for (e, c) in p.terms() {
            let mut l = c.norm().ln();
            let mut ph = c.arg();
            for (i, &a) in e.iter().enumerate() {
                if i != j && a != 0 {
                    l += a as f64 * x[i];
                    ph += a as f64 * th[i];
                }
            }
            sums.entry(e[j]).or_default().push(l, ph);
        }
        LogPoly { coeffs: sums.into_iter().filter_map(|(k, s)| s.finish().map(|c| (k, c))).collect() }
    }

    fn solve_poly(&self, p: &LaurentPolynomial, j: usize, x: &[f64], th: &[f64]) -> Vec<Solution> {
        let lp = Self::slice_poly(p, j, x, th);
        lp.log_roots()
            .into_iter()
            .filter(|u| u.re.is_finite() && u.im.is_finite())
            .map(|u| {
                let mut log = x.to_vec();
                let mut phase = th.to_vec();
                log[j] = u.re;
                phase[j] = u.im;
                Solution { log, phase, residual: lp.relative_residual(u) }
            })
            .collect()
    }

    fn residual_at(&self, z: &[Complex64]) -> Option<f64> {
        let (v, s) = self.expr.eval_with_scale(z).ok()?;
        Some(v.norm() / s.max(f64::MIN_POSITIVE))
    }

    fn solve_analytic(&self, j: usize, x: &[f64], th: &[f64], reach: f64) -> Vec<Solution> {
        let mut z: Vec<Complex64> = x.iter().zip(th).map(|(&a, &t)| Complex64::from_polar(a.exp(), t)).collect();
        let limit = (2.0 * reach).exp();
        let mut found: Vec<Complex64> = Vec::new();
        for c in 0..START_CIRCLES {
            let lm = -reach + 2.0 * reach * c as f64 / (START_CIRCLES - 1) as f64;
            for s in 0..STARTS_PER_CIRCLE {
                let ang = std::f64::consts::TAU * (s as f64 + 0.5) / STARTS_PER_CIRCLE as f64;
                let mut w = Complex64::from_polar(lm.exp(), ang);
                let mut converged = false;
                for _ in 0..NEWTON_STEPS {
                    z[j] = w;
                    let Ok(g) = self.expr.eval(&z) else { break };
                    let h = 1e-7 * (1.0 + w.norm());
                    z[j] = w + h;
                    let Ok(gp) = self.expr.eval(&z) else { break };
                    z[j] = w - h;
                    let Ok(gm) = self.expr.eval(&z) else { break };
                    let dg = (gp - gm) / (2.0 * h);
                    if dg.norm() == 0.0 {
                        break;
                    }
                    let step = g / dg;
                    w -= step;
                    if !(w.norm() <= limit) || w.norm() == 0.0 {
                        break;
                    }
                    if step.norm() <= 1e-12 * (1.0 + w.norm()) {
                        converged = true;
                        break;
                    }
                }
                if converged && found.iter().all(|f| (f - w).norm() > 1e-8 * (1.0 + w.norm())) {
                    found.push(w);
                }
            }
        }
        found.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        found
            .into_iter()
            .filter_map(|w| {
                z[j] = w;
                let residual = self.residual_at(&z)?;
                let mut log = x.to_vec();
                let mut phase = th.to_vec();
                log[j] = w.norm().ln();
                phase[j] = w.arg();
                Some(Solution { log, phase, residual })
            })
            .collect()
    }
}

struct ShellDrawer<'a> {
    solver: &'a HypersurfaceSolver,
    radius: f64,
    band: f64,
    residual_bound: f64,
}

impl ShellDrawer<'_> {
    fn accept(&self, s: &Solution) -> bool {
        let r = norm2(&s.log);
        (r - self.radius).abs() <= self.band && s.residual <= self.residual_bound
    }
}

impl Drawer for ShellDrawer<'_> {
    fn draw(&self, rng: &mut ChaCha8Rng, out: &mut Vec<SamplePoint>) {
        let sv = self.solver;
        let n = sv.n;
        let j = sv.eligible[rng.random_range(0..sv.eligible.len())];
        let outer = self.radius + self.band;
        // Uniform point of the (n-1)-ball of radius R + δ.
        let mut x = vec![0.0; n];
        loop {
            let mut s = 0.0;
            for (i, xi) in x.iter_mut().enumerate() {
                *xi = if i == j { 0.0 } else { rng.random_range(-1.0..1.0) };
                s += *xi * *xi;
            }
            if s <= 1.0 {
                break;
            }
        }
        x.iter_mut().for_each(|v| *v *= outer);
        let th: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        let mut missed = Vec::new();
        for sol in sv.solve_slice(j, &x, &th, outer) {
            if self.accept(&sol) {
                out.push(SamplePoint { z: sol.point(), residual: sol.residual, params: vec![] });
            } else {
                missed.push(sol);
            }
        }
        if sv.is_polynomial() && !missed.is_empty() {
            // Rescale the fixed coordinates radially and follow one missed root.
            let mut cur = missed.swap_remove(rng.random_range(0..missed.len()));
            let mut lambda = 1.0;
            for _ in 0..3 {
                let r = norm2(&cur.log);
                if !(r > 1e-9) || !r.is_finite() {
                    break;
                }
                let factor = self.radius / r;
                lambda *= factor;
                let xs: Vec<f64> = x.iter().map(|v| v * lambda).collect();
                let target: Vec<f64> = cur.log.iter().map(|v| v * factor).collect();
                let next = sv.solve_slice(j, &xs, &th, outer).into_iter().min_by(|a, b| {
                    let da = dist(&a.log, &target);
                    let db = dist(&b.log, &target);
                    da.total_cmp(&db)
                });
                let Some(next) = next else { break };
                cur = next;
                if self.accept(&cur) {
                    out.push(SamplePoint { z: cur.point(), residual: cur.residual, params: vec![] });
                    break;
                }
            }
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Points of `f = 0` on the shell of radius `radius`.
pub fn sample_hypersurface(
    f: &Expression,
    radius: f64,
    count: usize,
    seed: u64,
    cfg: &SamplerConfig,
) -> Result<ShellSample, SamplerError> {
    sample_hypersurface_indexed(f, radius, count, seed, 0, cfg)
}

pub(crate) fn sample_hypersurface_indexed(
    f: &Expression,
    radius: f64,
    count: usize,
    seed: u64,
    shell_index: u64,
    cfg: &SamplerConfig,
) -> Result<ShellSample, SamplerError> {
    let solver = HypersurfaceSolver::new(f);
    if solver.eligible.is_empty() {
        return Err(SamplerError::ShellUnreachable(radius));
    }
    let drawer = ShellDrawer { solver: &solver, radius, band: shell_band(radius), residual_bound: cfg.residual_bound };
    sample_chunks(&drawer, radius, count, seed, shell_index, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    fn line() -> Expression {
        parse_expression("1+z1+z2", 2).unwrap()
    }

    #[test]
    fn line_shell() {
        let s = sample_hypersurface(&line(), 10.0, 200, 7, &SamplerConfig::default()).unwrap();
        assert_eq!(s.points.len(), 200);
        assert_eq!(s.violations(1e-9), 0);
        for p in &s.points {
            let v = 1.0 + p.z[0] + p.z[1];
            assert!(v.norm() <= 1e-9 * (1.0 + 1.0 + p.z[0].norm() + p.z[1].norm()));
        }
    }

    #[test]
    fn binomial_log_identity() {
        let f = parse_expression("z1*z2-1", 2).unwrap();
        let s = sample_hypersurface(&f, 50.0, 100, 3, &SamplerConfig::default()).unwrap();
        for p in &s.points {
            let l = p.log();
            assert!((l[0] + l[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn large_shell_does_not_overflow() {
        let f = parse_expression("1+z1^3*z2+z2^-2+4*z1^-1", 2).unwrap();
        let s = sample_hypersurface(&f, 200.0, 100, 1, &SamplerConfig::default()).unwrap();
        assert_eq!(s.violations(1e-9), 0);
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let one = SamplerConfig { workers: 1, chunk: 30, ..Default::default() };
        let four = SamplerConfig { workers: 4, ..one.clone() };
        let a = sample_hypersurface(&line(), 20.0, 100, 9, &one).unwrap();
        let b = sample_hypersurface(&line(), 20.0, 100, 9, &four).unwrap();
        assert_eq!(a.to_lines(), b.to_lines());
    }

    #[test]
    fn sine_zero_set() {
        let f = parse_expression("sin(pi*z1*z2)", 2).unwrap();
        let s = sample_hypersurface(&f, 10.0, 30, 11, &SamplerConfig::default()).unwrap();
        assert_eq!(s.violations(1e-9), 0);
        for p in &s.points {
            let w = p.z[0] * p.z[1];
            assert!((w.re - w.re.round()).abs() <= 1e-6 && w.im.abs() <= 1e-6, "{w}");
            assert!(w.re.round() != 0.0);
        }
    }
}
