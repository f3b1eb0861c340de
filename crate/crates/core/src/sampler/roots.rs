//! Roots of univariate polynomials whose coefficients may overflow `f64`.
//!
//! Coefficients are kept as `e^{log_mag} * unit`. Roots are located segment
//! by segment on the Newton polygon of `(k, log|a_k|)`: each segment's
//! initial form is solved by Aberth iteration, and the result is polished
//! by Newton's method on the full polynomial in the variable `u = ln w`.

use num_complex::Complex64;

const ABERTH_STEPS: usize = 40;

/// A coefficient `e^{log_mag} * unit` with `|unit| = 1`, plus the log of
/// the sum of absolute values of the terms that were merged into it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogCoeff {
    pub log_mag: f64,
    pub unit: Complex64,
    pub log_scale: f64,
}

/// Accumulates terms `e^{l} e^{i phi}` for one power of the variable.
#[derive(Clone, Debug, Default)]
pub struct LogSum {
    terms: Vec<(f64, f64)>,
}

impl LogSum {
    pub fn push(&mut self, log_mag: f64, phase: f64) {
        self.terms.push((log_mag, phase));
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Merged coefficient, or `None` when the terms cancel exactly.
    pub fn finish(&self) -> Option<LogCoeff> {
        let m = self.terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
        if !m.is_finite() {
            return None;
        }
        let mut sum = Complex64::new(0.0, 0.0);
        let mut abs = 0.0;
        for &(l, ph) in &self.terms {
            let r = (l - m).exp();
            sum += Complex64::from_polar(r, ph);
            abs += r;
        }
        let s = sum.norm();
        if s <= 1e-15 * abs {
            return None;
        }
        Some(LogCoeff { log_mag: m + s.ln(), unit: sum / s, log_scale: m + abs.ln() })
    }
}

/// Upper convex hull of `(k, y_k)`, as indices into the input.
fn upper_hull(pts: &[(i64, f64)]) -> Vec<usize> {
    let mut h: Vec<usize> = Vec::new();
    for i in 0..pts.len() {
        while h.len() >= 2 {
            let (a, b) = (pts[h[h.len() - 2]], pts[h[h.len() - 1]]);
            let c = pts[i];
            let cross = (b.0 - a.0) as f64 * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0) as f64;
            if cross >= 0.0 {
                h.pop();
            } else {
                break;
            }
        }
        h.push(i);
    }
    h
}

fn horner(c: &[Complex64], v: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * v + p;
        p = p * v + a;
    }
    (p, dp)
}

/// All roots of `sum c_i v^i` (`c` ascending, `c[0]` and `c[last]` nonzero).
pub fn aberth(c: &[Complex64]) -> Vec<Complex64> {
    let m = c.len() - 1;
    match m {
        0 => return vec![],
        1 => return vec![-c[0] / c[1]],
        2 => {
            let (a, b, cc) = (c[2], c[1], c[0]);
            let disc = (b * b - 4.0 * a * cc).sqrt();
            let q = if (b.conj() * disc).re >= 0.0 { -0.5 * (b + disc) } else { -0.5 * (b - disc) };
            if q.norm() == 0.0 {
                return vec![Complex64::new(0.0, 0.0); 2];
            }
            return vec![q / a, cc / q];
        }
        _ => {}
    }
    let r = (c[0].norm() / c[m].norm()).powf(1.0 / m as f64);
    let mut z: Vec<Complex64> = (0..m)
        .map(|i| Complex64::from_polar(r, std::f64::consts::TAU * (i as f64 + 0.25) / m as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut worst: f64 = 0.0;
        for i in 0..m {
            let (p, dp) = horner(c, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..m).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let w = ratio / (1.0 - ratio * s);
            if w.re.is_finite() && w.im.is_finite() {
                z[i] -= w;
                worst = worst.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if worst <= 1e-15 {
            break;
        }
    }
    z
}

/// Polynomial `sum_k a_k w^k` with log-scaled coefficients.
#[derive(Clone, Debug)]
pub struct LogPoly {
    /// `(k, coefficient)` with increasing `k`; negative `k` allowed.
    pub coeffs: Vec<(i64, LogCoeff)>,
}

/// Value and derivative of `F(u) = sum a_k e^{k u}`, both divided by the
/// largest term, plus that term's log magnitude and the divided scale.
pub struct LogEval {
    pub f: Complex64,
    pub df: Complex64,
    pub log_max: f64,
    pub scale: f64,
}

impl LogPoly {
    pub fn eval_log(&self, u: Complex64) -> LogEval {
        let logs: Vec<f64> = self.coeffs.iter().map(|(k, a)| a.log_mag + *k as f64 * u.re).collect();
        let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut f = Complex64::new(0.0, 0.0);
        let mut df = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for ((k, a), l) in self.coeffs.iter().zip(&logs) {
            let t = a.unit * Complex64::from_polar((l - m).exp(), *k as f64 * u.im);
            f += t;
            df += t * *k as f64;
            scale += (a.log_scale + *k as f64 * u.re - m).exp();
        }
        LogEval { f, df, log_max: m, scale }
    }

    /// `|F|` over the sum of absolute term values, evaluated without overflow.
    pub fn relative_residual(&self, u: Complex64) -> f64 {
        let e = self.eval_log(u);
        e.f.norm() / e.scale.max(f64::MIN_POSITIVE)
    }

    /// Roots as values of `u = ln w`, each polished on the full polynomial.
    pub fn log_roots(&self) -> Vec<Complex64> {
        if self.coeffs.len() < 2 {
            return vec![];
        }
        let pts: Vec<(i64, f64)> = self.coeffs.iter().map(|(k, a)| (*k, a.log_mag)).collect();
        let hull = upper_hull(&pts);
        let mut out = Vec::new();
        for seg in hull.windows(2) {
            let (i1, i2) = (seg[0], seg[1]);
            let (k1, y1) = pts[i1];
            let (k2, y2) = pts[i2];
            let sigma = (y2 - y1) / (k2 - k1) as f64;
            let deg = (k2 - k1) as usize;
            let mut c = vec![Complex64::new(0.0, 0.0); deg + 1];
            for (k, a) in &self.coeffs[i1..=i2] {
                let l = a.log_mag - y1 - sigma * (*k - k1) as f64;
                c[(*k - k1) as usize] = a.unit * l.exp();
            }
            for v in aberth(&c) {
                if v.norm() == 0.0 || !v.re.is_finite() || !v.im.is_finite() {
                    continue;
                }
                out.push(Complex64::new(-sigma, 0.0) + v.ln());
            }
        }
        self.refine_all(&mut out);
        out
    }

    /// Simultaneous Aberth iteration on the full polynomial, carried out in
    /// `u = ln w` so that roots of very different sizes never overflow.
    fn refine_all(&self, u: &mut [Complex64]) {
        let one = Complex64::new(1.0, 0.0);
        let mut prev = f64::INFINITY;
        // Far from every root a correction shrinks |w| by a bounded factor, so
        // an estimate thrown out of a tight cluster only crawls back; such
        // estimates are left to the residual filter.
        for _ in 0..ABERTH_STEPS {
            let mut worst: f64 = 0.0;
            for i in 0..u.len() {
                let e = self.eval_log(u[i]);
                if e.df.norm() == 0.0 {
                    continue;
                }
                // Newton ratio p / (w p') in w, which is F / F_u.
                let ratio = e.f / e.df;
                let mut s = Complex64::new(0.0, 0.0);
                for (j, uj) in u.iter().enumerate() {
                    if j == i {
                        continue;
                    }
                    let d = uj - u[i];
                    if d.re < -700.0 {
                        s += one;
                    } else if d.re <= 700.0 {
                        let q = one - d.exp();
                        if q.norm() > 0.0 {
                            s += one / q;
                        }
                    }
                }
                let c = ratio / (one - ratio * s);
                let next = (one - c).ln();
                if next.re.is_finite() && next.im.is_finite() {
                    u[i] += next;
                    worst = worst.max(c.norm());
                }
            }
            // Below 1e-6, stalling means the corrections hit rounding noise.
            if worst <= 1e-12 || (worst < 1e-6 && worst > 0.5 * prev) {
                break;
            }
            prev = worst;
        }
        for v in u.iter_mut() {
            *v = self.polish(*v);
        }
    }

    /// Newton's method in `u`, at most 50 steps.
    pub fn polish(&self, mut u: Complex64) -> Complex64 {
        for _ in 0..50 {
            let e = self.eval_log(u);
            if e.df.norm() == 0.0 {
                break;
            }
            let step = e.f / e.df;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            u -= step;
            if step.norm() <= 1e-14 * (1.0 + u.norm()) {
                break;
            }
        }
        u
    }
}
