//! Truncated Taylor expansion of entire expressions by formal composition.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use super::ast::{Expr, Expression};
use super::laurent::{Exponent, LaurentPolynomial};

/// Coefficients smaller than this are treated as underflow and dropped.
pub const DROP_THRESHOLD: f64 = 1e-15;

/// Maximum number of nested exp/sin/cos nodes accepted for expansion.
pub const MAX_TRANSCENDENTAL_DEPTH: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("negative power in an entire-function context")]
    NegativePowerInEntireContext,
    #[error("transcendental nesting depth {0} exceeds the limit of {MAX_TRANSCENDENTAL_DEPTH}")]
    DepthExceeded(usize),
}

/// Taylor coefficients of total degree at most `degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesTruncation {
    pub poly: LaurentPolynomial,
    pub degree: u32,
    /// Set when a nonzero contribution was discarded, either above the
    /// degree bound or below [`DROP_THRESHOLD`].
    pub tail_nonzero: bool,
}

impl SeriesTruncation {
    /// Terms of degree at most `d`.
    pub fn restrict(&self, d: u32) -> LaurentPolynomial {
        LaurentPolynomial::from_terms(
            self.poly.nvars(),
            self.poly
                .terms()
                .filter(|(e, _)| total_degree(e) <= d as i64)
                .map(|(e, c)| (e.clone(), *c)),
        )
    }
}

fn total_degree(e: &[i64]) -> i64 {
    e.iter().sum()
}

#[derive(Clone)]
struct Trunc {
    terms: BTreeMap<Exponent, Complex64>,
    tail: bool,
}

struct Ctx {
    n: usize,
    d: i64,
}

impl Ctx {
    fn constant(&self, c: Complex64) -> Trunc {
        let mut terms = BTreeMap::new();
        if c != Complex64::new(0.0, 0.0) {
            terms.insert(vec![0; self.n], c);
        }
        Trunc { terms, tail: false }
    }

    fn clean(&self, mut t: Trunc) -> Trunc {
        let before = t.terms.len();
        t.terms.retain(|_, c| c.norm() >= DROP_THRESHOLD);
        if t.terms.len() < before {
            t.tail = true;
        }
        t
    }

    fn add(&self, a: &Trunc, b: &Trunc) -> Trunc {
        let mut terms = a.terms.clone();
        for (e, c) in &b.terms {
            *terms.entry(e.clone()).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        terms.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Trunc { terms, tail: a.tail || b.tail }
    }

    fn scale(&self, a: &Trunc, s: Complex64) -> Trunc {
        Trunc { terms: a.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(), tail: a.tail }
    }

    fn mul(&self, a: &Trunc, b: &Trunc) -> Trunc {
        let mut terms: BTreeMap<Exponent, Complex64> = BTreeMap::new();
        let mut tail = (a.tail && !b.terms.is_empty()) || (b.tail && !a.terms.is_empty());
        for (ea, ca) in &a.terms {
            let da = total_degree(ea);
            for (eb, cb) in &b.terms {
                if da + total_degree(eb) > self.d {
                    tail = true;
                    continue;
                }
                let e: Exponent = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                *terms.entry(e).or_insert(Complex64::new(0.0, 0.0)) += ca * cb;
            }
        }
        terms.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Trunc { terms, tail }
    }

    /// Splits off the constant term: `g = g0 + h` with `h(0) = 0`.
    fn split_constant(&self, g: &Trunc) -> (Complex64, Trunc) {
        let zero = vec![0; self.n];
        let g0 = g.terms.get(&zero).copied().unwrap_or(Complex64::new(0.0, 0.0));
        let mut h = g.clone();
        h.terms.remove(&zero);
        (g0, h)
    }

    /// `(sum_k h^k / k!)` split into even and odd parts, with alternating
    /// signs when `alternate` is set (cos/sin of `h`).
    fn power_series(&self, h: &Trunc, alternate: bool) -> (Trunc, Trunc) {
        let mut even = self.constant(Complex64::new(1.0, 0.0));
        let mut odd = Trunc { terms: BTreeMap::new(), tail: false };
        if h.terms.is_empty() {
            even.tail = h.tail;
            return (even, odd);
        }
        let mut power = self.constant(Complex64::new(1.0, 0.0));
        let mut fact = 1.0f64;
        for k in 1..=self.d.max(0) {
            power = self.mul(&power, h);
            fact *= k as f64;
            let sign = if alternate && (k / 2) % 2 == 1 { -1.0 } else { 1.0 };
            let term = self.scale(&power, Complex64::new(sign / fact, 0.0));
            if k % 2 == 0 {
                even = self.add(&even, &term);
            } else {
                odd = self.add(&odd, &term);
            }
        }
        // A nonconstant argument always leaves an infinite tail.
        even.tail = true;
        odd.tail = true;
        (even, odd)
    }

    fn node(&self, e: &Expr) -> Result<Trunc, SeriesError> {
        let out = match e {
            Expr::Const(c) => self.constant(*c),
            Expr::Var(i) => {
                let mut exp = vec![0; self.n];
                exp[*i] = 1;
                let mut terms = BTreeMap::new();
                if self.d >= 1 {
                    terms.insert(exp, Complex64::new(1.0, 0.0));
                }
                Trunc { terms, tail: self.d < 1 }
            }
            Expr::Sum(v) => {
                let mut acc = self.constant(Complex64::new(0.0, 0.0));
                for t in v {
                    acc = self.add(&acc, &self.node(t)?);
                }
                acc
            }
            Expr::Product(v) => {
                let mut acc = self.constant(Complex64::new(1.0, 0.0));
                for t in v {
                    acc = self.mul(&acc, &self.node(t)?);
                }
                acc
            }
            Expr::Neg(a) => self.scale(&self.node(a)?, Complex64::new(-1.0, 0.0)),
            Expr::Pow(_, k) if *k < 0 => return Err(SeriesError::NegativePowerInEntireContext),
            Expr::Pow(a, k) => {
                let base = self.node(a)?;
                let mut acc = self.constant(Complex64::new(1.0, 0.0));
                for _ in 0..*k {
                    acc = self.mul(&acc, &base);
                }
                acc
            }
            Expr::Exp(a) => {
                let (g0, h) = self.split_constant(&self.node(a)?);
                let (even, odd) = self.power_series(&h, false);
                let sum = self.add(&even, &odd);
                self.scale(&sum, g0.exp())
            }
            Expr::Sin(a) | Expr::Cos(a) => {
                let (g0, h) = self.split_constant(&self.node(a)?);
                // cos h = even part, sin h = odd part (alternating signs).
                let (cos_h, sin_h) = self.power_series(&h, true);
                if matches!(e, Expr::Sin(_)) {
                    self.add(&self.scale(&cos_h, g0.sin()), &self.scale(&sin_h, g0.cos()))
                } else {
                    self.add(&self.scale(&cos_h, g0.cos()), &self.scale(&sin_h, -g0.sin()))
                }
            }
        };
        Ok(self.clean(out))
    }
}

impl Expression {
    /// Taylor coefficients of total degree at most `degree`.
    pub fn truncate_series(&self, degree: u32) -> Result<SeriesTruncation, SeriesError> {
        if self.root().has_negative_power() {
            return Err(SeriesError::NegativePowerInEntireContext);
        }
        let depth = self.root().transcendental_depth();
        if depth > MAX_TRANSCENDENTAL_DEPTH {
            return Err(SeriesError::DepthExceeded(depth));
        }
        let ctx = Ctx { n: self.arity(), d: degree as i64 };
        let t = ctx.node(self.root())?;
        Ok(SeriesTruncation {
            poly: LaurentPolynomial::from_terms(self.arity(), t.terms),
            degree,
            tail_nonzero: t.tail,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use std::f64::consts::PI;

    #[test]
    fn sine_of_monomial_degree_four() {
        // sin(pi*w) = pi*w - pi^3 w^3/6 + ...; with w = z1*z2 only the
        // linear term has total degree <= 4.
        let s = parse_expression("sin(pi*z1*z2)", 2).unwrap().truncate_series(4).unwrap();
        assert_eq!(s.poly.len(), 1);
        let c = s.poly.coefficient(&[1, 1]).unwrap();
        assert!((c - Complex64::new(PI, 0.0)).norm() < 1e-15);
        assert!(s.tail_nonzero);

        let s6 = parse_expression("sin(pi*z1*z2)", 2).unwrap().truncate_series(6).unwrap();
        let c3 = s6.poly.coefficient(&[3, 3]).unwrap();
        assert!((c3 - Complex64::new(-PI.powi(3) / 6.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn exponential_series() {
        let s = parse_expression("exp(z1)", 1).unwrap().truncate_series(2).unwrap();
        assert_eq!(s.poly.coefficient(&[0]), Some(Complex64::new(1.0, 0.0)));
        assert_eq!(s.poly.coefficient(&[1]), Some(Complex64::new(1.0, 0.0)));
        assert_eq!(s.poly.coefficient(&[2]), Some(Complex64::new(0.5, 0.0)));
        assert_eq!(s.poly.len(), 3);
        assert!(s.tail_nonzero);
    }

    #[test]
    fn polynomial_fixed_point() {
        let f = parse_expression("1+z1+z2", 2).unwrap();
        let s = f.truncate_series(10).unwrap();
        assert_eq!(s.poly, f.to_laurent().unwrap());
        assert!(!s.tail_nonzero);
    }

    #[test]
    fn shifted_argument() {
        // cos(1 + z) = cos 1 - sin 1 * z - cos 1 * z^2 / 2 + ...
        let s = parse_expression("cos(1+z1)", 1).unwrap().truncate_series(2).unwrap();
        let (c1, s1) = (1f64.cos(), 1f64.sin());
        assert!((s.poly.coefficient(&[0]).unwrap().re - c1).abs() < 1e-15);
        assert!((s.poly.coefficient(&[1]).unwrap().re + s1).abs() < 1e-15);
        assert!((s.poly.coefficient(&[2]).unwrap().re + c1 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_laurent_and_deep_nesting() {
        let f = parse_expression("z1^-1 + exp(z1)", 1).unwrap();
        assert_eq!(f.truncate_series(3), Err(SeriesError::NegativePowerInEntireContext));
        let deep = (0..17).fold("z1".to_string(), |acc, _| format!("exp({acc})"));
        let f = parse_expression(&deep, 1).unwrap();
        assert_eq!(f.truncate_series(2), Err(SeriesError::DepthExceeded(17)));
    }
}
