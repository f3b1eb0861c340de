use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use super::ast::{Expr, Expression};
use crate::polyhedra::{convex_hull, PolyhedraError, RationalPolytope};

/// Exponent vector of a Laurent monomial.
pub type Exponent = Vec<i64>;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LaurentError {
    #[error("expression contains a transcendental node and is not a Laurent polynomial")]
    NotPolynomial,
}

/// Finite sum of Laurent monomials with nonzero complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentPolynomial {
    nvars: usize,
    terms: BTreeMap<Exponent, Complex64>,
}

impl LaurentPolynomial {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Complex64) -> Self {
        Self::monomial(vec![0; nvars], c)
    }

    pub fn monomial(exp: Exponent, c: Complex64) -> Self {
        let nvars = exp.len();
        let mut terms = BTreeMap::new();
        if c != Complex64::new(0.0, 0.0) {
            terms.insert(exp, c);
        }
        Self { nvars, terms }
    }

    /// Builds from raw terms, merging duplicates and dropping zeros.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Exponent, Complex64)>,
    {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent arity mismatch");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Exponent, c: Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                if c != zero {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == zero {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &[i64]) -> Option<Complex64> {
        self.terms.get(e).copied()
    }

    pub fn support(&self) -> Vec<Exponent> {
        self.terms.keys().cloned().collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_terms(self.nvars, self.terms.iter().map(|(e, c)| (e.clone(), c * s)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let e: Exponent = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    /// Multiplies by the monomial `z^shift`.
    pub fn shift(&self, shift: &[i64]) -> Self {
        Self {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.iter().zip(shift).map(|(a, b)| a + b).collect(), *c))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(self.nvars, Complex64::new(1.0, 0.0));
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| e.iter().zip(z).fold(*c, |acc, (&k, zi)| acc * zi.powi(k as i32)))
            .sum()
    }

    /// Exponent range `(min, max)` of variable `var` over the support.
    pub fn degree_range(&self, var: usize) -> Option<(i64, i64)> {
        let mut it = self.terms.keys().map(|e| e[var]);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), k| (lo.min(k), hi.max(k))))
    }

    /// Convex hull of the support, computed exactly.
    pub fn newton_polytope(&self) -> Result<RationalPolytope, PolyhedraError> {
        if self.terms.is_empty() {
            return Err(PolyhedraError::EmptySupport);
        }
        convex_hull(self.nvars, &self.support())
    }
}

impl fmt::Display for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({} + {}*i)", c.re, c.im)?;
            for (i, &d) in e.iter().enumerate() {
                if d != 0 {
                    write!(f, "*z{}^{}", i + 1, d)?;
                }
            }
        }
        Ok(())
    }
}

fn lower(e: &Expr, n: usize) -> Result<LaurentPolynomial, LaurentError> {
    Ok(match e {
        Expr::Const(c) => LaurentPolynomial::constant(n, *c),
        Expr::Var(i) => {
            let mut exp = vec![0; n];
            exp[*i] = 1;
            LaurentPolynomial::monomial(exp, Complex64::new(1.0, 0.0))
        }
        Expr::Sum(v) => {
            let mut acc = LaurentPolynomial::zero(n);
            for t in v {
                acc = acc.add(&lower(t, n)?);
            }
            acc
        }
        Expr::Product(v) => {
            let mut acc = LaurentPolynomial::constant(n, Complex64::new(1.0, 0.0));
            for t in v {
                acc = acc.mul(&lower(t, n)?);
            }
            acc
        }
        Expr::Neg(a) => lower(a, n)?.neg(),
        Expr::Pow(a, k) if *k < 0 => {
            let Expr::Var(i) = a.as_ref() else {
                unreachable!("negative powers only on variables")
            };
            let mut exp = vec![0; n];
            exp[*i] = *k as i64;
            LaurentPolynomial::monomial(exp, Complex64::new(1.0, 0.0))
        }
        Expr::Pow(a, k) => lower(a, n)?.pow(*k as u32),
        Expr::Exp(_) | Expr::Sin(_) | Expr::Cos(_) => return Err(LaurentError::NotPolynomial),
    })
}

impl Expression {
    /// Exact Laurent-polynomial form; fails on any transcendental node.
    pub fn to_laurent(&self) -> Result<LaurentPolynomial, LaurentError> {
        lower(self.root(), self.arity())
    }
}
