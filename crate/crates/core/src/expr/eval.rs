use num_complex::{Complex, Complex64};
use thiserror::Error;

use super::ast::{Expr, Expression};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("expected {expected} coordinates, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("coordinate {0} is zero; points must lie in the torus")]
    ZeroCoordinate(usize),
    #[error("evaluation produced a non-finite value")]
    NonFinite,
}

fn check_point<T: Real>(e: &Expression, z: &[Complex<T>]) -> Result<(), EvalError> {
    if z.len() != e.arity() {
        return Err(EvalError::ArityMismatch { expected: e.arity(), got: z.len() });
    }
    if let Some(i) = z.iter().position(|c| c.re == T::zero() && c.im == T::zero()) {
        return Err(EvalError::ZeroCoordinate(i));
    }
    Ok(())
}

fn finite<T: Real>(c: Complex<T>) -> Result<Complex<T>, EvalError> {
    if c.re.is_finite() && c.im.is_finite() {
        Ok(c)
    } else {
        Err(EvalError::NonFinite)
    }
}

fn node<T: Real>(e: &Expr, z: &[Complex<T>]) -> Result<Complex<T>, EvalError> {
    let v = match e {
        Expr::Const(c) => Complex::new(T::lit(c.re), T::lit(c.im)),
        Expr::Var(i) => z[*i],
        Expr::Sum(v) => {
            let mut acc = Complex::new(T::zero(), T::zero());
            for t in v {
                acc = acc + node(t, z)?;
            }
            acc
        }
        Expr::Product(v) => {
            let mut acc = Complex::new(T::one(), T::zero());
            for t in v {
                acc = acc * node(t, z)?;
            }
            acc
        }
        Expr::Neg(a) => -node(a, z)?,
        Expr::Pow(a, k) => node(a, z)?.powi(*k),
        Expr::Exp(a) => node(a, z)?.exp(),
        Expr::Sin(a) => node(a, z)?.sin(),
        Expr::Cos(a) => node(a, z)?.cos(),
    };
    finite(v)
}

impl Expression {
    /// Evaluates at a point of the torus. Overflow is reported as
    /// [`EvalError::NonFinite`] instead of being propagated.
    pub fn eval<T: Real>(&self, z: &[Complex<T>]) -> Result<Complex<T>, EvalError> {
        check_point(self, z)?;
        node(self.root(), z)
    }

    /// Evaluates and also returns a magnitude scale: the size the value would
    /// have without cancellation in sums. Residuals are judged against it.
    pub fn eval_with_scale(&self, z: &[Complex64]) -> Result<(Complex64, f64), EvalError> {
        check_point(self, z)?;
        let (v, s) = scaled(self.root(), z)?;
        if !s.is_finite() {
            return Err(EvalError::NonFinite);
        }
        Ok((v, s))
    }
}

fn scaled(e: &Expr, z: &[Complex64]) -> Result<(Complex64, f64), EvalError> {
    let out = match e {
        Expr::Const(c) => (*c, c.norm()),
        Expr::Var(i) => (z[*i], z[*i].norm()),
        Expr::Sum(v) => {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut s = 0.0;
            for t in v {
                let (a, b) = scaled(t, z)?;
                acc += a;
                s += b;
            }
            (acc, s)
        }
        Expr::Product(v) => {
            let mut acc = Complex64::new(1.0, 0.0);
            let mut s = 1.0;
            for t in v {
                let (a, b) = scaled(t, z)?;
                acc *= a;
                s *= b;
            }
            (acc, s)
        }
        Expr::Neg(a) => {
            let (a, s) = scaled(a, z)?;
            (-a, s)
        }
        Expr::Pow(a, k) => {
            let (a, s) = scaled(a, z)?;
            (a.powi(*k), s.powi(*k))
        }
        Expr::Exp(a) => {
            let (a, s) = scaled(a, z)?;
            let v = a.exp();
            (v, v.norm() * (1.0 + s))
        }
        Expr::Sin(a) | Expr::Cos(a) => {
            let (a, s) = scaled(a, z)?;
            let v = if matches!(e, Expr::Sin(_)) { a.sin() } else { a.cos() };
            (v, a.im.abs().cosh() * (1.0 + s))
        }
    };
    finite(out.0)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn line_vanishes() {
        let f = parse_expression("1+z1+z2", 2).unwrap();
        assert_eq!(f.eval(&[c(1.0, 0.0), c(-2.0, 0.0)]).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn sine_at_integer_product() {
        let f = parse_expression("sin(pi*z1*z2)", 2).unwrap();
        assert!(f.eval(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap().norm() < 1e-12);
    }

    #[test]
    fn euler_identity() {
        let f = parse_expression("exp(z1)", 1).unwrap();
        let v = f.eval(&[c(0.0, PI)]).unwrap();
        assert!((v - c(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn single_precision_evaluation() {
        let f = parse_expression("1+z1+z2", 2).unwrap();
        let v = f
            .eval::<f32>(&[Complex::new(0.5f32, 0.0), Complex::new(-1.5f32, 0.0)])
            .unwrap();
        assert!(v.norm() < 1e-6);
    }

    #[test]
    fn overflow_and_domain_errors() {
        let f = parse_expression("exp(z1)", 1).unwrap();
        assert_eq!(f.eval(&[c(1000.0, 0.0)]), Err(EvalError::NonFinite));
        assert_eq!(f.eval(&[c(0.0, 0.0)]), Err(EvalError::ZeroCoordinate(0)));
        assert_eq!(
            f.eval(&[c(1.0, 0.0), c(1.0, 0.0)]),
            Err(EvalError::ArityMismatch { expected: 1, got: 2 })
        );
    }

    #[test]
    fn scale_bounds_value() {
        let f = parse_expression("1+z1+z2", 2).unwrap();
        let (v, s) = f.eval_with_scale(&[c(1.0, 0.0), c(-2.0, 0.0)]).unwrap();
        assert_eq!(v, c(0.0, 0.0));
        assert_eq!(s, 4.0);
    }
}
