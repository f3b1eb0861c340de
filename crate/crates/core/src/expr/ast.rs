use std::fmt;

use num_complex::Complex64;

/// A node of an entire-function expression over torus variables.
///
/// Variables are stored 0-based; they print as `z1`, `z2`, ...
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(Complex64),
    Var(usize),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Neg(Box<Expr>),
    /// Integer power. Negative exponents are only allowed on variables.
    Pow(Box<Expr>, i32),
    Exp(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
}

impl Expr {
    pub fn is_transcendental(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Exp(_) | Expr::Sin(_) | Expr::Cos(_) => true,
            Expr::Neg(a) | Expr::Pow(a, _) => a.is_transcendental(),
            Expr::Sum(v) | Expr::Product(v) => v.iter().any(Expr::is_transcendental),
        }
    }

    /// Largest number of transcendental nodes on any root-to-leaf path.
    pub fn transcendental_depth(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 0,
            Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) => 1 + a.transcendental_depth(),
            Expr::Neg(a) | Expr::Pow(a, _) => a.transcendental_depth(),
            Expr::Sum(v) | Expr::Product(v) => {
                v.iter().map(Expr::transcendental_depth).max().unwrap_or(0)
            }
        }
    }

    /// Largest variable index used (0-based), if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) => {
                a.max_var()
            }
            Expr::Sum(v) | Expr::Product(v) => v.iter().filter_map(Expr::max_var).max(),
        }
    }

    pub fn has_negative_power(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Pow(a, k) => *k < 0 || a.has_negative_power(),
            Expr::Neg(a) | Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) => a.has_negative_power(),
            Expr::Sum(v) | Expr::Product(v) => v.iter().any(Expr::has_negative_power),
        }
    }

    pub fn depends_on(&self, var: usize) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(i) => *i == var,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) => {
                a.depends_on(var)
            }
            Expr::Sum(v) | Expr::Product(v) => v.iter().any(|e| e.depends_on(var)),
        }
    }

    fn fmt_atomic(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Pow(..) => write!(f, "({self})"),
            Expr::Const(c) if !is_plain_const(*c) => write!(f, "({self})"),
            _ => write!(f, "{self}"),
        }
    }
}

fn is_plain_const(c: Complex64) -> bool {
    (c.im == 0.0 && c.re >= 0.0) || (c.re == 0.0 && c.im == 1.0)
}

fn write_f64(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    // `{:?}` is the shortest representation that round-trips.
    write!(f, "{x:?}")
}

/// Prints the normal form: compound nodes are parenthesized so that the
/// output re-parses to an identical tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if c.re == 0.0 && c.im == 1.0 {
                    write!(f, "i")
                } else if c.im == 0.0 && c.re >= 0.0 {
                    write_f64(f, c.re)
                } else {
                    // Not produced by the parser; printed as an equivalent sum.
                    write!(f, "(")?;
                    write_f64(f, c.re.abs())?;
                    write!(f, "{}", if c.im >= 0.0 { " + " } else { " - " })?;
                    write_f64(f, c.im.abs())?;
                    write!(f, "*i)")
                }
            }
            Expr::Var(i) => write!(f, "z{}", i + 1),
            Expr::Sum(v) => {
                write!(f, "(")?;
                for (k, e) in v.iter().enumerate() {
                    if k > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, ")")
            }
            Expr::Product(v) => {
                write!(f, "(")?;
                for (k, e) in v.iter().enumerate() {
                    if k > 0 {
                        write!(f, "*")?;
                    }
                    e.fmt_atomic(f)?;
                }
                write!(f, ")")
            }
            Expr::Neg(a) => {
                write!(f, "(-")?;
                a.fmt_atomic(f)?;
                write!(f, ")")
            }
            Expr::Pow(a, k) => {
                a.fmt_atomic(f)?;
                write!(f, "^{k}")
            }
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
        }
    }
}

/// A parsed expression together with its declared variable arity.
#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    arity: usize,
    root: Expr,
}

impl Expression {
    /// Wraps a tree, checking that every variable index is below `arity`.
    pub fn new(root: Expr, arity: usize) -> Option<Self> {
        match root.max_var() {
            Some(i) if i >= arity => None,
            _ => Some(Self { arity, root }),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn is_polynomial(&self) -> bool {
        !self.root.is_transcendental()
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}
