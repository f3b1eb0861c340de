//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := '-' factor | base ('^' int)?
//! base   := number | 'pi' | 'i' | var | func '(' expr ')' | '(' expr ')'
//! var    := 'z' digits | 't' digits?
//! func   := exp | sin | cos
//! ```

use num_complex::Complex64;
use thiserror::Error;

use super::ast::{Expr, Expression};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("variable index {index} out of range 1..={arity}")]
    VariableOutOfRange { index: usize, arity: usize },
    #[error("negative power of a compound subexpression")]
    NegativePowerOfCompound,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (t, at) = lx.next()?;
            let end = t == Tok::End;
            out.push((t, at));
            if end {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(t) = single {
            self.pos += 1;
            return Ok((t, start));
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number(start);
        }
        if c.is_ascii_alphabetic() {
            while self.pos < bytes.len() && bytes[self.pos].is_ascii_alphanumeric() {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
        }
        Err(ParseError {
            kind: ParseErrorKind::Syntax(format!("unexpected character `{}`", c as char)),
            offset: start,
        })
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize), ParseError> {
        let bytes = self.src.as_bytes();
        let digits = |p: &mut usize| {
            let s = *p;
            while *p < bytes.len() && bytes[*p].is_ascii_digit() {
                *p += 1;
            }
            *p - s
        };
        let mut p = self.pos;
        let mut n = digits(&mut p);
        if p < bytes.len() && bytes[p] == b'.' {
            p += 1;
            n += digits(&mut p);
        }
        if n == 0 {
            return Err(ParseError {
                kind: ParseErrorKind::Syntax("malformed number".into()),
                offset: start,
            });
        }
        if p < bytes.len() && (bytes[p] == b'e' || bytes[p] == b'E') {
            let mut q = p + 1;
            if q < bytes.len() && (bytes[q] == b'+' || bytes[q] == b'-') {
                q += 1;
            }
            // Only treat `e` as an exponent marker when digits follow.
            if digits(&mut q) > 0 {
                p = q;
            }
        }
        self.pos = p;
        let text = &self.src[start..p];
        let v: f64 = text.parse().map_err(|_| ParseError {
            kind: ParseErrorKind::Syntax(format!("malformed number `{text}`")),
            offset: start,
        })?;
        Ok((Tok::Num(v), start))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    arity: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, kind: ParseErrorKind) -> Result<T, ParseError> {
        Err(ParseError { kind, offset: self.offset() })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(ParseErrorKind::Syntax(format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    terms.push(Expr::Neg(Box::new(self.term()?)));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Sum(terms) })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.factor()?];
        while *self.peek() == Tok::Star {
            self.bump();
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap() } else { Expr::Product(factors) })
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let k = match self.bump() {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => v as i32,
            _ => {
                return Err(ParseError {
                    kind: ParseErrorKind::Syntax("expected integer exponent".into()),
                    offset: at,
                })
            }
        };
        let k = if negative { -k } else { k };
        if k < 0 && !matches!(base, Expr::Var(_)) {
            return Err(ParseError { kind: ParseErrorKind::NegativePowerOfCompound, offset: at });
        }
        Ok(Expr::Pow(Box::new(base), k))
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Const(Complex64::new(v, 0.0))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => self.ident(name, at),
            Tok::End => Err(ParseError {
                kind: ParseErrorKind::Syntax("unexpected end of input".into()),
                offset: at,
            }),
            t => Err(ParseError {
                kind: ParseErrorKind::Syntax(format!("unexpected token {t:?}")),
                offset: at,
            }),
        }
    }

    fn ident(&mut self, name: String, at: usize) -> Result<Expr, ParseError> {
        match name.as_str() {
            "pi" => return Ok(Expr::Const(Complex64::new(std::f64::consts::PI, 0.0))),
            "i" => return Ok(Expr::Const(Complex64::new(0.0, 1.0))),
            "exp" | "sin" | "cos" => {
                self.expect(Tok::LParen, "`(` after function name")?;
                let arg = Box::new(self.expr()?);
                self.expect(Tok::RParen, "`)`")?;
                return Ok(match name.as_str() {
                    "exp" => Expr::Exp(arg),
                    "sin" => Expr::Sin(arg),
                    _ => Expr::Cos(arg),
                });
            }
            _ => {}
        }
        let (head, digits) = name.split_at(1);
        let all_digits = digits.bytes().all(|b| b.is_ascii_digit());
        let index = match head {
            "z" if !digits.is_empty() && all_digits => digits.parse::<usize>().ok(),
            "t" if digits.is_empty() => Some(1),
            "t" if all_digits => digits.parse::<usize>().ok(),
            _ => None,
        };
        match index {
            Some(i) if i >= 1 && i <= self.arity => Ok(Expr::Var(i - 1)),
            Some(i) => Err(ParseError {
                kind: ParseErrorKind::VariableOutOfRange { index: i, arity: self.arity },
                offset: at,
            }),
            None => Err(ParseError { kind: ParseErrorKind::UnknownIdentifier(name), offset: at }),
        }
    }
}

/// Parses `text` as an expression in `arity` variables.
pub fn parse_expression(text: &str, arity: usize) -> Result<Expression, ParseError> {
    let mut p = Parser { toks: Lexer::tokens(text)?, pos: 0, arity };
    let root = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err(ParseErrorKind::Syntax("trailing input".into()));
    }
    Ok(Expression::new(root, arity).expect("parser checks variable range"))
}

/// Parses a comma-separated list, optionally wrapped in one pair of
/// parentheses: `"(t, exp(t))"` or `"t, exp(t)"`.
pub fn parse_expression_list(text: &str, arity: usize) -> Result<Vec<Expression>, ParseError> {
    let toks = Lexer::tokens(text)?;
    // Split on top-level commas, remembering byte ranges.
    let mut depth = 0i32;
    let mut cuts = Vec::new();
    for (t, at) in &toks {
        match t {
            Tok::LParen => depth += 1,
            Tok::RParen => depth -= 1,
            Tok::Comma if depth <= 1 => cuts.push((*at, depth)),
            _ => {}
        }
    }
    let trimmed = text.trim();
    let wrapped = !cuts.is_empty()
        && cuts.iter().all(|&(_, d)| d == 1)
        && trimmed.starts_with('(')
        && trimmed.ends_with(')');
    if !cuts.is_empty() && !wrapped && cuts.iter().any(|&(_, d)| d != 0) {
        return Err(ParseError {
            kind: ParseErrorKind::Syntax("misplaced `,`".into()),
            offset: cuts.iter().find(|&&(_, d)| d != 0).unwrap().0,
        });
    }
    let (lo, hi) = if wrapped {
        let lo = text.find('(').unwrap() + 1;
        (lo, text.rfind(')').unwrap())
    } else {
        (0, text.len())
    };
    let mut out = Vec::new();
    let mut start = lo;
    for (at, _) in cuts.iter().copied().chain(std::iter::once((hi, 0))) {
        let piece = &text[start..at];
        let e = parse_expression(piece, arity).map_err(|mut e| {
            e.offset += start;
            e
        })?;
        out.push(e);
        start = at + 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_term_sum() {
        let e = parse_expression("1+z1+z2", 2).unwrap();
        match e.root() {
            Expr::Sum(v) => assert_eq!(v.len(), 3),
            other => panic!("expected sum, got {other:?}"),
        }
    }

    #[test]
    fn sine_of_product() {
        let e = parse_expression("sin(pi*z1*z2)", 2).unwrap();
        let Expr::Sin(arg) = e.root() else { panic!("expected sin") };
        let Expr::Product(v) = arg.as_ref() else { panic!("expected product") };
        assert_eq!(v.len(), 3);
        assert_eq!(v[0], Expr::Const(Complex64::new(std::f64::consts::PI, 0.0)));
    }

    #[test]
    fn laurent_monomial_and_exp() {
        let e = parse_expression("z1^-2 + exp(z2)", 2).unwrap();
        let Expr::Sum(v) = e.root() else { panic!() };
        assert_eq!(v[0], Expr::Pow(Box::new(Expr::Var(0)), -2));
        assert!(matches!(v[1], Expr::Exp(_)));
    }

    #[test]
    fn errors_carry_offsets() {
        let e = parse_expression("1 + foo", 2).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownIdentifier("foo".into()));
        assert_eq!(e.offset, 4);

        let e = parse_expression("z3 + 1", 2).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::VariableOutOfRange { index: 3, arity: 2 });
        assert_eq!(e.offset, 0);

        let e = parse_expression("1 + (z1", 2).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
        assert_eq!(e.offset, 7);

        let e = parse_expression("(z1+z2)^-1", 2).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::NegativePowerOfCompound);

        assert!(parse_expression("z0", 2).is_err());
        assert!(parse_expression("1 $ 2", 2).is_err());
    }

    #[test]
    fn numbers_and_whitespace() {
        let e = parse_expression("  2.5e-1 *  t ", 1).unwrap();
        assert_eq!(
            e.root(),
            &Expr::Product(vec![Expr::Const(Complex64::new(0.25, 0.0)), Expr::Var(0)])
        );
        assert_eq!(parse_expression("t2", 2).unwrap().root(), &Expr::Var(1));
    }

    #[test]
    fn lists() {
        let v = parse_expression_list("(t, exp(t))", 1).unwrap();
        assert_eq!(v.len(), 2);
        assert!(matches!(v[1].root(), Expr::Exp(_)));
        let v = parse_expression_list("t, exp(t), t+1", 1).unwrap();
        assert_eq!(v.len(), 3);
        let v = parse_expression_list("(t+1)", 1).unwrap();
        assert_eq!(v.len(), 1);
        let err = parse_expression_list("(t, exp(t)", 1).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));
    }
}
