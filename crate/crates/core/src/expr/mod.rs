//! Entire-function expressions: parsing, evaluation, exact Laurent forms and
//! truncated power series.

mod ast;
mod eval;
mod laurent;
mod parse;
mod series;

pub use ast::{Expr, Expression};
pub use eval::EvalError;
pub use laurent::{Exponent, LaurentError, LaurentPolynomial};
pub use parse::{parse_expression, parse_expression_list, ParseError, ParseErrorKind};
pub use series::{SeriesError, SeriesTruncation, DROP_THRESHOLD, MAX_TRANSCENDENTAL_DEPTH};
