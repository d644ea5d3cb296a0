//! A small analytical expression language.
//!
//! Expressions are parsed from strings such as `"(Q/(Ks*300*sqrt((Zm-Zv)/5000)))^0.6"`
//! over an ordered list of input names, evaluated at points, printed back to text,
//! and differentiated symbolically.
//!
//! Grammar and precedence, lowest to highest:
//!
//! | level | operators | associativity |
//! |---|---|---|
//! | sum | `+` `-` | left |
//! | product | `*` `/` | left |
//! | prefix | unary `-`, unary `+` | right |
//! | power | `^` | right |
//!
//! Unary minus binds below `^`, so `-x^2` is `-(x^2)` and `-2^2` is `-4`.
//! The exponent of `^` may itself carry a sign: `2^-1` is `0.5`.
//!
//! Supported functions: `sin cos tan exp log sqrt abs tanh` (one argument) and
//! `min max` (two arguments). The identifier `pi` is a constant unless shadowed
//! by an input of the same name.

mod ast;
mod diff;
mod error;
mod parser;

pub use ast::{BinOp, Expression, Func, Node};
pub use diff::{derivative, gradient};
pub use error::{EvalError, ParseError, ParseErrorKind};
pub use parser::parse;
