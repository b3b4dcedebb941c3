//! Plain-text problem descriptions.
//!
//! A problem file is a sequence of `key = value` lines; `#` starts a
//! comment. See the README for the full format.

mod ast;
mod lexer;
mod lower;
mod problem;

use std::fmt;

use thiserror::Error;

pub use ast::{BinOp, Func, Node, NodeKind};
pub use lower::{lower_rhs, LowerScope};
pub use problem::{parse_problem, parse_problem_file, ProblemFile};

use crate::expr::Expr;

/// 1-based line and column (in characters).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("unexpected {found}, expected {expected}")]
    UnexpectedToken { found: String, expected: &'static str },
    #[error("unexpected end of input, expected {expected}")]
    UnexpectedEnd { expected: &'static str },
    #[error("malformed number")]
    InvalidNumber,
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("`{func}` takes {expected} argument(s), found {found}")]
    Arity { func: &'static str, expected: &'static str, found: usize },
    #[error("expression nested too deeply")]
    TooDeep,
    #[error("value or expression too large")]
    TooLarge,
    #[error("division by zero")]
    DivisionByZero,
    #[error("alpha = {0} is outside (0, 1]")]
    AlphaOutOfRange(String),
    #[error("expected {expected} initial condition(s), found {found}")]
    WrongIcCount { expected: usize, found: usize },
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("key `{0}` given twice")]
    DuplicateKey(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("argument scaling must be c*{0} with a positive rational c")]
    InvalidScale(&'static str),
    #[error("time dependence is only allowed through exptime(c), tpoly(...) or t as a factor")]
    TimeDependence,
    #[error("expected a constant")]
    NotConstant,
    #[error("{0}")]
    Unsupported(String),
    #[error("`{0}` is reserved")]
    ReservedName(String),
    #[error("parameter `{0}` declared twice")]
    DuplicateParam(String),
    #[error("order must be an integer between 1 and {max}")]
    InvalidOrder { max: usize },
    #[error("expected `key = value`")]
    MalformedLine,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {kind}")]
pub struct ParseError {
    pub pos: Pos,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub fn new(pos: Pos, kind: ParseErrorKind) -> Self {
        ParseError { pos, kind }
    }
}

/// Parses a standalone expression in x. Any identifier other than `x` is a
/// parameter.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let node = ast::parse_ast(text, Pos { line: 1, column: 1 })?;
    lower::lower_expr(&node, &LowerScope::open())
}

/// Parses an expression to its syntax tree without interpreting it.
pub fn parse_syntax(text: &str) -> Result<Node, ParseError> {
    ast::parse_ast(text, Pos { line: 1, column: 1 })
}
