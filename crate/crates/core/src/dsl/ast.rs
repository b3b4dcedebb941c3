//! Expression syntax tree and recursive-descent parser.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := postfix ('^' unary)?
//! postfix := primary ('@' '(' expr ',' expr ')')*
//! primary := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! So `-a^2 = -(a^2)`, `a^b^c = a^(b^c)`, `a-b-c = (a-b)-c`, and a delay
//! suffix binds tighter than `^`.

use std::fmt;

use num_traits::{Signed, ToPrimitive, Zero};

use super::lexer::{tokenize, Tok, Token};
use super::{ParseError, ParseErrorKind, Pos};
use crate::scalar::{fmt_rational, Rational};

const MAX_DEPTH: usize = 200;
pub(crate) const MAX_RATIONAL_BITS: u64 = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sinh,
    Cosh,
    Exp,
    Sqrt,
    Gamma,
    Dx,
    ExpTime,
    TPoly,
}

impl Func {
    pub fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "gamma" => Func::Gamma,
            "Dx" => Func::Dx,
            "exptime" => Func::ExpTime,
            "tpoly" => Func::TPoly,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Gamma => "gamma",
            Func::Dx => "Dx",
            Func::ExpTime => "exptime",
            Func::TPoly => "tpoly",
        }
    }

    fn arity_ok(self, n: usize) -> bool {
        match self {
            Func::Dx => n == 1 || n == 2,
            Func::TPoly => n >= 1,
            _ => n == 1,
        }
    }

    fn arity_text(self) -> &'static str {
        match self {
            Func::Dx => "1 or 2",
            Func::TPoly => "at least 1",
            _ => "1",
        }
    }
}

#[derive(Debug, Clone)]
pub enum NodeKind {
    Num(Rational),
    Ident(String),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
    /// `inner@(xscale, tscale)`
    At(Box<Node>, Box<Node>, Box<Node>),
}

/// Syntax node with the position of its first token. Equality ignores
/// positions.
#[derive(Debug, Clone)]
pub struct Node {
    pub kind: NodeKind,
    pub pos: Pos,
}

impl PartialEq for Node {
    fn eq(&self, other: &Node) -> bool {
        match (&self.kind, &other.kind) {
            (NodeKind::Num(a), NodeKind::Num(b)) => a == b,
            (NodeKind::Ident(a), NodeKind::Ident(b)) => a == b,
            (NodeKind::Neg(a), NodeKind::Neg(b)) => a == b,
            (NodeKind::Binary(o1, a1, b1), NodeKind::Binary(o2, a2, b2)) => o1 == o2 && a1 == a2 && b1 == b2,
            (NodeKind::Call(f1, a1), NodeKind::Call(f2, a2)) => f1 == f2 && a1 == a2,
            (NodeKind::At(a1, x1, t1), NodeKind::At(a2, x2, t2)) => a1 == a2 && x1 == x2 && t1 == t2,
            _ => false,
        }
    }
}

impl Node {
    /// Visits this node and all descendants.
    pub fn walk(&self, f: &mut dyn FnMut(&Node)) {
        f(self);
        match &self.kind {
            NodeKind::Num(_) | NodeKind::Ident(_) => {}
            NodeKind::Neg(a) => a.walk(f),
            NodeKind::Binary(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            NodeKind::Call(_, args) => args.iter().for_each(|a| a.walk(f)),
            NodeKind::At(a, x, t) => {
                a.walk(f);
                x.walk(f);
                t.walk(f);
            }
        }
    }
}

fn too_big(r: &Rational) -> bool {
    r.numer().bits() > MAX_RATIONAL_BITS || r.denom().bits() > MAX_RATIONAL_BITS
}

/// Builds nodes, folding arithmetic between literal numbers.
fn neg(a: Node, pos: Pos) -> Node {
    match a.kind {
        NodeKind::Num(r) => Node { kind: NodeKind::Num(-r), pos },
        kind => Node { kind: NodeKind::Neg(Box::new(Node { kind, pos: a.pos })), pos },
    }
}

fn binary(op: BinOp, a: Node, b: Node, op_pos: Pos) -> Result<Node, ParseError> {
    let pos = a.pos;
    if let (NodeKind::Num(x), NodeKind::Num(y)) = (&a.kind, &b.kind) {
        let folded = match op {
            BinOp::Add => Some(x + y),
            BinOp::Sub => Some(x - y),
            BinOp::Mul => Some(x * y),
            BinOp::Div => {
                if y.is_zero() {
                    return Err(ParseError::new(op_pos, ParseErrorKind::DivisionByZero));
                }
                Some(x / y)
            }
            BinOp::Pow => match y.is_integer().then(|| y.to_integer().to_i32()).flatten() {
                Some(e) if e.abs() <= 64 && !(x.is_zero() && e < 0) => Some(x.pow(e)),
                _ => None,
            },
        };
        if let Some(r) = folded {
            if too_big(&r) {
                return Err(ParseError::new(op_pos, ParseErrorKind::TooLarge));
            }
            return Ok(Node { kind: NodeKind::Num(r), pos });
        }
    }
    Ok(Node { kind: NodeKind::Binary(op, Box::new(a), Box::new(b)), pos })
}

struct Parser {
    toks: Vec<Token>,
    idx: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.idx]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.idx].clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &'static str) -> Result<Token, ParseError> {
        let t = self.bump();
        if t.tok == tok {
            Ok(t)
        } else {
            Err(unexpected(&t, what))
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            Err(ParseError::new(self.peek().pos, ParseErrorKind::TooDeep))
        } else {
            Ok(())
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            let op_pos = self.bump().pos;
            let rhs = self.term()?;
            lhs = binary(op, lhs, rhs, op_pos)?;
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            let op_pos = self.bump().pos;
            let rhs = self.unary()?;
            lhs = binary(op, lhs, rhs, op_pos)?;
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        self.enter()?;
        let node = match self.peek().tok {
            Tok::Minus => {
                let pos = self.bump().pos;
                let inner = self.unary()?;
                neg(inner, pos)
            }
            Tok::Plus => {
                self.bump();
                self.unary()?
            }
            _ => self.power()?,
        };
        self.depth -= 1;
        Ok(node)
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.postfix()?;
        if self.peek().tok == Tok::Caret {
            let op_pos = self.bump().pos;
            let exponent = self.unary()?;
            return binary(BinOp::Pow, base, exponent, op_pos);
        }
        Ok(base)
    }

    fn postfix(&mut self) -> Result<Node, ParseError> {
        let mut node = self.primary()?;
        while self.peek().tok == Tok::At {
            self.bump();
            self.expect(Tok::LParen, "`(` after `@`")?;
            let xs = self.expr()?;
            self.expect(Tok::Comma, "`,` between the x and t scalings")?;
            let ts = self.expr()?;
            self.expect(Tok::RParen, "`)`")?;
            let pos = node.pos;
            node = Node { kind: NodeKind::At(Box::new(node), Box::new(xs), Box::new(ts)), pos };
        }
        Ok(node)
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        let t = self.bump();
        match t.tok {
            Tok::Num(r) => Ok(Node { kind: NodeKind::Num(r), pos: t.pos }),
            Tok::Ident(name) => {
                if self.peek().tok != Tok::LParen {
                    return Ok(Node { kind: NodeKind::Ident(name), pos: t.pos });
                }
                let func = Func::lookup(&name)
                    .ok_or_else(|| ParseError::new(t.pos, ParseErrorKind::UnknownFunction(name.clone())))?;
                self.bump();
                self.enter()?;
                let mut args = vec![self.expr()?];
                while self.peek().tok == Tok::Comma {
                    self.bump();
                    args.push(self.expr()?);
                }
                self.expect(Tok::RParen, "`)` closing the argument list")?;
                self.depth -= 1;
                if !func.arity_ok(args.len()) {
                    return Err(ParseError::new(
                        t.pos,
                        ParseErrorKind::Arity { func: func.name(), expected: func.arity_text(), found: args.len() },
                    ));
                }
                Ok(Node { kind: NodeKind::Call(func, args), pos: t.pos })
            }
            Tok::LParen => {
                self.enter()?;
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                self.depth -= 1;
                Ok(inner)
            }
            _ => Err(unexpected(&t, "a number, name or `(`")),
        }
    }
}

fn unexpected(t: &Token, expected: &'static str) -> ParseError {
    let kind = if t.tok == Tok::End {
        ParseErrorKind::UnexpectedEnd { expected }
    } else {
        ParseErrorKind::UnexpectedToken { found: t.tok.describe(), expected }
    };
    ParseError::new(t.pos, kind)
}

/// Parses one complete expression located at `origin` in its file.
pub fn parse_ast(src: &str, origin: Pos) -> Result<Node, ParseError> {
    let toks = tokenize(src, origin)?;
    let mut p = Parser { toks, idx: 0, depth: 0 };
    let node = p.expr()?;
    let t = p.peek().clone();
    if t.tok != Tok::End {
        return Err(unexpected(&t, "an operator or end of input"));
    }
    Ok(node)
}

fn fmt_num(r: &Rational) -> String {
    if r.is_integer() && !r.is_negative() {
        fmt_rational(r)
    } else {
        format!("({})", fmt_rational(r))
    }
}

/// Fully parenthesized source form; parses back to an equal tree.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            NodeKind::Num(r) => f.write_str(&fmt_num(r)),
            NodeKind::Ident(name) => f.write_str(name),
            NodeKind::Neg(a) => write!(f, "(-{a})"),
            NodeKind::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            NodeKind::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            NodeKind::At(a, x, t) => write!(f, "({a})@({x}, {t})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn parse(s: &str) -> Node {
        parse_ast(s, Pos { line: 1, column: 1 }).unwrap()
    }

    fn err(s: &str) -> ParseError {
        parse_ast(s, Pos { line: 1, column: 1 }).unwrap_err()
    }

    #[test]
    fn precedence() {
        assert_eq!(parse("a-b-c"), parse("(a-b)-c"));
        assert_ne!(parse("a-b-c"), parse("a-(b-c)"));
        assert_eq!(parse("a^b^c"), parse("a^(b^c)"));
        assert_ne!(parse("a^b^c"), parse("(a^b)^c"));
        assert_eq!(parse("-a^2"), parse("-(a^2)"));
        assert_eq!(parse("a*b+c/d"), parse("(a*b)+(c/d)"));
        assert_eq!(parse("psi@(x/2,t)^2"), parse("(psi@(x/2,t))^2"));
    }

    #[test]
    fn literal_folding() {
        assert_eq!(parse("3/2").kind_num(), Some(rat(3, 2)));
        assert_eq!(parse("-(1/4)").kind_num(), Some(rat(-1, 4)));
        assert_eq!(parse("2^-2").kind_num(), Some(rat(1, 4)));
        assert!(parse("2^(1/2)").kind_num().is_none());
        assert_eq!(err("1/0").kind, ParseErrorKind::DivisionByZero);
    }

    #[test]
    fn error_positions() {
        let e = err("x*(");
        assert_eq!(e.pos.column, 4);
        assert!(matches!(e.kind, ParseErrorKind::UnexpectedEnd { .. }));
        let e = err("x + foo(1)");
        assert_eq!(e.pos.column, 5);
        assert_eq!(e.kind, ParseErrorKind::UnknownFunction("foo".into()));
        let e = err("Dx(psi, 1, 2)");
        assert!(matches!(e.kind, ParseErrorKind::Arity { .. }));
        let e = err("x y");
        assert_eq!(e.pos.column, 3);
    }

    #[test]
    fn depth_limit() {
        let deep = "(".repeat(5000) + "x" + &")".repeat(5000);
        assert_eq!(err(&deep).kind, ParseErrorKind::TooDeep);
        let minus = "-".repeat(5000) + "x";
        assert_eq!(err(&minus).kind, ParseErrorKind::TooDeep);
    }

    #[test]
    fn printing_round_trips() {
        for src in ["x*exp(t)", "-(x+1)^2/3", "Dx(psi)@(x, t/2)*psi@(x/2, t/2)", "2^(1/2) - -x", "gamma(3/2)*tpoly(1, -2)"] {
            let a = parse(src);
            let b = parse(&a.to_string());
            assert_eq!(a, b, "{src} -> {a}");
        }
    }

    impl Node {
        fn kind_num(&self) -> Option<Rational> {
            match &self.kind {
                NodeKind::Num(r) => Some(r.clone()),
                _ => None,
            }
        }
    }
}
