//! Interpretation of syntax trees as exponential polynomials and as
//! right-hand-side operators.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ast::{BinOp, Func, Node, NodeKind};
use super::{ParseError, ParseErrorKind, Pos};
use crate::error::ScalarError;
use crate::expr::Expr;
use crate::scalar::{int, rat, Rational, Scalar};
use crate::solver::{Factor, RhsOperator, RhsTerm, TimeCoef};

pub(crate) const RESERVED: [&str; 3] = ["x", "t", "psi"];
const MAX_DEGREE: usize = 200;
const MAX_SIZE: usize = 2000;
const MAX_TERMS: usize = 2000;
const MAX_EXPONENT: i64 = 64;
const MAX_DERIVATIVE: i64 = 64;

/// Which identifiers name parameters.
#[derive(Debug, Clone)]
pub struct LowerScope {
    params: Option<BTreeSet<String>>,
}

impl LowerScope {
    /// Every non-reserved identifier is a parameter.
    pub fn open() -> Self {
        LowerScope { params: None }
    }

    pub fn with_params<I: IntoIterator<Item = String>>(names: I) -> Self {
        LowerScope { params: Some(names.into_iter().collect()) }
    }

    fn knows(&self, name: &str) -> bool {
        self.params.as_ref().is_none_or(|p| p.contains(name))
    }
}

fn fail<T>(pos: Pos, kind: ParseErrorKind) -> Result<T, ParseError> {
    Err(ParseError::new(pos, kind))
}

fn math(pos: Pos, e: ScalarError) -> ParseError {
    let kind = match e {
        ScalarError::DivisionByZero => ParseErrorKind::DivisionByZero,
        other => ParseErrorKind::Unsupported(other.to_string()),
    };
    ParseError::new(pos, kind)
}

fn capped(e: Expr, pos: Pos) -> Result<Expr, ParseError> {
    if e.max_degree() > MAX_DEGREE || e.size() > MAX_SIZE {
        return fail(pos, ParseErrorKind::TooLarge);
    }
    Ok(e)
}

/// Lowers an expression in x only.
pub(crate) fn lower_expr(node: &Node, scope: &LowerScope) -> Result<Expr, ParseError> {
    let pos = node.pos;
    match &node.kind {
        NodeKind::Num(r) => Ok(Expr::rational(r.clone())),
        NodeKind::Ident(name) => match name.as_str() {
            "x" => Ok(Expr::x()),
            "t" => fail(pos, ParseErrorKind::TimeDependence),
            "psi" => fail(pos, ParseErrorKind::Unsupported("`psi` may only appear in the right-hand side".into())),
            _ if scope.knows(name) => Ok(Expr::constant(Scalar::param(name))),
            _ => fail(pos, ParseErrorKind::UnknownIdentifier(name.clone())),
        },
        NodeKind::Neg(a) => Ok(-lower_expr(a, scope)?),
        NodeKind::Binary(op, a, b) => match op {
            BinOp::Add => capped(&lower_expr(a, scope)? + &lower_expr(b, scope)?, pos),
            BinOp::Sub => capped(&lower_expr(a, scope)? - &lower_expr(b, scope)?, pos),
            BinOp::Mul => capped(&lower_expr(a, scope)? * &lower_expr(b, scope)?, pos),
            BinOp::Div => {
                let num = lower_expr(a, scope)?;
                let inv = inverse(&lower_expr(b, scope)?, b.pos)?;
                capped(&num * &inv, pos)
            }
            BinOp::Pow => {
                let base = lower_expr(a, scope)?;
                let exp = constant_rational(b, scope)?;
                expr_pow(&base, &exp, pos)
            }
        },
        NodeKind::Call(func, args) => match func {
            Func::Sqrt => expr_pow(&lower_expr(&args[0], scope)?, &rat(1, 2), pos),
            Func::Exp | Func::Cosh | Func::Sinh => {
                let arg = lower_expr(&args[0], scope)?;
                let freq = linear_frequency(&arg).ok_or_else(|| {
                    ParseError::new(
                        args[0].pos,
                        ParseErrorKind::Unsupported(format!("the argument of `{}` must be c*x", func.name())),
                    )
                })?;
                let e = match func {
                    Func::Exp => Expr::exp_linear(freq),
                    Func::Cosh => Expr::cosh_linear(freq),
                    _ => Expr::sinh_linear(freq),
                };
                e.map_err(|e| math(pos, e))
            }
            Func::Gamma => {
                let arg = constant_rational(&args[0], scope)?;
                Ok(Expr::constant(Scalar::gamma(&arg).map_err(|e| math(pos, e))?))
            }
            Func::Dx | Func::ExpTime | Func::TPoly => fail(
                pos,
                ParseErrorKind::Unsupported(format!("`{}` may only appear in the right-hand side", func.name())),
            ),
        },
        NodeKind::At(..) => fail(pos, ParseErrorKind::Unsupported("`@` may only appear in the right-hand side".into())),
    }
}

fn inverse(d: &Expr, pos: Pos) -> Result<Expr, ParseError> {
    if d.is_zero() {
        return fail(pos, ParseErrorKind::DivisionByZero);
    }
    d.recip().map_err(|e| match e {
        ScalarError::NonMonomialRoot => ParseError::new(
            pos,
            ParseErrorKind::Unsupported("divisor must be a constant or a constant times exp(c*x)".into()),
        ),
        other => math(pos, other),
    })
}

/// `c` when `e` is exactly c·x.
fn linear_frequency(e: &Expr) -> Option<Scalar> {
    if e.is_zero() {
        return Some(Scalar::zero());
    }
    e.as_linear_coefficient()
}

fn expr_pow(base: &Expr, exp: &Rational, pos: Pos) -> Result<Expr, ParseError> {
    if exp.is_integer() {
        let n = exp.to_integer().to_i64().filter(|n| n.abs() <= MAX_EXPONENT);
        let Some(n) = n else {
            return fail(pos, ParseErrorKind::TooLarge);
        };
        let b = if n < 0 { inverse(base, pos)? } else { base.clone() };
        let mut acc = Expr::one();
        for _ in 0..n.abs() {
            acc = capped(&acc * &b, pos)?;
        }
        return Ok(acc);
    }
    match base.as_scalar() {
        Some(s) => Ok(Expr::constant(s.pow(exp).map_err(|e| math(pos, e))?)),
        None => fail(pos, ParseErrorKind::Unsupported("non-integer powers need a constant base".into())),
    }
}

fn constant_scalar(node: &Node, scope: &LowerScope) -> Result<Scalar, ParseError> {
    lower_expr(node, scope)?.as_scalar().ok_or_else(|| ParseError::new(node.pos, ParseErrorKind::NotConstant))
}

pub(crate) fn constant_rational(node: &Node, scope: &LowerScope) -> Result<Rational, ParseError> {
    constant_scalar(node, scope)?.as_rational().ok_or_else(|| ParseError::new(node.pos, ParseErrorKind::NotConstant))
}

/// Checks an exact-solution expression: functions of x and t and
/// parameters, without the unknown.
pub(crate) fn check_exact(node: &Node, scope: &LowerScope) -> Result<(), ParseError> {
    let mut result = Ok(());
    node.walk(&mut |n| {
        if result.is_err() {
            return;
        }
        let kind = match &n.kind {
            NodeKind::Ident(name) if name == "psi" => {
                Some(ParseErrorKind::Unsupported("`psi` may not appear in the exact solution".into()))
            }
            NodeKind::Ident(name) if name != "x" && name != "t" && !scope.knows(name) => {
                Some(ParseErrorKind::UnknownIdentifier(name.clone()))
            }
            NodeKind::Call(f @ (Func::Dx | Func::ExpTime | Func::TPoly), _) => Some(ParseErrorKind::Unsupported(
                format!("`{}` may not appear in the exact solution", f.name()),
            )),
            NodeKind::At(..) => Some(ParseErrorKind::Unsupported("`@` may not appear in the exact solution".into())),
            _ => None,
        };
        if let Some(kind) = kind {
            result = Err(ParseError::new(n.pos, kind));
        }
    });
    result
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Unit {
    derivative: usize,
    xscale: Rational,
    tscale: Rational,
}

#[derive(Debug, Clone)]
struct Draft {
    tcoef: TimeCoef,
    units: Vec<Unit>,
    coeff: Expr,
}

type DraftKey = (TimeCoef, Vec<Unit>);

/// Sum of `coeff · tcoef · Π units`, in order of first appearance. Slots
/// whose coefficients cancel stay in place with a zero coefficient.
#[derive(Debug, Clone, Default)]
struct RhsPoly {
    slots: Vec<Draft>,
    index: BTreeMap<DraftKey, usize>,
}

fn canonical(tcoef: TimeCoef, coeff: Expr) -> (TimeCoef, Expr) {
    match tcoef {
        TimeCoef::ExpT(rate) if rate.is_zero() => (TimeCoef::Unit, coeff),
        TimeCoef::PolySeries(mut c) => {
            while c.last().is_some_and(Scalar::is_zero) {
                c.pop();
            }
            match c.len() {
                0 => (TimeCoef::Unit, Expr::zero()),
                1 => (TimeCoef::Unit, coeff.scale(&c[0])),
                _ => {
                    // first nonzero coefficient moves into `coeff`, so that
                    // proportional time factors share a key
                    let lead = c.iter().find(|s| !s.is_zero()).cloned().unwrap();
                    let scaled = c.iter().map(|s| s.checked_div(&lead).expect("nonzero lead")).collect();
                    (TimeCoef::PolySeries(scaled), coeff.scale(&lead))
                }
            }
        }
        other => (other, coeff),
    }
}

fn tcoef_mul(a: &TimeCoef, b: &TimeCoef, pos: Pos) -> Result<TimeCoef, ParseError> {
    Ok(match (a, b) {
        (TimeCoef::Unit, other) | (other, TimeCoef::Unit) => other.clone(),
        (TimeCoef::ExpT(r), TimeCoef::ExpT(s)) => TimeCoef::ExpT(r + s),
        (TimeCoef::PolySeries(p), TimeCoef::PolySeries(q)) => {
            if p.len() + q.len() > MAX_EXPONENT as usize {
                return fail(pos, ParseErrorKind::TooLarge);
            }
            let mut out = vec![Scalar::zero(); p.len() + q.len() - 1];
            for (i, a) in p.iter().enumerate() {
                for (j, b) in q.iter().enumerate() {
                    out[i + j] = &out[i + j] + &(a * b);
                }
            }
            TimeCoef::PolySeries(out)
        }
        _ => {
            return fail(
                pos,
                ParseErrorKind::Unsupported("exptime(...) cannot be multiplied by a polynomial in t".into()),
            )
        }
    })
}

impl RhsPoly {
    fn single(tcoef: TimeCoef, units: Vec<Unit>, coeff: Expr) -> Self {
        let mut p = RhsPoly::default();
        p.push(Draft { tcoef, units, coeff });
        p
    }

    fn constant(e: Expr) -> Self {
        RhsPoly::single(TimeCoef::Unit, Vec::new(), e)
    }

    fn push(&mut self, d: Draft) {
        let (tcoef, coeff) = canonical(d.tcoef, d.coeff);
        if coeff.is_zero() {
            return;
        }
        let key = (tcoef, d.units);
        match self.index.get(&key) {
            Some(&i) => self.slots[i].coeff = &self.slots[i].coeff + &coeff,
            None => {
                self.index.insert(key.clone(), self.slots.len());
                self.slots.push(Draft { tcoef: key.0, units: key.1, coeff });
            }
        }
    }

    fn live(&self) -> impl Iterator<Item = &Draft> {
        self.slots.iter().filter(|d| !d.coeff.is_zero())
    }

    fn check(self, pos: Pos) -> Result<Self, ParseError> {
        if self.slots.len() > MAX_TERMS {
            return fail(pos, ParseErrorKind::TooLarge);
        }
        for d in self.live() {
            if d.units.len() > MAX_EXPONENT as usize {
                return fail(pos, ParseErrorKind::TooLarge);
            }
            capped(d.coeff.clone(), pos)?;
        }
        Ok(self)
    }

    fn add(mut self, other: RhsPoly, pos: Pos) -> Result<Self, ParseError> {
        for d in other.slots {
            self.push(d);
        }
        self.check(pos)
    }

    fn neg(self) -> Self {
        let mut out = self;
        for d in &mut out.slots {
            d.coeff = -&d.coeff;
        }
        out
    }

    fn mul(&self, other: &RhsPoly, pos: Pos) -> Result<Self, ParseError> {
        let mut out = RhsPoly::default();
        for a in self.live() {
            for b in other.live() {
                let tcoef = tcoef_mul(&a.tcoef, &b.tcoef, pos)?;
                let mut units: Vec<Unit> = a.units.iter().chain(&b.units).cloned().collect();
                units.sort();
                out.push(Draft { tcoef, units, coeff: capped(&a.coeff * &b.coeff, pos)? });
            }
            if out.slots.len() > MAX_TERMS {
                return fail(pos, ParseErrorKind::TooLarge);
            }
        }
        out.check(pos)
    }

    /// d/dx by the product rule; the chain rule contributes each factor's
    /// x-scale.
    fn dx(&self, pos: Pos) -> Result<Self, ParseError> {
        let mut out = RhsPoly::default();
        for d in self.live() {
            out.push(Draft { tcoef: d.tcoef.clone(), units: d.units.clone(), coeff: d.coeff.diff_x() });
            for i in 0..d.units.len() {
                let mut units = d.units.clone();
                units[i].derivative += 1;
                let scale = Scalar::from_rational(units[i].xscale.clone());
                units.sort();
                out.push(Draft { tcoef: d.tcoef.clone(), units, coeff: d.coeff.scale(&scale) });
            }
        }
        out.check(pos)
    }

    /// Substitutes x → a·x and t → b·t.
    fn substitute(&self, a: &Rational, b: &Rational) -> Self {
        let mut out = RhsPoly::default();
        for d in self.live() {
            let tcoef = match &d.tcoef {
                TimeCoef::Unit => TimeCoef::Unit,
                TimeCoef::ExpT(r) => TimeCoef::ExpT(r.scale(b)),
                TimeCoef::PolySeries(c) => {
                    let mut power = Rational::one();
                    let mut scaled = Vec::with_capacity(c.len());
                    for ci in c {
                        scaled.push(ci.scale(&power));
                        power *= b;
                    }
                    TimeCoef::PolySeries(scaled)
                }
            };
            let mut units: Vec<Unit> = d
                .units
                .iter()
                .map(|u| Unit { derivative: u.derivative, xscale: &u.xscale * a, tscale: &u.tscale * b })
                .collect();
            units.sort();
            out.push(Draft { tcoef, units, coeff: d.coeff.scale_x(a) });
        }
        out
    }

    fn finish(self) -> RhsOperator {
        let terms = self
            .slots
            .into_iter()
            .filter(|d| !d.coeff.is_zero())
            .map(|d| {
                let mut factors: Vec<Factor> = Vec::new();
                for u in d.units {
                    match factors.last_mut() {
                        Some(f) if f.derivative == u.derivative && f.xscale == u.xscale && f.tscale == u.tscale => {
                            f.power += 1
                        }
                        _ => factors.push(Factor {
                            derivative: u.derivative,
                            xscale: u.xscale,
                            tscale: u.tscale,
                            power: 1,
                        }),
                    }
                }
                RhsTerm { coeff: d.coeff, tcoef: d.tcoef, factors }
            })
            .collect();
        RhsOperator { terms, forcing: Default::default() }
    }
}

/// True when the node uses anything beyond a plain function of x.
fn has_rhs_syntax(node: &Node) -> bool {
    let mut found = false;
    node.walk(&mut |n| match &n.kind {
        NodeKind::Ident(name) if name == "psi" || name == "t" => found = true,
        NodeKind::Call(Func::Dx | Func::ExpTime | Func::TPoly, _) | NodeKind::At(..) => found = true,
        _ => {}
    });
    found
}

fn small_integer(node: &Node, scope: &LowerScope, max: i64) -> Result<i64, ParseError> {
    let r = constant_rational(node, scope)?;
    match r.is_integer().then(|| r.to_integer().to_i64()).flatten() {
        Some(n) if (0..=max).contains(&n) => Ok(n),
        _ => fail(node.pos, ParseErrorKind::Unsupported(format!("expected an integer between 0 and {max}"))),
    }
}

/// Reads an argument scaling of the form c·var with c a positive rational.
fn scale_of(node: &Node, var: &'static str, scope: &LowerScope) -> Result<Rational, ParseError> {
    let bad = || ParseError::new(node.pos, ParseErrorKind::InvalidScale(var));
    let constant = |n: &Node| -> Result<Rational, ParseError> {
        if has_var(n, var) {
            return Err(bad());
        }
        constant_rational(n, scope).map_err(|_| bad())
    };
    let c = match &node.kind {
        NodeKind::Ident(name) if name == var => int(1),
        NodeKind::Binary(BinOp::Mul, a, b) if has_var(a, var) => scale_of(a, var, scope)? * constant(b)?,
        NodeKind::Binary(BinOp::Mul, a, b) => constant(a)? * scale_of(b, var, scope)?,
        NodeKind::Binary(BinOp::Div, a, b) => {
            let d = constant(b)?;
            if d.is_zero() {
                return fail(b.pos, ParseErrorKind::DivisionByZero);
            }
            scale_of(a, var, scope)? / d
        }
        NodeKind::Neg(a) => -scale_of(a, var, scope)?,
        _ => return Err(bad()),
    };
    if c.is_positive() {
        Ok(c)
    } else {
        Err(bad())
    }
}

fn has_var(node: &Node, var: &str) -> bool {
    let mut found = false;
    node.walk(&mut |n| {
        if matches!(&n.kind, NodeKind::Ident(name) if name == var) {
            found = true;
        }
    });
    found
}

fn lower_rhs_node(node: &Node, scope: &LowerScope) -> Result<RhsPoly, ParseError> {
    let pos = node.pos;
    if !has_rhs_syntax(node) {
        return Ok(RhsPoly::constant(lower_expr(node, scope)?));
    }
    match &node.kind {
        NodeKind::Ident(name) if name == "psi" => Ok(RhsPoly::single(
            TimeCoef::Unit,
            vec![Unit { derivative: 0, xscale: int(1), tscale: int(1) }],
            Expr::one(),
        )),
        NodeKind::Ident(_) => Ok(RhsPoly::single(
            TimeCoef::PolySeries(vec![Scalar::zero(), Scalar::one()]),
            Vec::new(),
            Expr::one(),
        )),
        NodeKind::Neg(a) => Ok(lower_rhs_node(a, scope)?.neg()),
        NodeKind::Binary(op, a, b) => match op {
            BinOp::Add => lower_rhs_node(a, scope)?.add(lower_rhs_node(b, scope)?, pos),
            BinOp::Sub => lower_rhs_node(a, scope)?.add(lower_rhs_node(b, scope)?.neg(), pos),
            BinOp::Mul => lower_rhs_node(a, scope)?.mul(&lower_rhs_node(b, scope)?, pos),
            BinOp::Div => {
                if has_rhs_syntax(b) {
                    return fail(
                        b.pos,
                        ParseErrorKind::Unsupported("cannot divide by an expression in psi or t".into()),
                    );
                }
                let inv = inverse(&lower_expr(b, scope)?, b.pos)?;
                lower_rhs_node(a, scope)?.mul(&RhsPoly::constant(inv), pos)
            }
            BinOp::Pow => {
                let n = small_integer(b, scope, MAX_EXPONENT)?;
                let base = lower_rhs_node(a, scope)?;
                let mut acc = RhsPoly::constant(Expr::one());
                for _ in 0..n {
                    acc = acc.mul(&base, pos)?;
                }
                Ok(acc)
            }
        },
        NodeKind::Call(Func::ExpTime, args) => {
            let rate = constant_scalar(&args[0], scope)?;
            Ok(RhsPoly::single(TimeCoef::ExpT(rate), Vec::new(), Expr::one()))
        }
        NodeKind::Call(Func::TPoly, args) => {
            let coeffs = args.iter().map(|a| constant_scalar(a, scope)).collect::<Result<Vec<_>, _>>()?;
            Ok(RhsPoly::single(TimeCoef::PolySeries(coeffs), Vec::new(), Expr::one()))
        }
        NodeKind::Call(Func::Dx, args) => {
            let n = match args.get(1) {
                Some(order) => small_integer(order, scope, MAX_DERIVATIVE)?,
                None => 1,
            };
            let mut p = lower_rhs_node(&args[0], scope)?;
            for _ in 0..n {
                p = p.dx(pos)?;
            }
            Ok(p)
        }
        NodeKind::Call(func, args) => {
            if args.iter().any(|a| has_var(a, "t")) {
                fail(pos, ParseErrorKind::TimeDependence)
            } else {
                fail(pos, ParseErrorKind::Unsupported(format!("`{}` cannot be applied to psi", func.name())))
            }
        }
        NodeKind::At(inner, xs, ts) => {
            let a = scale_of(xs, "x", scope)?;
            let b = scale_of(ts, "t", scope)?;
            Ok(lower_rhs_node(inner, scope)?.substitute(&a, &b))
        }
        NodeKind::Num(_) => unreachable!("numbers carry no right-hand-side syntax"),
    }
}

/// Lowers a right-hand side to an operator; identical products of the
/// unknown are collected into one term.
pub fn lower_rhs(node: &Node, scope: &LowerScope) -> Result<RhsOperator, ParseError> {
    Ok(lower_rhs_node(node, scope)?.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_syntax;

    fn rhs(src: &str) -> RhsOperator {
        lower_rhs(&parse_syntax(src).unwrap(), &LowerScope::open()).unwrap()
    }

    fn rhs_err(src: &str) -> ParseErrorKind {
        lower_rhs(&parse_syntax(src).unwrap(), &LowerScope::open()).unwrap_err().kind
    }

    fn e(src: &str) -> Expr {
        crate::dsl::parse_expr(src).unwrap()
    }

    #[test]
    fn kolmogorov_operator() {
        let op = rhs("(x+1)*Dx(psi) + x^2*exptime(1)*Dx(psi,2)");
        assert_eq!(op.terms.len(), 2);
        assert_eq!(op.terms[0].coeff, e("x+1"));
        assert_eq!(op.terms[0].tcoef, TimeCoef::Unit);
        assert_eq!(op.terms[0].factors, vec![Factor::plain(1)]);
        assert_eq!(op.terms[1].tcoef, TimeCoef::ExpT(Scalar::one()));
        assert_eq!(op.terms[1].factors, vec![Factor::plain(2)]);
    }

    #[test]
    fn delay_operator() {
        let op = rhs("Dx(psi,2) + Dx(psi)@(x,t/2) * psi@(x/2,t/2) + (1/2)*psi");
        assert_eq!(op.terms.len(), 3);
        let middle = &op.terms[1].factors;
        assert_eq!(middle.len(), 2);
        let scales: Vec<_> = middle.iter().map(|f| (f.derivative, f.xscale.clone(), f.tscale.clone())).collect();
        assert!(scales.contains(&(1, int(1), rat(1, 2))));
        assert!(scales.contains(&(0, rat(1, 2), rat(1, 2))));
        assert_eq!(op.terms[2].coeff, Expr::rational(rat(1, 2)));
    }

    #[test]
    fn leibniz_expansion() {
        // (psi^2)'' = 2 psi psi'' + 2 psi'^2
        let op = rhs("Dx(psi^2, 2)");
        assert_eq!(op.terms.len(), 2);
        let two = Expr::rational(int(2));
        assert!(op.terms.iter().all(|t| t.coeff == two));
        assert!(op.terms.iter().any(|t| t.factors == vec![Factor { power: 2, ..Factor::plain(1) }]));
        assert!(op.terms.iter().any(|t| t.factors == vec![Factor::plain(0), Factor::plain(2)]));
        // chain rule under a scaling
        let op = rhs("Dx(psi@(x/2, t))");
        assert_eq!(op.terms[0].coeff, Expr::rational(rat(1, 2)));
        assert_eq!(op.terms[0].factors[0].xscale, rat(1, 2));
    }

    #[test]
    fn cancellation_and_time_forms() {
        assert!(rhs("psi - psi").terms.is_empty());
        let op = rhs("t*psi + tpoly(0, 2)*psi");
        assert_eq!(op.terms.len(), 1);
        assert_eq!(op.terms[0].tcoef, TimeCoef::PolySeries(vec![Scalar::zero(), Scalar::one()]));
        assert_eq!(op.terms[0].coeff, Expr::rational(int(3)));
        let op = rhs("exptime(2)@(x, t/2)*psi");
        assert_eq!(op.terms[0].tcoef, TimeCoef::ExpT(Scalar::one()));
        assert_eq!(op.terms[0].factors[0].tscale, int(1));
    }

    #[test]
    fn rejections() {
        assert_eq!(rhs_err("exp(t)*psi"), ParseErrorKind::TimeDependence);
        assert!(matches!(rhs_err("psi@(x^2, t)"), ParseErrorKind::InvalidScale("x")));
        assert!(matches!(rhs_err("psi@(-x, t)"), ParseErrorKind::InvalidScale("x")));
        assert!(matches!(rhs_err("psi@(x, x)"), ParseErrorKind::InvalidScale("t")));
        assert!(matches!(rhs_err("psi@(x, sqrt(2)*t)"), ParseErrorKind::InvalidScale("t")));
        assert!(matches!(rhs_err("cosh(psi)"), ParseErrorKind::Unsupported(_)));
        assert!(matches!(rhs_err("psi/psi"), ParseErrorKind::Unsupported(_)));
        assert!(matches!(rhs_err("psi^(1/2)"), ParseErrorKind::Unsupported(_)));
        assert!(matches!(rhs_err("exptime(x)*psi"), ParseErrorKind::NotConstant));
    }

    #[test]
    fn expressions() {
        let f0 = e("2*lambda^2/(3*nu)*(1 - cosh(sqrt(nu/omega)*x/2))");
        let c = Scalar::param("nu").pow(&rat(1, 2)).unwrap() * Scalar::param("omega").pow(&rat(-1, 2)).unwrap();
        let amp = Scalar::param("lambda").powi(2).checked_div(&Scalar::param("nu")).unwrap().scale(&rat(2, 3));
        let expected = (&Expr::one() - &Expr::cosh_linear(c.scale(&rat(1, 2))).unwrap()).scale(&amp);
        assert_eq!(f0, expected);
        assert_eq!(e("x+1"), &Expr::x() + &Expr::one());
        assert_eq!(e("exp(x)/exp(x)"), Expr::one());
        assert_eq!(e("0.5*x"), e("x/2"));
        assert!(crate::dsl::parse_expr("x*(").is_err());
        assert!(crate::dsl::parse_expr("1/(x+1)").is_err());
        assert!(crate::dsl::parse_expr("exp(x^2)").is_err());
        assert!(crate::dsl::parse_expr("exp(1)").is_err());
        assert!(crate::dsl::parse_expr("x^100").is_err());
        assert!(crate::dsl::parse_expr("(-2)^(1/2)").is_err());
    }
}
