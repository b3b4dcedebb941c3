use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, ToPrimitive};

use super::ast::{parse_ast, Func, Node};
use super::lower::{check_exact, constant_rational, lower_expr, lower_rhs, LowerScope, RESERVED};
use super::{ParseError, ParseErrorKind, Pos};
use crate::expr::Expr;
use crate::scalar::{fmt_rational, Rational, Scalar};
use crate::solver::{Factor, Problem, RhsOperator, RhsTerm, TimeCoef};

const MAX_ORDER: usize = 16;
const MAX_FORCING_INDEX: usize = 1000;

/// A parsed problem file: the problem plus its optional label and exact
/// solution (a function of x and t, kept as syntax for numeric use).
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub name: Option<String>,
    pub problem: Problem,
    pub exact: Option<Node>,
}

struct Entry {
    key: String,
    arg: Option<String>,
    key_pos: Pos,
    value: String,
    value_pos: Pos,
}

fn split_line(number: usize, raw: &str) -> Result<Option<Entry>, ParseError> {
    let content = raw.split('#').next().unwrap_or("");
    if content.trim().is_empty() {
        return Ok(None);
    }
    let column_of = |byte: usize| content[..byte].chars().count() + 1;
    let start = content.len() - content.trim_start().len();
    let key_pos = Pos { line: number, column: column_of(start) };
    let Some(eq) = content.find('=') else {
        return Err(ParseError::new(key_pos, ParseErrorKind::MalformedLine));
    };
    let mut words = content[..eq].split_whitespace();
    let key = words.next().ok_or_else(|| ParseError::new(key_pos, ParseErrorKind::MalformedLine))?.to_string();
    let arg = words.next().map(str::to_string);
    if words.next().is_some() {
        return Err(ParseError::new(key_pos, ParseErrorKind::MalformedLine));
    }
    let after = &content[eq + 1..];
    let lead = after.len() - after.trim_start().len();
    let value = after.trim().to_string();
    let value_pos = Pos { line: number, column: column_of(eq + 1 + lead) };
    if value.is_empty() {
        return Err(ParseError::new(value_pos, ParseErrorKind::UnexpectedEnd { expected: "a value" }));
    }
    Ok(Some(Entry { key, arg, key_pos, value, value_pos }))
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_alphabetic() || c == '_') && chars.all(|c| c.is_alphanumeric() || c == '_')
}

fn index_arg(e: &Entry, max: usize) -> Result<usize, ParseError> {
    let text = e.arg.as_deref().unwrap_or("");
    text.parse::<usize>()
        .ok()
        .filter(|k| *k <= max)
        .ok_or_else(|| ParseError::new(e.key_pos, ParseErrorKind::Unsupported(format!("expected an index 0..={max} after `{}`", e.key))))
}

fn no_arg(e: &Entry) -> Result<(), ParseError> {
    match e.arg {
        Some(_) => Err(ParseError::new(e.key_pos, ParseErrorKind::MalformedLine)),
        None => Ok(()),
    }
}

/// Parses and validates a problem file.
pub fn parse_problem_file(text: &str) -> Result<ProblemFile, ParseError> {
    let mut entries = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        last_line = i + 1;
        if let Some(e) = split_line(i + 1, raw)? {
            entries.push(e);
        }
    }
    let eof = Pos { line: last_line + 1, column: 1 };

    // parameters first, so later values may refer to them
    let mut params = BTreeMap::new();
    let constants = LowerScope::with_params(std::iter::empty());
    for e in entries.iter().filter(|e| e.key == "param") {
        let name = e.arg.clone().ok_or_else(|| ParseError::new(e.key_pos, ParseErrorKind::MalformedLine))?;
        if !is_identifier(&name) {
            return Err(ParseError::new(e.key_pos, ParseErrorKind::MalformedLine));
        }
        if RESERVED.contains(&name.as_str()) || Func::lookup(&name).is_some() {
            return Err(ParseError::new(e.key_pos, ParseErrorKind::ReservedName(name)));
        }
        let node = parse_ast(&e.value, e.value_pos)?;
        let value = lower_expr(&node, &constants)?
            .as_scalar()
            .ok_or_else(|| ParseError::new(e.value_pos, ParseErrorKind::NotConstant))?;
        if params.insert(name.clone(), value).is_some() {
            return Err(ParseError::new(e.key_pos, ParseErrorKind::DuplicateParam(name)));
        }
    }
    let scope = LowerScope::with_params(params.keys().cloned());

    let mut seen = BTreeSet::new();
    let mut name = None;
    let mut alpha = None;
    let mut order = None;
    let mut rhs = None;
    let mut exact = None;
    let mut ics: BTreeMap<usize, (Expr, Pos)> = BTreeMap::new();
    let mut forcing = BTreeMap::new();
    for e in &entries {
        let id = match &e.arg {
            Some(a) => format!("{} {a}", e.key),
            None => e.key.clone(),
        };
        if e.key != "param" && !seen.insert(id.clone()) {
            return Err(ParseError::new(e.key_pos, ParseErrorKind::DuplicateKey(id)));
        }
        match e.key.as_str() {
            "param" => {}
            "name" => {
                no_arg(e)?;
                name = Some(e.value.clone());
            }
            "alpha" => {
                no_arg(e)?;
                let a = constant_rational(&parse_ast(&e.value, e.value_pos)?, &constants)?;
                if !a.is_positive() || a > Rational::one() {
                    return Err(ParseError::new(e.value_pos, ParseErrorKind::AlphaOutOfRange(fmt_rational(&a))));
                }
                alpha = Some(a);
            }
            "order" => {
                no_arg(e)?;
                let bad = || ParseError::new(e.value_pos, ParseErrorKind::InvalidOrder { max: MAX_ORDER });
                let r = constant_rational(&parse_ast(&e.value, e.value_pos)?, &constants).map_err(|_| bad())?;
                let m = r.is_integer().then(|| r.to_integer().to_usize()).flatten();
                order = Some(m.filter(|m| (1..=MAX_ORDER).contains(m)).ok_or_else(bad)?);
            }
            "rhs" => {
                no_arg(e)?;
                rhs = Some(lower_rhs(&parse_ast(&e.value, e.value_pos)?, &scope)?);
            }
            "exact" => {
                no_arg(e)?;
                let node = parse_ast(&e.value, e.value_pos)?;
                check_exact(&node, &scope)?;
                exact = Some(node);
            }
            "forcing" => {
                let k = index_arg(e, MAX_FORCING_INDEX)?;
                let value = lower_expr(&parse_ast(&e.value, e.value_pos)?, &scope)?;
                if !value.is_zero() {
                    forcing.insert(k, value);
                }
            }
            key => {
                let index = key.strip_prefix("ic").filter(|s| !s.is_empty() && s.chars().all(|c| c.is_ascii_digit()));
                let Some(index) = index else {
                    return Err(ParseError::new(e.key_pos, ParseErrorKind::UnknownKey(e.key.clone())));
                };
                no_arg(e)?;
                let k = index.parse::<usize>().unwrap_or(usize::MAX);
                let value = lower_expr(&parse_ast(&e.value, e.value_pos)?, &scope)?;
                ics.insert(k, (value, e.key_pos));
            }
        }
    }

    let alpha = alpha.ok_or_else(|| ParseError::new(eof, ParseErrorKind::MissingKey("alpha")))?;
    let mut rhs = rhs.ok_or_else(|| ParseError::new(eof, ParseErrorKind::MissingKey("rhs")))?;
    let order = order.unwrap_or(1);
    let wrong = |pos| ParseError::new(pos, ParseErrorKind::WrongIcCount { expected: order, found: ics.len() });
    if let Some((_, (_, pos))) = ics.iter().find(|(k, _)| **k >= order) {
        return Err(wrong(*pos));
    }
    if ics.len() != order {
        return Err(wrong(eof));
    }
    rhs.forcing = forcing;
    let problem = Problem { order, alpha, rhs, ics: ics.into_values().map(|(v, _)| v).collect(), params };
    problem
        .validate()
        .map_err(|err| ParseError::new(eof, ParseErrorKind::Unsupported(err.to_string())))?;
    Ok(ProblemFile { name, problem, exact })
}

pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    parse_problem_file(text).map(|f| f.problem)
}

fn fmt_scale(c: &Rational, var: &str) -> String {
    if c.is_one() {
        var.to_string()
    } else {
        format!("{}*{var}", fmt_rational(c))
    }
}

fn fmt_factor(f: &Factor) -> String {
    let mut s = match f.derivative {
        0 => "psi".to_string(),
        1 => "Dx(psi)".to_string(),
        n => format!("Dx(psi, {n})"),
    };
    if !f.xscale.is_one() || !f.tscale.is_one() {
        s = format!("{s}@({}, {})", fmt_scale(&f.xscale, "x"), fmt_scale(&f.tscale, "t"));
    }
    if f.power > 1 {
        s = format!("{s}^{}", f.power);
    }
    s
}

fn fmt_time(t: &TimeCoef) -> Option<String> {
    match t {
        TimeCoef::Unit => None,
        TimeCoef::ExpT(rate) => Some(format!("exptime({rate})")),
        TimeCoef::PolySeries(c) => {
            Some(format!("tpoly({})", c.iter().map(Scalar::to_string).collect::<Vec<_>>().join(", ")))
        }
    }
}

fn fmt_term(term: &RhsTerm) -> String {
    let mut parts = Vec::new();
    if !term.coeff.is_one_expr() || (term.factors.is_empty() && term.tcoef == TimeCoef::Unit) {
        parts.push(format!("({})", term.coeff));
    }
    parts.extend(fmt_time(&term.tcoef));
    parts.extend(term.factors.iter().map(fmt_factor));
    parts.join("*")
}

/// Source text of a right-hand side; parses back to an equal operator
/// (forcing lines are written separately).
pub(crate) fn fmt_rhs(rhs: &RhsOperator) -> String {
    if rhs.terms.is_empty() {
        return "0".to_string();
    }
    rhs.terms.iter().map(fmt_term).collect::<Vec<_>>().join(" + ")
}

trait IsOne {
    fn is_one_expr(&self) -> bool;
}

impl IsOne for Expr {
    fn is_one_expr(&self) -> bool {
        self.as_scalar().is_some_and(|s| s.is_one())
    }
}

impl fmt::Display for ProblemFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.problem;
        if let Some(name) = &self.name {
            writeln!(f, "name = {name}")?;
        }
        writeln!(f, "alpha = {}", fmt_rational(&p.alpha))?;
        writeln!(f, "order = {}", p.order)?;
        for (name, value) in &p.params {
            writeln!(f, "param {name} = {value}")?;
        }
        writeln!(f, "rhs = {}", fmt_rhs(&p.rhs))?;
        for (k, ic) in p.ics.iter().enumerate() {
            writeln!(f, "ic{k} = {ic}")?;
        }
        for (k, h) in &p.rhs.forcing {
            writeln!(f, "forcing {k} = {h}")?;
        }
        if let Some(exact) = &self.exact {
            writeln!(f, "exact = {exact}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    const KOLMOGOROV: &str = "\
# Kolmogorov
alpha = 1/2
rhs = (x+1)*Dx(psi) + x^2*exptime(1)*Dx(psi,2)
ic0 = x+1
";

    #[test]
    fn kolmogorov_file() {
        let p = parse_problem(KOLMOGOROV).unwrap();
        assert_eq!(p.order, 1);
        assert_eq!(p.alpha, rat(1, 2));
        assert_eq!(p.rhs.terms.len(), 2);
        assert_eq!(p.rhs.terms[1].tcoef, TimeCoef::ExpT(Scalar::one()));
    }

    #[test]
    fn round_trip() {
        let src = "\
name = test
alpha = 0.25
order = 2
param nu = 3/2
param omega = 2
rhs = nu*Dx(psi^2, 2) - omega*Dx(psi,4) + t*psi@(x/2, t/3)^2 + exptime(-1)*x + cosh(x)
ic0 = 2*nu*(1 - cosh(sqrt(nu/omega)*x/2))
ic1 = x*exp(-x) + gamma(3/2)
forcing 3 = sinh(2*x)
exact = x*exp(t) - nu
";
        let a = parse_problem_file(src).unwrap();
        let printed = a.to_string();
        let b = parse_problem_file(&printed).unwrap();
        assert_eq!(a, b, "{printed}");
        assert_eq!(b.problem.alpha, rat(1, 4));
        assert_eq!(b.problem.rhs.forcing.keys().copied().collect::<Vec<_>>(), vec![3]);
    }

    fn kind(src: &str) -> (Pos, ParseErrorKind) {
        let e = parse_problem_file(src).unwrap_err();
        (e.pos, e.kind)
    }

    #[test]
    fn semantic_errors() {
        assert_eq!(kind("alpha = 3/2\nrhs = psi\nic0 = 1").1, ParseErrorKind::AlphaOutOfRange("3/2".into()));
        assert_eq!(kind("alpha = 0\nrhs = psi\nic0 = 1").1, ParseErrorKind::AlphaOutOfRange("0".into()));
        let (pos, k) = kind("alpha = 1\norder = 2\nrhs = psi\nic0 = 1");
        assert_eq!(k, ParseErrorKind::WrongIcCount { expected: 2, found: 1 });
        assert_eq!(pos.line, 5);
        let (pos, k) = kind("alpha = 1\nrhs = psi\nic0 = 1\nic3 = x");
        assert!(matches!(k, ParseErrorKind::WrongIcCount { .. }));
        assert_eq!(pos, Pos { line: 4, column: 1 });
        assert_eq!(kind("rhs = psi\nic0 = 1").1, ParseErrorKind::MissingKey("alpha"));
        assert_eq!(kind("alpha = 1\nrhs = psi\nic0 = 1\nalpha = 1").1, ParseErrorKind::DuplicateKey("alpha".into()));
        assert_eq!(kind("alpha = 1\nrhs = psi\nic0 = 1\nbeta = 1").1, ParseErrorKind::UnknownKey("beta".into()));
        assert_eq!(kind("alpha = 1\nrhs = psi*mu\nic0 = 1").1, ParseErrorKind::UnknownIdentifier("mu".into()));
        assert_eq!(kind("param t = 1\nalpha = 1\nrhs = psi\nic0 = 1").1, ParseErrorKind::ReservedName("t".into()));
        assert_eq!(kind("param a = 1\nparam a = 2\nalpha = 1\nrhs = psi\nic0 = 1").1, ParseErrorKind::DuplicateParam("a".into()));
        assert_eq!(kind("param a = x\nalpha = 1\nrhs = psi\nic0 = 1").1, ParseErrorKind::NotConstant);
        assert!(matches!(kind("alpha = 1\norder = 1/2\nrhs = psi\nic0 = 1").1, ParseErrorKind::InvalidOrder { .. }));
        assert_eq!(kind("alpha = 1\nrhs = psi\nic0 = t").1, ParseErrorKind::TimeDependence);
        assert!(matches!(kind("alpha = 1\nrhs = psi\nic0 = 1\nexact = psi").1, ParseErrorKind::Unsupported(_)));
    }

    #[test]
    fn positions_point_into_values() {
        let (pos, _) = kind("alpha = 1\nrhs =   psi + foo(x)\nic0 = 1");
        assert_eq!(pos, Pos { line: 2, column: 15 });
        let (pos, k) = kind("alpha = 1\nrhs = psi\n  ic0 1");
        assert_eq!(k, ParseErrorKind::MalformedLine);
        assert_eq!(pos, Pos { line: 3, column: 3 });
    }

    #[test]
    fn comments_and_defaults() {
        let p = parse_problem("alpha = 1 # integer order\n\n# nothing\nrhs = psi\nic0 = 1 # start\n").unwrap();
        assert_eq!(p.order, 1);
        assert_eq!(p.alpha, int(1));
        assert_eq!(p.ics, vec![Expr::one()]);
        assert!(p.rhs.forcing.is_empty());
    }
}
