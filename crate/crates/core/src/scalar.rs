//! Exact symbolic constants.
//!
//! A [`Scalar`] is a quotient of two sums of monomials. A monomial is a
//! rational coefficient times a product of atoms raised to rational
//! exponents, where an atom is a named parameter, a prime radical or a
//! Gamma value at a rational argument. Most values have denominator one;
//! a multi-term denominator only appears when the input divides by a sum.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{EvalError, ScalarError};
use crate::special::gamma_real;

pub type Rational = BigRational;

/// Numeric values for named parameters.
pub type Bindings = BTreeMap<String, f64>;

/// Largest integer argument for which Γ is replaced by its factorial value.
pub const GAMMA_RESOLVE_LIMIT: i64 = 20;

const TRIAL_DIVISION_LIMIT: u64 = 1_000_000;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    /// A prime base; its exponent is always kept in (0, 1).
    Prime(u64),
    Param(String),
    /// Γ at a positive rational argument.
    Gamma(Rational),
}

/// Sorted product of atoms with nonzero rational exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(Atom, Rational)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Atom, Rational)] {
        &self.0
    }

    /// Merges duplicate atoms and pulls integer powers of primes into the
    /// returned coefficient.
    fn normalize(mut raw: Vec<(Atom, Rational)>) -> (Rational, Monomial) {
        raw.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Atom, Rational)> = Vec::with_capacity(raw.len());
        for (atom, exp) in raw {
            match merged.last_mut() {
                Some((last, e)) if *last == atom => *e += exp,
                _ => merged.push((atom, exp)),
            }
        }
        let mut coeff = Rational::one();
        let mut out = Vec::with_capacity(merged.len());
        for (atom, exp) in merged {
            if exp.is_zero() {
                continue;
            }
            if let Atom::Prime(p) = atom {
                let whole = exp.floor();
                let frac = &exp - &whole;
                let k = whole.to_integer().to_i32().expect("prime exponent out of range");
                coeff *= Rational::from_integer(BigInt::from(p)).pow(k);
                if !frac.is_zero() {
                    out.push((Atom::Prime(p), frac));
                }
            } else {
                out.push((atom, exp));
            }
        }
        (coeff, Monomial(out))
    }

    fn mul(&self, other: &Monomial) -> (Rational, Monomial) {
        if self.is_one() {
            return (Rational::one(), other.clone());
        }
        if other.is_one() {
            return (Rational::one(), self.clone());
        }
        let raw = self.0.iter().chain(other.0.iter()).cloned().collect();
        Monomial::normalize(raw)
    }

    fn pow(&self, exp: &Rational) -> (Rational, Monomial) {
        let raw = self.0.iter().map(|(a, e)| (a.clone(), e * exp)).collect();
        Monomial::normalize(raw)
    }

    fn eval(&self, env: &Bindings) -> Result<f64, EvalError> {
        let mut value = 1.0;
        for (atom, exp) in &self.0 {
            let base = match atom {
                Atom::Prime(p) => *p as f64,
                Atom::Param(name) => *env
                    .get(name)
                    .ok_or_else(|| EvalError::UnboundParameter(name.clone()))?,
                Atom::Gamma(arg) => gamma_real(to_f64(arg))?,
            };
            value *= if exp.is_integer() {
                base.powi(exp.to_integer().to_i32().unwrap_or(i32::MAX))
            } else {
                base.powf(to_f64(exp))
            };
        }
        Ok(value)
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Sum of monomials with nonzero rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Poly(BTreeMap<Monomial, Rational>);

impl Poly {
    fn zero() -> Self {
        Poly(BTreeMap::new())
    }

    fn constant(c: Rational) -> Self {
        Poly::term(c, Monomial::one())
    }

    fn term(c: Rational, m: Monomial) -> Self {
        let mut p = Poly::zero();
        p.add_term(c, m);
        p
    }

    fn add_term(&mut self, c: Rational, m: Monomial) {
        if c.is_zero() {
            return;
        }
        match self.0.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.0.remove(&m);
                }
            }
            None => {
                self.0.insert(m, c);
            }
        }
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|r| r.is_one())
    }

    fn single(&self) -> Option<(&Monomial, &Rational)> {
        if self.0.len() == 1 {
            self.0.iter().next()
        } else {
            None
        }
    }

    fn as_rational(&self) -> Option<Rational> {
        match self.0.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.0.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            out.add_term(c.clone(), m.clone());
        }
        out
    }

    fn scale(&self, r: &Rational) -> Poly {
        if r.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(m, c)| (m.clone(), c * r)).collect())
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                let (c, m) = m1.mul(m2);
                out.add_term(c * c1 * c2, m);
            }
        }
        out
    }

    fn eval(&self, env: &Bindings) -> Result<(f64, f64), EvalError> {
        let mut value = 0.0;
        let mut magnitude = 0.0;
        for (m, c) in &self.0 {
            let term = to_f64(c) * m.eval(env)?;
            value += term;
            magnitude += term.abs();
        }
        Ok((value, magnitude))
    }
}

/// Exact symbolic constant.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Scalar {
    num: Poly,
    den: Poly,
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar { num: Poly::zero(), den: Poly::constant(Rational::one()) }
    }

    pub fn one() -> Self {
        Scalar::from_rational(Rational::one())
    }

    pub fn from_rational(r: Rational) -> Self {
        Scalar { num: Poly::constant(r), den: Poly::constant(Rational::one()) }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::from_rational(int(n))
    }

    fn from_poly(num: Poly) -> Self {
        Scalar { num, den: Poly::constant(Rational::one()) }
    }

    pub fn param(name: &str) -> Self {
        Scalar::from_poly(Poly::term(
            Rational::one(),
            Monomial(vec![(Atom::Param(name.to_string()), Rational::one())]),
        ))
    }

    /// Γ(arg). Integer arguments up to [`GAMMA_RESOLVE_LIMIT`] become
    /// factorials; every other argument stays an atom.
    pub fn gamma(arg: &Rational) -> Result<Self, ScalarError> {
        if !arg.is_positive() {
            return Err(ScalarError::GammaDomain(arg.to_string()));
        }
        if arg.is_integer() && *arg <= int(GAMMA_RESOLVE_LIMIT) {
            let n = arg.to_integer().to_u64().unwrap();
            let fact = (1..n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k));
            return Ok(Scalar::from_rational(Rational::from_integer(fact)));
        }
        Ok(Scalar::from_poly(Poly::term(
            Rational::one(),
            Monomial(vec![(Atom::Gamma(arg.clone()), Rational::one())]),
        )))
    }

    /// base^exp for rational base and exponent, kept exact through prime
    /// radicals.
    pub fn rational_pow(base: &Rational, exp: &Rational) -> Result<Self, ScalarError> {
        if exp.is_integer() {
            let e = exp.to_integer().to_i32().ok_or(ScalarError::NonMonomialRoot)?;
            if base.is_zero() {
                return match e.cmp(&0) {
                    std::cmp::Ordering::Greater => Ok(Scalar::zero()),
                    std::cmp::Ordering::Equal => Ok(Scalar::one()),
                    std::cmp::Ordering::Less => Err(ScalarError::DivisionByZero),
                };
            }
            return Ok(Scalar::from_rational(base.pow(e)));
        }
        if base.is_zero() {
            return if exp.is_positive() { Ok(Scalar::zero()) } else { Err(ScalarError::DivisionByZero) };
        }
        if base.is_negative() {
            return Err(ScalarError::NegativeRoot);
        }
        let mut raw = Vec::new();
        for (p, k) in factor(base.numer())? {
            raw.push((Atom::Prime(p), exp * int(k)));
        }
        for (p, k) in factor(base.denom())? {
            raw.push((Atom::Prime(p), -(exp * int(k))));
        }
        let (c, m) = Monomial::normalize(raw);
        Ok(Scalar::from_poly(Poly::term(c, m)))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// True when the denominator is one.
    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_rational(&self) -> Option<Rational> {
        if self.den.is_one() {
            self.num.as_rational()
        } else {
            None
        }
    }

    /// Number of monomials in the numerator.
    pub fn term_count(&self) -> usize {
        self.num.0.len()
    }

    /// Sign of the first numerator coefficient; zero for the zero scalar.
    pub fn leading_sign(&self) -> i32 {
        match self.num.0.values().next() {
            Some(c) if c.is_negative() => -1,
            Some(_) => 1,
            None => 0,
        }
    }

    /// Builds `num / den` in normalized form.
    fn quotient(num: Poly, den: Poly) -> Result<Self, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Scalar::zero());
        }
        if let Some((m, c)) = den.single() {
            let (ci, inv) = m.pow(&int(-1));
            let factor = Poly::term(ci / c, inv);
            return Ok(Scalar::from_poly(num.mul(&factor)));
        }
        let (lead_m, lead_c) = den.0.iter().next().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        let inv_c = lead_c.recip();
        let num = num.scale(&inv_c);
        let den = den.scale(&inv_c);
        // cancel when the numerator is a monomial multiple of the denominator
        let (nm, nc) = num.0.iter().next().unwrap();
        let (ci, inv) = lead_m.pow(&int(-1));
        let (c2, qm) = nm.mul(&inv);
        let q = Poly::term(nc * ci * c2, qm);
        if den.mul(&q) == num {
            return Ok(Scalar::from_poly(q));
        }
        Ok(Scalar { num, den })
    }

    pub fn recip(&self) -> Result<Self, ScalarError> {
        Scalar::quotient(self.den.clone(), self.num.clone())
    }

    pub fn checked_div(&self, other: &Scalar) -> Result<Self, ScalarError> {
        Ok(self * &other.recip()?)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Scalar { num: self.num.scale(r), den: self.den.clone() }.renormalized()
    }

    fn renormalized(self) -> Self {
        if self.num.is_zero() {
            Scalar::zero()
        } else {
            self
        }
    }

    pub fn powi(&self, n: u64) -> Self {
        let mut result = Scalar::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = &result * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// self^exp. Non-integer exponents need a single monomial with a
    /// positive coefficient; parameters are taken to be positive.
    pub fn pow(&self, exp: &Rational) -> Result<Self, ScalarError> {
        if exp.is_integer() {
            let n = exp.to_integer();
            let mag = n.abs().to_u64().ok_or(ScalarError::NonMonomialRoot)?;
            return if n.is_negative() { Ok(self.recip()?.powi(mag)) } else { Ok(self.powi(mag)) };
        }
        if self.is_zero() {
            return if exp.is_positive() { Ok(Scalar::zero()) } else { Err(ScalarError::DivisionByZero) };
        }
        if !self.den.is_one() {
            return Err(ScalarError::NonMonomialRoot);
        }
        let (m, c) = self.num.single().ok_or(ScalarError::NonMonomialRoot)?;
        if c.is_negative() {
            return Err(ScalarError::NegativeRoot);
        }
        let head = Scalar::rational_pow(c, exp)?;
        let (c2, m2) = m.pow(exp);
        Ok(&head * &Scalar::from_poly(Poly::term(c2, m2)))
    }

    pub fn params(&self, out: &mut BTreeSet<String>) {
        for m in self.num.0.keys().chain(self.den.0.keys()) {
            for (atom, _) in &m.0 {
                if let Atom::Param(name) = atom {
                    out.insert(name.clone());
                }
            }
        }
    }

    pub fn eval(&self, env: &Bindings) -> Result<f64, EvalError> {
        Ok(self.eval_with_magnitude(env)?.0)
    }

    /// Value together with the sum of absolute monomial values, the scale
    /// against which cancellation is judged.
    pub fn eval_with_magnitude(&self, env: &Bindings) -> Result<(f64, f64), EvalError> {
        let (nv, nmag) = self.num.eval(env)?;
        let (value, magnitude) = if self.den.is_one() {
            (nv, nmag)
        } else {
            let (dv, _) = self.den.eval(env)?;
            (nv / dv, nmag / dv.abs())
        };
        if value.is_finite() && magnitude.is_finite() {
            Ok((value, magnitude))
        } else {
            Err(EvalError::NonFinite(self.to_string()))
        }
    }
}

fn factor(n: &BigInt) -> Result<Vec<(u64, i64)>, ScalarError> {
    let mut rest = n.to_u64().ok_or_else(|| ScalarError::Unfactorable(n.to_string()))?;
    let mut out = Vec::new();
    let mut p = 2u64;
    while p <= TRIAL_DIVISION_LIMIT && p * p <= rest {
        if rest % p == 0 {
            let mut k = 0;
            while rest % p == 0 {
                rest /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        if p * p <= rest {
            return Err(ScalarError::Unfactorable(n.to_string()));
        }
        out.push((rest, 1));
    }
    Ok(out)
}

impl From<Rational> for Scalar {
    fn from(r: Rational) -> Self {
        Scalar::from_rational(r)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, other: &Scalar) -> Scalar {
        if self.den.is_one() && other.den.is_one() {
            return Scalar::from_poly(self.num.add(&other.num));
        }
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        Scalar::quotient(num, self.den.mul(&other.den)).expect("nonzero denominators")
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, other: &Scalar) -> Scalar {
        self + &(-other)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, other: &Scalar) -> Scalar {
        if self.den.is_one() && other.den.is_one() {
            return Scalar::from_poly(self.num.mul(&other.num));
        }
        Scalar::quotient(self.num.mul(&other.num), self.den.mul(&other.den)).expect("nonzero denominators")
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { num: self.num.scale(&int(-1)), den: self.den.clone() }
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, other: Scalar) -> Scalar {
        &self + &other
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, other: Scalar) -> Scalar {
        &self - &other
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, other: Scalar) -> Scalar {
        &self * &other
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn fmt_exponent(e: &Rational) -> String {
    if e.is_integer() && e.is_positive() {
        format!("^{}", e.numer())
    } else {
        format!("^({})", fmt_rational(e))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Prime(p) => write!(f, "{p}"),
            Atom::Param(name) => write!(f, "{name}"),
            Atom::Gamma(arg) => write!(f, "gamma({})", fmt_rational(arg)),
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (atom, exp)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            write!(f, "{atom}")?;
            if matches!(atom, Atom::Prime(_)) || !exp.is_one() {
                f.write_str(&fmt_exponent(exp))?;
            }
        }
        Ok(())
    }
}

/// Writes `|c|*m` (omitting a unit coefficient).
fn fmt_unsigned_term(c: &Rational, m: &Monomial) -> String {
    let c = c.abs();
    if m.is_one() {
        fmt_rational(&c)
    } else if c.is_one() {
        m.to_string()
    } else {
        format!("{}*{}", fmt_rational(&c), m)
    }
}

fn fmt_poly(p: &Poly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut s = String::new();
    for (i, (m, c)) in p.0.iter().enumerate() {
        let neg = c.is_negative();
        match (i, neg) {
            (0, true) => s.push('-'),
            (0, false) => {}
            (_, true) => s.push_str(" - "),
            (_, false) => s.push_str(" + "),
        }
        s.push_str(&fmt_unsigned_term(c, m));
    }
    s
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            f.write_str(&fmt_poly(&self.num))
        } else {
            write!(f, "({})/({})", fmt_poly(&self.num), fmt_poly(&self.den))
        }
    }
}

impl Scalar {
    /// Splits a single-monomial scalar into (is_negative, unsigned text).
    pub(crate) fn fmt_signed_monomial(&self) -> Option<(bool, String)> {
        if !self.den.is_one() {
            return None;
        }
        let (m, c) = self.num.single()?;
        Some((c.is_negative(), fmt_unsigned_term(c, m)))
    }
}
