//! Functions of the spatial variable in exponential-polynomial normal form.
//!
//! An [`Expr`] is a finite sum `Σ p_μ(x)·exp(μ·x)` keyed by distinct
//! frequencies `μ`, each `p_μ` a nonzero polynomial in `x` with [`Scalar`]
//! coefficients. Hyperbolic functions are stored through their exponential
//! definitions, so the class is closed under sums, products, `d/dx` and
//! `x → a·x`, and a value is zero exactly when it has no terms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{EvalError, ScalarError};
use crate::scalar::{int, Bindings, Rational, Scalar};

/// Polynomial in x with coefficients in ascending degree, no trailing zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct XPoly(Vec<Scalar>);

impl XPoly {
    fn trimmed(mut coeffs: Vec<Scalar>) -> Self {
        while coeffs.last().is_some_and(Scalar::is_zero) {
            coeffs.pop();
        }
        XPoly(coeffs)
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; zero for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    fn add(&self, other: &XPoly) -> XPoly {
        let n = self.0.len().max(other.0.len());
        let zero = Scalar::zero();
        let coeffs = (0..n)
            .map(|i| self.0.get(i).unwrap_or(&zero) + other.0.get(i).unwrap_or(&zero))
            .collect();
        XPoly::trimmed(coeffs)
    }

    fn mul(&self, other: &XPoly) -> XPoly {
        if self.is_zero() || other.is_zero() {
            return XPoly::default();
        }
        let mut out = vec![Scalar::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        XPoly::trimmed(out)
    }

    fn scale(&self, s: &Scalar) -> XPoly {
        XPoly::trimmed(self.0.iter().map(|c| c * s).collect())
    }

    fn derivative(&self) -> XPoly {
        XPoly::trimmed(
            self.0.iter().enumerate().skip(1).map(|(i, c)| c.scale(&int(i as i64))).collect(),
        )
    }
}

/// Exponential polynomial in x.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr {
    terms: BTreeMap<Scalar, XPoly>,
}

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn one() -> Self {
        Expr::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        Expr::from_term(Scalar::zero(), XPoly::trimmed(vec![c]))
    }

    pub fn rational(r: Rational) -> Self {
        Expr::constant(Scalar::from_rational(r))
    }

    /// The variable x.
    pub fn x() -> Self {
        Expr::from_term(Scalar::zero(), XPoly(vec![Scalar::zero(), Scalar::one()]))
    }

    /// exp(freq·x). The frequency must have denominator one so that equal
    /// frequencies share a representation.
    pub fn exp_linear(freq: Scalar) -> Result<Self, ScalarError> {
        if !freq.is_polynomial() {
            return Err(ScalarError::RationalFrequency);
        }
        Ok(Expr::from_term(freq, XPoly(vec![Scalar::one()])))
    }

    pub fn cosh_linear(freq: Scalar) -> Result<Self, ScalarError> {
        let half = Scalar::from_rational(crate::scalar::rat(1, 2));
        let sum = &Expr::exp_linear(freq.clone())? + &Expr::exp_linear(-freq)?;
        Ok(sum.scale(&half))
    }

    pub fn sinh_linear(freq: Scalar) -> Result<Self, ScalarError> {
        let half = Scalar::from_rational(crate::scalar::rat(1, 2));
        let diff = &Expr::exp_linear(freq.clone())? - &Expr::exp_linear(-freq)?;
        Ok(diff.scale(&half))
    }

    fn from_term(freq: Scalar, poly: XPoly) -> Self {
        let mut e = Expr::zero();
        e.add_term(freq, poly);
        e
    }

    fn add_term(&mut self, freq: Scalar, poly: XPoly) {
        if poly.is_zero() {
            return;
        }
        match self.terms.get_mut(&freq) {
            Some(existing) => {
                let sum = existing.add(&poly);
                if sum.is_zero() {
                    self.terms.remove(&freq);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(freq, poly);
            }
        }
    }

    /// Frequency/polynomial pairs in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Scalar, &XPoly)> {
        self.terms.iter()
    }

    /// Exact zero test; complete for the class.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value as a constant, when it does not depend on x.
    pub fn as_scalar(&self) -> Option<Scalar> {
        match self.terms.len() {
            0 => Some(Scalar::zero()),
            1 => {
                let (freq, poly) = self.terms.iter().next().unwrap();
                (freq.is_zero() && poly.0.len() == 1).then(|| poly.0[0].clone())
            }
            _ => None,
        }
    }

    /// `Some(c)` when the value is exactly `c·x` for a constant c.
    pub fn as_linear_coefficient(&self) -> Option<Scalar> {
        if self.terms.len() != 1 {
            return None;
        }
        let (freq, poly) = self.terms.iter().next().unwrap();
        (freq.is_zero() && poly.0.len() == 2 && poly.0[0].is_zero()).then(|| poly.0[1].clone())
    }

    pub fn max_degree(&self) -> usize {
        self.terms.values().map(XPoly::degree).max().unwrap_or(0)
    }

    /// Number of (frequency, power of x) pairs.
    pub fn size(&self) -> usize {
        self.terms.values().map(|p| p.0.len()).sum()
    }

    pub fn scale(&self, s: &Scalar) -> Expr {
        let mut out = Expr::zero();
        if s.is_zero() {
            return out;
        }
        for (freq, poly) in &self.terms {
            out.add_term(freq.clone(), poly.scale(s));
        }
        out
    }

    /// Exact derivative in x.
    pub fn diff_x(&self) -> Expr {
        let mut out = Expr::zero();
        for (freq, poly) in &self.terms {
            out.add_term(freq.clone(), poly.derivative().add(&poly.scale(freq)));
        }
        out
    }

    pub fn diff_x_n(&self, n: usize) -> Expr {
        (0..n).fold(self.clone(), |e, _| e.diff_x())
    }

    /// Substitutes x → a·x.
    pub fn scale_x(&self, a: &Rational) -> Expr {
        let mut out = Expr::zero();
        let a_scalar = Scalar::from_rational(a.clone());
        for (freq, poly) in &self.terms {
            let mut power = Rational::from_integer(1.into());
            let mut coeffs = Vec::with_capacity(poly.0.len());
            for c in &poly.0 {
                coeffs.push(c.scale(&power));
                power *= a;
            }
            out.add_term(freq * &a_scalar, XPoly::trimmed(coeffs));
        }
        out
    }

    pub fn pow(&self, n: u64) -> Expr {
        let mut result = Expr::one();
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

    /// Inverse of a single constant-coefficient exponential term `c·exp(μx)`.
    pub fn recip(&self) -> Result<Expr, ScalarError> {
        if self.terms.len() != 1 {
            return Err(ScalarError::NonMonomialRoot);
        }
        let (freq, poly) = self.terms.iter().next().unwrap();
        if poly.0.len() != 1 {
            return Err(ScalarError::NonMonomialRoot);
        }
        Ok(Expr::from_term(-freq, XPoly(vec![poly.0[0].recip()?])))
    }

    pub fn params(&self, out: &mut BTreeSet<String>) {
        for (freq, poly) in &self.terms {
            freq.params(out);
            for c in &poly.0 {
                c.params(out);
            }
        }
    }

    pub fn eval(&self, x: f64, env: &Bindings) -> Result<f64, EvalError> {
        Ok(self.eval_with_magnitude(x, env)?.0)
    }

    /// Value and the sum of absolute values of its monomial contributions.
    pub fn eval_with_magnitude(&self, x: f64, env: &Bindings) -> Result<(f64, f64), EvalError> {
        let mut value = 0.0;
        let mut magnitude = 0.0;
        for (freq, poly) in &self.terms {
            let growth = (freq.eval(env)? * x).exp();
            let mut xp = 1.0;
            for c in &poly.0 {
                if !c.is_zero() {
                    let (v, m) = c.eval_with_magnitude(env)?;
                    value += v * xp * growth;
                    magnitude += m * xp.abs() * growth;
                }
                xp *= x;
            }
        }
        if value.is_finite() && magnitude.is_finite() {
            Ok((value, magnitude))
        } else {
            Err(EvalError::NonFinite(self.to_string()))
        }
    }
}

impl From<Scalar> for Expr {
    fn from(s: Scalar) -> Self {
        Expr::constant(s)
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, other: &Expr) -> Expr {
        let mut out = self.clone();
        for (freq, poly) in &other.terms {
            out.add_term(freq.clone(), poly.clone());
        }
        out
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, other: &Expr) -> Expr {
        self + &(-other)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale(&Scalar::from_int(-1))
    }
}

impl Mul for &Expr {
    type Output = Expr;
    // exp(f1 x)·exp(f2 x) = exp((f1 + f2) x)
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, other: &Expr) -> Expr {
        let mut out = Expr::zero();
        for (f1, p1) in &self.terms {
            for (f2, p2) in &other.terms {
                out.add_term(f1 + f2, p1.mul(p2));
            }
        }
        out
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, other: Expr) -> Expr {
        &self + &other
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, other: Expr) -> Expr {
        &self - &other
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, other: Expr) -> Expr {
        &self * &other
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

enum Wave {
    Plain,
    Exp,
    Cosh,
    Sinh,
}

fn fmt_argument(freq: &Scalar) -> String {
    if freq.is_one() {
        return "x".to_string();
    }
    match freq.fmt_signed_monomial() {
        Some((neg, body)) => {
            let sign = if neg { "-" } else { "" };
            if body == "1" {
                format!("{sign}x")
            } else {
                format!("{sign}{body}*x")
            }
        }
        None => format!("({freq})*x"),
    }
}

/// Pretty form: polynomial part first, then each ±frequency pair folded into
/// cosh/sinh, then lone exponentials; within a group, descending powers of
/// x. The output parses back to the same value.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut groups: Vec<(Wave, Option<&Scalar>, XPoly)> = Vec::new();
        let mut pairs: Vec<(Wave, Option<&Scalar>, XPoly)> = Vec::new();
        let mut lone: Vec<(Wave, Option<&Scalar>, XPoly)> = Vec::new();
        for (freq, poly) in &self.terms {
            if freq.is_zero() {
                groups.push((Wave::Plain, None, poly.clone()));
                continue;
            }
            let mirror = -freq;
            match self.terms.get(&mirror) {
                Some(other) if freq.leading_sign() > 0 => {
                    pairs.push((Wave::Cosh, Some(freq), poly.add(other)));
                    pairs.push((Wave::Sinh, Some(freq), poly.add(&other.scale(&Scalar::from_int(-1)))));
                }
                Some(_) => {}
                None => lone.push((Wave::Exp, Some(freq), poly.clone())),
            }
        }
        groups.extend(pairs);
        groups.extend(lone);

        let mut first = true;
        for (wave, freq, poly) in &groups {
            let func = match (wave, freq) {
                (Wave::Plain, _) | (_, None) => None,
                (Wave::Exp, Some(fr)) => Some(format!("exp({})", fmt_argument(fr))),
                (Wave::Cosh, Some(fr)) => Some(format!("cosh({})", fmt_argument(fr))),
                (Wave::Sinh, Some(fr)) => Some(format!("sinh({})", fmt_argument(fr))),
            };
            for (deg, c) in poly.0.iter().enumerate().rev() {
                if c.is_zero() {
                    continue;
                }
                let mut factors: Vec<String> = Vec::new();
                let (neg, coeff_text) = match c.fmt_signed_monomial() {
                    Some((neg, body)) => (neg, body),
                    None => (false, format!("({c})")),
                };
                let unit = coeff_text == "1";
                if !unit {
                    factors.push(coeff_text);
                }
                match deg {
                    0 => {}
                    1 => factors.push("x".to_string()),
                    d => factors.push(format!("x^{d}")),
                }
                if let Some(func) = &func {
                    factors.push(func.clone());
                }
                if factors.is_empty() {
                    factors.push("1".to_string());
                }
                match (first, neg) {
                    (true, true) => f.write_str("-")?,
                    (true, false) => {}
                    (false, true) => f.write_str(" - ")?,
                    (false, false) => f.write_str(" + ")?,
                }
                f.write_str(&factors.join("*"))?;
                first = false;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn c() -> Scalar {
        Scalar::param("c")
    }

    fn num(r: Rational) -> Expr {
        Expr::rational(r)
    }

    #[test]
    fn cosh_squared_product_to_sum() {
        let ch = Expr::cosh_linear(c()).unwrap();
        let sq = &ch * &ch;
        let two_c = c().scale(&int(2));
        let expected = &num(rat(1, 2)) + &Expr::cosh_linear(two_c).unwrap().scale(&Scalar::from_rational(rat(1, 2)));
        assert_eq!(sq, expected);
    }

    #[test]
    fn times_zero_is_zero() {
        let e = &Expr::x() + &Expr::one();
        assert!((&e * &Expr::zero()).is_zero());
        assert!(Expr::exp_linear(Scalar::one()).unwrap().scale(&Scalar::zero()).is_zero());
    }

    #[test]
    fn hyperbolic_identity_is_exactly_zero() {
        let ch = Expr::cosh_linear(c()).unwrap();
        let sh = Expr::sinh_linear(c()).unwrap();
        let e = &(&(&ch * &ch) - &(&sh * &sh)) - &Expr::one();
        assert!(e.is_zero());
    }

    #[test]
    fn one_minus_cosh_squared() {
        // u = sqrt(nu/omega)/2
        let u = Scalar::param("nu")
            .checked_div(&Scalar::param("omega"))
            .unwrap()
            .pow(&rat(1, 2))
            .unwrap()
            .scale(&rat(1, 2));
        let base = &Expr::one() - &Expr::cosh_linear(u.clone()).unwrap();
        let sq = &base * &base;
        // hand expansion: 1 - 2cosh + cosh² = 3/2 - 2cosh(u x) + cosh(2u x)/2
        let expected = &(&num(rat(3, 2)) - &Expr::cosh_linear(u.clone()).unwrap().scale(&Scalar::from_int(2)))
            + &Expr::cosh_linear(u.scale(&int(2))).unwrap().scale(&Scalar::from_rational(rat(1, 2)));
        assert!((&sq - &expected).is_zero());
    }

    #[test]
    fn derivatives() {
        let x2 = Expr::x().pow(2);
        assert_eq!(x2.diff_x(), Expr::x().scale(&Scalar::from_int(2)));
        let ch = Expr::cosh_linear(c()).unwrap();
        let expected = Expr::sinh_linear(c()).unwrap().scale(&c());
        assert_eq!(ch.diff_x(), expected);
    }

    #[test]
    fn klein_gordon_cross_term_second_derivative() {
        let (nu, omega, lambda) = (Scalar::param("nu"), Scalar::param("omega"), Scalar::param("lambda"));
        let r = nu.checked_div(&omega).unwrap().pow(&rat(1, 2)).unwrap();
        let half_r = r.scale(&rat(1, 2));
        let sh_half = Expr::sinh_linear(half_r.clone()).unwrap();
        let base = &(&Expr::one() - &Expr::cosh_linear(half_r.clone()).unwrap()) * &sh_half;
        // 4λ⁵/(9ν√(νω))
        let nu_omega_root = (&nu * &omega).pow(&rat(1, 2)).unwrap();
        let pre = lambda.powi(5).scale(&rat(4, 9)).checked_div(&(&nu * &nu_omega_root)).unwrap();
        let lhs = base.diff_x_n(2).scale(&pre);
        // λ⁵/(9ω√(νω))·(sinh(r x/2) − 2 sinh(r x))
        let post = lambda.powi(5).scale(&rat(1, 9)).checked_div(&(&omega * &nu_omega_root)).unwrap();
        let rhs = (&sh_half - &Expr::sinh_linear(r).unwrap().scale(&Scalar::from_int(2))).scale(&post);
        assert!((&lhs - &rhs).is_zero(), "{lhs}\n{rhs}");
    }

    #[test]
    fn argument_scaling() {
        let half = rat(1, 2);
        assert_eq!(Expr::x().scale_x(&half), Expr::x().scale(&Scalar::from_rational(half.clone())));
        assert_eq!(
            Expr::exp_linear(c()).unwrap().scale_x(&half),
            Expr::exp_linear(c().scale(&half)).unwrap()
        );
        assert_eq!(Expr::x().pow(2).scale_x(&half), Expr::x().pow(2).scale(&Scalar::from_rational(rat(1, 4))));
    }

    #[test]
    fn evaluation() {
        let env = Bindings::new();
        let e = &Expr::x() + &Expr::one();
        assert_eq!(e.eval(0.25, &env).unwrap(), 1.25);
        assert_eq!(Expr::cosh_linear(Scalar::one()).unwrap().eval(0.0, &env).unwrap(), 1.0);
    }

    #[test]
    fn rational_frequency_rejected() {
        let f = Scalar::one().checked_div(&(&Scalar::one() + &c())).unwrap();
        assert_eq!(Expr::exp_linear(f), Err(ScalarError::RationalFrequency));
    }

    #[test]
    fn display_folds_hyperbolics() {
        let e = &(&Expr::x() + &Expr::one()) - &Expr::cosh_linear(c()).unwrap().scale(&Scalar::from_int(3));
        assert_eq!(e.to_string(), "x + 1 - 3*cosh(c*x)");
        let s = Expr::sinh_linear(Scalar::one()).unwrap();
        assert_eq!(s.to_string(), "sinh(x)");
        assert_eq!(Expr::exp_linear(Scalar::from_int(-1)).unwrap().to_string(), "exp(-x)");
        assert_eq!(Expr::zero().to_string(), "0");
    }
}
