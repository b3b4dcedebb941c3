//! Truncated fractional power series in t.
//!
//! A [`FracSeries`] with coefficients `φ_0 … φ_K` represents
//! `Σ φ_k(x)·t^{kα}/Γ(1+kα)`. With this Γ-normalized storage the Caputo
//! derivative of order `nα` is an index shift, and Gamma factors surface
//! only in products, as the convolution weights
//! `Γ(1+kα)/(Γ(1+iα)Γ(1+jα))`.
//!
//! Series are finite sums: missing orders are zero, trailing zero
//! coefficients are dropped, and products keep orders up to an explicit
//! limit.

use num_traits::{One, Signed};

use crate::error::SeriesError;
use crate::expr::Expr;
use crate::scalar::{int, Rational, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FracSeries {
    alpha: Rational,
    coeffs: Vec<Expr>,
}

impl FracSeries {
    pub fn new(alpha: Rational, mut coeffs: Vec<Expr>) -> Self {
        while coeffs.last().is_some_and(Expr::is_zero) {
            coeffs.pop();
        }
        FracSeries { alpha, coeffs }
    }

    pub fn zero(alpha: Rational) -> Self {
        FracSeries { alpha, coeffs: Vec::new() }
    }

    pub fn constant(alpha: Rational, value: Expr) -> Self {
        FracSeries::new(alpha, vec![value])
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    /// Coefficient of order k; zero beyond the stored range.
    pub fn coeff(&self, k: usize) -> Expr {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    /// Highest stored order, `None` for the zero series.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Drops every order above `kmax`.
    pub fn truncate(&self, kmax: usize) -> FracSeries {
        FracSeries::new(self.alpha.clone(), self.coeffs.iter().take(kmax + 1).cloned().collect())
    }

    fn check_alpha(&self, other: &FracSeries) -> Result<(), SeriesError> {
        if self.alpha == other.alpha {
            Ok(())
        } else {
            Err(SeriesError::AlphaMismatch(self.alpha.to_string(), other.alpha.to_string()))
        }
    }

    pub fn add(&self, other: &FracSeries) -> Result<FracSeries, SeriesError> {
        self.check_alpha(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| &self.coeff(k) + &other.coeff(k)).collect();
        Ok(FracSeries::new(self.alpha.clone(), coeffs))
    }

    pub fn sub(&self, other: &FracSeries) -> Result<FracSeries, SeriesError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> FracSeries {
        self.map(|c| -c)
    }

    /// Applies `f` to every coefficient.
    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> FracSeries {
        FracSeries::new(self.alpha.clone(), self.coeffs.iter().map(f).collect())
    }

    /// Multiplies every coefficient by a function of x.
    pub fn times_expr(&self, e: &Expr) -> FracSeries {
        self.map(|c| c * e)
    }

    /// Cauchy product on the t^{kα} grid, keeping orders up to `kmax`.
    pub fn mul(&self, other: &FracSeries, kmax: usize) -> Result<FracSeries, SeriesError> {
        self.check_alpha(other)?;
        let (Some(da), Some(db)) = (self.degree(), other.degree()) else {
            return Ok(FracSeries::zero(self.alpha.clone()));
        };
        let top = kmax.min(da + db);
        let gammas = gamma_table(&self.alpha, top)?;
        let mut coeffs = Vec::with_capacity(top + 1);
        for k in 0..=top {
            let mut acc = Expr::zero();
            for i in k.saturating_sub(db)..=k.min(da) {
                let j = k - i;
                let (a, b) = (&self.coeffs[i], &other.coeffs[j]);
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                let product = a * b;
                acc = if i == 0 || j == 0 {
                    &acc + &product
                } else {
                    let weight = gammas[k].checked_div(&(&gammas[i] * &gammas[j]))?;
                    &acc + &product.scale(&weight)
                };
            }
            coeffs.push(acc);
        }
        Ok(FracSeries::new(self.alpha.clone(), coeffs))
    }

    /// `p`-th power by repeated multiplication; `p = 0` gives the constant 1.
    pub fn pow(&self, p: u32, kmax: usize) -> Result<FracSeries, SeriesError> {
        let mut result = FracSeries::constant(self.alpha.clone(), Expr::one()).truncate(kmax);
        for _ in 0..p {
            result = result.mul(self, kmax)?;
        }
        Ok(result)
    }

    /// n-th x-derivative of every coefficient.
    pub fn dx(&self, n: usize) -> FracSeries {
        if n == 0 {
            return self.clone();
        }
        self.map(|c| c.diff_x_n(n))
    }

    /// The series of ψ(a·x, b·t): coefficient k becomes
    /// `φ_k(a·x)·b^{kα}`.
    pub fn scale_args(&self, xscale: &Rational, tscale: &Rational) -> Result<FracSeries, SeriesError> {
        for s in [xscale, tscale] {
            if !s.is_positive() {
                return Err(SeriesError::NonPositiveScale(s.to_string()));
            }
        }
        if xscale.is_one() && tscale.is_one() {
            return Ok(self.clone());
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (k, c) in self.coeffs.iter().enumerate() {
            let mut term = if xscale.is_one() { c.clone() } else { c.scale_x(xscale) };
            if k > 0 && !tscale.is_one() {
                let exponent = &self.alpha * int(k as i64);
                term = term.scale(&Scalar::rational_pow(tscale, &exponent)?);
            }
            coeffs.push(term);
        }
        Ok(FracSeries::new(self.alpha.clone(), coeffs))
    }

    /// Caputo derivative of order `nα`: orders below n are annihilated and
    /// the rest shift down by n.
    pub fn caputo_shift(&self, n: usize) -> FracSeries {
        FracSeries::new(self.alpha.clone(), self.coeffs.iter().skip(n).cloned().collect())
    }

    /// The represented function at t = 0.
    pub fn value_at_zero(&self) -> Expr {
        self.coeff(0)
    }
}

/// Γ(1 + kα) for k = 0..=top.
pub(crate) fn gamma_table(alpha: &Rational, top: usize) -> Result<Vec<Scalar>, SeriesError> {
    (0..=top)
        .map(|k| Ok(Scalar::gamma(&(Rational::one() + alpha * int(k as i64)))?))
        .collect()
}
