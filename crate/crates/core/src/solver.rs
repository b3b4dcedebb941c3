//! Explicit coefficient recurrence for `D_t^{mα}ψ = R[ψ]`.
//!
//! Coefficient `φ_k` (k ≥ m) is the order-`(k−m)` coefficient of `R` applied
//! to the series built from `φ_0 … φ_{k−1}`: taking the Caputo derivative of
//! order `(k−m)α` and evaluating at t = 0 picks out exactly that
//! coefficient, and the unknown `φ_k` itself cannot reach it. No residual
//! limit or symbolic unknown is involved.
//!
//! [`residual_series`] re-substitutes a finished solution into the equation
//! and is the independent check on the recurrence.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{EvalError, SolveError};
use crate::expr::Expr;
use crate::scalar::{int, Bindings, Rational, Scalar};
use crate::series::FracSeries;

/// Time-dependent multiplier of a right-hand-side term.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TimeCoef {
    Unit,
    /// e^{rate·t}
    ExpT(Scalar),
    /// Σ c_i t^i
    PolySeries(Vec<Scalar>),
}

impl TimeCoef {
    /// Value when the coefficient does not depend on t.
    pub fn constant_value(&self) -> Option<Scalar> {
        match self {
            TimeCoef::Unit => Some(Scalar::one()),
            TimeCoef::ExpT(rate) if rate.is_zero() => Some(Scalar::one()),
            TimeCoef::ExpT(_) => None,
            TimeCoef::PolySeries(c) => match c.iter().rposition(|s| !s.is_zero()) {
                None => Some(Scalar::zero()),
                Some(0) => Some(c[0].clone()),
                Some(_) => None,
            },
        }
    }

    pub fn value_at_zero(&self) -> Scalar {
        match self {
            TimeCoef::Unit | TimeCoef::ExpT(_) => Scalar::one(),
            TimeCoef::PolySeries(c) => c.first().cloned().unwrap_or_default(),
        }
    }

    /// Γ-normalized expansion on the t^{kα} grid up to order `kmax`.
    ///
    /// Integer powers of t land on the grid only when 1/α is an integer q:
    /// then t^i = t^{(iq)α} and Γ(1 + iqα) = i!, so e^{ct} contributes c^i
    /// and c_i·t^i contributes c_i·i! at order iq.
    pub fn series(&self, alpha: &Rational, kmax: usize) -> Option<FracSeries> {
        if let Some(c) = self.constant_value() {
            return Some(FracSeries::constant(alpha.clone(), Expr::constant(c)));
        }
        let q = alpha.recip();
        if !q.is_integer() {
            return None;
        }
        let q = q.to_integer().try_into().ok().filter(|q: &usize| *q > 0)?;
        let mut coeffs = vec![Expr::zero(); kmax + 1];
        match self {
            TimeCoef::ExpT(rate) => {
                for (i, k) in (0..=kmax).step_by(q).enumerate() {
                    coeffs[k] = Expr::constant(rate.powi(i as u64));
                }
            }
            TimeCoef::PolySeries(c) => {
                let mut fact = Rational::one();
                for (i, k) in (0..=kmax).step_by(q).enumerate() {
                    if i > 0 {
                        fact *= int(i as i64);
                    }
                    if let Some(ci) = c.get(i) {
                        coeffs[k] = Expr::constant(ci.scale(&fact));
                    }
                }
            }
            TimeCoef::Unit => unreachable!(),
        }
        Some(FracSeries::new(alpha.clone(), coeffs))
    }
}

/// One occurrence of the unknown: `((D_x^n ψ)(a·x, b·t))^p`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Factor {
    pub derivative: usize,
    pub xscale: Rational,
    pub tscale: Rational,
    pub power: u32,
}

impl Factor {
    pub fn plain(derivative: usize) -> Self {
        Factor { derivative, xscale: int(1), tscale: int(1), power: 1 }
    }

    fn series(&self, s: &FracSeries, kmax: usize) -> Result<FracSeries, SolveError> {
        let base = s.truncate(kmax).dx(self.derivative).scale_args(&self.xscale, &self.tscale)?;
        Ok(if self.power == 1 { base } else { base.pow(self.power, kmax)? })
    }
}

/// `coeff(x) · tcoef(t) · Π factors`. An empty factor list is a source term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhsTerm {
    pub coeff: Expr,
    pub tcoef: TimeCoef,
    pub factors: Vec<Factor>,
}

impl RhsTerm {
    pub fn is_source(&self) -> bool {
        self.factors.is_empty()
    }

    fn is_linear(&self) -> bool {
        self.factors.is_empty() || (self.factors.len() == 1 && self.factors[0].power == 1)
    }
}

/// Right-hand side operator: a sum of terms plus a forcing series given by
/// its Γ-normalized grid coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RhsOperator {
    pub terms: Vec<RhsTerm>,
    pub forcing: BTreeMap<usize, Expr>,
}

impl RhsOperator {
    pub fn forcing_series(&self, alpha: &Rational, kmax: usize) -> FracSeries {
        let top = self.forcing.keys().next_back().copied().unwrap_or(0).min(kmax);
        let coeffs = (0..=top).map(|k| self.forcing.get(&k).cloned().unwrap_or_default()).collect();
        FracSeries::new(alpha.clone(), coeffs)
    }

    /// True when every term is affine in ψ.
    pub fn is_linear(&self) -> bool {
        self.terms.iter().all(RhsTerm::is_linear)
    }
}

/// `D_t^{mα}ψ = R[ψ]` with initial data `D_t^{nα}ψ(x,0) = f_n(x)`, n < m.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    pub order: usize,
    pub alpha: Rational,
    pub rhs: RhsOperator,
    pub ics: Vec<Expr>,
    /// Default numeric values; the symbolic layer keeps parameters as atoms.
    pub params: BTreeMap<String, Scalar>,
}

impl Problem {
    pub fn validate(&self) -> Result<(), SolveError> {
        if self.order == 0 {
            return Err(SolveError::InvalidProblem("order must be at least 1".into()));
        }
        if self.alpha <= Rational::zero() || self.alpha > Rational::one() {
            return Err(SolveError::InvalidProblem(format!("alpha = {} is outside (0, 1]", self.alpha)));
        }
        if self.ics.len() != self.order {
            return Err(SolveError::InvalidProblem(format!(
                "expected {} initial conditions, found {}",
                self.order,
                self.ics.len()
            )));
        }
        Ok(())
    }

    pub fn bindings(&self) -> Result<Bindings, EvalError> {
        let mut env = Bindings::new();
        for (name, value) in &self.params {
            let v = value.eval(&env)?;
            env.insert(name.clone(), v);
        }
        Ok(env)
    }

    /// Same equation at a different α.
    pub fn with_alpha(&self, alpha: Rational) -> Problem {
        Problem { alpha, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesSolution {
    pub problem: Problem,
    pub order: usize,
    pub coeffs: Vec<Expr>,
    pub linear_path_used: bool,
}

impl SeriesSolution {
    pub fn series(&self) -> FracSeries {
        FracSeries::new(self.problem.alpha.clone(), self.coeffs.clone())
    }
}

/// `R[S]` up to order `kmax`.
pub fn apply_rhs(rhs: &RhsOperator, s: &FracSeries, kmax: usize) -> Result<FracSeries, SolveError> {
    let alpha = s.alpha();
    let mut total = rhs.forcing_series(alpha, kmax);
    for (idx, term) in rhs.terms.iter().enumerate() {
        let mut product = FracSeries::constant(alpha.clone(), Expr::one());
        for factor in &term.factors {
            product = product.mul(&factor.series(s, kmax)?, kmax)?;
            if product.is_zero() {
                break;
            }
        }
        if product.is_zero() {
            continue;
        }
        if let Some(c) = term.tcoef.constant_value() {
            product = product.map(|e| e.scale(&c));
        } else {
            let tseries = term.tcoef.series(alpha, kmax).ok_or_else(|| SolveError::TimeCoefficientIncompatible {
                term: idx,
                alpha: alpha.to_string(),
            })?;
            product = product.mul(&tseries, kmax)?;
        }
        total = total.add(&product.times_expr(&term.coeff))?;
    }
    Ok(total)
}

fn check_order(p: &Problem, order: usize) -> Result<(), SolveError> {
    p.validate()?;
    if order + 1 < p.order {
        return Err(SolveError::OrderTooSmall { order, min: p.order - 1 });
    }
    Ok(())
}

/// φ_0 … φ_K by the explicit recurrence.
pub fn lrps_coefficients(p: &Problem, order: usize) -> Result<SeriesSolution, SolveError> {
    check_order(p, order)?;
    let m = p.order;
    let mut coeffs: Vec<Expr> = p.ics.clone();
    for k in m..=order {
        let known = FracSeries::new(p.alpha.clone(), coeffs.clone());
        let image = apply_rhs(&p.rhs, &known, k - m)?;
        coeffs.push(image.coeff(k - m));
    }
    coeffs.truncate(order + 1);
    Ok(SeriesSolution { problem: p.clone(), order, coeffs, linear_path_used: false })
}

/// For right-hand sides affine in ψ: `φ_k = L[φ_{k−m}]` with time
/// coefficients taken at t = 0, plus source and forcing contributions.
///
/// A time-dependent coefficient is only exact here while the factor it
/// multiplies has been zero at every earlier order; otherwise the term
/// needs a convolution and this path reports
/// [`SolveError::TimeCoefficientIncompatible`].
pub fn linear_fast_path(p: &Problem, order: usize) -> Result<SeriesSolution, SolveError> {
    check_order(p, order)?;
    if !p.rhs.is_linear() {
        return Err(SolveError::NotLinear);
    }
    let m = p.order;
    let alpha = &p.alpha;
    let mut coeffs: Vec<Expr> = p.ics.clone();
    // first order at which each term's factor was nonzero
    let mut first_active: Vec<Option<usize>> = vec![None; p.rhs.terms.len()];
    for k in m..=order {
        let j = k - m;
        let prev = &coeffs[j];
        let mut next = p.rhs.forcing.get(&j).cloned().unwrap_or_default();
        for (idx, term) in p.rhs.terms.iter().enumerate() {
            let incompatible = || SolveError::TimeCoefficientIncompatible { term: idx, alpha: alpha.to_string() };
            let Some(factor) = term.factors.first() else {
                let tau = match term.tcoef.constant_value() {
                    Some(c) if j == 0 => c,
                    Some(_) => continue,
                    None => term.tcoef.series(alpha, j).ok_or_else(incompatible)?.coeff(j).as_scalar().unwrap_or_default(),
                };
                next = &next + &term.coeff.scale(&tau);
                continue;
            };
            let mut image = prev.diff_x_n(factor.derivative).scale_x(&factor.xscale);
            if j > 0 && !factor.tscale.is_one() {
                image = image.scale(&Scalar::rational_pow(&factor.tscale, &(alpha * int(j as i64)))?);
            }
            if image.is_zero() {
                continue;
            }
            let tau = match term.tcoef.constant_value() {
                Some(c) => c,
                None => {
                    if first_active[idx].is_some_and(|first| first < j) {
                        return Err(incompatible());
                    }
                    term.tcoef.value_at_zero()
                }
            };
            first_active[idx].get_or_insert(j);
            next = &next + &(&image * &term.coeff).scale(&tau);
        }
        coeffs.push(next);
    }
    coeffs.truncate(order + 1);
    Ok(SeriesSolution { problem: p.clone(), order, coeffs, linear_path_used: true })
}

/// Uses the linear fast path when it applies and the recurrence otherwise.
pub fn solve(p: &Problem, order: usize) -> Result<SeriesSolution, SolveError> {
    if p.rhs.is_linear() {
        match linear_fast_path(p, order) {
            Err(SolveError::TimeCoefficientIncompatible { .. }) => {}
            other => return other,
        }
    }
    lrps_coefficients(p, order)
}

/// `D_t^{mα}ψ_K − R[ψ_K]` through order `K − m`; every coefficient vanishes
/// for a correct solution.
pub fn residual_series(p: &Problem, sol: &SeriesSolution) -> Result<FracSeries, SolveError> {
    let m = p.order;
    if sol.order < m {
        return Err(SolveError::OrderTooSmall { order: sol.order, min: m });
    }
    let top = sol.order - m;
    let s = sol.series();
    let lhs = s.caputo_shift(m).truncate(top);
    let rhs = apply_rhs(&p.rhs, &s, top)?;
    Ok(lhs.sub(&rhs)?)
}

/// Display tag for solutions whose coefficients are all equal, which sum to
/// `c(x)·E_α(t^α)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MittagLefflerForm {
    pub amplitude: Expr,
}

impl fmt::Display for MittagLefflerForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})*E_alpha(t^alpha)", self.amplitude)
    }
}

pub fn mittag_leffler_form(sol: &SeriesSolution) -> Option<MittagLefflerForm> {
    let first = sol.coeffs.first()?;
    if sol.coeffs.len() < 2 && !first.is_zero() {
        return None;
    }
    sol.coeffs
        .iter()
        .all(|c| c == first)
        .then(|| MittagLefflerForm { amplitude: first.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn x_plus_one() -> Expr {
        &Expr::x() + &Expr::one()
    }

    fn kolmogorov(alpha: Rational) -> Problem {
        let x2 = Expr::x().pow(2);
        Problem {
            order: 1,
            alpha,
            rhs: RhsOperator {
                terms: vec![
                    RhsTerm { coeff: x_plus_one(), tcoef: TimeCoef::Unit, factors: vec![Factor::plain(1)] },
                    RhsTerm { coeff: x2, tcoef: TimeCoef::ExpT(Scalar::one()), factors: vec![Factor::plain(2)] },
                ],
                forcing: BTreeMap::new(),
            },
            ics: vec![x_plus_one()],
            params: BTreeMap::new(),
        }
    }

    fn simple(rhs_terms: Vec<RhsTerm>, ic: Expr, alpha: Rational) -> Problem {
        Problem {
            order: 1,
            alpha,
            rhs: RhsOperator { terms: rhs_terms, forcing: BTreeMap::new() },
            ics: vec![ic],
            params: BTreeMap::new(),
        }
    }

    #[test]
    fn kolmogorov_rhs_on_initial_series() {
        let p = kolmogorov(rat(1, 2));
        let s = FracSeries::constant(p.alpha.clone(), x_plus_one());
        let image = apply_rhs(&p.rhs, &s, 0).unwrap();
        assert_eq!(image.coeffs(), &[x_plus_one()]);
    }

    #[test]
    fn kolmogorov_all_coefficients_equal() {
        let p = kolmogorov(rat(1, 2));
        let sol = lrps_coefficients(&p, 8).unwrap();
        assert!(sol.coeffs.iter().all(|c| *c == x_plus_one()));
        let fast = linear_fast_path(&p, 8).unwrap();
        assert_eq!(fast.coeffs, sol.coeffs);
        assert!(mittag_leffler_form(&sol).is_some());
    }

    #[test]
    fn identity_rhs_gives_unit_coefficients() {
        let p = simple(
            vec![RhsTerm { coeff: Expr::one(), tcoef: TimeCoef::Unit, factors: vec![Factor::plain(0)] }],
            Expr::one(),
            rat(1, 3),
        );
        let sol = lrps_coefficients(&p, 5).unwrap();
        assert_eq!(sol.coeffs, vec![Expr::one(); 6]);
    }

    #[test]
    fn repeated_differentiation_fast_path() {
        let p = simple(
            vec![RhsTerm { coeff: Expr::one(), tcoef: TimeCoef::Unit, factors: vec![Factor::plain(1)] }],
            Expr::x().pow(2),
            rat(1, 2),
        );
        let fast = linear_fast_path(&p, 3).unwrap();
        let two = Expr::rational(int(2));
        assert_eq!(fast.coeffs, vec![Expr::x().pow(2), Expr::x().scale(&Scalar::from_int(2)), two, Expr::zero()]);
        assert_eq!(lrps_coefficients(&p, 3).unwrap().coeffs, fast.coeffs);
    }

    #[test]
    fn nonlinear_rejected_by_fast_path() {
        let mut sq = Factor::plain(0);
        sq.power = 2;
        let p = simple(vec![RhsTerm { coeff: Expr::one(), tcoef: TimeCoef::Unit, factors: vec![sq] }], Expr::one(), rat(1, 2));
        assert_eq!(linear_fast_path(&p, 3), Err(SolveError::NotLinear));
        // ψ' = ψ², ψ(0) = 1 at α = 1 gives 1/(1 − t): φ_k = k!
        let p1 = p.with_alpha(int(1));
        let sol = solve(&p1, 5).unwrap();
        let facts = [1, 1, 2, 6, 24, 120];
        for (c, f) in sol.coeffs.iter().zip(facts) {
            assert_eq!(*c, Expr::rational(int(f)));
        }
    }

    #[test]
    fn time_coefficient_rules() {
        // ψ' = e^t ψ on the integer grid: ψ = exp(e^t − 1), derivatives 1,1,2,5,15 (Bell numbers)
        let p = simple(
            vec![RhsTerm { coeff: Expr::one(), tcoef: TimeCoef::ExpT(Scalar::one()), factors: vec![Factor::plain(0)] }],
            Expr::one(),
            int(1),
        );
        let sol = solve(&p, 4).unwrap();
        assert!(!sol.linear_path_used);
        let bell = [1, 1, 2, 5, 15];
        for (c, b) in sol.coeffs.iter().zip(bell) {
            assert_eq!(*c, Expr::rational(int(b)));
        }
        let off_grid = p.with_alpha(rat(2, 3));
        assert!(matches!(
            lrps_coefficients(&off_grid, 3),
            Err(SolveError::TimeCoefficientIncompatible { term: 0, .. })
        ));
        // α = 1/2: e^t = Σ t^{2kα}/Γ(1+2kα)·… lands on even orders
        let half = p.with_alpha(rat(1, 2));
        let sol = lrps_coefficients(&half, 4).unwrap();
        let res = residual_series(&half, &sol).unwrap();
        assert!(res.is_zero());
    }

    #[test]
    fn order_checks() {
        let p = kolmogorov(rat(1, 2));
        let sol = lrps_coefficients(&p, 0).unwrap();
        assert_eq!(sol.coeffs.len(), 1);
        assert!(matches!(residual_series(&p, &sol), Err(SolveError::OrderTooSmall { .. })));
        let mut two = p.clone();
        two.order = 2;
        two.ics.push(Expr::zero());
        assert!(matches!(lrps_coefficients(&two, 0), Err(SolveError::OrderTooSmall { order: 0, min: 1 })));
    }

    #[test]
    fn residual_detects_corruption() {
        let p = kolmogorov(rat(1, 2));
        let mut sol = lrps_coefficients(&p, 5).unwrap();
        assert!(residual_series(&p, &sol).unwrap().is_zero());
        sol.coeffs[3] = &sol.coeffs[3] + &Expr::x();
        let res = residual_series(&p, &sol).unwrap();
        assert!(res.coeff(0).is_zero() && res.coeff(1).is_zero());
        assert!(!res.coeff(2).is_zero());
    }

    #[test]
    fn empty_rhs_keeps_initial_polynomial() {
        let p = simple(vec![], x_plus_one(), rat(1, 2));
        let sol = solve(&p, 3).unwrap();
        assert_eq!(sol.coeffs, vec![x_plus_one(), Expr::zero(), Expr::zero(), Expr::zero()]);
    }

    #[test]
    fn forcing_and_sources() {
        // ψ' = ψ + 1 with forcing at order 2, linear and recurrence agree
        let mut p = simple(
            vec![
                RhsTerm { coeff: Expr::one(), tcoef: TimeCoef::Unit, factors: vec![Factor::plain(0)] },
                RhsTerm { coeff: Expr::one(), tcoef: TimeCoef::Unit, factors: vec![] },
            ],
            Expr::zero(),
            rat(1, 2),
        );
        p.rhs.forcing.insert(2, Expr::x());
        let a = lrps_coefficients(&p, 5).unwrap();
        let b = linear_fast_path(&p, 5).unwrap();
        assert_eq!(a.coeffs, b.coeffs);
        assert_eq!(a.coeffs[1], Expr::one());
        assert_eq!(a.coeffs[3], &Expr::one() + &Expr::x());
        assert!(residual_series(&p, &a).unwrap().is_zero());
    }

    #[test]
    fn mittag_leffler_tags() {
        let p = simple(vec![], Expr::zero(), rat(1, 2));
        let zero = solve(&p, 3).unwrap();
        assert!(mittag_leffler_form(&zero).is_some());
        let q = simple(
            vec![RhsTerm { coeff: Expr::one(), tcoef: TimeCoef::Unit, factors: vec![Factor::plain(1)] }],
            Expr::x(),
            rat(1, 2),
        );
        assert!(mittag_leffler_form(&solve(&q, 3).unwrap()).is_none());
    }
}
