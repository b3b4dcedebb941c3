//! Numeric fallback for equality of symbolic values.
//!
//! Canonical forms decide most identities exactly. What they cannot see
//! (relations between Gamma atoms at non-integer arguments, for instance) is
//! checked by evaluating at random points.

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::EvalError;
use crate::expr::Expr;
use crate::scalar::{Bindings, Scalar};

#[derive(Debug, Clone)]
pub struct ProbeConfig {
    pub points: usize,
    pub tolerance: f64,
    pub seed: u64,
    /// Range for parameters that are not fixed by the caller.
    pub param_range: (f64, f64),
    pub x_range: (f64, f64),
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { points: 8, tolerance: 1e-9, seed: 0x5eed, param_range: (0.5, 2.0), x_range: (-1.0, 1.0) }
    }
}

impl ProbeConfig {
    pub fn with_points(mut self, points: usize) -> Self {
        self.points = points;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }
}

/// Yields (x, bindings) sample points.
struct Sampler<'a> {
    rng: StdRng,
    free: Vec<String>,
    fixed: &'a Bindings,
    cfg: &'a ProbeConfig,
}

impl<'a> Sampler<'a> {
    fn new(names: BTreeSet<String>, fixed: &'a Bindings, cfg: &'a ProbeConfig) -> Self {
        let free = names.into_iter().filter(|n| !fixed.contains_key(n)).collect();
        Sampler { rng: StdRng::seed_from_u64(cfg.seed), free, fixed, cfg }
    }

    fn next(&mut self) -> (f64, Bindings) {
        let mut env = self.fixed.clone();
        for name in &self.free {
            let v = self.rng.gen_range(self.cfg.param_range.0..=self.cfg.param_range.1);
            env.insert(name.clone(), v);
        }
        let x = self.rng.gen_range(self.cfg.x_range.0..=self.cfg.x_range.1);
        (x, env)
    }
}

fn close(a: (f64, f64), b: (f64, f64), tol: f64) -> bool {
    let scale = a.1.max(b.1).max(f64::MIN_POSITIVE);
    (a.0 - b.0).abs() <= tol * scale
}

pub fn probe_equal_scalar(a: &Scalar, b: &Scalar, fixed: &Bindings, cfg: &ProbeConfig) -> Result<bool, EvalError> {
    if (a - b).is_zero() {
        return Ok(true);
    }
    let mut names = BTreeSet::new();
    a.params(&mut names);
    b.params(&mut names);
    let mut sampler = Sampler::new(names, fixed, cfg);
    for _ in 0..cfg.points {
        let (_, env) = sampler.next();
        if !close(a.eval_with_magnitude(&env)?, b.eval_with_magnitude(&env)?, cfg.tolerance) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Canonical comparison first, then random-point evaluation.
pub fn probe_equal(a: &Expr, b: &Expr, fixed: &Bindings, cfg: &ProbeConfig) -> Result<bool, EvalError> {
    if (a - b).is_zero() {
        return Ok(true);
    }
    let mut names = BTreeSet::new();
    a.params(&mut names);
    b.params(&mut names);
    let mut sampler = Sampler::new(names, fixed, cfg);
    for _ in 0..cfg.points {
        let (x, env) = sampler.next();
        if !close(a.eval_with_magnitude(x, &env)?, b.eval_with_magnitude(x, &env)?, cfg.tolerance) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact zero, or numerically zero relative to the size of its own terms.
pub fn probe_zero(e: &Expr, fixed: &Bindings, cfg: &ProbeConfig) -> Result<bool, EvalError> {
    if e.is_zero() {
        return Ok(true);
    }
    let mut names = BTreeSet::new();
    e.params(&mut names);
    let mut sampler = Sampler::new(names, fixed, cfg);
    for _ in 0..cfg.points {
        let (x, env) = sampler.next();
        let (value, magnitude) = e.eval_with_magnitude(x, &env)?;
        if value.abs() > cfg.tolerance * magnitude.max(f64::MIN_POSITIVE) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn gamma_identity_needs_probe() {
        // Γ(5/2) = (3/2)Γ(3/2) is invisible to the canonical form
        let a = Scalar::gamma(&rat(5, 2)).unwrap();
        let b = Scalar::gamma(&rat(3, 2)).unwrap().scale(&rat(3, 2));
        assert_ne!(a, b);
        assert!(probe_equal_scalar(&a, &b, &Bindings::new(), &ProbeConfig::default()).unwrap());
        let c = Scalar::gamma(&rat(3, 2)).unwrap();
        assert!(!probe_equal_scalar(&a, &c, &Bindings::new(), &ProbeConfig::default()).unwrap());
    }

    #[test]
    fn delay_coefficient_matches_closed_form() {
        // x(2^{-α} + 1/2) at α = 1/2 against x·c₁(α) built from a power of 1/2
        let alpha = rat(1, 2);
        let lhs = Expr::x().scale(&(&Scalar::rational_pow(&int(2), &-alpha.clone()).unwrap() + &Scalar::from_rational(rat(1, 2))));
        let c1 = &Scalar::rational_pow(&rat(1, 2), &alpha).unwrap() + &Scalar::from_rational(rat(1, 2));
        let rhs = Expr::x().scale(&c1);
        assert!(probe_equal(&lhs, &rhs, &Bindings::new(), &ProbeConfig::default()).unwrap());
    }

    #[test]
    fn unequal_detected() {
        let a = Expr::x();
        let b = Expr::x().scale(&Scalar::param("nu"));
        assert!(!probe_equal(&a, &b, &Bindings::new(), &ProbeConfig::default()).unwrap());
        let mut fixed = Bindings::new();
        fixed.insert("nu".into(), 1.0);
        assert!(probe_equal(&a, &b, &fixed, &ProbeConfig::default()).unwrap());
    }

    #[test]
    fn overflow_is_reported() {
        let huge = Expr::exp_linear(Scalar::from_int(10_000)).unwrap();
        let cfg = ProbeConfig { x_range: (1.0, 2.0), ..ProbeConfig::default() };
        assert!(probe_zero(&huge, &Bindings::new(), &cfg).is_err());
    }
}
