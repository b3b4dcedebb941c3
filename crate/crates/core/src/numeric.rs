//! Floating-point evaluation of series solutions and error tables.


use crate::dsl::{Func, Node, NodeKind};
use crate::error::{EvalError, SolveError};
use crate::expr::Expr;
use crate::probe::{probe_zero, ProbeConfig};
use crate::scalar::{to_f64, Bindings, Rational};
use crate::solver::{residual_series, solve, SeriesSolution};
use crate::special::gamma_real;

/// Σ φ_k(x)·t^{kα}/Γ(1+kα).
pub fn eval_coeffs(coeffs: &[Expr], alpha: f64, x: f64, t: f64, env: &Bindings) -> Result<f64, EvalError> {
    if t < 0.0 || t.is_nan() {
        return Err(EvalError::NegativeTime(t));
    }
    let ln_t = t.ln();
    let mut sum = 0.0;
    for (k, phi) in coeffs.iter().enumerate() {
        if phi.is_zero() {
            continue;
        }
        let value = phi.eval(x, env)?;
        if k == 0 {
            sum += value;
            continue;
        }
        if t == 0.0 {
            continue;
        }
        let ka = k as f64 * alpha;
        sum += value * (ka * ln_t).exp() / gamma_real(1.0 + ka)?;
    }
    if sum.is_finite() {
        Ok(sum)
    } else {
        Err(EvalError::NonFinite(format!("series at x = {x}, t = {t}")))
    }
}

pub fn eval_solution(sol: &SeriesSolution, x: f64, t: f64, env: &Bindings) -> Result<f64, EvalError> {
    eval_coeffs(&sol.coeffs, to_f64(&sol.problem.alpha), x, t, env)
}

/// Parameter values of the problem file, overridden by `overrides`.
pub fn bindings_with(sol: &SeriesSolution, overrides: &Bindings) -> Result<Bindings, EvalError> {
    let mut env = sol.problem.bindings()?;
    env.extend(overrides.iter().map(|(k, v)| (k.clone(), *v)));
    Ok(env)
}

/// Re-solves at another α when it differs from the solution's. The
/// coefficients depend on α through Gamma and radical atoms, so the cheap
/// and exact route is a fresh symbolic solve.
pub fn with_alpha(sol: &SeriesSolution, alpha: &Rational) -> Result<SeriesSolution, SolveError> {
    if *alpha == sol.problem.alpha {
        Ok(sol.clone())
    } else {
        solve(&sol.problem.with_alpha(alpha.clone()), sol.order)
    }
}

/// Numeric value of a reference expression in x and t.
pub fn eval_node(node: &Node, x: f64, t: f64, env: &Bindings) -> Result<f64, EvalError> {
    use crate::dsl::BinOp::*;
    let v = match &node.kind {
        NodeKind::Num(r) => to_f64(r),
        NodeKind::Ident(name) => match name.as_str() {
            "x" => x,
            "t" => t,
            _ => *env.get(name).ok_or_else(|| EvalError::UnboundParameter(name.clone()))?,
        },
        NodeKind::Neg(a) => -eval_node(a, x, t, env)?,
        NodeKind::Binary(op, a, b) => {
            let (a, b) = (eval_node(a, x, t, env)?, eval_node(b, x, t, env)?);
            match op {
                Add => a + b,
                Sub => a - b,
                Mul => a * b,
                Div => a / b,
                Pow => a.powf(b),
            }
        }
        NodeKind::Call(func, args) => {
            let a = eval_node(&args[0], x, t, env)?;
            match func {
                Func::Sinh => a.sinh(),
                Func::Cosh => a.cosh(),
                Func::Exp => a.exp(),
                Func::Sqrt => a.sqrt(),
                Func::Gamma => gamma_real(a)?,
                other => return Err(EvalError::Reference(format!("`{}` has no numeric value", other.name()))),
            }
        }
        NodeKind::At(..) => return Err(EvalError::Reference("`@` has no numeric value".into())),
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite(node.to_string()))
    }
}

#[derive(Debug, Clone, Default)]
pub struct EvalGrid {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    /// Evaluate at this α instead of the problem's.
    pub alpha: Option<Rational>,
    pub params: Bindings,
}

impl EvalGrid {
    pub fn new(xs: Vec<f64>, ts: Vec<f64>) -> Self {
        EvalGrid { xs, ts, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        if self.xs.is_empty() || self.ts.is_empty() {
            return Err(EvalError::Reference("grid is empty".into()));
        }
        if let Some(v) = self.xs.iter().chain(&self.ts).find(|v| !v.is_finite()) {
            return Err(EvalError::NonFinite(format!("grid value {v}")));
        }
        if let Some(t) = self.ts.iter().find(|t| **t < 0.0) {
            return Err(EvalError::NegativeTime(*t));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.xs.len() * self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points with x varying slowest.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().flat_map(move |&x| self.ts.iter().map(move |&t| (x, t)))
    }
}

#[derive(Debug, Clone)]
pub enum Reference {
    None,
    Expr(Node),
    /// One value per grid point, in grid order.
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub x: f64,
    pub t: f64,
    pub approx: f64,
    pub reference: Option<f64>,
    pub abs_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    pub name: Option<String>,
    pub order: usize,
    pub alpha: Rational,
    pub has_reference: bool,
    pub rows: Vec<Row>,
}

impl ErrorTable {
    pub fn max_abs_error(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.abs_error).reduce(f64::max)
    }
}

pub fn error_table(
    sol: &SeriesSolution,
    reference: &Reference,
    grid: &EvalGrid,
    name: Option<String>,
) -> Result<ErrorTable, SolveOrEvalError> {
    grid.validate()?;
    let sol = match &grid.alpha {
        Some(a) => with_alpha(sol, a)?,
        None => sol.clone(),
    };
    let env = bindings_with(&sol, &grid.params)?;
    if let Reference::Values(v) = reference {
        if v.len() != grid.len() {
            return Err(EvalError::Reference(format!("{} reference values for {} grid points", v.len(), grid.len())).into());
        }
    }
    let mut rows = Vec::with_capacity(grid.len());
    for (i, (x, t)) in grid.points().enumerate() {
        let approx = eval_solution(&sol, x, t, &env)?;
        let reference = match reference {
            Reference::None => None,
            Reference::Expr(node) => Some(eval_node(node, x, t, &env)?),
            Reference::Values(v) => Some(v[i]),
        };
        let abs_error = reference.map(|r| (approx - r).abs());
        rows.push(Row { x, t, approx, reference, abs_error });
    }
    Ok(ErrorTable {
        name,
        order: sol.order,
        alpha: sol.problem.alpha.clone(),
        has_reference: !matches!(reference, Reference::None),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveOrEvalError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualStatus {
    /// Canonical form is zero.
    Exact,
    /// Not reduced to zero symbolically, but vanishes at every probe point.
    Probe,
    Nonzero,
}

impl ResidualStatus {
    pub fn passed(self) -> bool {
        self != ResidualStatus::Nonzero
    }
}

/// Residual status at orders 0..=K−m.
pub fn check_residual(sol: &SeriesSolution, cfg: &ProbeConfig) -> Result<Vec<ResidualStatus>, SolveError> {
    let p = &sol.problem;
    let res = residual_series(p, sol)?;
    let fixed = Bindings::new();
    Ok((0..=sol.order - p.order)
        .map(|k| {
            let c = res.coeff(k);
            if c.is_zero() {
                ResidualStatus::Exact
            } else if probe_zero(&c, &fixed, cfg).unwrap_or(false) {
                ResidualStatus::Probe
            } else {
                ResidualStatus::Nonzero
            }
        })
        .collect())
}

/// Default tolerance for residual probes.
pub fn residual_probe_config() -> ProbeConfig {
    ProbeConfig::default().with_tolerance(1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_problem, parse_syntax};
    use crate::scalar::{int, rat};

    fn kolmogorov(alpha: &str) -> SeriesSolution {
        let src = format!("alpha = {alpha}\nrhs = (x+1)*Dx(psi) + x^2*exptime(1)*Dx(psi,2)\nic0 = x+1\n");
        solve(&parse_problem(&src).unwrap(), 8).unwrap()
    }

    #[test]
    fn initial_condition_at_t0() {
        let sol = kolmogorov("1/2");
        for x in [-1.0, 0.0, 0.3, 2.0] {
            assert_eq!(eval_solution(&sol, x, 0.0, &Bindings::new()).unwrap(), x + 1.0);
        }
        assert!(matches!(eval_solution(&sol, 0.0, -1.0, &Bindings::new()), Err(EvalError::NegativeTime(_))));
    }

    #[test]
    fn exponential_tail_bound() {
        let sol = kolmogorov("1");
        let v = eval_solution(&sol, 0.0, 1.0, &Bindings::new()).unwrap();
        // Lagrange remainder: e^ξ·t^9/9! with ξ ≤ t
        let bound = |x: f64, t: f64| (x + 1.0).abs() * t.exp() * t.powi(9) / 362880.0;
        assert!((v - std::f64::consts::E).abs() <= bound(0.0, 1.0));
        let grid = EvalGrid::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.25, 0.5, 1.0]);
        let exact = parse_syntax("(x+1)*exp(t)").unwrap();
        let table = error_table(&sol, &Reference::Expr(exact), &grid, None).unwrap();
        assert_eq!(table.rows.len(), 12);
        for r in &table.rows {
            assert!(r.abs_error.unwrap() <= bound(r.x, r.t), "{r:?}");
        }
        assert!(table.rows.iter().filter(|r| r.x == 0.0).all(|r| r.abs_error.unwrap() <= 3.1e-6));
    }

    #[test]
    fn self_reference_has_zero_error() {
        let sol = kolmogorov("1/2");
        let grid = EvalGrid::new(vec![0.1, 0.2], vec![0.5, 1.5]);
        let approx: Vec<f64> = grid.points().map(|(x, t)| eval_solution(&sol, x, t, &Bindings::new()).unwrap()).collect();
        let table = error_table(&sol, &Reference::Values(approx), &grid, None).unwrap();
        assert!(table.rows.iter().all(|r| r.abs_error == Some(0.0)));
        assert_eq!((table.rows[1].x, table.rows[1].t), (0.1, 1.5));
        let short = Reference::Values(vec![1.0]);
        assert!(error_table(&sol, &short, &grid, None).is_err());
    }

    #[test]
    fn alpha_override_resolves() {
        let sol = kolmogorov("1/2");
        let mut grid = EvalGrid::new(vec![0.0], vec![1.0]);
        grid.alpha = Some(int(1));
        let table = error_table(&sol, &Reference::None, &grid, None).unwrap();
        assert_eq!(table.alpha, int(1));
        assert!((table.rows[0].approx - std::f64::consts::E).abs() < 7.5e-6);
        grid.alpha = Some(rat(1, 3));
        assert_eq!(error_table(&sol, &Reference::None, &grid, None).unwrap().alpha, rat(1, 3));
    }

    #[test]
    fn reference_evaluation() {
        let env: Bindings = [("nu".to_string(), 2.0)].into_iter().collect();
        let node = parse_syntax("nu*x*exp(t) + gamma(1/2)^2 - sqrt(4)").unwrap();
        let v = eval_node(&node, 0.5, 0.0, &env).unwrap();
        assert!((v - (1.0 + std::f64::consts::PI - 2.0)).abs() < 1e-14);
        let missing = parse_syntax("mu*x").unwrap();
        assert!(matches!(eval_node(&missing, 1.0, 0.0, &env), Err(EvalError::UnboundParameter(_))));
    }

    #[test]
    fn residual_statuses() {
        let sol = kolmogorov("1/3");
        let status = check_residual(&sol, &residual_probe_config()).unwrap();
        assert_eq!(status.len(), 8);
        assert!(status.iter().all(|s| *s == ResidualStatus::Exact));
        let mut bad = sol.clone();
        bad.coeffs[4] = Expr::x();
        let status = check_residual(&bad, &residual_probe_config()).unwrap();
        assert_eq!(status[3], ResidualStatus::Nonzero);
        assert!(status[..3].iter().all(|s| s.passed()));
    }
}
