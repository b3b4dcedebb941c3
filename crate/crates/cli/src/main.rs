use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use lrps::dsl::{parse_expr, parse_problem_file, parse_syntax, Node, ParseError, ProblemFile};
use lrps::error::{EvalError, SolveError};
use lrps::export::{self, Format};
use lrps::expr::Expr;
use lrps::numeric::{
    bindings_with, check_residual, error_table, eval_solution, residual_probe_config, EvalGrid,
    Reference, ResidualStatus, SolveOrEvalError,
};
use lrps::scalar::{fmt_rational, int, to_f64, Bindings, Rational};
use lrps::solver::{mittag_leffler_form, solve, SeriesSolution};

const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Parser)]
#[command(name = "lrps", version, about = "Fractional power series solutions of time-fractional PDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve and print the coefficients, with the closed form when one is recognized
    Solve(Common),
    /// Print the coefficients phi_0..phi_K
    Coeffs(Common),
    /// Substitute the truncated solution back into the equation
    Residual {
        #[command(flatten)]
        common: Common,
        /// Test hook: perturb this coefficient before checking
        #[arg(long, hide = true)]
        corrupt_order: Option<usize>,
    },
    /// Tabulate the truncated solution, and its error against a reference, on a grid
    Table {
        #[command(flatten)]
        common: Common,
        /// Grid, e.g. "x=0.25:0.75:0.25 t=0.25:1:0.25" or "x=0,1 t=0.5"
        #[arg(long)]
        grid: String,
        /// Reference solution in x and t; defaults to the file's `exact`
        #[arg(long)]
        exact: Option<String>,
        /// Ignore the file's exact solution
        #[arg(long, conflicts_with = "exact")]
        no_exact: bool,
    },
    /// Evaluate the truncated solution at one point
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long)]
        t: f64,
    },
}

#[derive(Args)]
struct Common {
    /// Problem file
    file: PathBuf,
    /// Truncation order K
    #[arg(short = 'K', long = "order", default_value_t = 6)]
    order: usize,
    /// Output format: csv, json or pretty
    #[arg(long)]
    format: Option<Format>,
    /// Parameter value override, name=value (repeatable; last wins)
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// Solve at this alpha instead of the file's (exact decimal or fraction)
    #[arg(long)]
    alpha: Option<String>,
}

enum Failure {
    Usage(String),
    Parse(String),
    Solve(SolveError),
    Numeric(String),
    /// Already reported on stdout.
    Check,
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        Failure::Solve(e)
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        Failure::Numeric(e.to_string())
    }
}

impl From<SolveOrEvalError> for Failure {
    fn from(e: SolveOrEvalError) -> Self {
        match e {
            SolveOrEvalError::Solve(s) => Failure::Solve(s),
            SolveOrEvalError::Eval(v) => v.into(),
        }
    }
}

fn render_parse_error(path: &Path, src: &str, e: &ParseError) -> String {
    let mut msg = format!("{}:{}:{}: {}", path.display(), e.pos.line, e.pos.column, e.kind);
    if let Some(line) = src.lines().nth(e.pos.line.saturating_sub(1)) {
        msg.push_str(&format!("\n  | {line}\n  | {}^", " ".repeat(e.pos.column.saturating_sub(1))));
    }
    msg
}

fn load(path: &Path) -> Result<ProblemFile, Failure> {
    let src = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    parse_problem_file(&src).map_err(|e| Failure::Parse(render_parse_error(path, &src, &e)))
}

fn exact_rational(text: &str, what: &str) -> Result<Rational, Failure> {
    parse_expr(text)
        .ok()
        .and_then(|e| e.as_scalar())
        .and_then(|s| s.as_rational())
        .ok_or_else(|| Failure::Usage(format!("{what}: `{text}` is not a rational number")))
}

fn overrides(common: &Common, file: &ProblemFile) -> Result<Bindings, Failure> {
    let mut env = Bindings::new();
    for item in &common.params {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--param `{item}`: expected name=value")))?;
        let name = name.trim();
        if !file.problem.params.contains_key(name) {
            return Err(Failure::Usage(format!("--param: the problem declares no parameter `{name}`")));
        }
        let v = parse_expr(value)
            .ok()
            .and_then(|e| e.as_scalar())
            .and_then(|s| s.eval(&Bindings::new()).ok())
            .ok_or_else(|| Failure::Usage(format!("--param {name}: `{value}` is not a number")))?;
        env.insert(name.to_string(), v);
    }
    Ok(env)
}

struct Prepared {
    file: ProblemFile,
    sol: SeriesSolution,
    env: Bindings,
}

fn prepare(common: &Common, min_order: impl Fn(usize) -> usize) -> Result<Prepared, Failure> {
    let file = load(&common.file)?;
    let m = file.problem.order;
    let min = min_order(m);
    if common.order < min {
        return Err(Failure::Usage(format!("-K {} is below the minimum {min} for an order-{m} problem", common.order)));
    }
    let mut problem = file.problem.clone();
    if let Some(text) = &common.alpha {
        let a = exact_rational(text, "--alpha")?;
        if a <= int(0) || a > int(1) {
            return Err(Failure::Usage(format!("--alpha {text} is outside (0, 1]")));
        }
        problem = problem.with_alpha(a);
    }
    let env_over = overrides(common, &file)?;
    let started = Instant::now();
    let sol = solve(&problem, common.order)?;
    eprintln!(
        "K = {}, alpha = {}, {} path, {:.3} s",
        sol.order,
        fmt_rational(&sol.problem.alpha),
        if sol.linear_path_used { "linear" } else { "recurrence" },
        started.elapsed().as_secs_f64()
    );
    let env = bindings_with(&sol, &env_over)?;
    Ok(Prepared { file, sol, env })
}

/// Parses `x=a:b:step` or `x=v1,v2,...`; stepping is exact.
fn parse_axis(spec: &str, var: &str) -> Result<Vec<f64>, Failure> {
    let bad = |why: &str| Failure::Usage(format!("--grid {var}: {why}"));
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:end:step"));
        }
        let start = exact_rational(parts[0], "--grid")?;
        let end = exact_rational(parts[1], "--grid")?;
        let step = exact_rational(parts[2], "--grid")?;
        if step <= int(0) {
            return Err(bad("step must be positive"));
        }
        if end < start {
            return Err(bad("end is before start"));
        }
        let count = ((&end - &start) / &step).floor();
        if count > int(MAX_GRID_POINTS as i64) {
            return Err(bad("too many points"));
        }
        let n = count.to_integer().to_string().parse::<usize>().unwrap_or(0);
        Ok((0..=n).map(|i| to_f64(&(&start + &step * int(i as i64)))).collect())
    } else {
        spec.split(',').map(|v| exact_rational(v.trim(), "--grid").map(|r| to_f64(&r))).collect()
    }
}

fn parse_grid(spec: &str) -> Result<EvalGrid, Failure> {
    let mut xs = None;
    let mut ts = None;
    for part in spec.split_whitespace() {
        let (var, axis) =
            part.split_once('=').ok_or_else(|| Failure::Usage(format!("--grid: `{part}` is not var=values")))?;
        let slot = match var {
            "x" => &mut xs,
            "t" => &mut ts,
            other => return Err(Failure::Usage(format!("--grid: unknown variable `{other}`"))),
        };
        if slot.is_some() {
            return Err(Failure::Usage(format!("--grid: `{var}` given twice")));
        }
        *slot = Some(parse_axis(axis, var)?);
    }
    let (Some(xs), Some(ts)) = (xs, ts) else {
        return Err(Failure::Usage("--grid needs both x=... and t=...".into()));
    };
    if xs.len() * ts.len() > MAX_GRID_POINTS {
        return Err(Failure::Usage("--grid: too many points".into()));
    }
    Ok(EvalGrid::new(xs, ts))
}

fn print_coeffs(p: &Prepared, format: Format) {
    print!("{}", export::coeffs(&p.sol, p.file.name.as_deref(), format));
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Coeffs(common) => {
            let p = prepare(&common, |m| m.saturating_sub(1))?;
            print_coeffs(&p, common.format.unwrap_or(Format::Pretty));
        }
        Command::Solve(common) => {
            let p = prepare(&common, |m| m.saturating_sub(1))?;
            let format = common.format.unwrap_or(Format::Pretty);
            print_coeffs(&p, format);
            if format == Format::Pretty {
                if let Some(ml) = mittag_leffler_form(&p.sol) {
                    println!("psi = {ml}");
                }
            }
        }
        Command::Residual { common, corrupt_order } => {
            let mut p = prepare(&common, |m| m)?;
            if let Some(k) = corrupt_order {
                if k < p.sol.coeffs.len() {
                    p.sol.coeffs[k] = &p.sol.coeffs[k] + &Expr::x();
                }
            }
            let m = p.sol.problem.order;
            let status = check_residual(&p.sol, &residual_probe_config())?;
            let mut ok = true;
            for (k, s) in status.iter().enumerate() {
                let label = match s {
                    ResidualStatus::Exact => "PASS (exact)",
                    ResidualStatus::Probe => "PASS (probe)",
                    ResidualStatus::Nonzero => "FAIL",
                };
                println!("order {k} (phi_{}): {label}", k + m);
                ok &= s.passed();
            }
            println!("residual through order {}: {}", p.sol.order - m, if ok { "PASS" } else { "FAIL" });
            if !ok {
                return Err(Failure::Check);
            }
        }
        Command::Table { common, grid, exact, no_exact } => {
            let p = prepare(&common, |m| m.saturating_sub(1))?;
            let mut g = parse_grid(&grid)?;
            g.params = p.env.clone();
            let reference = match (&exact, no_exact) {
                (_, true) => Reference::None,
                (Some(text), false) => Reference::Expr(reference_node(text)?),
                (None, false) => p.file.exact.clone().map(Reference::Expr).unwrap_or(Reference::None),
            };
            let table = error_table(&p.sol, &reference, &g, p.file.name.clone())?;
            print!("{}", export::table(&table, common.format.unwrap_or(Format::Csv)));
        }
        Command::Eval { common, x, t } => {
            let p = prepare(&common, |m| m.saturating_sub(1))?;
            let v = eval_solution(&p.sol, x, t, &p.env)?;
            match common.format.unwrap_or(Format::Pretty) {
                Format::Json => println!("{{\"x\": {x}, \"t\": {t}, \"value\": {v}}}"),
                Format::Csv => println!("x,t,value\n{x:.16e},{t:.16e},{v:.16e}"),
                Format::Pretty => println!("{v:.16e}"),
            }
        }
    }
    Ok(())
}

fn reference_node(text: &str) -> Result<Node, Failure> {
    parse_syntax(text).map_err(|e| Failure::Parse(format!("--exact:{}:{}: {}", e.pos.line, e.pos.column, e.kind)))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let code = match &f {
                Failure::Usage(msg) | Failure::Parse(msg) => {
                    eprintln!("error: {msg}");
                    2
                }
                Failure::Solve(e) => {
                    eprintln!("error: {e}");
                    3
                }
                Failure::Numeric(msg) => {
                    eprintln!("error: {msg}");
                    1
                }
                Failure::Check => 1,
            };
            ExitCode::from(code)
        }
    }
}
