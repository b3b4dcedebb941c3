use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn lrps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lrps")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

fn temp_file(name: &str, contents: &str) -> String {
    let dir = std::env::temp_dir().join(format!("lrps-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn kolmogorov_coefficients() {
    let o = lrps(&["coeffs", &path("kolmogorov.frac"), "-K", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 5);
    assert!(out.lines().all(|l| l.ends_with(" = x + 1")));
}

#[test]
fn solve_tags_mittag_leffler_form() {
    let o = lrps(&["solve", &path("kolmogorov.frac"), "-K", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("psi = (x + 1)*E_alpha(t^alpha)"));
    let o = lrps(&["solve", &path("klein_gordon.frac"), "-K", "3"]);
    assert!(!stdout(&o).contains("E_alpha"));
}

#[test]
fn klein_gordon_fourth_coefficient() {
    let o = lrps(&["coeffs", &path("klein_gordon.frac"), "-K", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("phi_4 = -1/24*lambda^6*nu*omega^(-2)*cosh(1/2*nu^(1/2)*omega^(-1/2)*x)"), "{out}");
}

#[test]
fn order_below_minimum_is_usage_error() {
    let o = lrps(&["coeffs", &path("klein_gordon.frac"), "-K", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("below the minimum"));
    let o = lrps(&["residual", &path("klein_gordon.frac"), "-K", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn residual_passes_on_fixtures() {
    for f in ["kolmogorov.frac", "klein_gordon.frac", "burgers_delay.frac"] {
        let o = lrps(&["residual", &path(f), "-K", "6"]);
        assert_eq!(o.status.code(), Some(0), "{f}: {}", stdout(&o));
        assert!(stdout(&o).trim_end().ends_with("PASS"));
    }
}

#[test]
fn corrupted_coefficient_fails_at_its_order() {
    let o = lrps(&["residual", &path("burgers_delay.frac"), "-K", "6", "--corrupt-order", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    let first_fail = out.lines().find(|l| l.contains("FAIL")).unwrap();
    assert!(first_fail.starts_with("order 2 (phi_3)"), "{out}");
    assert!(out.lines().take(2).all(|l| l.contains("PASS")));
}

#[test]
fn table_two_grid() {
    let o = lrps(&[
        "table",
        &path("burgers_delay.frac"),
        "-K",
        "5",
        "--alpha",
        "1",
        "--grid",
        "x=0.25:0.75:0.25 t=0.25:1:0.25",
        "--exact",
        "x*exp(t)",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "x,t,approx,reference,abs_error");
    assert_eq!(lines.len(), 13);
    let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!((first[0], first[1]), (0.25, 0.25));
    assert!((first[4] - 8.79e-8).abs() < 1e-9);
}

#[test]
fn table_without_reference() {
    let o = lrps(&["table", &path("burgers_delay.frac"), "-K", "3", "--grid", "x=1 t=0,1", "--no-exact"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("x,t,approx"));
    assert_eq!(stdout(&o).lines().count(), 3);
}

#[test]
fn invalid_grids() {
    for grid in ["x=0:1:0 t=1", "x=0:1 t=1", "x=1", "y=1 t=1", "x=1 t=a"] {
        let o = lrps(&["table", &path("kolmogorov.frac"), "--grid", grid]);
        assert_eq!(o.status.code(), Some(2), "{grid}");
    }
    let o = lrps(&["table", &path("kolmogorov.frac"), "--grid", "x=0 t=-1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn eval_points() {
    let o = lrps(&["eval", &path("kolmogorov.frac"), "-K", "8", "--x", "0.5", "--t", "0"]);
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), 1.5);
    let o = lrps(&["eval", &path("kolmogorov.frac"), "-K", "8", "--alpha", "1", "--x", "0", "--t", "1"]);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - std::f64::consts::E).abs() <= std::f64::consts::E / 362880.0);
    let o = lrps(&["eval", &path("burgers_delay.frac"), "-K", "5", "--alpha", "1", "--x", "0.25", "--t", "0.25"]);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!(((0.25 * 0.25f64.exp() - v) - 8.79e-8).abs() < 1e-9);
}

#[test]
fn parameter_overrides() {
    let base = lrps(&["eval", &path("klein_gordon.frac"), "-K", "3", "--x", "0.3", "--t", "0.2"]);
    let a = lrps(&["eval", &path("klein_gordon.frac"), "-K", "3", "--x", "0.3", "--t", "0.2", "--param", "lambda=2"]);
    let b = lrps(&[
        "eval",
        &path("klein_gordon.frac"),
        "-K",
        "3",
        "--x",
        "0.3",
        "--t",
        "0.2",
        "--param",
        "lambda=5",
        "--param",
        "lambda=2",
    ]);
    assert_eq!(a.status.code(), Some(0));
    assert_ne!(stdout(&base), stdout(&a));
    assert_eq!(stdout(&a), stdout(&b));
    let o = lrps(&["eval", &path("klein_gordon.frac"), "--x", "0", "--t", "0", "--param", "mu=1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn parse_errors_exit_2_with_position() {
    let f = temp_file("bad.frac", "alpha = 1/2\nrhs = psi +* x\nic0 = x\n");
    let o = lrps(&["coeffs", &f]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.frac:2:12:"), "{}", stderr(&o));
    let o = lrps(&["coeffs", "/nonexistent/problem.frac"]);
    assert_eq!(o.status.code(), Some(2));
    let o = lrps(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solver_rejection_exit_3() {
    // exptime at alpha = 2/3 is off the t^(k*alpha) grid
    let f = temp_file("offgrid.frac", "alpha = 2/3\nrhs = exptime(1)*psi^2\nic0 = 1\n");
    let o = lrps(&["coeffs", &f, "-K", "3"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn output_is_deterministic() {
    let args = ["table", &path("burgers_delay.frac"), "-K", "4", "--grid", "x=0:1:1/4 t=0:1:1/4", "--format", "json"];
    let a = lrps(&args);
    let b = lrps(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stderr(&a).contains("K = 4"));
}
