//! Text output of error tables and coefficient lists.

use std::fmt::Write;

use serde::Serialize;

use crate::numeric::ErrorTable;
use crate::scalar::fmt_rational;
use crate::solver::SeriesSolution;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Pretty,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "pretty" => Ok(Format::Pretty),
            other => Err(format!("unknown format `{other}` (expected csv, json or pretty)")),
        }
    }
}

/// 17 significant digits; enough to re-read every f64 exactly.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Serialize)]
struct TableJson<'a> {
    name: Option<&'a str>,
    order: usize,
    alpha: String,
    rows: Vec<RowJson>,
}

#[derive(Serialize)]
struct RowJson {
    x: f64,
    t: f64,
    approx: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    abs_error: Option<f64>,
}

#[derive(Serialize)]
struct CoeffsJson<'a> {
    alpha: String,
    order: usize,
    linear_path: bool,
    coefficients: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<&'a str>,
}

pub fn table(t: &ErrorTable, format: Format) -> String {
    match format {
        Format::Csv => table_csv(t),
        Format::Json => table_json(t),
        Format::Pretty => table_pretty(t),
    }
}

pub fn table_csv(t: &ErrorTable) -> String {
    let mut out = String::new();
    if t.has_reference {
        out.push_str("x,t,approx,reference,abs_error\n");
    } else {
        out.push_str("x,t,approx\n");
    }
    for r in &t.rows {
        let _ = write!(out, "{},{},{}", num(r.x), num(r.t), num(r.approx));
        if t.has_reference {
            let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
            let _ = write!(out, ",{},{}", opt(r.reference), opt(r.abs_error));
        }
        out.push('\n');
    }
    out
}

pub fn table_json(t: &ErrorTable) -> String {
    let doc = TableJson {
        name: t.name.as_deref(),
        order: t.order,
        alpha: fmt_rational(&t.alpha),
        rows: t
            .rows
            .iter()
            .map(|r| RowJson { x: r.x, t: r.t, approx: r.approx, reference: r.reference, abs_error: r.abs_error })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes") + "\n"
}

pub fn table_pretty(t: &ErrorTable) -> String {
    let mut out = String::new();
    if let Some(name) = &t.name {
        let _ = writeln!(out, "# {name}");
    }
    let _ = writeln!(out, "# K = {}, alpha = {}", t.order, fmt_rational(&t.alpha));
    if t.has_reference {
        let _ = writeln!(out, "{:>8} {:>8} {:>22} {:>22} {:>12}", "x", "t", "approx", "reference", "abs_error");
    } else {
        let _ = writeln!(out, "{:>8} {:>8} {:>22}", "x", "t", "approx");
    }
    for r in &t.rows {
        let _ = write!(out, "{:>8.4} {:>8.4} {:>22.15}", r.x, r.t, r.approx);
        if t.has_reference {
            let _ = write!(
                out,
                " {:>22.15} {:>12.4e}",
                r.reference.unwrap_or(f64::NAN),
                r.abs_error.unwrap_or(f64::NAN)
            );
        }
        out.push('\n');
    }
    out
}

pub fn coeffs(sol: &SeriesSolution, name: Option<&str>, format: Format) -> String {
    match format {
        Format::Pretty => coeffs_pretty(sol),
        Format::Csv => {
            let mut out = String::from("k,phi\n");
            for (k, c) in sol.coeffs.iter().enumerate() {
                let _ = writeln!(out, "{k},{}", csv_quote(&c.to_string()));
            }
            out
        }
        Format::Json => {
            let doc = CoeffsJson {
                alpha: fmt_rational(&sol.problem.alpha),
                order: sol.order,
                linear_path: sol.linear_path_used,
                coefficients: sol.coeffs.iter().map(ToString::to_string).collect(),
                name,
            };
            serde_json::to_string_pretty(&doc).expect("plain data serializes") + "\n"
        }
    }
}

/// One `phi_k = ...` line per coefficient, zeros included.
pub fn coeffs_pretty(sol: &SeriesSolution) -> String {
    let mut out = String::new();
    for (k, c) in sol.coeffs.iter().enumerate() {
        let _ = writeln!(out, "phi_{k} = {c}");
    }
    out
}
