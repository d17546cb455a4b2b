//! Numerical experiments. Each run returns a [`Report`]: named pass/fail
//! checks, scalar metrics and CSV tables with deterministic bodies.

mod bounds;
mod compact;
mod hyperbolic;

pub use bounds::run_bounds;
pub use compact::{run_compact_decay, run_comparison, run_limit, run_spectrum};
pub use hyperbolic::{run_conservation, run_heat_decay, run_main_theorem, run_transform};

use crate::config::Config;
use crate::error::Result;
use crate::hfourier::{abel_even_constant, closed_odd_constant};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// Passes when `value ≤ threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            passed: value <= threshold,
            note: None,
        }
    }

    /// Passes when `value ≥ threshold`.
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            passed: value >= threshold,
            note: None,
        }
    }

    /// Passes when `|value − target| ≤ tol`; `threshold` holds the target.
    pub fn near(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        let passed = (value - target).abs() <= tol;
        Self {
            name: name.into(),
            value,
            threshold: target,
            passed,
            note: Some(format!("tolerance {tol:e}")),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// A CSV file: header plus rows of preformatted cells.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub file: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: &str, header: &[&str]) -> Self {
        Self {
            file: file.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }
}

/// Scientific notation with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub experiment: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, f64>,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.into(),
            passed: true,
            checks: Vec::new(),
            metrics: BTreeMap::new(),
            tables: Vec::new(),
        }
    }

    pub fn check(&mut self, c: Check) {
        self.passed &= c.passed;
        self.checks.push(c);
    }

    pub fn metric(&mut self, key: impl Into<String>, v: f64) {
        self.metrics.insert(key.into(), v);
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// One line: name, status and the number of checks.
    pub fn summary_line(&self) -> String {
        let failed = self.failed_checks().count();
        let status = if self.passed { "PASS" } else { "FAIL" };
        format!(
            "{:<14} {status}  ({} checks, {failed} failed)",
            self.experiment,
            self.checks.len()
        )
    }
}

/// Calibrated constants of the closed-form kernels, embedded in summaries.
pub fn calibration_constants() -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    if let Ok(c) = closed_odd_constant(3) {
        m.insert("k_lambda_c3".into(), c);
    }
    if let Ok(c) = closed_odd_constant(5) {
        m.insert("k_lambda_c5".into(), c);
    }
    m.insert("k_lambda_c2".into(), abel_even_constant());
    m
}

/// The experiments run by `all`, in order.
pub const EXPERIMENTS: [&str; 8] = [
    "spectrum",
    "decay-compact",
    "comparison",
    "limit",
    "transform",
    "heat-decay",
    "main-theorem",
    "conservation",
];

/// Dispatch by name; `bounds` is accepted in addition to [`EXPERIMENTS`].
pub fn run_named(name: &str, cfg: &Config) -> Option<Result<Report>> {
    Some(match name {
        "spectrum" => run_spectrum(cfg),
        "decay-compact" => run_compact_decay(cfg),
        "comparison" => run_comparison(cfg),
        "limit" => run_limit(cfg),
        "transform" => run_transform(cfg),
        "heat-decay" => run_heat_decay(cfg),
        "main-theorem" => run_main_theorem(cfg),
        "conservation" => run_conservation(cfg),
        "bounds" => run_bounds(cfg),
        _ => return None,
    })
}

#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Sync, R: Send>(xs: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    xs.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T, R>(xs: &[T], f: impl Fn(&T) -> R) -> Vec<R> {
    xs.iter().map(f).collect()
}

/// Least-squares slope of `log y` against `log x`.
pub(crate) fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    crate::quadrature::linear_fit(&lx, &ly).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_cells_carry_17_digits() {
        let mut t = Table::new("x.csv", &["a", "b"]);
        t.push(vec![num(1.0 / 3.0), num(-2.5)]);
        assert_eq!(t.to_csv(), "a,b\n3.3333333333333331e-1,-2.5000000000000000e0\n");
    }

    #[test]
    fn report_fails_on_any_failed_check() {
        let mut r = Report::new("x");
        r.check(Check::at_most("a", 1.0, 2.0));
        assert!(r.passed);
        r.check(Check::near("b", 1.0, 2.0, 0.5));
        assert!(!r.passed);
        assert_eq!(r.failed_checks().count(), 1);
    }

    #[test]
    fn unknown_experiment_is_none() {
        assert!(run_named("nope", &Config::default()).is_none());
    }
}
