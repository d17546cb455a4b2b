//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//! Thresholds are written out here rather than read from the config.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use nonlocal_diffusion::config::Config;
use nonlocal_diffusion::experiments::{
    run_bounds, run_compact_decay, run_comparison, run_conservation, run_heat_decay, run_limit, run_main_theorem,
    run_spectrum, run_transform, Report,
};
use std::time::{Duration, Instant};

struct Outcome {
    passed: bool,
    detail: String,
}

/// Value of the first check whose name contains `key`.
fn value(rep: &Report, key: &str) -> f64 {
    rep.checks
        .iter()
        .find(|c| c.name.contains(key))
        .map(|c| c.value)
        .unwrap_or(f64::NAN)
}

fn values<'a>(rep: &'a Report, key: &'a str) -> impl Iterator<Item = (&'a str, f64)> + 'a {
    rep.checks
        .iter()
        .filter(move |c| c.name.contains(key))
        .map(|c| (c.name.as_str(), c.value))
}

fn timed(f: impl FnOnce() -> nonlocal_diffusion::Result<Report>) -> (Report, Duration) {
    let t0 = Instant::now();
    let r = f().expect("experiment runs");
    (r, t0.elapsed())
}

/// Collects failing conditions with a short description.
#[derive(Default)]
struct Conds(Vec<String>);

impl Conds {
    fn le(&mut self, what: &str, v: f64, limit: f64) {
        if !(v <= limit) {
            self.0.push(format!("{what} = {v:.3e} > {limit:.1e}"));
        }
    }
    fn within(&mut self, what: &str, v: f64, lo: f64, hi: f64) {
        if !(v >= lo && v <= hi) {
            self.0.push(format!("{what} = {v:.4} not in [{lo}, {hi}]"));
        }
    }
    fn done(self, ok_detail: String) -> Outcome {
        if self.0.is_empty() {
            Outcome {
                passed: true,
                detail: ok_detail,
            }
        } else {
            Outcome {
                passed: false,
                detail: self.0.join("; "),
            }
        }
    }
}

fn main() {
    let cfg = Config::default();
    let mut outcomes: Vec<(&str, Outcome)> = Vec::new();

    let (spec, spec_time) = timed(|| run_spectrum(&cfg));
    {
        let mut c = Conds::default();
        c.le("|lambda_0|", value(&spec, "circle |lambda_0|"), 1e-10);
        if !(value(&spec, "circle lambda_1") > 0.0) {
            c.0.push("lambda_1 not positive".into());
        }
        c.le("max decrease of lambda_k", value(&spec, "nondecreasing"), 0.0);
        c.le("oracle error (10 distinct)", value(&spec, "circle oracle"), 1e-6);
        c.le("orthonormality defect", value(&spec, "orthonormality"), 1e-8);
        c.le("runtime [s]", spec_time.as_secs_f64(), 60.0);
        let d = format!(
            "oracle err {:.1e}, |lambda_0| {:.1e}",
            value(&spec, "circle oracle"),
            value(&spec, "circle |lambda_0|")
        );
        outcomes.push(("spectral structure on the circle", c.done(d)));
    }
    {
        let mut c = Conds::default();
        c.le("Funk-Hecke error l<=8", value(&spec, "Funk-Hecke"), 1e-4);
        c.le("runtime [s]", spec_time.as_secs_f64(), 120.0);
        let d = format!(
            "max error {:.1e} on {} nodes",
            value(&spec, "Funk-Hecke"),
            spec.metrics["sphere_nodes"]
        );
        outcomes.push(("Funk-Hecke cross-check on the 2-sphere", c.done(d)));
    }

    let (decay, _) = timed(|| run_compact_decay(&cfg));
    {
        let mut c = Conds::default();
        c.le("L2 bound excess", value(&decay, "L2 bound"), 1e-8);
        c.le("fitted rate relative error", value(&decay, "fitted L2 rate"), 0.02);
        c.le(
            "Linf over calibrated bound",
            value(&decay, "Linf distance"),
            1.0 + 1e-12,
        );
        let d = format!(
            "rate {:.6} vs lambda_1 {:.6}",
            decay.metrics["fitted_rate"], decay.metrics["lambda_1"]
        );
        outcomes.push(("decay to the mean", c.done(d)));
    }

    let (limit, _) = timed(|| run_limit(&cfg));
    {
        let mut c = Conds::default();
        let mut orders = Vec::new();
        for (name, v) in values(&limit, "order") {
            c.within(name, v, 1.9, 2.1);
            orders.push(format!("{v:.3}"));
        }
        if orders.len() < 4 {
            c.0.push("missing sphere/hyperbolic orders".into());
        }
        c.le(
            "euclidean quadratic error",
            value(&limit, "euclidean N=1 quadratic"),
            1e-8,
        );
        outcomes.push(("infinitesimal limit", c.done(format!("orders {}", orders.join(" ")))));
    }

    let (tr, _) = timed(|| run_transform(&cfg));
    {
        let mut c = Conds::default();
        for n in [2, 3] {
            c.le(
                &format!("N={n} round trip"),
                value(&tr, &format!("N={n} round trip")),
                1e-4,
            );
            c.le(
                &format!("N={n} Laplacian"),
                value(&tr, &format!("N={n} Laplacian")),
                1e-3,
            );
            c.le(
                &format!("N={n} convolution"),
                value(&tr, &format!("N={n} convolution")),
                1e-4,
            );
            c.le(
                &format!("N={n} Plancherel"),
                value(&tr, &format!("N={n} Plancherel")),
                1e-3,
            );
        }
        let worst = values(&tr, "N=")
            .filter(|(n, _)| !n.contains("k_lambda") && !n.contains("V(r)"))
            .fold(0.0, |m, (_, v)| f64::max(m, v));
        outcomes.push((
            "transform fidelity",
            c.done(format!("worst relative error {worst:.1e}")),
        ));
    }
    {
        let mut c = Conds::default();
        c.le("N=3 closed form vs direct", value(&tr, "N=3 k_lambda"), 1e-5);
        c.le("N=2 Abel form vs direct", value(&tr, "N=2 k_lambda"), 1e-3);
        let d = format!(
            "odd {:.1e}, even {:.1e}",
            value(&tr, "N=3 k_lambda"),
            value(&tr, "N=2 k_lambda")
        );
        outcomes.push(("kernel formulas", c.done(d)));
    }

    let (heat, heat_time) = timed(|| run_heat_decay(&cfg));
    {
        let mut c = Conds::default();
        let (s2, s3, s2s) = (
            heat.metrics["slope_large_N2"],
            heat.metrics["slope_large_N3"],
            heat.metrics["slope_small_N2"],
        );
        c.within("N=2 large-time slope", s2, -1.55, -1.45);
        c.within("N=3 large-time slope", s3, -1.55, -1.45);
        c.within("N=2 small-time slope", s2s, -1.1, -0.9);
        c.le("runtime [s]", heat_time.as_secs_f64(), 60.0);
        outcomes.push((
            "heat-kernel decay",
            c.done(format!("slopes {s2:.4} {s3:.4}, small {s2s:.4}")),
        ));
    }

    let (mt, _) = timed(|| run_main_theorem(&cfg));
    {
        let mut c = Conds::default();
        c.le("largest g(t_k+1)/g(t_k)", value(&mt, "g step ratio"), 1.0 - 1e-12);
        c.le("g(40)/g(5)", value(&mt, "g(t_max)/g(t_min)"), 0.25);
        c.le("transform vs direct at t=1", value(&mt, "transform vs direct"), 1e-3);
        let d = format!(
            "g(40)/g(5) = {:.3} (artifact threshold 0.25), cross-check {:.1e}",
            value(&mt, "g(t_max)/g(t_min)"),
            value(&mt, "transform vs direct")
        );
        outcomes.push(("main theorem trend", c.done(d)));
    }

    let (cons, _) = timed(|| run_conservation(&cfg));
    {
        let mut c = Conds::default();
        c.le("Fourier drift", value(&cons, "Fourier-path"), 1e-6);
        c.le("quadrature drift", value(&cons, "quadrature-path"), 1e-3);
        c.le("mass-normalized decay error", value(&cons, "mass-normalized"), 1e-3);
        let d = format!(
            "drifts {:.1e} / {:.1e}",
            value(&cons, "Fourier-path"),
            value(&cons, "quadrature-path")
        );
        outcomes.push(("conservation", c.done(d)));
    }

    let (cmp, _) = timed(|| run_comparison(&cfg));
    {
        let mut c = Conds::default();
        c.le("max order violation", value(&cmp, "order violation"), 1e-10);
        if !(cfg.comparison.pairs >= 100
            && cfg.comparison.scales.contains(&0.5)
            && cfg.comparison.scales.contains(&2.0))
        {
            c.0.push("pair count or time scales below the required set".into());
        }
        outcomes.push((
            "comparison principle",
            c.done(format!("max violation {:.1e}", value(&cmp, "order violation"))),
        ));
    }

    {
        let mut c = Conds::default();
        let mut got = Vec::new();
        for (name, v) in values(&tr, "V(r)") {
            c.le(name, (v - 2.0).abs(), 0.1);
            got.push(format!("{v:.4}"));
        }
        if got.len() < 2 {
            c.0.push("missing drift points".into());
        }
        outcomes.push(("drift velocity", c.done(format!("r V(r) = {}", got.join(", ")))));
    }

    let (bounds, _) = timed(|| run_bounds(&cfg));
    {
        let mut c = Conds::default();
        for ch in &bounds.checks {
            c.le(&ch.name, ch.value, 1.0 + 1e-9);
        }
        outcomes.push(("bound suite", c.done("all constants hold".into())));
    }

    let mut failed = 0;
    for (i, (name, o)) in outcomes.iter().enumerate() {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {:>2}. {name}: {}", i + 1, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
