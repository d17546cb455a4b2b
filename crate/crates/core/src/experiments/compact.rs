use super::{num, Check, Report, Table};
use crate::config::{Config, KernelSpec};
use crate::error::Result;
use crate::evolution::check_order_preservation;
use crate::geometry::RadialManifold;
use crate::grid::{GridLayout, RadialGrid, RadialGridFunction};
use crate::kernels::Kernel;
use crate::nonlocal_op::{infinitesimal_limit_study, ConvolutionMatrix};
use crate::spectral::{decay_report, eigendecompose, match_spectra, oracle_circle, oracle_sphere, SpectralData};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

fn circle_operator(spec: &KernelSpec, n: usize, angular: usize) -> Result<(Kernel, ConvolutionMatrix, SpectralData)> {
    let m = RadialManifold::circle();
    let g = RadialGrid::new(m, GridLayout::Circle { n })?;
    let k = spec.build()?.normalize_mass(&m)?;
    let a = ConvolutionMatrix::assemble(&g, &k, angular)?;
    let s = eigendecompose(&a)?;
    Ok((k, a, s))
}

/// Circle spectrum against the cosine-integral oracle and the 2-sphere
/// radial spectrum against Funk–Hecke values.
pub fn run_spectrum(cfg: &Config) -> Result<Report> {
    let sc = &cfg.spectrum;
    let mut rep = Report::new("spectrum");

    let (k, _, s) = circle_operator(&sc.kernel, sc.circle_nodes, cfg.angular_order)?;
    rep.check(Check::at_most("circle |lambda_0|", s.lambda[0].abs(), sc.ground_tol));
    rep.check(Check::at_least("circle lambda_1", s.lambda[1], f64::MIN_POSITIVE).with_note("must be positive"));
    let worst_order = s
        .lambda
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::NEG_INFINITY, f64::max);
    rep.check(Check::at_most(
        "circle lambda nondecreasing (max drop)",
        worst_order,
        0.0,
    ));
    let targets = oracle_circle(&k, sc.circle_distinct.saturating_sub(1));
    let pairs = match_spectra(&s.gamma, &targets);
    let mut t = Table::new(
        "spectrum_circle.csv",
        &["k", "gamma_computed", "gamma_oracle", "abs_error"],
    );
    let mut err: f64 = 0.0;
    for (i, (c, o)) in pairs.iter().enumerate() {
        err = err.max((c - o).abs());
        t.push(vec![i.to_string(), num(*c), num(*o), num((c - o).abs())]);
    }
    rep.tables.push(t);
    rep.check(Check::at_most("circle oracle max error", err, sc.circle_oracle_tol));
    rep.check(Check::at_most(
        "circle orthonormality defect",
        s.orthonormality_defect(),
        sc.orthonormality_tol,
    ));
    rep.metric("circle_lambda_1", s.lambda[1]);

    let m = RadialManifold::sphere(2);
    let panels = ((sc.sphere_panels as f64 * cfg.grid_scale).round() as usize).max(1);
    let g = RadialGrid::new(
        m,
        GridLayout::Panels {
            r_max: PI,
            panels,
            order: sc.sphere_order,
        },
    )?;
    let k = sc.kernel.build()?.normalize_mass(&m)?;
    let a = ConvolutionMatrix::assemble(&g, &k, cfg.angular_order)?;
    let s = eigendecompose(&a)?;
    let targets = oracle_sphere(&k, sc.sphere_l_max);
    let pairs = match_spectra(&s.gamma, &targets);
    let mut t = Table::new(
        "spectrum_sphere.csv",
        &["l", "gamma_computed", "gamma_oracle", "abs_error"],
    );
    let mut err: f64 = 0.0;
    for (l, (c, o)) in pairs.iter().enumerate() {
        err = err.max((c - o).abs());
        t.push(vec![l.to_string(), num(*c), num(*o), num((c - o).abs())]);
    }
    rep.tables.push(t);
    rep.check(Check::at_most("sphere Funk-Hecke max error", err, sc.sphere_tol));
    rep.metric("sphere_nodes", g.len() as f64);
    Ok(rep)
}

/// Generic circle data with a nonzero first Fourier mode.
fn generic_circle_data(g: Arc<RadialGrid>) -> RadialGridFunction {
    RadialGridFunction::from_fn(g, |x| {
        1.0 + x.cos() + 0.4 * (2.0 * x).sin() + 0.3 * (-(x - 0.7).powi(2) / 0.2).exp()
    })
}

/// Exponential convergence to the mean on the circle.
pub fn run_compact_decay(cfg: &Config) -> Result<Report> {
    let dc = &cfg.decay_compact;
    let mut rep = Report::new("decay-compact");
    let (_, a, s) = circle_operator(&dc.kernel, dc.circle_nodes, cfg.angular_order)?;
    let u0 = generic_circle_data(a.grid.clone());
    let lambda1 = s.lambda[1];
    rep.metric("lambda_1", lambda1);

    let bound = decay_report(&s, &u0, &dc.bound_times)?;
    let worst = bound
        .rows
        .iter()
        .map(|r| r.l2_dist - r.l2_bound)
        .fold(f64::NEG_INFINITY, f64::max);
    rep.check(Check::at_most("L2 bound excess", worst, dc.bound_slack));

    let fit = decay_report(&s, &u0, &dc.fit_times)?;
    let rate = fit.fitted_rate.unwrap_or(f64::NAN);
    rep.check(Check::at_most(
        "fitted L2 rate relative error",
        ((rate - lambda1) / lambda1).abs(),
        dc.rate_tol,
    ));
    rep.metric("fitted_rate", rate);

    let linf = decay_report(&s, &u0, &dc.linf_times)?;
    let c = linf.rows[0].linf_dist * (lambda1 * linf.rows[0].t).exp();
    let worst = linf
        .rows
        .iter()
        .map(|r| r.linf_dist / (c * (-lambda1 * r.t).exp()))
        .fold(f64::NEG_INFINITY, f64::max);
    rep.check(
        Check::at_most("Linf distance over C exp(-lambda_1 t)", worst, 1.0 + 1e-12)
            .with_note("C calibrated at the first time"),
    );
    rep.metric("linf_constant", c);

    let flat = RadialGridFunction::constant(a.grid.clone(), 2.0);
    let worst = decay_report(&s, &flat, &dc.bound_times)?
        .rows
        .iter()
        .map(|r| r.l2_dist)
        .fold(0.0, f64::max);
    rep.check(Check::at_most(
        "constant data relative distance",
        worst / flat.norm_l2(),
        1e-10,
    ));

    let mut t = Table::new("decay_compact.csv", &["t", "l2_dist", "linf_dist", "l2_bound"]);
    let mut times: Vec<f64> = dc
        .bound_times
        .iter()
        .chain(&dc.fit_times)
        .chain(&dc.linf_times)
        .copied()
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    for r in decay_report(&s, &u0, &times)?.rows {
        t.push(vec![num(r.t), num(r.l2_dist), num(r.linf_dist), num(r.l2_bound)]);
    }
    rep.tables.push(t);
    Ok(rep)
}

/// Ordered pairs stay ordered under the exact flow, for several time scales.
pub fn run_comparison(cfg: &Config) -> Result<Report> {
    let cc = &cfg.comparison;
    let mut rep = Report::new("comparison");
    let (_, a, s) = circle_operator(&cc.kernel, cc.circle_nodes, cfg.angular_order)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut t = Table::new("comparison.csv", &["pair", "time_scale", "max_violation"]);
    let mut worst: f64 = 0.0;
    for p in 0..cc.pairs {
        let n = a.len();
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // gaps are zero on a random subset so the pair touches
        let v: Vec<f64> = u
            .iter()
            .map(|x| {
                if rng.gen_bool(0.3) {
                    *x
                } else {
                    x + rng.gen_range(0.0..0.5)
                }
            })
            .collect();
        let u0 = RadialGridFunction::new(a.grid.clone(), u)?;
        let v0 = RadialGridFunction::new(a.grid.clone(), v)?;
        let r = check_order_preservation(&a, &s, &u0, &v0, &cc.times, &cc.scales)?;
        for (c0, viol) in &r.violations {
            t.push(vec![p.to_string(), num(*c0), num(*viol)]);
        }
        worst = worst.max(r.max_violation());
    }
    rep.tables.push(t);
    rep.check(Check::at_most("max order violation", worst, cc.tol));
    Ok(rep)
}

/// Convergence of the rescaled operator to a multiple of the Laplacian.
pub fn run_limit(cfg: &Config) -> Result<Report> {
    let lc = &cfg.limit;
    let mut rep = Report::new("limit");
    let mut t = Table::new(
        "limit.csv",
        &["manifold", "dimension", "test_function", "eps", "error", "order"],
    );
    for case in &lc.cases {
        let m = RadialManifold::new(case.manifold, case.dimension)?;
        let g = RadialGrid::new(m, case.grid.layout(cfg.grid_scale))?;
        let base = lc.kernel.build()?;
        let k = base.with_constant(1.0 / base.euclidean_mass(m.dimension));
        let rows = infinitesimal_limit_study(&g, &k, case.test_function, &lc.epsilons, case.window, cfg.angular_order)?;
        let tf = serde_json::to_value(case.test_function)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        let label = format!("{} N={} {}", m.kind, m.dimension, tf);
        for r in &rows {
            t.push(vec![
                m.kind.to_string(),
                m.dimension.to_string(),
                tf.clone(),
                num(r.eps),
                num(r.error),
                r.order.map(num).unwrap_or_default(),
            ]);
        }
        if let Some([lo, hi]) = case.order_range {
            for r in rows.iter().filter(|r| r.order.is_some()) {
                let o = r.order.unwrap_or(f64::NAN);
                let mid = 0.5 * (lo + hi);
                rep.check(Check::near(
                    format!("{label} order at eps={}", r.eps),
                    o,
                    mid,
                    0.5 * (hi - lo),
                ));
            }
        }
        if let Some(floor) = case.error_floor {
            let worst = rows.iter().map(|r| r.error).fold(0.0, f64::max);
            rep.check(Check::at_most(format!("{label} max error"), worst, floor));
        }
    }
    rep.tables.push(t);
    Ok(rep)
}
