//! Analytic decay bounds checked with a constant fitted once at the first
//! grid point. The check fails when any later point needs a larger constant;
//! the factor by which it must grow is reported as a metric.

use super::{num, Check, Report, Table};
use crate::config::Config;
use crate::error::Result;
use crate::hfourier::{derivative_tower, heat_kernel_k0, k_lambda, phi_lambda, KLambdaMethod};

/// Ratios `value / shape` along a grid, already in grid order.
struct Series {
    label: String,
    points: Vec<(f64, f64, f64)>,
}

impl Series {
    /// Largest ratio over the one at the first point; infinite when the
    /// shape vanishes where the value does not.
    fn growth(&self) -> f64 {
        let c = self.points[0].2;
        let g = self.points.iter().map(|p| p.2 / c).fold(f64::NEG_INFINITY, f64::max);
        if g.is_nan() || !c.is_finite() {
            f64::INFINITY
        } else {
            g
        }
    }
}

fn record(rep: &mut Report, table: &mut Table, name: &str, series: &[Series], slack: f64) {
    let mut worst = f64::NEG_INFINITY;
    for s in series {
        let c = s.points[0].2;
        for &(p, x, r) in &s.points {
            table.push(vec![name.into(), s.label.clone(), num(p), num(x), num(r / c)]);
        }
        let g = s.growth();
        rep.metric(format!("{name} [{}]", s.label), g);
        worst = worst.max(g);
    }
    rep.check(Check::at_most(name, worst, 1.0 + slack).with_note("constant fitted at the first grid point"));
}

fn tower_shape(m: usize, lambda: f64, rho: f64) -> f64 {
    let sum: f64 = (2..=m).map(|n| lambda.powi(n as i32)).sum();
    rho / rho.sinh().powi(m as i32) * sum
}

pub fn run_bounds(cfg: &Config) -> Result<Report> {
    let bc = &cfg.bounds;
    let mut rep = Report::new("bounds");
    let mut t = Table::new("bounds.csv", &["check", "series", "parameter", "x", "ratio_over_first"]);

    let mut dominated: f64 = 0.0;
    let mut decay = Vec::new();
    for &n in &bc.phi_dimensions {
        let half = 0.5 * (n as f64 - 1.0);
        let phi0: Vec<f64> = bc.phi_radii.iter().map(|&r| phi_lambda(n, 0.0, r)).collect();
        for &l in &bc.phi_lambdas {
            for (&r, p0) in bc.phi_radii.iter().zip(&phi0) {
                dominated = dominated.max(phi_lambda(n, l, r).abs() / p0);
            }
        }
        let points = bc
            .phi_radii
            .iter()
            .zip(&phi0)
            .map(|(&r, p0)| (0.0, r, p0 / ((-half * r).exp() * (1.0 + r))))
            .collect();
        decay.push(Series {
            label: format!("N={n}"),
            points,
        });
    }
    rep.check(Check::at_most(
        "spherical function dominated by ground state",
        dominated,
        1.0 + bc.slack,
    ));
    record(&mut rep, &mut t, "ground state decay", &decay, bc.slack);

    let mut tower = Vec::new();
    for &n in &bc.tower_dimensions {
        let m = (n - 1) / 2;
        let mut points = Vec::new();
        for &l in &bc.tower_lambdas {
            for &r in &bc.tower_rhos {
                let v = derivative_tower(m, l, r)?.abs();
                let shape = tower_shape(m, l, r);
                // an empty sum leaves no room for a nonzero value
                let ratio = if shape > 0.0 {
                    v / shape
                } else if v == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                };
                points.push((l, r, ratio));
            }
        }
        tower.push(Series {
            label: format!("N={n} m={m}"),
            points,
        });
    }
    record(&mut rep, &mut t, "derivative tower", &tower, bc.slack);

    let mut even = Vec::new();
    for &l in &bc.even_lambdas {
        let mut points = Vec::new();
        for &r in &bc.even_rhos {
            let v = k_lambda(2, l, r, KLambdaMethod::AbelEven)?.abs();
            points.push((l, r, v * r.sinh().sqrt()));
        }
        even.push(Series {
            label: format!("N=2 lambda={l}"),
            points,
        });
    }
    record(&mut rep, &mut t, "even kernel decay", &even, bc.slack);

    let mut heat = Vec::new();
    for &n in &bc.heat_dimensions {
        for &r in &bc.heat_rhos {
            let shape = if r >= 1.0 {
                r / r.sinh().powf(0.5 * (n as f64 - 1.0))
            } else {
                1.0
            };
            let mut points = Vec::new();
            for &tt in &bc.heat_times {
                let v = heat_kernel_k0(n, bc.heat_b, r, tt)?.abs();
                points.push((r, tt, tt.powf(1.5) * v / shape));
            }
            heat.push(Series {
                label: format!("N={n} rho={r}"),
                points,
            });
        }
    }
    record(&mut rep, &mut t, "heat kernel large-time bound", &heat, bc.slack);

    rep.tables.push(t);
    Ok(rep)
}
