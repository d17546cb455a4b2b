//! Time integration of `u_t = c₀ L u` and the functionals tracked along it.

use crate::error::{invalid, Error, Result};
use crate::geometry::ManifoldKind;
use crate::grid::RadialGridFunction;
use crate::hfourier::phi_lambda;
use crate::nonlocal_op::ConvolutionMatrix;
use crate::quadrature::{barycentric_weights, gauss_legendre, lagrange_basis};
use crate::spectral::SpectralData;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy)]
pub enum Scheme<'s> {
    /// `Σ e^{−λ_k t} ⟨u₀, φ_k⟩ φ_k` from a precomputed eigendecomposition.
    ExactSpectral(&'s SpectralData),
    /// Classical Runge–Kutta, `dt ≤ 0.1`.
    Rk4 { dt: f64 },
    /// Picard iteration on `u(t) = e^{−t}u₀ + ∫₀^t e^{−(t−s)} A u(s) ds`,
    /// collocated at Gauss points within each step.
    DuhamelPicard { dt: f64 },
}

const PICARD_NODES: usize = 6;
const PICARD_TOL: f64 = 1e-13;

/// `u(t)` for `u_t = L u`.
pub fn evolve(
    a: &ConvolutionMatrix,
    u0: &RadialGridFunction,
    t: f64,
    scheme: Scheme<'_>,
) -> Result<RadialGridFunction> {
    evolve_scaled(a, 1.0, u0, t, scheme)
}

/// `u(t)` for `u_t = c₀ L u`.
pub fn evolve_scaled(
    a: &ConvolutionMatrix,
    c0: f64,
    u0: &RadialGridFunction,
    t: f64,
    scheme: Scheme<'_>,
) -> Result<RadialGridFunction> {
    if !(t >= 0.0) {
        return Err(invalid("evolution time must be nonnegative"));
    }
    if !(c0 > 0.0) {
        return Err(invalid("time scale must be positive"));
    }
    if u0.values.len() != a.len() {
        return Err(Error::GridMismatch("initial data is not on the operator's grid".into()));
    }
    let values = match scheme {
        Scheme::ExactSpectral(s) => {
            if s.len() != a.len() {
                return Err(Error::GridMismatch("spectrum belongs to another operator".into()));
            }
            s.propagate(&u0.values, t, c0)
        }
        Scheme::Rk4 { dt } => rk4(a, c0, &u0.values, t, dt)?,
        Scheme::DuhamelPicard { dt } => duhamel_picard(a, &u0.values, c0 * t, dt * c0)?,
    };
    Ok(u0.with_values(values))
}

fn rk4(a: &ConvolutionMatrix, c0: f64, u0: &[f64], t: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt <= 0.1) {
        return Err(invalid("RK4 step must lie in (0, 0.1]"));
    }
    let steps = (t / dt).ceil() as usize;
    if steps == 0 {
        return Ok(u0.to_vec());
    }
    let h = t / steps as f64;
    let rhs = |u: &[f64]| -> Vec<f64> { a.apply_values(u).iter().zip(u).map(|(x, y)| c0 * (x - y)).collect() };
    let axpy = |u: &[f64], k: &[f64], s: f64| -> Vec<f64> { u.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    let mut u = u0.to_vec();
    for _ in 0..steps {
        let k1 = rhs(&u);
        let k2 = rhs(&axpy(&u, &k1, 0.5 * h));
        let k3 = rhs(&axpy(&u, &k2, 0.5 * h));
        let k4 = rhs(&axpy(&u, &k3, h));
        for i in 0..u.len() {
            u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(u)
}

/// `S[k][j] = ∫₀^{τ_k} e^{−(τ_k−σ)} ℓ_j(σ) dσ` on `[0, h]`, with a final row
/// for `τ = h`.
fn duhamel_weights(h: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let col = gauss_legendre(PICARD_NODES);
    let taus: Vec<f64> = col.nodes.iter().map(|x| 0.5 * h * (x + 1.0)).collect();
    let bary = barycentric_weights(&col.nodes);
    let fine = gauss_legendre(24);
    let mut basis = vec![0.0; PICARD_NODES];
    let ends: Vec<f64> = taus.iter().copied().chain(std::iter::once(h)).collect();
    let s = ends
        .iter()
        .map(|&tau| {
            let mut row = vec![0.0; PICARD_NODES];
            for (sig, w) in fine.mapped(0.0, tau) {
                lagrange_basis(&col.nodes, &bary, 2.0 * sig / h - 1.0, &mut basis);
                let e = w * (-(tau - sig)).exp();
                for (r, b) in row.iter_mut().zip(&basis) {
                    *r += e * b;
                }
            }
            row
        })
        .collect();
    (ends, s)
}

fn duhamel_picard(a: &ConvolutionMatrix, u0: &[f64], t: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt <= 0.5) {
        return Err(invalid("Picard step must lie in (0, 0.5]"));
    }
    let steps = (t / dt).ceil() as usize;
    if steps == 0 {
        return Ok(u0.to_vec());
    }
    let h = t / steps as f64;
    let (ends, s) = duhamel_weights(h);
    let n = u0.len();
    let mut u = u0.to_vec();
    for step in 0..steps {
        let scale = u.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let mut stages: Vec<Vec<f64>> = ends[..PICARD_NODES]
            .iter()
            .map(|&tau| u.iter().map(|v| (-tau).exp() * v).collect())
            .collect();
        let mut converged = false;
        let mut change = f64::INFINITY;
        for _ in 0..200 {
            let au: Vec<Vec<f64>> = stages.iter().map(|v| a.apply_values(v)).collect();
            change = 0.0;
            for k in 0..PICARD_NODES {
                let e = (-ends[k]).exp();
                for i in 0..n {
                    let new = e * u[i] + (0..PICARD_NODES).map(|j| s[k][j] * au[j][i]).sum::<f64>();
                    change = change.max((new - stages[k][i]).abs());
                    stages[k][i] = new;
                }
            }
            if change <= PICARD_TOL * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Picard(format!("step {step}: last update {change:.3e}")));
        }
        let au: Vec<Vec<f64>> = stages.iter().map(|v| a.apply_values(v)).collect();
        let e = (-h).exp();
        let last = &s[PICARD_NODES];
        for i in 0..n {
            u[i] = e * u[i] + (0..PICARD_NODES).map(|j| last[j] * au[j][i]).sum::<f64>();
        }
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    Mass,
    Mean,
    L1,
    L2,
    Linf,
    /// `∫ u Φ₀ dμ` on hyperbolic space.
    Phi0Weighted,
}

pub fn functional(u: &RadialGridFunction, which: Functional) -> Result<f64> {
    Ok(match which {
        Functional::Mass => u.integral(),
        Functional::Mean => u.mean(),
        Functional::L1 => u.norm_l1(),
        Functional::L2 => u.norm_l2(),
        Functional::Linf => u.norm_linf(),
        Functional::Phi0Weighted => {
            let m = u.grid.manifold;
            if m.kind != ManifoldKind::Hyperbolic {
                return Err(invalid("the Φ₀-weighted integral is defined on hyperbolic space"));
            }
            u.grid
                .nodes
                .iter()
                .zip(&u.values)
                .zip(&u.grid.weights)
                .map(|((&r, v), w)| v * w * phi_lambda(m.dimension, 0.0, r))
                .sum()
        }
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderReport {
    /// `max_t max_x (u(t) − v(t))₊` for each time scale.
    pub violations: Vec<(f64, f64)>,
}

impl OrderReport {
    pub fn max_violation(&self) -> f64 {
        self.violations.iter().fold(0.0, |m, (_, v)| m.max(*v))
    }
}

/// Evolve an ordered pair `u₀ ≤ v₀` and measure the largest order violation
/// for `u_t = c₀ L u`, `c₀` in `scales`.
pub fn check_order_preservation(
    a: &ConvolutionMatrix,
    spec: &SpectralData,
    u0: &RadialGridFunction,
    v0: &RadialGridFunction,
    t_list: &[f64],
    scales: &[f64],
) -> Result<OrderReport> {
    u0.check_grid(v0)?;
    if u0.values.iter().zip(&v0.values).any(|(u, v)| u > v) {
        return Err(invalid("initial data are not ordered"));
    }
    let mut violations = Vec::new();
    for &c0 in scales {
        let mut worst: f64 = 0.0;
        for &t in t_list {
            let u = evolve_scaled(a, c0, u0, t, Scheme::ExactSpectral(spec))?;
            let v = evolve_scaled(a, c0, v0, t, Scheme::ExactSpectral(spec))?;
            worst = u.values.iter().zip(&v.values).fold(worst, |m, (x, y)| m.max(x - y));
        }
        violations.push((c0, worst.max(0.0)));
    }
    Ok(OrderReport { violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RadialManifold;
    use crate::grid::{GridLayout, RadialGrid};
    use crate::kernels::Kernel;
    use crate::spectral::eigendecompose;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn circle(n: usize) -> (ConvolutionMatrix, SpectralData) {
        let m = RadialManifold::circle();
        let g = RadialGrid::new(m, GridLayout::Circle { n }).unwrap();
        let k = Kernel::bump().normalize_mass(&m).unwrap();
        let a = ConvolutionMatrix::assemble(&g, &k, 32).unwrap();
        let s = eigendecompose(&a).unwrap();
        (a, s)
    }

    #[test]
    fn schemes_agree() {
        let (a, s) = circle(64);
        let u0 = RadialGridFunction::from_fn(a.grid.clone(), |x| (-(x - 0.3).powi(2)).exp() + 0.2 * (3.0 * x).sin());
        let e = evolve(&a, &u0, 3.0, Scheme::ExactSpectral(&s)).unwrap();
        let r = evolve(&a, &u0, 3.0, Scheme::Rk4 { dt: 0.05 }).unwrap();
        let p = evolve(&a, &u0, 3.0, Scheme::DuhamelPicard { dt: 0.5 }).unwrap();
        for i in 0..64 {
            assert!((e.values[i] - r.values[i]).abs() < 1e-6);
            assert!((e.values[i] - p.values[i]).abs() < 1e-6);
        }
        assert!(evolve(&a, &u0, -1.0, Scheme::Rk4 { dt: 0.05 }).is_err());
        assert!(evolve(&a, &u0, 1.0, Scheme::Rk4 { dt: 0.2 }).is_err());
    }

    #[test]
    fn constants_and_eigenvectors() {
        let (a, s) = circle(512);
        let one = RadialGridFunction::constant(a.grid.clone(), 1.0);
        let u = evolve(&a, &one, 7.0, Scheme::DuhamelPicard { dt: 0.5 }).unwrap();
        assert!(u.values.iter().all(|v| (v - 1.0).abs() < 1e-9));
        let phi = RadialGridFunction::new(a.grid.clone(), s.mode(3)).unwrap();
        let u = evolve(&a, &phi, 2.0, Scheme::Rk4 { dt: 0.05 }).unwrap();
        let decay = (-s.lambda[3] * 2.0).exp();
        for (x, y) in u.values.iter().zip(&phi.values) {
            assert!((x - decay * y).abs() < 1e-8);
        }
    }

    #[test]
    fn semigroup_mass_and_contraction() {
        let (a, s) = circle(512);
        let u0 = RadialGridFunction::from_fn(a.grid.clone(), |x| 1.0 + x.cos() * (2.0 * x).sin());
        let ab = evolve(
            &a,
            &evolve(&a, &u0, 1.5, Scheme::ExactSpectral(&s)).unwrap(),
            2.0,
            Scheme::ExactSpectral(&s),
        )
        .unwrap();
        let direct = evolve(&a, &u0, 3.5, Scheme::ExactSpectral(&s)).unwrap();
        assert!(ab.sub(&direct).unwrap().norm_linf() < 1e-8);
        let m0 = functional(&u0, Functional::Mass).unwrap();
        for t in [1.0, 5.0, 20.0] {
            let u = evolve(&a, &u0, t, Scheme::ExactSpectral(&s)).unwrap();
            assert_relative_eq!(functional(&u, Functional::Mass).unwrap(), m0, max_relative = 1e-10);
            assert!(u.norm_l1() <= u0.norm_l1() * (1.0 + 1e-10));
            assert!(u.norm_linf() <= u0.norm_linf() * (1.0 + 1e-10));
        }
    }

    #[test]
    fn positivity_for_random_nonnegative_data() {
        let (a, s) = circle(64);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let u0 = RadialGridFunction::new(a.grid.clone(), (0..64).map(|_| rng.gen::<f64>()).collect()).unwrap();
            let u = evolve(&a, &u0, 2.0, Scheme::ExactSpectral(&s)).unwrap();
            assert!(u.values.iter().all(|&v| v >= -1e-12));
        }
    }

    #[test]
    fn order_checks() {
        let (a, s) = circle(64);
        let v0 = RadialGridFunction::from_fn(a.grid.clone(), |x| x.sin().abs());
        let same = check_order_preservation(&a, &s, &v0, &v0, &[1.0, 5.0], &[1.0]).unwrap();
        assert_eq!(same.max_violation(), 0.0);
        let shifted = v0.map(|v| v - 1.0);
        let rep = check_order_preservation(&a, &s, &shifted, &v0, &[1.0, 5.0], &[0.5, 1.0, 2.0]).unwrap();
        assert!(rep.max_violation() <= 1e-10);
        assert!(check_order_preservation(&a, &s, &v0, &shifted, &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn sphere_area_functional() {
        let g = RadialGrid::new(
            RadialManifold::sphere(2),
            GridLayout::Panels {
                r_max: std::f64::consts::PI,
                panels: 4,
                order: 16,
            },
        )
        .unwrap();
        let one = RadialGridFunction::constant(g, 1.0);
        assert_relative_eq!(
            functional(&one, Functional::Mass).unwrap(),
            4.0 * std::f64::consts::PI,
            epsilon = 1e-8
        );
        assert!(functional(&one, Functional::Phi0Weighted).is_err());
    }
}
