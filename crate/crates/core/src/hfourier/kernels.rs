//! Spectral kernels `k_λ`, the heat kernel of the limiting equation, and
//! the small-frequency expansion of `Ĵ`.

use super::spherical::{c_inv_sq, phi_lambda, phi_lambda_dd0, sqrt_cosh_gap};
use super::transform::inversion_constant;
use crate::error::{invalid, Result};
use crate::kernels::Kernel;
use crate::quadrature::{adaptive, gauss_legendre};
use crate::special::unit_sphere_area;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KLambdaMethod {
    /// `(∂_ρ / sinh ρ)^{(N−1)/2} cos λρ`, odd `N`.
    ClosedOdd,
    /// `λ ∫_ρ^∞ sin(λs)/√(cosh s − cosh ρ) ds`, `N = 2`.
    AbelEven,
    /// `κ_N |c(λ)|^{−2} Φ_λ(ρ)`.
    Direct,
}

/// `(∂_ρ / sinh ρ)^m cos λρ` for `m ∈ {1, 2}`.
pub fn derivative_tower(m: usize, lambda: f64, rho: f64) -> Result<f64> {
    let (s, c) = (lambda * rho).sin_cos();
    let (sh, ch) = (rho.sinh(), rho.cosh());
    match m {
        1 => Ok(-lambda * s / sh),
        2 => Ok(-lambda * (lambda * c * sh - s * ch) / sh.powi(3)),
        _ => Err(invalid(format!("derivative tower of order {m} is not implemented"))),
    }
}

/// `∫_ρ^∞ sin(λs)/√(cosh s − cosh ρ) ds` for `ρ > 0`.
pub fn abel_sine_integral(lambda: f64, rho: f64) -> f64 {
    let rule = gauss_legendre(20);
    let near = rule.integrate_composite(0.0, 1.0, 4, |w| {
        let w2 = w * w;
        let gap = (2.0 * (rho + 0.5 * w2).sinh() * (0.5 * w2).sinh()).sqrt();
        2.0 * w * (lambda * (rho + w2)).sin() / gap
    });
    let width = (5.0 / (lambda.abs() + 1.0)).min(1.0);
    let far_len = 80.0;
    let panels = (far_len / width).ceil() as usize;
    let far = rule.integrate_composite(rho + 1.0, rho + 1.0 + far_len, panels, |s| {
        (lambda * s).sin() / sqrt_cosh_gap(s, rho)
    });
    near + far
}

fn k_direct(n: usize, lambda: f64, rho: f64) -> f64 {
    inversion_constant(n) * c_inv_sq(n, lambda) * phi_lambda(n, lambda, rho)
}

fn odd_shape(n: usize, lambda: f64, rho: f64) -> Result<f64> {
    derivative_tower((n - 1) / 2, lambda, rho)
}

fn even_shape(lambda: f64, rho: f64) -> f64 {
    lambda * abel_sine_integral(lambda, rho)
}

/// Constant in front of the closed odd-dimensional form, fixed by matching
/// the direct definition at `λ = ρ = 1`.
pub fn closed_odd_constant(n: usize) -> Result<f64> {
    static C3: OnceLock<f64> = OnceLock::new();
    static C5: OnceLock<f64> = OnceLock::new();
    let cell = match n {
        3 => &C3,
        5 => &C5,
        _ => return Err(invalid(format!("closed odd form needs N ∈ {{3, 5}}, got {n}"))),
    };
    Ok(*cell.get_or_init(|| k_direct(n, 1.0, 1.0) / odd_shape(n, 1.0, 1.0).expect("m ≤ 2")))
}

/// Constant in front of the two-dimensional Abel form, fixed at `λ = ρ = 1`.
pub fn abel_even_constant() -> f64 {
    static C2: OnceLock<f64> = OnceLock::new();
    *C2.get_or_init(|| k_direct(2, 1.0, 1.0) / even_shape(1.0, 1.0))
}

/// Kernel `k_λ(ρ)` with `K(ρ) = ∫ K̂(λ) k_λ(ρ) dλ` for radial `K`.
pub fn k_lambda(n: usize, lambda: f64, rho: f64, method: KLambdaMethod) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(invalid("k_lambda needs ρ > 0"));
    }
    match method {
        KLambdaMethod::Direct => Ok(k_direct(n, lambda, rho)),
        KLambdaMethod::ClosedOdd => {
            if n.is_multiple_of(2) || n < 3 {
                return Err(invalid("closed form needs odd N ≥ 3"));
            }
            Ok(closed_odd_constant(n)? * odd_shape(n, lambda, rho)?)
        }
        KLambdaMethod::AbelEven => {
            if n != 2 {
                return Err(invalid("Abel form is implemented for N = 2"));
            }
            Ok(abel_even_constant() * even_shape(lambda, rho))
        }
    }
}

/// Heat kernel `K₀(ρ, t)` of `∂_t = b Δ` shifted by the bottom of the
/// spectrum, i.e. the radial function with `K̂₀(λ) = e^{−bλ²t}`.
/// Closed form for `N = 3`, Abel integral for `N = 2`, and the inverse
/// transform integral otherwise.
pub fn heat_kernel_k0(n: usize, b: f64, rho: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) || !(b > 0.0) {
        return Err(invalid("heat kernel needs t > 0 and b > 0"));
    }
    let rho = rho.abs();
    let beta = b * t;
    match n {
        3 => {
            let shape = if rho == 0.0 { 1.0 } else { rho / rho.sinh() };
            Ok((4.0 * PI * beta).powf(-1.5) * shape * (-rho * rho / (4.0 * beta)).exp())
        }
        2 => {
            // ∫_ρ^∞ s e^{−s²/4β}/√(cosh s − cosh ρ) ds with s = ρ + w²
            let f = |w: f64| {
                let w2 = w * w;
                let s = rho + w2;
                let gap = (2.0 * (rho + 0.5 * w2).sinh() * (0.5 * w2).sinh()).sqrt();
                let ratio = if gap == 0.0 {
                    2.0 / rho.sinh().sqrt()
                } else {
                    2.0 * w / gap
                };
                ratio * s * (-s * s / (4.0 * beta)).exp()
            };
            let s_end = (rho * rho + 4.0 * beta * 45.0).sqrt().min(rho + 100.0);
            let w_end = (s_end - rho).max(0.0).sqrt() + (4.0 * beta).sqrt().sqrt();
            let mut pts = vec![0.0];
            let scale = (4.0 * beta).sqrt().sqrt().min(w_end);
            let mut x = scale;
            while x < w_end {
                pts.push(x);
                x *= 2.0;
            }
            pts.push(w_end);
            let integral = crate::quadrature::adaptive_pieces(f, &pts, 0.0, 1e-12)?;
            Ok(2f64.sqrt() / (8.0 * PI.powf(1.5) * beta.powf(1.5)) * integral)
        }
        _ => heat_kernel_by_transform(n, b, rho, t),
    }
}

/// `K₀` from `κ_N ∫ e^{−bλ²t} Φ_λ(ρ) |c(λ)|^{−2} dλ` (reference path).
pub fn heat_kernel_by_transform(n: usize, b: f64, rho: f64, t: f64) -> Result<f64> {
    let beta = b * t;
    let lmax = (45.0 / beta).sqrt();
    let panels = (lmax * (rho + 1.0)).ceil().max(4.0) as usize;
    let v = gauss_legendre(20).integrate_composite(0.0, lmax, panels, |l| {
        (-beta * l * l).exp() * c_inv_sq(n, l) * phi_lambda(n, l, rho)
    });
    Ok(2.0 * inversion_constant(n) * v)
}

/// `∫ K₀(·, t) Φ₀ dμ`, which is 1 for the normalization used here.
pub fn heat_kernel_phi0_mass(n: usize, b: f64, t: f64) -> Result<f64> {
    let r_end = 2.0 * (4.0 * b * t * 45.0).sqrt() + 2.0 * b * t * (n as f64 - 1.0) + 10.0;
    let area = unit_sphere_area(n);
    let f = |r: f64| {
        heat_kernel_k0(n, b, r, t).unwrap_or(f64::NAN) * phi_lambda(n, 0.0, r) * area * r.sinh().powi(n as i32 - 1)
    };
    adaptive(f, 0.0, r_end, 0.0, 1e-10)
}

/// `Ĵ(λ) = ∫ J Φ_λ dμ` on `H^N`.
pub fn kernel_transform(k: &Kernel, n: usize, lambda: f64) -> f64 {
    let area = unit_sphere_area(n);
    let panels = (k.support_radius * (lambda.abs() + 1.0)).ceil().max(4.0) as usize;
    gauss_legendre(24).integrate_composite(0.0, k.support_radius, panels, |s| {
        k.eval(s) * phi_lambda(n, lambda, s) * area * s.sinh().powi(n as i32 - 1)
    })
}

/// `Ĵ(λ) = a − bλ² + λ² f(λ)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct JhatExpansion {
    pub a: f64,
    pub b: f64,
    pub dimension: usize,
    pub kernel: Kernel,
}

impl JhatExpansion {
    pub fn new(k: &Kernel, n: usize) -> Self {
        let area = unit_sphere_area(n);
        let rule = gauss_legendre(24);
        let panels = (k.support_radius.ceil() as usize).max(4);
        let a = kernel_transform(k, n, 0.0);
        let b = -0.5
            * rule.integrate_composite(0.0, k.support_radius, panels, |s| {
                k.eval(s) * phi_lambda_dd0(n, s) * area * s.sinh().powi(n as i32 - 1)
            });
        Self {
            a,
            b,
            dimension: n,
            kernel: *k,
        }
    }

    pub fn jhat(&self, lambda: f64) -> f64 {
        kernel_transform(&self.kernel, self.dimension, lambda)
    }

    /// Remainder `f(λ) = (Ĵ(λ) − a + bλ²)/λ²`.
    pub fn f(&self, lambda: f64) -> f64 {
        (self.jhat(lambda) - self.a + self.b * lambda * lambda) / (lambda * lambda)
    }
}

/// `a` and `b` for a kernel.
pub fn jhat_expansion(k: &Kernel, n: usize) -> JhatExpansion {
    JhatExpansion::new(k, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RadialManifold;
    use approx::assert_relative_eq;

    #[test]
    fn calibrated_constants_have_closed_forms() {
        assert_relative_eq!(
            closed_odd_constant(3).unwrap(),
            -1.0 / (4.0 * PI * PI),
            max_relative = 1e-13
        );
        assert_relative_eq!(abel_even_constant(), 2f64.sqrt() / (4.0 * PI * PI), max_relative = 1e-9);
    }

    #[test]
    fn kernel_methods_agree() {
        for l in [0.5, 1.0, 2.0] {
            for rho in [0.5, 1.0, 2.0] {
                let d3 = k_lambda(3, l, rho, KLambdaMethod::Direct).unwrap();
                let c3 = k_lambda(3, l, rho, KLambdaMethod::ClosedOdd).unwrap();
                assert!((d3 - c3).abs() <= 1e-12 * d3.abs().max(1e-3));
                let d5 = k_lambda(5, l, rho, KLambdaMethod::Direct).unwrap();
                let c5 = k_lambda(5, l, rho, KLambdaMethod::ClosedOdd).unwrap();
                assert!((d5 - c5).abs() <= 1e-8 * d5.abs().max(1e-4), "{d5} {c5}");
                let d2 = k_lambda(2, l, rho, KLambdaMethod::Direct).unwrap();
                let a2 = k_lambda(2, l, rho, KLambdaMethod::AbelEven).unwrap();
                assert!((d2 - a2).abs() <= 1e-9 * d2.abs().max(1e-3), "{d2} {a2}");
            }
        }
        assert!(k_lambda(2, 1.0, 1.0, KLambdaMethod::ClosedOdd).is_err());
        assert!(k_lambda(3, 1.0, 1.0, KLambdaMethod::AbelEven).is_err());
        assert_relative_eq!(
            k_lambda(3, -1.3, 0.7, KLambdaMethod::ClosedOdd).unwrap(),
            k_lambda(3, 1.3, 0.7, KLambdaMethod::ClosedOdd).unwrap()
        );
    }

    #[test]
    fn heat_kernel_paths_agree_and_have_unit_mass() {
        for n in [2, 3] {
            for (rho, t) in [(0.0, 1.0), (0.5, 2.0), (2.0, 5.0)] {
                let a = heat_kernel_k0(n, 1.0, rho, t).unwrap();
                let b = heat_kernel_by_transform(n, 1.0, rho, t).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-8);
            }
            for t in [0.5, 3.0] {
                assert_relative_eq!(heat_kernel_phi0_mass(n, 0.7, t).unwrap(), 1.0, epsilon = 1e-8);
            }
        }
        assert!(heat_kernel_k0(3, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn three_dimensional_heat_ratio() {
        let (rho, t) = (2.0, 3.0);
        let ratio = heat_kernel_k0(3, 1.0, rho, 4.0 * t).unwrap() / heat_kernel_k0(3, 1.0, rho, t).unwrap();
        let expected = 0.125 * ((rho * rho / (4.0 * t)) * (1.0 - 0.25)).exp();
        assert_relative_eq!(ratio, expected, max_relative = 1e-13);
    }

    #[test]
    fn expansion_coefficients() {
        let m = RadialManifold::hyperbolic(3);
        let k = Kernel::bump().normalize_mass(&m).unwrap();
        let e = jhat_expansion(&k, 3);
        assert!(e.a > 0.0 && e.a < 1.0);
        assert!(e.b > 0.0);
        for l in [0.1, 0.25, 0.5] {
            assert!(e.f(l).abs() <= 1.0 * l * l, "f({l}) = {}", e.f(l));
        }
        let ks = k.normalize_spectral(&m).unwrap();
        assert_relative_eq!(jhat_expansion(&ks, 3).a, 1.0, epsilon = 1e-10);
        let tiny = Kernel::new(0.02, 4).unwrap().normalize_mass(&m).unwrap();
        let et = jhat_expansion(&tiny, 3);
        assert!((et.a - 1.0).abs() < 1e-3 && et.b < 1e-3);
    }
}
