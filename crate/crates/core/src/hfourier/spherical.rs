//! Elementary spherical functions of hyperbolic space and the
//! Harish-Chandra density.

use crate::error::{invalid, Result};
use crate::quadrature::{gauss_legendre, GaussLegendre};
use crate::special::gamma_modulus_ratio;
use std::f64::consts::PI;

/// `(N − 1)/2`.
pub fn half_dim(n: usize) -> f64 {
    (n as f64 - 1.0) / 2.0
}

/// `1 / ∫₀^π sin^{N−2}θ dθ`.
pub fn angular_normalizer(n: usize) -> f64 {
    assert!(n >= 2);
    // ∫ sin^k = √π Γ((k+1)/2)/Γ(k/2+1)
    let k = n - 2;
    let g = crate::special::gamma_half_integer;
    let integral = PI.sqrt() * g(k + 1) / g(k + 2);
    1.0 / integral
}

fn ln_cosh(v: f64) -> f64 {
    v + (-2.0 * v).exp().ln_1p() - std::f64::consts::LN_2
}

/// Integrals along the stabilized `v` parametrization of the polar formula.
///
/// With `t = e^{−r} sinh v` the polar integral becomes
/// `c_N 2^{N−1} e^{−(N−1)r/2} ∫₀^∞ tanh^{N−2}v (1+t²)^{−(N−1)/2} cos(λ φ(v)) dv`
/// where `φ(v) = 2 ln cosh v − ln(1+t²) − r`; every factor is bounded, so
/// large radii do not underflow before the final exponential.
struct VIntegral {
    n: usize,
    r: f64,
}

impl VIntegral {
    fn upper(&self) -> f64 {
        self.r + 45.0 / (self.n as f64 - 1.0) + 2.0
    }

    fn prefactor(&self) -> f64 {
        angular_normalizer(self.n) * 2f64.powi(self.n as i32 - 1) * (-half_dim(self.n) * self.r).exp()
    }

    /// `∫ tanh^{N−2}v (1+t²)^{−m−extra} g(t², φ) dv` over panels suited to
    /// frequency `lambda`.
    fn integrate(&self, lambda: f64, extra: f64, g: impl Fn(f64, f64) -> f64) -> f64 {
        let m = half_dim(self.n);
        let upper = self.upper();
        let width = (5.0 / (lambda.abs() + 1.0)).min(1.0);
        let panels = (upper / width).ceil() as usize;
        let rule: &GaussLegendre = gauss_legendre(20);
        let emr = (-self.r).exp();
        let k = self.n as i32 - 2;
        rule.integrate_composite(0.0, upper, panels, |v| {
            let t = emr * v.sinh();
            let t2 = t * t;
            let l1 = t2.ln_1p();
            let phase = 2.0 * ln_cosh(v) - l1 - self.r;
            v.tanh().powi(k) * (-(m + extra) * l1).exp() * g(t2, phase)
        })
    }
}

/// `Φ_λ(r)` on `H^N` by the stabilized polar integral, any `N ≥ 2`.
pub fn phi_lambda_quadrature(n: usize, lambda: f64, r: f64) -> f64 {
    if r == 0.0 {
        return 1.0;
    }
    let vi = VIntegral { n, r };
    vi.prefactor() * vi.integrate(lambda, 0.0, |_, ph| (lambda * ph).cos())
}

/// `Φ_λ(r)` for `N = 2` from the Abel-type integral
/// `(√2/π) ∫₀^r cos(λs)/√(cosh r − cosh s) ds`.
pub fn phi_lambda_abel(lambda: f64, r: f64) -> f64 {
    if r == 0.0 {
        return 1.0;
    }
    abel_nodes(r, lambda.abs())
        .iter()
        .map(|&(s, w)| w * (lambda * s).cos())
        .sum()
}

/// `√(cosh a − cosh b)` for `a ≥ b ≥ 0` without cancellation.
pub(crate) fn sqrt_cosh_gap(a: f64, b: f64) -> f64 {
    (2.0 * (0.5 * (a + b)).sinh() * (0.5 * (a - b)).sinh()).sqrt()
}

/// Nodes `s` and weights such that `Σ w f(s) ≈ (√2/π) ∫₀^r f(s)/√(cosh r − cosh s) ds`
/// for `f` oscillating at frequency up to `lambda_max`.
pub(crate) fn abel_nodes(r: f64, lambda_max: f64) -> Vec<(f64, f64)> {
    let scale = 2f64.sqrt() / PI;
    let rule = gauss_legendre(20);
    let width = (5.0 / (lambda_max + 1.0)).min(1.0);
    let mut out = Vec::new();
    // last unit: s = r − w², w ∈ [0, √tail]
    let tail = r.min(1.0);
    let wmax = tail.sqrt();
    let wpanels = (lambda_max * tail / 5.0).ceil().max(1.0) as usize + 1;
    let hw = wmax / wpanels as f64;
    for p in 0..wpanels {
        for (w, ww) in rule.mapped(hw * p as f64, hw * (p + 1) as f64) {
            let w2 = w * w;
            // cosh r − cosh(r − w²) = 2 sinh(r − w²/2) sinh(w²/2)
            let gap = (2.0 * (r - 0.5 * w2).sinh() * (0.5 * w2).sinh()).sqrt();
            out.push((r - w2, scale * ww * 2.0 * w / gap));
        }
    }
    let rest = r - tail;
    if rest > 0.0 {
        let panels = (rest / width).ceil() as usize;
        let h = rest / panels as f64;
        for p in 0..panels {
            for (s, ws) in rule.mapped(h * p as f64, h * (p + 1) as f64) {
                out.push((s, scale * ws / sqrt_cosh_gap(r, s)));
            }
        }
    }
    out
}

/// Elementary spherical function `Φ_λ(r)` of `H^N`, normalized by `Φ_λ(0) = 1`.
///
/// `N = 1` gives `cos λr`, `N = 3` the closed form `sin(λr)/(λ sinh r)`,
/// `N = 2` the Abel integral; other dimensions use the polar integral.
pub fn phi_lambda(n: usize, lambda: f64, r: f64) -> f64 {
    let r = r.abs();
    if r == 0.0 {
        return 1.0;
    }
    match n {
        1 => (lambda * r).cos(),
        2 => phi_lambda_abel(lambda, r),
        3 => {
            if lambda == 0.0 {
                r / r.sinh()
            } else {
                (lambda * r).sin() / (lambda * r.sinh())
            }
        }
        _ => phi_lambda_quadrature(n, lambda, r),
    }
}

/// `∂²_λ Φ_λ(r)` at `λ = 0`; negative for `r > 0`.
pub fn phi_lambda_dd0(n: usize, r: f64) -> f64 {
    let r = r.abs();
    if r == 0.0 {
        return 0.0;
    }
    match n {
        1 => -r * r,
        3 => -r.powi(3) / (3.0 * r.sinh()),
        _ => {
            let vi = VIntegral { n, r };
            -vi.prefactor() * vi.integrate(0.0, 0.0, |_, ph| ph * ph)
        }
    }
}

/// `|c(λ)|^{−2} = |Γ(iλ + (N−1)/2)|² / (2(2π)^N |Γ(iλ)|²)`.
pub fn c_inv_sq(n: usize, lambda: f64) -> f64 {
    let norm = 2.0 * (2.0 * PI).powi(n as i32);
    let l2 = lambda * lambda;
    let ratio = if n % 2 == 1 {
        (0..(n - 1) / 2).map(|j| l2 + (j * j) as f64).product()
    } else if n == 2 {
        lambda.abs() * (PI * lambda.abs()).tanh()
    } else {
        gamma_modulus_ratio(half_dim(n), lambda)
    };
    ratio / norm
}

/// `|c(λ)|^{−2}` through the complex Gamma function for every `N`.
pub fn c_inv_sq_gamma(n: usize, lambda: f64) -> f64 {
    gamma_modulus_ratio(half_dim(n), lambda) / (2.0 * (2.0 * PI).powi(n as i32))
}

/// Drift velocity `(N−1) coth r + 2 ∂_r ln Φ₀(r)`.
///
/// Evaluated as `(N−1)(coth r − 1) + 2 I'/I` with `I` the bounded part of
/// the stabilized `Φ₀` integral, so it stays accurate for large `r`.
pub fn drift_velocity(n: usize, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(invalid("drift velocity needs r > 0"));
    }
    if n < 2 {
        return Err(invalid("drift velocity needs N ≥ 2"));
    }
    let m = half_dim(n);
    let vi = VIntegral { n, r };
    let i0 = vi.integrate(0.0, 0.0, |_, _| 1.0);
    let i1 = 2.0 * m * vi.integrate(0.0, 1.0, |t2, _| t2);
    let coth_minus_one = 2.0 / ((2.0 * r).exp() - 1.0);
    Ok((n as f64 - 1.0) * coth_minus_one + 2.0 * i1 / i0)
}
