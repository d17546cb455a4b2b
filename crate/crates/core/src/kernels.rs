//! Compactly supported jump kernels `J(s) = c (1 − (s/δ)²)₊^p`.

use crate::error::{invalid, Error, Result};
use crate::geometry::{ManifoldKind, RadialManifold};
use crate::hfourier;
use crate::quadrature::adaptive;
use crate::special::{gamma_half_integer, unit_sphere_area};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationMode {
    /// `∫ J dμ = 1`.
    Mass,
    /// `∫ J Φ₀ dμ = 1` on hyperbolic space.
    Spectral,
    #[default]
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub support_radius: f64,
    /// `0` gives the indicator of `[0, δ)`.
    pub exponent: u32,
    pub constant: f64,
    pub mode: NormalizationMode,
}

impl Kernel {
    pub fn new(support_radius: f64, exponent: u32) -> Result<Self> {
        if !(support_radius > 0.0 && support_radius.is_finite()) {
            return Err(invalid("kernel support radius must be positive"));
        }
        Ok(Self {
            support_radius,
            exponent,
            constant: 1.0,
            mode: NormalizationMode::None,
        })
    }

    /// Default bump: `δ = 1`, `p = 4`.
    pub fn bump() -> Self {
        Self::new(1.0, 4).expect("valid default")
    }

    pub fn indicator(support_radius: f64) -> Result<Self> {
        Self::new(support_radius, 0)
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.constant = c;
        self
    }

    /// Unnormalized profile `(1 − (s/δ)²)₊^p`.
    pub fn profile(&self, s: f64) -> f64 {
        let x = s.abs() / self.support_radius;
        if x >= 1.0 {
            0.0
        } else {
            (1.0 - x * x).powi(self.exponent as i32)
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.constant * self.profile(s)
    }

    /// `∫₀^δ J(s) s^k ds` in closed form through the Beta function.
    pub fn radial_moment(&self, k: u32) -> f64 {
        let a = k as usize + 1;
        let b = 2 * (self.exponent as usize + 1);
        let beta = gamma_half_integer(a) * gamma_half_integer(b) / gamma_half_integer(a + b);
        self.constant * 0.5 * self.support_radius.powi(k as i32 + 1) * beta
    }

    /// Mass of `J(|z|)` on `R^N`.
    pub fn euclidean_mass(&self, n: usize) -> f64 {
        unit_sphere_area(n) * self.radial_moment(n as u32 - 1)
    }

    fn check_on(&self, m: &RadialManifold) -> Result<()> {
        let lim = m.injectivity_radius();
        let ok = match m.kind {
            ManifoldKind::Circle => self.support_radius <= lim,
            _ => self.support_radius < lim,
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!(
                "support radius {} exceeds the injectivity radius of the {}",
                self.support_radius, m.kind
            )))
        }
    }

    /// `∫_M J(d(x, O)) dμ_x`.
    pub fn mass(&self, m: &RadialManifold) -> Result<f64> {
        self.check_on(m)?;
        match m.kind {
            ManifoldKind::Euclidean => Ok(self.euclidean_mass(m.dimension)),
            ManifoldKind::Circle => Ok(2.0 * self.radial_moment(0)),
            _ => adaptive(
                |s| self.eval(s) * m.volume_density(s),
                0.0,
                self.support_radius,
                0.0,
                1e-14,
            ),
        }
    }

    pub fn normalize_mass(&self, m: &RadialManifold) -> Result<Self> {
        let mass = self.mass(m)?;
        if !(mass > 0.0) {
            return Err(invalid("kernel has zero mass"));
        }
        Ok(Self {
            constant: self.constant / mass,
            mode: NormalizationMode::Mass,
            ..*self
        })
    }

    /// `a = ∫ J Φ₀ dμ` on hyperbolic space.
    pub fn spectral_constant(&self, m: &RadialManifold) -> Result<f64> {
        if m.kind != ManifoldKind::Hyperbolic {
            return Err(invalid("the spectral constant is defined on hyperbolic space"));
        }
        let n = m.dimension;
        adaptive(
            |s| self.eval(s) * hfourier::phi_lambda(n, 0.0, s) * m.volume_density(s),
            0.0,
            self.support_radius,
            0.0,
            1e-13,
        )
    }

    pub fn normalize_spectral(&self, m: &RadialManifold) -> Result<Self> {
        let a = self.spectral_constant(m)?;
        if !(a > 0.0) {
            return Err(invalid("kernel has zero spectral constant"));
        }
        Ok(Self {
            constant: self.constant / a,
            mode: NormalizationMode::Spectral,
            ..*self
        })
    }

    pub fn normalize(&self, mode: NormalizationMode, m: &RadialManifold) -> Result<Self> {
        match mode {
            NormalizationMode::Mass => self.normalize_mass(m),
            NormalizationMode::Spectral => self.normalize_spectral(m),
            NormalizationMode::None => Ok(*self),
        }
    }

    /// `𝔮 = (1/2N) ∫_{R^N} J(|z|)|z|² dz`.
    pub fn second_moment_q(&self, n: usize) -> f64 {
        unit_sphere_area(n) / (2.0 * n as f64) * self.radial_moment(n as u32 + 1)
    }

    /// `J_ε(s) = ε^{−N} J(s/ε)`.
    pub fn rescale(&self, eps: f64, m: &RadialManifold) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(invalid(format!("scale {eps} outside (0, 1]")));
        }
        let out = Self {
            support_radius: eps * self.support_radius,
            constant: self.constant * eps.powi(-(m.dimension as i32)),
            ..*self
        };
        out.check_on(m).map_err(|_| Error::Domain {
            r: out.support_radius,
            manifold: m.kind.to_string(),
        })?;
        Ok(out)
    }
}
