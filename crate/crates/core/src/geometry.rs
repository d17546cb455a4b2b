//! Model manifolds with metric `dr² + ψ(r)² dθ²`.

use crate::error::{invalid, Error, Result};
use crate::grid::RadialGridFunction;
use crate::special::unit_sphere_area;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifoldKind {
    Euclidean,
    Sphere,
    Hyperbolic,
    Circle,
}

impl std::fmt::Display for ManifoldKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ManifoldKind::Euclidean => "euclidean",
            ManifoldKind::Sphere => "sphere",
            ManifoldKind::Hyperbolic => "hyperbolic",
            ManifoldKind::Circle => "circle",
        };
        f.write_str(s)
    }
}

/// A spherically symmetric model space of dimension `N`.
///
/// The circle is handled as a periodic one-dimensional space whose radial
/// coordinate is the signed arc position in `[-π, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialManifold {
    pub kind: ManifoldKind,
    pub dimension: usize,
}

impl RadialManifold {
    pub fn new(kind: ManifoldKind, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if kind == ManifoldKind::Circle && dimension != 1 {
            return Err(invalid("the circle has dimension 1"));
        }
        Ok(Self { kind, dimension })
    }

    pub fn euclidean(n: usize) -> Self {
        Self::new(ManifoldKind::Euclidean, n).expect("positive dimension")
    }

    pub fn sphere(n: usize) -> Self {
        Self::new(ManifoldKind::Sphere, n).expect("positive dimension")
    }

    pub fn hyperbolic(n: usize) -> Self {
        Self::new(ManifoldKind::Hyperbolic, n).expect("positive dimension")
    }

    pub fn circle() -> Self {
        Self {
            kind: ManifoldKind::Circle,
            dimension: 1,
        }
    }

    pub fn is_compact(&self) -> bool {
        matches!(self.kind, ManifoldKind::Sphere | ManifoldKind::Circle)
    }

    /// `ψ(r)`. The circle reports `ψ ≡ 1`.
    pub fn psi(&self, r: f64) -> f64 {
        match self.kind {
            ManifoldKind::Euclidean => r,
            ManifoldKind::Sphere => r.sin(),
            ManifoldKind::Hyperbolic => r.sinh(),
            ManifoldKind::Circle => 1.0,
        }
    }

    pub fn psi_prime(&self, r: f64) -> f64 {
        match self.kind {
            ManifoldKind::Euclidean => 1.0,
            ManifoldKind::Sphere => r.cos(),
            ManifoldKind::Hyperbolic => r.cosh(),
            ManifoldKind::Circle => 0.0,
        }
    }

    /// Density of `dμ` in `r` after integrating out the angles: `|S^{N-1}| ψ^{N-1}`.
    pub fn volume_density(&self, r: f64) -> f64 {
        match self.kind {
            ManifoldKind::Circle => 1.0,
            _ => unit_sphere_area(self.dimension) * self.psi(r).powi(self.dimension as i32 - 1),
        }
    }

    /// Largest admissible radial coordinate, if any.
    pub fn radial_limit(&self) -> Option<f64> {
        match self.kind {
            ManifoldKind::Sphere | ManifoldKind::Circle => Some(PI),
            _ => None,
        }
    }

    /// Injectivity radius at the pole (infinite for the noncompact spaces).
    pub fn injectivity_radius(&self) -> f64 {
        self.radial_limit().unwrap_or(f64::INFINITY)
    }

    pub fn check_radius(&self, r: f64) -> Result<()> {
        let ok = match self.kind {
            ManifoldKind::Euclidean | ManifoldKind::Hyperbolic => r >= 0.0 && r.is_finite(),
            ManifoldKind::Sphere => (0.0..=PI).contains(&r),
            ManifoldKind::Circle => (-PI..=PI).contains(&r),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain {
                r,
                manifold: self.kind.to_string(),
            })
        }
    }

    /// Geodesic distance between `(r1, θ1)` and `(r2, θ2)` where `gamma` is the
    /// angle between `θ1` and `θ2`.
    ///
    /// Uses the half-angle form of the law of cosines, which keeps full
    /// relative accuracy for nearby points. On the circle `gamma` is either 0
    /// (same side) or π (reflect the second point).
    pub fn distance(&self, r1: f64, r2: f64, gamma: f64) -> Result<f64> {
        self.check_radius(r1)?;
        self.check_radius(r2)?;
        if !(0.0..=PI).contains(&gamma) {
            return Err(invalid(format!("angle {gamma} outside [0, π]")));
        }
        Ok(self.distance_unchecked(r1, r2, gamma))
    }

    pub(crate) fn distance_unchecked(&self, r1: f64, r2: f64, gamma: f64) -> f64 {
        let sg = (0.5 * gamma).sin();
        let sg2 = sg * sg;
        match self.kind {
            ManifoldKind::Euclidean => ((r1 - r2).powi(2) + 4.0 * r1 * r2 * sg2).sqrt(),
            ManifoldKind::Sphere => {
                let h = (0.5 * (r1 - r2)).sin();
                let s = (h * h + r1.sin() * r2.sin() * sg2).clamp(0.0, 1.0);
                2.0 * s.sqrt().asin()
            }
            ManifoldKind::Hyperbolic => {
                let h = (0.5 * (r1 - r2)).sinh();
                2.0 * (h * h + r1.sinh() * r2.sinh() * sg2).sqrt().asinh()
            }
            ManifoldKind::Circle => {
                let other = if gamma > 0.5 * PI { -r2 } else { r2 };
                let d = (r1 - other).abs().rem_euclid(2.0 * PI);
                d.min(2.0 * PI - d)
            }
        }
    }

    /// Largest angle `γ ∈ [0, π]` with `distance(r1, r2, γ) ≤ s`, or `None`
    /// when even `γ = 0` exceeds `s`.
    pub(crate) fn max_angle_within(&self, r1: f64, r2: f64, s: f64) -> Option<f64> {
        if (r1 - r2).abs() > s {
            return None;
        }
        let (hs, hd, prod) = match self.kind {
            ManifoldKind::Euclidean => (0.5 * s, 0.5 * (r1 - r2), r1 * r2),
            ManifoldKind::Sphere => {
                if s >= PI {
                    return Some(PI);
                }
                ((0.5 * s).sin(), (0.5 * (r1 - r2)).sin(), r1.sin() * r2.sin())
            }
            ManifoldKind::Hyperbolic => ((0.5 * s).sinh(), (0.5 * (r1 - r2)).sinh(), r1.sinh() * r2.sinh()),
            ManifoldKind::Circle => return Some(PI),
        };
        if prod <= 0.0 {
            return Some(PI);
        }
        let x = (hs * hs - hd * hd) / prod;
        if x >= 1.0 {
            Some(PI)
        } else {
            Some(2.0 * x.max(0.0).sqrt().asin())
        }
    }
}

/// Radial Laplace–Beltrami operator `u'' + (N−1)(ψ'/ψ)u'` by second-order
/// finite differences on a uniformly spaced grid.
///
/// The left end must be either `r = 0` or `r = h/2`; both use the even
/// extension `u(−r) = u(r)`, and at `r = 0` the limit `N u''(0)` replaces
/// the singular drift. A sphere grid ending at `π − h/2` is mirrored at the
/// south pole; any other right end uses one-sided stencils.
pub fn laplace_beltrami_radial(m: &RadialManifold, u: &RadialGridFunction) -> Result<RadialGridFunction> {
    let r = &u.grid.nodes;
    let v = &u.values;
    let n = r.len();
    if n < 4 {
        return Err(invalid("radial Laplacian needs at least 4 nodes"));
    }
    let h = r[1] - r[0];
    if r.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return Err(invalid("radial Laplacian needs uniformly spaced nodes"));
    }
    if m.kind == ManifoldKind::Circle {
        let mut out = vec![0.0; n];
        for i in 0..n {
            let (a, b) = ((i + n - 1) % n, (i + 1) % n);
            out[i] = (v[a] - 2.0 * v[i] + v[b]) / (h * h);
        }
        return Ok(u.with_values(out));
    }
    let left_ghost = if r[0].abs() < 1e-12 * h {
        v[1]
    } else if (r[0] - 0.5 * h).abs() < 1e-9 * h {
        v[0]
    } else {
        f64::NAN
    };
    let right_ghost = if m.kind == ManifoldKind::Sphere && (r[n - 1] + 0.5 * h - PI).abs() < 1e-9 * h {
        v[n - 1]
    } else {
        f64::NAN
    };
    let nf = (m.dimension - 1) as f64;
    let mut out = vec![0.0; n];
    for i in 0..n {
        let (d2, d1) = if i == 0 && left_ghost.is_nan() {
            (
                (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (h * h),
                (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h),
            )
        } else if i == n - 1 && right_ghost.is_nan() {
            (
                (2.0 * v[i] - 5.0 * v[i - 1] + 4.0 * v[i - 2] - v[i - 3]) / (h * h),
                (3.0 * v[i] - 4.0 * v[i - 1] + v[i - 2]) / (2.0 * h),
            )
        } else {
            let lo = if i == 0 { left_ghost } else { v[i - 1] };
            let hi = if i == n - 1 { right_ghost } else { v[i + 1] };
            ((lo - 2.0 * v[i] + hi) / (h * h), (hi - lo) / (2.0 * h))
        };
        out[i] = if r[i] == 0.0 {
            m.dimension as f64 * d2
        } else {
            d2 + nf * m.psi_prime(r[i]) / m.psi(r[i]) * d1
        };
    }
    Ok(u.with_values(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridLayout, RadialGrid};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    #[test]
    fn distance_examples() {
        let h3 = RadialManifold::hyperbolic(3);
        assert_relative_eq!(h3.distance(2.0, 0.0, 1.0).unwrap(), 2.0, epsilon = 1e-15);
        let s2 = RadialManifold::sphere(2);
        assert_relative_eq!(
            s2.distance(PI / 2.0, PI / 2.0, PI / 2.0).unwrap(),
            PI / 2.0,
            epsilon = 1e-15
        );
        let h2 = RadialManifold::hyperbolic(2);
        let (r1, r2, g) = (1.5f64, 0.7f64, PI / 3.0);
        let lorentz = (r1.cosh() * r2.cosh() - r1.sinh() * r2.sinh() * g.cos()).acosh();
        assert_relative_eq!(h2.distance(r1, r2, g).unwrap(), lorentz, max_relative = 1e-13);
        assert!(s2.distance(4.0, 0.0, 0.0).is_err());
        assert!(h2.distance(-0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn circle_distance_wraps() {
        let c = RadialManifold::circle();
        assert_relative_eq!(c.distance(-3.0, 3.0, 0.0).unwrap(), 2.0 * PI - 6.0, epsilon = 1e-15);
        assert_relative_eq!(c.distance(1.0, 1.0, PI).unwrap(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn psi_derivative_at_origin_has_order_two() {
        for m in [RadialManifold::sphere(2), RadialManifold::hyperbolic(2)] {
            let e1 = (m.psi(1e-2) / 1e-2 - 1.0).abs();
            let e2 = (m.psi(5e-3) / 5e-3 - 1.0).abs();
            assert_relative_eq!((e1 / e2).log2(), 2.0, epsilon = 1e-3);
        }
    }

    #[test]
    fn max_angle_inverts_distance() {
        for m in [
            RadialManifold::euclidean(3),
            RadialManifold::sphere(2),
            RadialManifold::hyperbolic(3),
        ] {
            let g = m.max_angle_within(0.8, 1.1, 0.6).unwrap();
            assert_relative_eq!(m.distance(0.8, 1.1, g).unwrap(), 0.6, epsilon = 1e-12);
        }
    }

    fn uniform(m: RadialManifold, n: usize, r_max: f64, cell: bool) -> std::sync::Arc<RadialGrid> {
        RadialGrid::new(
            m,
            GridLayout::Uniform {
                n,
                r_max,
                cell_centered: cell,
            },
        )
        .unwrap()
    }

    #[test]
    fn laplacian_of_quadratic_is_exact() {
        let m = RadialManifold::euclidean(3);
        for cell in [true, false] {
            let g = uniform(m, 40, 2.0, cell);
            let u = RadialGridFunction::from_fn(g, |r| r * r);
            let lu = laplace_beltrami_radial(&m, &u).unwrap();
            for v in lu.values {
                assert_relative_eq!(v, 6.0, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn sphere_first_harmonic() {
        let m = RadialManifold::sphere(2);
        let err = |n: usize| {
            let g = uniform(m, n, PI, true);
            let u = RadialGridFunction::from_fn(g.clone(), f64::cos);
            let lu = laplace_beltrami_radial(&m, &u).unwrap();
            lu.values
                .iter()
                .zip(&g.nodes)
                .map(|(v, r)| (v + 2.0 * r.cos()).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(100), err(200));
        assert!(e2 < 1e-3);
        assert!((e1 / e2).log2() > 1.8);
    }

    #[test]
    fn hyperbolic_spherical_function_is_eigenfunction() {
        let m = RadialManifold::hyperbolic(3);
        let g = uniform(m, 400, 4.0, false);
        let phi = |r: f64| if r == 0.0 { 1.0 } else { r.sin() / r.sinh() };
        let u = RadialGridFunction::from_fn(g.clone(), phi);
        let lu = laplace_beltrami_radial(&m, &u).unwrap();
        for (v, r) in lu.values.iter().zip(&g.nodes) {
            assert!((v + 2.0 * phi(*r)).abs() < 2e-3, "r={r}");
        }
    }

    proptest! {
        #[test]
        fn distance_is_symmetric_and_satisfies_triangle(
            kind in 0usize..3,
            a in 0.0f64..3.0, b in 0.0f64..3.0, c in 0.0f64..3.0,
            t1 in 0.0f64..TAU, t2 in 0.0f64..TAU, t3 in 0.0f64..TAU,
        ) {
            let m = [RadialManifold::euclidean(2), RadialManifold::sphere(2), RadialManifold::hyperbolic(2)][kind];
            let ang = |x: f64, y: f64| {
                let d = (x - y).abs() % (2.0 * PI);
                d.min(2.0 * PI - d)
            };
            let d12 = m.distance(a, b, ang(t1, t2)).unwrap();
            let d21 = m.distance(b, a, ang(t1, t2)).unwrap();
            let d23 = m.distance(b, c, ang(t2, t3)).unwrap();
            let d13 = m.distance(a, c, ang(t1, t3)).unwrap();
            prop_assert!((d12 - d21).abs() <= 1e-15);
            prop_assert!(d13 <= d12 + d23 + 1e-12);
            prop_assert_eq!(m.distance(a, a, 0.0).unwrap(), 0.0);
        }
    }
}
