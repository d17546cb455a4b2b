//! Radial spherical transform on `H^N` and its inverse.

use super::spherical::{abel_nodes, c_inv_sq, phi_lambda, phi_lambda_quadrature};
use crate::error::{invalid, Error, Result};
use crate::geometry::ManifoldKind;
use crate::grid::RadialGridFunction;
use crate::special::unit_sphere_area;
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Uniform frequency grid `λ_j = j δλ`, `0 ≤ λ_j ≤ Λ`. Only `λ ≥ 0` is
/// stored; every transform in this module is even in `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    pub lambda_max: f64,
    pub dlambda: f64,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        Self {
            lambda_max: 20.0,
            dlambda: 0.02,
        }
    }
}

impl LambdaGrid {
    pub fn new(lambda_max: f64, dlambda: f64) -> Result<Self> {
        if !(lambda_max > 0.0 && dlambda > 0.0 && dlambda < lambda_max) {
            return Err(invalid("lambda grid needs 0 < dλ < Λ"));
        }
        Ok(Self { lambda_max, dlambda })
    }

    pub fn len(&self) -> usize {
        (self.lambda_max / self.dlambda).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|j| j as f64 * self.dlambda).collect()
    }

    /// Twice the range at half the spacing.
    pub fn refined(&self) -> Self {
        Self {
            lambda_max: 2.0 * self.lambda_max,
            dlambda: 0.5 * self.dlambda,
        }
    }

    /// Trapezoid weights for `∫_{−Λ}^{Λ} g dλ` with `g` even, on the stored half.
    pub fn even_weights(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|j| {
                if j == 0 || j == n - 1 {
                    self.dlambda
                } else {
                    2.0 * self.dlambda
                }
            })
            .collect()
    }
}

/// Normalization of the inverse transform:
/// `u(r) = κ_N ∫ û(λ) Φ_λ(r) |c(λ)|^{−2} dλ` when `û = ∫ u Φ_λ dμ` uses the
/// full Riemannian measure. `κ_N` is the area of the unit sphere `S^{N−1}`.
pub fn inversion_constant(n: usize) -> f64 {
    unit_sphere_area(n)
}

/// `Φ_{λ_j}(r_i)` for a frequency grid and a list of radii, stored row-major
/// by frequency.
#[derive(Debug, Clone)]
pub struct SphericalFunctionTable {
    pub dimension: usize,
    pub lambdas: LambdaGrid,
    pub radii: Vec<f64>,
    values: Vec<f64>,
}

impl SphericalFunctionTable {
    pub fn new(n: usize, lambdas: LambdaGrid, radii: &[f64]) -> Self {
        let nl = lambdas.len();
        let columns: Vec<Vec<f64>> = map_radii(radii, |r| column(n, &lambdas, nl, r));
        let mut values = vec![0.0; nl * radii.len()];
        for (i, col) in columns.iter().enumerate() {
            for (j, v) in col.iter().enumerate() {
                values[j * radii.len() + i] = *v;
            }
        }
        Self {
            dimension: n,
            lambdas,
            radii: radii.to_vec(),
            values,
        }
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let m = self.radii.len();
        &self.values[j * m..(j + 1) * m]
    }
}

#[cfg(feature = "parallel")]
fn map_radii<F: Fn(f64) -> Vec<f64> + Sync + Send>(radii: &[f64], f: F) -> Vec<Vec<f64>> {
    radii.par_iter().map(|&r| f(r)).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_radii<F: Fn(f64) -> Vec<f64>>(radii: &[f64], f: F) -> Vec<Vec<f64>> {
    radii.iter().map(|&r| f(r)).collect()
}

fn column(n: usize, grid: &LambdaGrid, nl: usize, r: f64) -> Vec<f64> {
    if r == 0.0 {
        return vec![1.0; nl];
    }
    if n == 2 {
        // rotate e^{iλ s} along the uniform λ grid
        let nodes = abel_nodes(r, grid.lambda_max);
        let mut re: Vec<f64> = nodes.iter().map(|&(_, w)| w).collect();
        let mut im = vec![0.0; nodes.len()];
        let steps: Vec<(f64, f64)> = nodes
            .iter()
            .map(|&(s, _)| ((grid.dlambda * s).cos(), (grid.dlambda * s).sin()))
            .collect();
        let mut out = Vec::with_capacity(nl);
        for j in 0..nl {
            if j % 256 == 0 {
                let lam = j as f64 * grid.dlambda;
                for ((a, b), &(s, w)) in re.iter_mut().zip(im.iter_mut()).zip(&nodes) {
                    *a = w * (lam * s).cos();
                    *b = w * (lam * s).sin();
                }
            }
            out.push(re.iter().sum());
            for ((a, b), &(c, s)) in re.iter_mut().zip(im.iter_mut()).zip(&steps) {
                let na = *a * c - *b * s;
                *b = *a * s + *b * c;
                *a = na;
            }
        }
        return out;
    }
    (0..nl)
        .map(|j| {
            let lam = j as f64 * grid.dlambda;
            if n == 3 || n == 1 {
                phi_lambda(n, lam, r)
            } else {
                phi_lambda_quadrature(n, lam, r)
            }
        })
        .collect()
}

/// `û(λ)` on a frequency grid together with the density `|c(λ)|^{−2}`.
#[derive(Debug, Clone)]
pub struct RadialTransform {
    pub dimension: usize,
    pub lambdas: LambdaGrid,
    pub uhat: Vec<f64>,
    pub plancherel_weight: Vec<f64>,
}

impl RadialTransform {
    pub fn from_values(n: usize, lambdas: LambdaGrid, uhat: Vec<f64>) -> Result<Self> {
        if uhat.len() != lambdas.len() {
            return Err(Error::GridMismatch(
                "transform length differs from the lambda grid".into(),
            ));
        }
        let plancherel_weight = lambdas.nodes().iter().map(|&l| c_inv_sq(n, l)).collect();
        Ok(Self {
            dimension: n,
            lambdas,
            uhat,
            plancherel_weight,
        })
    }

    /// Pointwise multiplier `û(λ) ↦ g(λ) û(λ)`.
    pub fn multiply(&self, g: impl Fn(f64) -> f64) -> Self {
        let uhat = self
            .lambdas
            .nodes()
            .iter()
            .zip(&self.uhat)
            .map(|(&l, &u)| g(l) * u)
            .collect();
        Self { uhat, ..self.clone() }
    }

    /// `κ_N ∫ |û|² |c|^{−2} dλ`, which equals `∫ |u|² dμ`.
    pub fn plancherel_norm_sq(&self) -> f64 {
        inversion_constant(self.dimension)
            * self
                .lambdas
                .even_weights()
                .iter()
                .zip(&self.uhat)
                .zip(&self.plancherel_weight)
                .map(|((w, u), c)| w * u * u * c)
                .sum::<f64>()
    }
}

fn check_hyperbolic(u: &RadialGridFunction) -> Result<usize> {
    if u.grid.manifold.kind != ManifoldKind::Hyperbolic {
        return Err(invalid("the spherical transform is defined on hyperbolic space"));
    }
    Ok(u.grid.manifold.dimension)
}

/// Relative size of `u` on the outer 5% of the grid.
pub fn exterior_residual(u: &RadialGridFunction) -> f64 {
    let sup = u.norm_linf();
    if sup == 0.0 {
        return 0.0;
    }
    let r_cut = 0.95 * u.grid.r_max();
    u.grid
        .nodes
        .iter()
        .zip(&u.values)
        .filter(|(r, _)| **r >= r_cut)
        .fold(0.0, |m: f64, (_, v)| m.max(v.abs()))
        / sup
}

/// `û(λ) = ∫ u Φ_λ dμ` with a precomputed table on `u`'s grid.
pub fn forward_with_table(u: &RadialGridFunction, table: &SphericalFunctionTable) -> Result<RadialTransform> {
    let n = check_hyperbolic(u)?;
    if table.radii != u.grid.nodes || table.dimension != n {
        return Err(Error::GridMismatch("table was built for another grid".into()));
    }
    let wu: Vec<f64> = u.values.iter().zip(&u.grid.weights).map(|(v, w)| v * w).collect();
    let uhat = (0..table.lambdas.len())
        .map(|j| table.row(j).iter().zip(&wu).map(|(p, x)| p * x).sum())
        .collect();
    RadialTransform::from_values(n, table.lambdas, uhat)
}

/// Forward transform; rejects functions that have not decayed by the edge
/// of the grid.
pub fn forward_transform(u: &RadialGridFunction, lambdas: LambdaGrid) -> Result<RadialTransform> {
    let n = check_hyperbolic(u)?;
    let residual = exterior_residual(u);
    if residual > 1e-8 {
        return Err(Error::Truncation { residual, limit: 1e-8 });
    }
    let table = SphericalFunctionTable::new(n, lambdas, &u.grid.nodes);
    forward_with_table(u, &table)
}

/// `u(r) = κ_N ∫ û Φ_λ(r) |c|^{−2} dλ` with a precomputed table on `radii`.
pub fn inverse_with_table(t: &RadialTransform, table: &SphericalFunctionTable) -> Result<Vec<f64>> {
    if table.lambdas != t.lambdas || table.dimension != t.dimension {
        return Err(Error::GridMismatch("table was built for another lambda grid".into()));
    }
    let kappa = inversion_constant(t.dimension);
    let w = t.lambdas.even_weights();
    let mut out = vec![0.0; table.radii.len()];
    for (j, wj) in w.iter().enumerate() {
        let c = kappa * wj * t.uhat[j] * t.plancherel_weight[j];
        if c == 0.0 {
            continue;
        }
        for (o, p) in out.iter_mut().zip(table.row(j)) {
            *o += c * p;
        }
    }
    Ok(out)
}

pub fn inverse_transform(t: &RadialTransform, radii: &[f64]) -> Result<Vec<f64>> {
    let table = SphericalFunctionTable::new(t.dimension, t.lambdas, radii);
    inverse_with_table(t, &table)
}

/// Inverse transform with the truncation self-check: the result must agree
/// within `1e−5` (relative to its sup) with the one obtained on the refined
/// grid `(2Λ, δλ/2)`, and `|û|` must have dropped below `1e−12 · sup|û|` on
/// the last tenth of `[0, Λ]`.
pub fn inverse_checked(
    n: usize,
    lambdas: LambdaGrid,
    uhat_on: impl Fn(LambdaGrid) -> Result<RadialTransform>,
    radii: &[f64],
) -> Result<Vec<f64>> {
    let coarse_t = uhat_on(lambdas)?;
    if coarse_t.dimension != n {
        return Err(Error::GridMismatch("transform dimension differs".into()));
    }
    let sup_hat = coarse_t.uhat.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let cut = (0.9 * coarse_t.uhat.len() as f64) as usize;
    let tail = coarse_t.uhat[cut..].iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let coarse = inverse_transform(&coarse_t, radii)?;
    let fine = inverse_transform(&uhat_on(lambdas.refined())?, radii)?;
    let sup = coarse
        .iter()
        .fold(0.0, |m: f64, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let difference = coarse
        .iter()
        .zip(&fine)
        .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()))
        / sup;
    if difference > 1e-5 || tail > 1e-12 * sup_hat {
        return Err(Error::LambdaTruncation {
            difference: difference.max(tail / sup_hat),
            suggested: 2.0 * lambdas.lambda_max,
        });
    }
    Ok(coarse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RadialManifold;
    use crate::grid::{GridLayout, RadialGrid};
    use approx::assert_relative_eq;

    fn gaussian(n: usize, r_max: f64) -> RadialGridFunction {
        let g = RadialGrid::new(
            RadialManifold::hyperbolic(n),
            GridLayout::Panels {
                r_max,
                panels: 20,
                order: 16,
            },
        )
        .unwrap();
        RadialGridFunction::from_fn(g, |r| (-r * r).exp())
    }

    #[test]
    fn abel_table_matches_pointwise_values() {
        let grid = LambdaGrid::new(20.0, 0.02).unwrap();
        let radii = [0.0, 0.3, 2.0, 9.0];
        let t = SphericalFunctionTable::new(2, grid, &radii);
        for j in [0, 1, 300, 777, 1000] {
            for (i, &r) in radii.iter().enumerate() {
                let want = phi_lambda(2, j as f64 * 0.02, r);
                assert!((t.row(j)[i] - want).abs() < 1e-12, "j={j} r={r}");
            }
        }
    }

    #[test]
    fn inversion_constant_round_trips() {
        for n in [2, 3] {
            let u = gaussian(n, 8.0);
            let t = forward_transform(&u, LambdaGrid::default()).unwrap();
            let radii = [0.0, 0.5, 1.0, 2.0];
            let back = inverse_transform(&t, &radii).unwrap();
            for (r, b) in radii.iter().zip(&back) {
                assert_relative_eq!(*b, (-r * r).exp(), epsilon = 1e-6);
            }
            assert_relative_eq!(t.plancherel_norm_sq(), u.norm_l2().powi(2), max_relative = 1e-6);
        }
    }

    #[test]
    fn forward_is_dominated_by_zero_frequency() {
        let u = gaussian(3, 8.0);
        let t = forward_transform(&u, LambdaGrid::new(5.0, 0.05).unwrap()).unwrap();
        assert!(t.uhat.iter().all(|v| v.abs() <= t.uhat[0] * (1.0 + 1e-12)));
    }

    #[test]
    fn rejects_truncated_input() {
        let u = gaussian(3, 2.0);
        assert!(matches!(
            forward_transform(&u, LambdaGrid::default()),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn self_check_flags_slow_decay() {
        let g = RadialGrid::new(
            RadialManifold::hyperbolic(3),
            GridLayout::Panels {
                r_max: 4.0,
                panels: 20,
                order: 16,
            },
        )
        .unwrap();
        let bump = RadialGridFunction::from_fn(g, |r| if r < 2.0 { (1.0 - r * r / 4.0).powi(2) } else { 0.0 });
        let res = inverse_checked(
            3,
            LambdaGrid::new(5.0, 0.05).unwrap(),
            |l| forward_transform(&bump, l),
            &[0.0, 1.0],
        );
        assert!(matches!(res, Err(Error::LambdaTruncation { .. })));
        let u = gaussian(3, 8.0);
        let ok = inverse_checked(3, LambdaGrid::default(), |l| forward_transform(&u, l), &[0.0, 1.0]).unwrap();
        assert_relative_eq!(ok[1], (-1f64).exp(), epsilon = 1e-6);
    }
}
