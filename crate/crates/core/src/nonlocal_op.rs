//! Discrete convolution `u ↦ ∫ J(d(x, y)) u(y) dμ_y` for radial functions.

use crate::error::{invalid, Error, Result};
use crate::geometry::{ManifoldKind, RadialManifold};
use crate::grid::{GridLayout, RadialGrid, RadialGridFunction};
use crate::kernels::Kernel;
use crate::quadrature::{barycentric_weights, gauss_legendre, lagrange_basis, GaussLegendre};
use crate::special::unit_sphere_area;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Default number of Gauss–Legendre nodes for the angular average.
pub const DEFAULT_ANGULAR_ORDER: usize = 32;
const RADIAL_SUB_ORDER: usize = 16;

/// Dense operator `A` on a radial grid. `(Au)_i ≈ ∫ J(d(x_i, y)) u(y) dμ_y`.
#[derive(Debug, Clone)]
pub struct ConvolutionMatrix {
    pub grid: Arc<RadialGrid>,
    pub kernel: Kernel,
    pub entries: DMatrix<f64>,
    /// Resolution warnings recorded during assembly.
    pub warnings: Vec<String>,
}

/// Mean of `J(d((r, θ₀), (r', θ)))` over `θ ∈ S^{N−1}`.
pub fn angular_average(m: &RadialManifold, k: &Kernel, r: f64, rp: f64, rule: &GaussLegendre) -> f64 {
    let delta = k.support_radius;
    let n = m.dimension;
    if n == 1 {
        return match m.kind {
            ManifoldKind::Circle => {
                let d = m.distance_unchecked(r, rp, 0.0);
                // a jump landing on a node counts half, as in the trapezoid
                // rule; at δ = π both sides of the antipode are inside
                if k.exponent == 0 && (d - delta).abs() <= 1e-12 * delta {
                    if delta >= PI * (1.0 - 1e-12) {
                        k.constant
                    } else {
                        0.5 * k.constant
                    }
                } else {
                    k.eval(d)
                }
            }
            _ => 0.5 * (k.eval((r - rp).abs()) + k.eval(r + rp)),
        };
    }
    let Some(gmax) = m.max_angle_within(r, rp, delta) else {
        return 0.0;
    };
    if gmax <= 0.0 {
        return 0.0;
    }
    let ratio = unit_sphere_area(n - 1) / unit_sphere_area(n);
    let k_pow = n as i32 - 2;
    ratio
        * rule
            .mapped(0.0, gmax)
            .map(|(g, w)| w * k.eval(m.distance_unchecked(r, rp, g)) * g.sin().powi(k_pow))
            .sum::<f64>()
}

impl ConvolutionMatrix {
    pub fn assemble(grid: &Arc<RadialGrid>, kernel: &Kernel, angular_order: usize) -> Result<Self> {
        let m = grid.manifold;
        if !(2..=64).contains(&angular_order) {
            return Err(invalid("angular order must lie in 2..=64"));
        }
        let lim = m.injectivity_radius();
        let too_wide = match m.kind {
            ManifoldKind::Circle => kernel.support_radius > lim,
            _ => kernel.support_radius >= lim,
        };
        if too_wide {
            return Err(invalid("kernel support exceeds the injectivity radius"));
        }
        let mut warnings = Vec::new();
        let across = 2.0 * kernel.support_radius / grid.spacing();
        if across < 8.0 {
            warnings.push(format!("only {across:.1} nodes span the kernel support"));
        }
        let rule = gauss_legendre(angular_order);
        let n = grid.len();
        let rows: Vec<Vec<f64>> = map_rows(n, |i| match grid.layout {
            GridLayout::Circle { .. } | GridLayout::Uniform { .. } => (0..n)
                .map(|j| grid.weights[j] * angular_average(&m, kernel, grid.nodes[i], grid.nodes[j], rule))
                .collect(),
            GridLayout::Panels { r_max, panels, order } => {
                product_row(grid, kernel, rule, grid.nodes[i], r_max, panels, order)
            }
        });
        let entries = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Ok(Self {
            grid: grid.clone(),
            kernel: *kernel,
            entries,
            warnings,
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn measure_weights(&self) -> &[f64] {
        &self.grid.weights
    }

    fn check(&self, u: &RadialGridFunction) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &u.grid) || self.grid.nodes == u.grid.nodes {
            Ok(())
        } else {
            Err(Error::GridMismatch("function is not on the operator's grid".into()))
        }
    }

    pub fn apply_values(&self, u: &[f64]) -> Vec<f64> {
        (&self.entries * DVector::from_column_slice(u)).as_slice().to_vec()
    }

    /// `Au`.
    pub fn apply(&self, u: &RadialGridFunction) -> Result<RadialGridFunction> {
        self.check(u)?;
        Ok(u.with_values(self.apply_values(&u.values)))
    }

    /// `Lu = Au − u`.
    pub fn apply_l(&self, u: &RadialGridFunction) -> Result<RadialGridFunction> {
        self.check(u)?;
        let au = self.apply_values(&u.values);
        Ok(u.with_values(au.iter().zip(&u.values).map(|(a, v)| a - v).collect()))
    }

    /// `Au − (A1)u`, i.e. `∫ J (u(y) − u(x)) dμ_y`.
    pub fn apply_difference(&self, u: &RadialGridFunction) -> Result<RadialGridFunction> {
        self.check(u)?;
        let au = self.apply_values(&u.values);
        let rs = self.row_sums();
        Ok(u.with_values(au.iter().zip(&rs).zip(&u.values).map(|((a, s), v)| a - s * v).collect()))
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.entries.row_iter().map(|r| r.sum()).collect()
    }

    /// `max |A_ij w_i − A_ji w_j|`.
    pub fn weighted_symmetry_defect(&self) -> f64 {
        let w = &self.grid.weights;
        let n = self.len();
        let mut d: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                d = d.max((self.entries[(i, j)] * w[i] - self.entries[(j, i)] * w[j]).abs());
            }
        }
        d
    }
}

#[cfg(feature = "parallel")]
fn map_rows<F: Fn(usize) -> Vec<f64> + Sync + Send>(n: usize, f: F) -> Vec<Vec<f64>> {
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_rows<F: Fn(usize) -> Vec<f64>>(n: usize, f: F) -> Vec<Vec<f64>> {
    (0..n).map(f).collect()
}

/// Row of the product-integration matrix: `u` is replaced by its
/// polynomial interpolant on each panel and the integrals against the
/// angular average are evaluated exactly up to smooth quadrature, splitting
/// at the radii where the kernel support becomes tangent to a sphere.
fn product_row(
    grid: &RadialGrid,
    kernel: &Kernel,
    rule: &GaussLegendre,
    r: f64,
    r_max: f64,
    panels: usize,
    order: usize,
) -> Vec<f64> {
    let m = grid.manifold;
    let delta = kernel.support_radius;
    let hp = r_max / panels as f64;
    let sub = gauss_legendre(RADIAL_SUB_ORDER);
    let panel_rule = grid.rule.as_ref().expect("panel grid carries its rule");
    let bary = barycentric_weights(&panel_rule.nodes);
    let mut row = vec![0.0; grid.len()];
    let mut basis = vec![0.0; order];
    let mut breaks = vec![r - delta, r + delta, delta - r];
    if m.kind == ManifoldKind::Sphere {
        breaks.push(2.0 * PI - delta - r);
    }
    let (lo, hi) = ((r - delta).max(0.0), (r + delta).min(r_max));
    if lo >= hi {
        return row;
    }
    let first = ((lo / hp).floor() as usize).min(panels - 1);
    let last = ((hi / hp).ceil() as usize).min(panels);
    for p in first..last {
        let (a, b) = (hp * p as f64, hp * (p + 1) as f64);
        let (a, b) = (a.max(lo), b.min(hi));
        if a >= b {
            continue;
        }
        let mut cuts = vec![a, b];
        cuts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
        cuts.sort_by(f64::total_cmp);
        let centre = hp * (p as f64 + 0.5);
        for w in cuts.windows(2) {
            for (x, wx) in sub.mapped(w[0], w[1]) {
                let val = wx * angular_average(&m, kernel, r, x, rule) * m.volume_density(x);
                if val == 0.0 {
                    continue;
                }
                lagrange_basis(&panel_rule.nodes, &bary, (x - centre) / (0.5 * hp), &mut basis);
                for (k, l) in basis.iter().enumerate() {
                    row[p * order + k] += val * l;
                }
            }
        }
    }
    row
}

/// Smooth radial test functions with known Laplace–Beltrami images.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestFunction {
    /// `r²`
    Quadratic,
    /// `cos r`
    Cosine,
    /// `exp(−r²)`
    Gaussian,
}

impl TestFunction {
    pub fn value(&self, r: f64) -> f64 {
        match self {
            TestFunction::Quadratic => r * r,
            TestFunction::Cosine => r.cos(),
            TestFunction::Gaussian => (-r * r).exp(),
        }
    }

    /// `u'' + (N−1)(ψ'/ψ)u'`.
    pub fn laplacian(&self, m: &RadialManifold, r: f64) -> f64 {
        // u' = r·g(r) for all three, so (ψ'/ψ)u' = (rψ'/ψ)·g stays finite at 0
        let (d2, g) = match self {
            TestFunction::Quadratic => (2.0, 2.0),
            TestFunction::Cosine => (-r.cos(), if r == 0.0 { -1.0 } else { -r.sin() / r }),
            TestFunction::Gaussian => {
                let e = (-r * r).exp();
                ((4.0 * r * r - 2.0) * e, -2.0 * e)
            }
        };
        let rpsi = if r == 0.0 { 1.0 } else { r * m.psi_prime(r) / m.psi(r) };
        d2 + (m.dimension as f64 - 1.0) * rpsi * g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub eps: f64,
    pub error: f64,
    /// `log(e_{k−1}/e_k)/log(ε_{k−1}/ε_k)`; absent for the first row.
    pub order: Option<f64>,
}

/// `sup |L_ε u − 𝔮 Δ u|` over grid nodes with `r ≤ window`, where
/// `L_ε u = ε^{−2} ∫ J_ε (u(y) − u(x)) dμ_y` and `J_ε = ε^{−N} J(·/ε)`.
/// The kernel should carry Euclidean unit mass.
pub fn infinitesimal_limit_study(
    grid: &Arc<RadialGrid>,
    kernel: &Kernel,
    u: TestFunction,
    epsilons: &[f64],
    window: f64,
    angular_order: usize,
) -> Result<Vec<LimitRow>> {
    if epsilons.is_empty() || epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("scales must be strictly decreasing"));
    }
    let m = grid.manifold;
    let q = kernel.second_moment_q(m.dimension);
    let uf = RadialGridFunction::from_fn(grid.clone(), |r| u.value(r));
    let mut rows: Vec<LimitRow> = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let ke = kernel.rescale(eps, &m)?;
        let a = ConvolutionMatrix::assemble(grid, &ke, angular_order)?;
        let du = a.apply_difference(&uf)?;
        let error = grid
            .nodes
            .iter()
            .zip(&du.values)
            .filter(|(r, _)| **r <= window)
            .map(|(&r, v)| (v / (eps * eps) - q * u.laplacian(&m, r)).abs())
            .fold(0.0, f64::max);
        let order = rows.last().map(|p| (p.error / error).ln() / (p.eps / eps).ln());
        rows.push(LimitRow { eps, error, order });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn panels(m: RadialManifold, r_max: f64, panels: usize, order: usize) -> Arc<RadialGrid> {
        RadialGrid::new(m, GridLayout::Panels { r_max, panels, order }).unwrap()
    }

    #[test]
    fn circle_indicator_rows_sum_to_one() {
        let m = RadialManifold::circle();
        let g = RadialGrid::new(m, GridLayout::Circle { n: 128 }).unwrap();
        let k = Kernel::indicator(PI).unwrap().normalize_mass(&m).unwrap();
        let a = ConvolutionMatrix::assemble(&g, &k, 32).unwrap();
        for s in a.row_sums() {
            assert_relative_eq!(s, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn sphere_operator_is_weighted_symmetric() {
        let m = RadialManifold::sphere(2);
        let g = panels(m, PI, 16, 12);
        let k = Kernel::new(0.5, 4).unwrap().normalize_mass(&m).unwrap();
        let a = ConvolutionMatrix::assemble(&g, &k, 32).unwrap();
        assert!(a.weighted_symmetry_defect() <= 1e-8, "{}", a.weighted_symmetry_defect());
        for s in a.row_sums() {
            assert_relative_eq!(s, 1.0, epsilon = 1e-9);
        }
        // product weights inherit small negative lobes from the interpolants
        assert!(a.entries.iter().all(|&x| x >= -1e-5 * a.entries.max()));
    }

    #[test]
    fn hyperbolic_interior_rows_sum_to_one() {
        let m = RadialManifold::hyperbolic(3);
        let g = panels(m, 6.0, 12, 12);
        let k = Kernel::bump().normalize_mass(&m).unwrap();
        let a = ConvolutionMatrix::assemble(&g, &k, 32).unwrap();
        for (r, s) in g.nodes.iter().zip(a.row_sums()) {
            if *r < 5.0 {
                assert_relative_eq!(s, 1.0, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn constants_are_annihilated_and_minimum_is_lifted() {
        let m = RadialManifold::circle();
        let g = RadialGrid::new(m, GridLayout::Circle { n: 512 }).unwrap();
        let k = Kernel::bump().normalize_mass(&m).unwrap();
        let a = ConvolutionMatrix::assemble(&g, &k, 32).unwrap();
        let one = RadialGridFunction::constant(g.clone(), 1.0);
        assert!(a.apply_l(&one).unwrap().norm_linf() < 1e-9);
        let u = RadialGridFunction::from_fn(g, |x| x * x);
        let lu = a.apply_l(&u).unwrap();
        let i0 = u.values.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)).unwrap().0;
        assert!(lu.values[i0] >= 0.0);
        assert!(lu.norm_linf() <= 2.0 * u.norm_linf() * (1.0 + 1e-9));
    }

    #[test]
    fn euclidean_quadratic_limit_is_exact() {
        let m = RadialManifold::euclidean(1);
        let g = panels(m, 3.0, 6, 8);
        let k = Kernel::bump().normalize_mass(&m).unwrap();
        let rows = infinitesimal_limit_study(&g, &k, TestFunction::Quadratic, &[0.5, 0.2], 2.0, 32).unwrap();
        assert!(rows.iter().all(|r| r.error < 1e-8), "{rows:?}");
    }

    #[test]
    fn laplacians_match_finite_differences() {
        for m in [
            RadialManifold::sphere(2),
            RadialManifold::hyperbolic(2),
            RadialManifold::euclidean(3),
        ] {
            for u in [TestFunction::Quadratic, TestFunction::Cosine, TestFunction::Gaussian] {
                let g = RadialGrid::new(
                    m,
                    GridLayout::Uniform {
                        n: 400,
                        r_max: 2.0,
                        cell_centered: true,
                    },
                )
                .unwrap();
                let f = RadialGridFunction::from_fn(g.clone(), |r| u.value(r));
                let lf = crate::geometry::laplace_beltrami_radial(&m, &f).unwrap();
                for (r, v) in g.nodes.iter().zip(&lf.values) {
                    assert!((v - u.laplacian(&m, *r)).abs() < 1e-3, "{m:?} {u:?} r={r}");
                }
            }
        }
    }

    #[test]
    fn limit_study_rejects_increasing_scales() {
        let m = RadialManifold::sphere(2);
        let g = panels(m, PI, 4, 8);
        assert!(infinitesimal_limit_study(&g, &Kernel::bump(), TestFunction::Cosine, &[0.1, 0.2], 1.0, 16).is_err());
    }
}
