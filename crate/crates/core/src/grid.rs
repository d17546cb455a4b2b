//! Radial grids, quadrature weights for `dμ`, and grid functions.

use crate::error::{invalid, Error, Result};
use crate::geometry::{ManifoldKind, RadialManifold};
use crate::quadrature::GaussLegendre;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GridLayout {
    /// `n` equispaced points `−π + 2πi/n` with trapezoid weights.
    Circle { n: usize },
    /// `n` equal cells on `[0, r_max]`: midpoints (midpoint rule) when
    /// `cell_centered`, else `n + 1` nodes `ih` with trapezoid weights.
    Uniform { n: usize, r_max: f64, cell_centered: bool },
    /// `panels` equal Gauss–Legendre panels of `order` nodes on `[0, r_max]`.
    Panels { r_max: f64, panels: usize, order: usize },
}

#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub manifold: RadialManifold,
    pub layout: GridLayout,
    pub nodes: Vec<f64>,
    /// Quadrature weights for the full Riemannian measure `dμ`.
    pub weights: Vec<f64>,
    pub(crate) rule: Option<GaussLegendre>,
}

impl RadialGrid {
    pub fn new(manifold: RadialManifold, layout: GridLayout) -> Result<Arc<Self>> {
        let mut rule = None;
        let (nodes, weights): (Vec<f64>, Vec<f64>) = match layout {
            GridLayout::Circle { n } => {
                if manifold.kind != ManifoldKind::Circle {
                    return Err(invalid("circle layout needs the circle manifold"));
                }
                if n < 3 {
                    return Err(invalid("circle grid needs at least 3 nodes"));
                }
                let h = 2.0 * PI / n as f64;
                ((0..n).map(|i| -PI + h * i as f64).collect(), vec![h; n])
            }
            GridLayout::Uniform {
                n,
                r_max,
                cell_centered,
            } => {
                check_extent(&manifold, r_max)?;
                if n < 3 {
                    return Err(invalid("uniform grid needs at least 3 cells"));
                }
                let h = r_max / n as f64;
                if cell_centered {
                    let nodes: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
                    let w = nodes.iter().map(|&r| h * manifold.volume_density(r)).collect();
                    (nodes, w)
                } else {
                    let nodes: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
                    let w = nodes
                        .iter()
                        .enumerate()
                        .map(|(i, &r)| {
                            let end = if i == 0 || i == n { 0.5 } else { 1.0 };
                            end * h * manifold.volume_density(r)
                        })
                        .collect();
                    (nodes, w)
                }
            }
            GridLayout::Panels { r_max, panels, order } => {
                check_extent(&manifold, r_max)?;
                if panels == 0 || order < 2 {
                    return Err(invalid("panel grid needs at least one panel of order 2"));
                }
                let gl = GaussLegendre::new(order);
                let hp = r_max / panels as f64;
                let mut nodes = Vec::with_capacity(panels * order);
                let mut weights = Vec::with_capacity(panels * order);
                for k in 0..panels {
                    let a = hp * k as f64;
                    for (x, w) in gl.mapped(a, a + hp) {
                        nodes.push(x);
                        weights.push(w * manifold.volume_density(x));
                    }
                }
                rule = Some(gl);
                (nodes, weights)
            }
        };
        if weights.iter().any(|&w| w <= 0.0)
            && !matches!(
                layout,
                GridLayout::Uniform {
                    cell_centered: false,
                    ..
                }
            )
        {
            return Err(invalid("grid produced a non-positive weight"));
        }
        Ok(Arc::new(Self {
            manifold,
            layout,
            nodes,
            weights,
            rule,
        }))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Outer radius covered by the grid.
    pub fn r_max(&self) -> f64 {
        match self.layout {
            GridLayout::Circle { .. } => PI,
            GridLayout::Uniform { r_max, .. } | GridLayout::Panels { r_max, .. } => r_max,
        }
    }

    /// Smallest node spacing, used to judge kernel resolution.
    pub fn spacing(&self) -> f64 {
        match self.layout {
            GridLayout::Circle { n } => 2.0 * PI / n as f64,
            GridLayout::Uniform { n, r_max, .. } => r_max / n as f64,
            GridLayout::Panels { r_max, panels, order } => r_max / (panels * order) as f64,
        }
    }

    /// Total measure covered by the grid.
    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }
}

fn check_extent(m: &RadialManifold, r_max: f64) -> Result<()> {
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(invalid("r_max must be positive and finite"));
    }
    if m.kind == ManifoldKind::Circle {
        return Err(invalid("use the circle layout on the circle"));
    }
    if let Some(lim) = m.radial_limit() {
        if r_max > lim + 1e-12 {
            return Err(Error::Domain {
                r: r_max,
                manifold: m.kind.to_string(),
            });
        }
    }
    Ok(())
}

/// Values of a radial function on a grid.
#[derive(Debug, Clone)]
pub struct RadialGridFunction {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<f64>,
}

impl RadialGridFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes.iter().map(|&r| f(r)).collect();
        Self { grid, values }
    }

    pub fn constant(grid: Arc<RadialGrid>, c: f64) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![c; n],
        }
    }

    pub fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid.nodes == other.grid.nodes
    }

    pub(crate) fn check_grid(&self, other: &Self) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch("functions live on different grids".into()))
        }
    }

    /// `∫ u dμ` over the grid.
    pub fn integral(&self) -> f64 {
        self.values.iter().zip(&self.grid.weights).map(|(v, w)| v * w).sum()
    }

    /// `∫ u v dμ`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(&self.grid.weights)
            .map(|((a, b), w)| a * b * w)
            .sum())
    }

    pub fn norm_l1(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.grid.weights)
            .map(|(v, w)| v.abs() * w)
            .sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.grid.weights)
            .map(|(v, w)| v * v * w)
            .sum::<f64>()
            .sqrt()
    }

    pub fn norm_linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.integral() / self.grid.measure()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        Ok(self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_measure_is_total_area() {
        let g = RadialGrid::new(
            RadialManifold::sphere(2),
            GridLayout::Panels {
                r_max: PI,
                panels: 8,
                order: 16,
            },
        )
        .unwrap();
        assert_relative_eq!(
            RadialGridFunction::constant(g, 1.0).integral(),
            4.0 * PI,
            max_relative = 1e-12
        );
    }

    #[test]
    fn circle_and_ball_measures() {
        let c = RadialGrid::new(RadialManifold::circle(), GridLayout::Circle { n: 64 }).unwrap();
        assert_relative_eq!(c.measure(), 2.0 * PI, max_relative = 1e-14);
        let b = RadialGrid::new(
            RadialManifold::euclidean(3),
            GridLayout::Panels {
                r_max: 2.0,
                panels: 2,
                order: 8,
            },
        )
        .unwrap();
        assert_relative_eq!(b.measure(), 4.0 / 3.0 * PI * 8.0, max_relative = 1e-12);
        let h = RadialGrid::new(
            RadialManifold::hyperbolic(2),
            GridLayout::Uniform {
                n: 2000,
                r_max: 1.0,
                cell_centered: true,
            },
        )
        .unwrap();
        assert_relative_eq!(h.measure(), 2.0 * PI * (1f64.cosh() - 1.0), max_relative = 1e-6);
    }

    #[test]
    fn rejects_bad_layouts() {
        assert!(RadialGrid::new(
            RadialManifold::sphere(2),
            GridLayout::Uniform {
                n: 10,
                r_max: 4.0,
                cell_centered: true
            }
        )
        .is_err());
        assert!(RadialGrid::new(RadialManifold::sphere(2), GridLayout::Circle { n: 10 }).is_err());
        let g = RadialGrid::new(RadialManifold::circle(), GridLayout::Circle { n: 8 }).unwrap();
        assert!(RadialGridFunction::new(g, vec![0.0; 3]).is_err());
    }
}
