//! Spectra of the convolution operator on compact model spaces and their
//! analytic counterparts.

use crate::error::{invalid, Error, Result};
use crate::grid::RadialGridFunction;
use crate::kernels::Kernel;
use crate::nonlocal_op::ConvolutionMatrix;
use crate::quadrature::{adaptive, legendre_p, linear_fit};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Eigenpairs of `A`, sorted by decreasing `γ`. `λ_k = 1 − γ_k` are the
/// eigenvalues of `−L = I − A`.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub gamma: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Column `k` holds `φ_k`, orthonormal for `Σ w_i φ(i) ψ(i)`.
    pub vectors: DMatrix<f64>,
    pub weights: Vec<f64>,
}

/// Symmetrize `W^{1/2} A W^{−1/2}`, solve, and map back.
pub fn eigendecompose(a: &ConvolutionMatrix) -> Result<SpectralData> {
    let w = a.measure_weights();
    if w.iter().any(|&x| !(x > 0.0)) {
        return Err(invalid("eigendecomposition needs strictly positive weights"));
    }
    let n = a.len();
    let sw: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let b = DMatrix::from_fn(n, n, |i, j| sw[i] * a.entries[(i, j)] / sw[j]);
    let scale = b.amax().max(f64::MIN_POSITIVE);
    let defect = (&b - b.transpose()).amax() / scale;
    if defect > 1e-6 {
        return Err(Error::Asymmetric(defect));
    }
    let sym = (&b + b.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let gamma: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let lambda = gamma.iter().map(|g| 1.0 - g).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (c, &k) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(k);
        // fix the sign so that the largest entry is positive
        let big = col
            .iter()
            .copied()
            .max_by(|x, y| x.abs().total_cmp(&y.abs()))
            .unwrap_or(1.0);
        let sign = if big < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors[(i, c)] = sign * col[i] / sw[i];
        }
    }
    Ok(SpectralData {
        gamma,
        lambda,
        vectors,
        weights: w.to_vec(),
    })
}

impl SpectralData {
    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn mode(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k).iter().copied().collect()
    }

    /// `max |⟨φ_j, φ_k⟩_w − δ_jk|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let w = DMatrix::from_diagonal(&DVector::from_column_slice(&self.weights));
        let g = self.vectors.transpose() * w * &self.vectors;
        let n = g.nrows();
        (g - DMatrix::<f64>::identity(n, n)).amax()
    }

    /// Coefficients `⟨u, φ_k⟩_w`.
    pub fn coefficients(&self, u: &[f64]) -> Vec<f64> {
        let wu = DVector::from_iterator(u.len(), u.iter().zip(&self.weights).map(|(a, b)| a * b));
        (self.vectors.transpose() * wu).as_slice().to_vec()
    }

    /// `Σ_k e^{−c λ_k t} ⟨u, φ_k⟩ φ_k`.
    pub fn propagate(&self, u: &[f64], t: f64, c: f64) -> Vec<f64> {
        let coef = self.coefficients(u);
        let damped = DVector::from_iterator(
            coef.len(),
            coef.iter().zip(&self.lambda).map(|(a, l)| a * (-c * l * t).exp()),
        );
        (&self.vectors * damped).as_slice().to_vec()
    }
}

/// `γ_k = 2∫₀^δ J(s) cos(ks) ds` for `k = 0..=k_max`.
pub fn oracle_circle(k: &Kernel, k_max: usize) -> Vec<f64> {
    (0..=k_max)
        .map(|m| {
            let pieces = 2 + m / 4;
            let pts: Vec<f64> = (0..=pieces)
                .map(|i| k.support_radius * i as f64 / pieces as f64)
                .collect();
            2.0 * crate::quadrature::adaptive_pieces(|s| k.eval(s) * (m as f64 * s).cos(), &pts, 1e-15, 1e-13)
                .expect("smooth integrand")
        })
        .collect()
}

/// Circle oracle expanded to the `n` eigenvalues of an `n`-point grid
/// (`k` and `−k` both present), sorted decreasingly.
pub fn oracle_circle_spectrum(k: &Kernel, n: usize) -> Vec<f64> {
    let base = oracle_circle(k, n / 2);
    let mut out = vec![base[0]];
    for (m, &g) in base.iter().enumerate().take(n / 2 + 1).skip(1) {
        out.push(g);
        if !(n.is_multiple_of(2) && m == n / 2) && out.len() < n {
            out.push(g);
        }
    }
    out.truncate(n);
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// Funk–Hecke values `γ_l = 2π∫₀^δ J(s) P_l(cos s) sin s ds` on `S²`.
pub fn oracle_sphere(k: &Kernel, l_max: usize) -> Vec<f64> {
    if k.support_radius > PI {
        panic!("kernel support exceeds π");
    }
    (0..=l_max)
        .map(|l| {
            2.0 * PI
                * adaptive(
                    |s| k.eval(s) * legendre_p(l, s.cos()) * s.sin(),
                    0.0,
                    k.support_radius,
                    1e-15,
                    1e-13,
                )
                .expect("smooth integrand")
        })
        .collect()
}

/// Pair every target value with the nearest unused computed value, in the
/// given order, and return the pairs.
pub fn match_spectra(computed: &[f64], targets: &[f64]) -> Vec<(f64, f64)> {
    let mut used = vec![false; computed.len()];
    targets
        .iter()
        .map(|&t| {
            let j = (0..computed.len())
                .filter(|&j| !used[j])
                .min_by(|&a, &b| (computed[a] - t).abs().total_cmp(&(computed[b] - t).abs()))
                .expect("enough computed values");
            used[j] = true;
            (t, computed[j])
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayRow {
    pub t: f64,
    pub l2_dist: f64,
    pub linf_dist: f64,
    pub l2_bound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayReport {
    pub lambda1: f64,
    pub rows: Vec<DecayRow>,
    /// Least-squares rate of `log ‖u − ⟨u₀⟩‖₂` over the second half of the
    /// time list; `None` when the distances vanish.
    pub fitted_rate: Option<f64>,
}

/// Distances of the exact spectral solution to the mean of `u₀`.
pub fn decay_report(spec: &SpectralData, u0: &RadialGridFunction, t_list: &[f64]) -> Result<DecayReport> {
    if u0.values.len() != spec.len() {
        return Err(Error::GridMismatch("initial data and spectrum differ in size".into()));
    }
    let mean = u0.mean();
    let norm0 = u0.norm_l2();
    let lambda1 = spec.lambda[1];
    let rows: Vec<DecayRow> = t_list
        .iter()
        .map(|&t| {
            let ut = u0.with_values(spec.propagate(&u0.values, t, 1.0));
            let d = ut.map(|v| v - mean);
            DecayRow {
                t,
                l2_dist: d.norm_l2(),
                linf_dist: d.norm_linf(),
                l2_bound: (-lambda1 * t).exp() * norm0,
            }
        })
        .collect();
    let tail = &rows[rows.len() / 2..];
    let fitted_rate = if tail.len() >= 2 && tail.iter().all(|r| r.l2_dist > 0.0) {
        let ts: Vec<f64> = tail.iter().map(|r| r.t).collect();
        let ls: Vec<f64> = tail.iter().map(|r| r.l2_dist.ln()).collect();
        Some(-linear_fit(&ts, &ls).0)
    } else {
        None
    };
    Ok(DecayReport {
        lambda1,
        rows,
        fitted_rate,
    })
}
