//! Browser bindings: small, fast computations for the demo page.

use nonlocal_diffusion::geometry::RadialManifold;
use nonlocal_diffusion::grid::{GridLayout, RadialGrid};
use nonlocal_diffusion::hfourier::{heat_kernel_k0, phi_lambda};
use nonlocal_diffusion::nonlocal_op::{ConvolutionMatrix, DEFAULT_ANGULAR_ORDER};
use nonlocal_diffusion::spectral::{eigendecompose, match_spectra, oracle_circle};
use nonlocal_diffusion::Kernel;
use wasm_bindgen::prelude::*;

fn samples(r_max: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n).map(|i| r_max * i as f64 / (n - 1) as f64).collect()
}

/// Computed and oracle eigenvalues `γ_m`, `m < count`, of the mass-normalized
/// bump on an `n`-point circle: `[computed…, oracle…]`.
pub fn circle_spectrum_values(n: usize, delta: f64, exponent: u32, count: usize) -> Result<Vec<f64>, String> {
    let m = RadialManifold::circle();
    let g = RadialGrid::new(m, GridLayout::Circle { n }).map_err(|e| e.to_string())?;
    let k = Kernel::new(delta, exponent)
        .and_then(|k| k.normalize_mass(&m))
        .map_err(|e| e.to_string())?;
    let a = ConvolutionMatrix::assemble(&g, &k, DEFAULT_ANGULAR_ORDER).map_err(|e| e.to_string())?;
    let s = eigendecompose(&a).map_err(|e| e.to_string())?;
    let oracle = oracle_circle(&k, count.max(1) - 1);
    let pairs = match_spectra(&s.gamma, &oracle);
    Ok(pairs.iter().map(|p| p.0).chain(pairs.iter().map(|p| p.1)).collect())
}

/// `[Φ_λ(r_i)…, Φ₀(r_i)…]` on `points` radii in `[0, r_max]`.
pub fn spherical_function_values(n: usize, lambda: f64, r_max: f64, points: usize) -> Result<Vec<f64>, String> {
    if n < 2 {
        return Err("dimension must be at least 2".into());
    }
    let rs = samples(r_max, points);
    let a = rs.iter().map(|&r| phi_lambda(n, lambda, r));
    let b = rs.iter().map(|&r| phi_lambda(n, 0.0, r));
    Ok(a.chain(b).collect())
}

/// `K₀(r_i, t)` on `points` radii in `[0, r_max]`.
pub fn heat_kernel_values(n: usize, b: f64, t: f64, r_max: f64, points: usize) -> Result<Vec<f64>, String> {
    samples(r_max, points)
        .iter()
        .map(|&r| heat_kernel_k0(n, b, r, t).map_err(|e| e.to_string()))
        .collect()
}

#[wasm_bindgen]
pub fn circle_spectrum(n: usize, delta: f64, exponent: u32, count: usize) -> Result<Vec<f64>, JsValue> {
    circle_spectrum_values(n, delta, exponent, count).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn spherical_function(n: usize, lambda: f64, r_max: f64, points: usize) -> Result<Vec<f64>, JsValue> {
    spherical_function_values(n, lambda, r_max, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn heat_kernel(n: usize, b: f64, t: f64, r_max: f64, points: usize) -> Result<Vec<f64>, JsValue> {
    heat_kernel_values(n, b, t, r_max, points).map_err(|e| JsValue::from_str(&e))
}
