//! Gamma-function helpers.

use nalgebra::Complex;
use std::f64::consts::PI;

/// `Γ(n/2)` for a positive integer `n`.
pub fn gamma_half_integer(n: usize) -> f64 {
    assert!(n > 0);
    if n.is_multiple_of(2) {
        (1..n / 2).map(|k| k as f64).product()
    } else {
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < n as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Surface area of the unit sphere `S^{n-1}` in `R^n`; `n = 1` gives 2.
pub fn unit_sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half_integer(n)
}

const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

/// `ln Γ(z)` for `Re z > 0` by upward shifting and the Stirling series.
pub fn ln_gamma_complex(z: Complex<f64>) -> Complex<f64> {
    let mut z = z;
    let mut shift = Complex::new(0.0, 0.0);
    while z.norm() < 15.0 {
        shift += z.ln();
        z += 1.0;
    }
    let half_ln_2pi = 0.5 * (2.0 * PI).ln();
    let mut s = (z - 0.5) * z.ln() - z + half_ln_2pi;
    let zinv = z.inv();
    let zinv2 = zinv * zinv;
    let mut p = zinv;
    for c in STIRLING {
        s += p * c;
        p *= zinv2;
    }
    s - shift
}

/// `|Γ(m + iλ)|² / |Γ(iλ)|²`.
pub fn gamma_modulus_ratio(m: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if m == 0.0 { 1.0 } else { 0.0 };
    }
    let l = lambda.abs();
    let num = ln_gamma_complex(Complex::new(m, l)).re;
    // Γ(iλ) = Γ(1 + iλ)/(iλ)
    let den = ln_gamma_complex(Complex::new(1.0, l)).re - l.ln();
    (2.0 * (num - den)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(unit_sphere_area(1), 2.0);
        assert_relative_eq!(unit_sphere_area(2), 2.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(unit_sphere_area(3), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(unit_sphere_area(4), 2.0 * PI * PI, max_relative = 1e-15);
    }

    #[test]
    fn ln_gamma_real_axis() {
        assert_relative_eq!(ln_gamma_complex(Complex::new(5.0, 0.0)).re, 24f64.ln(), epsilon = 1e-14);
        assert_relative_eq!(
            ln_gamma_complex(Complex::new(0.5, 0.0)).re,
            PI.sqrt().ln(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn modulus_ratio_identities() {
        for &l in &[0.01, 0.3, 1.0, 2.5, 10.0, 40.0] {
            assert_relative_eq!(gamma_modulus_ratio(1.0, l), l * l, max_relative = 1e-12);
            assert_relative_eq!(gamma_modulus_ratio(2.0, l), l * l * (l * l + 1.0), max_relative = 1e-12);
            let half = l * (PI * l).tanh();
            assert_relative_eq!(gamma_modulus_ratio(0.5, l), half, max_relative = 1e-12);
        }
    }
}
