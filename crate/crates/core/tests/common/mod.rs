//! Independent oracles for the integration and acceptance tests.
//!
//! Quadrature here is composite Gauss-Legendre with nodes computed by Newton
//! iteration, deliberately separate from the library's adaptive rule.

#![allow(dead_code)]

use std::f64::consts::PI;

use turbsynth::model_spectra::energy_spectrum;
use turbsynth::SpectrumModel;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            let dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                break;
            }
        }
        x[i] = z;
    }
    (x, w)
}

/// `∫_a^b f` with `panels` equal panels of `order`-point Gauss-Legendre.
pub fn composite(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            total += wi * f(mid + 0.5 * h * xi);
        }
    }
    0.5 * h * total
}

/// `∫_0^∞ f` through `x = s t/(1 − t)`.
pub fn half_line(f: impl Fn(f64) -> f64, s: f64, panels: usize, order: usize) -> f64 {
    composite(
        |t| {
            let x = s * t / (1.0 - t);
            f(x) * s / ((1.0 - t) * (1.0 - t))
        },
        0.0,
        1.0,
        panels,
        order,
    )
}

/// `∫_lo^∞ g(l) dl` over length scale with `l = e^s`, for weights that decay
/// like a Gaussian beyond `hi`.
pub fn over_length(g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    composite(|s| {
        let l = s.exp();
        g(l) * l
    }, lo.ln(), hi.ln(), 600, 16)
}

/// Normalized Gaussian spectrum `e_G(k, l) = 8l/(3π³) (kl)⁴ exp(−(kl)²/π)`,
/// unit integral over `k`.
pub fn gaussian_normalized(k: f64, l: f64) -> f64 {
    let kl = k * l;
    8.0 * l / (3.0 * PI.powi(3)) * kl.powi(4) * (-kl * kl / PI).exp()
}

/// `E_ii(k₁) = 2 ∬ Φ_ii dk₂ dk₃` with `Φ_ij = E(k)/(4πk²) (δ_ij − k_i k_j/k²)`,
/// over the full `(k₂, k₃)` plane as four quadrants of a Cartesian grid.
/// `i` is 1 or 2.
pub fn one_d_direct(model: &SpectrumModel, i: usize, k1: f64) -> f64 {
    let s = 1.0 / model.lambda();
    let inner = |k2: f64| {
        half_line(
            |k3| {
                let k_sq = k1 * k1 + k2 * k2 + k3 * k3;
                if k_sq == 0.0 {
                    return 0.0;
                }
                let ki = if i == 1 { k1 } else { k2 };
                let e = energy_spectrum(model, k_sq.sqrt()).unwrap();
                e / (4.0 * PI * k_sq) * (1.0 - ki * ki / k_sq)
            },
            s,
            40,
            16,
        )
    };
    2.0 * 4.0 * half_line(inner, s, 40, 16)
}
