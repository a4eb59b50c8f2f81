//! Synthesis of solenoidal velocity fields realizing a Gaussian mixture.
//!
//! Every mixture component filters its own white-noise field with a Gaussian
//! kernel of the component's length scale. The streamfunction is the sum of
//! the component fields scaled by `√w_m`, so that the expected energies of the
//! independent components add up to the mixture spectrum, and the velocity is
//! its curl.
//!
//! Kernel: `G(r) = exp(−π r² / 2l²)`. Filtering continuous white noise of
//! intensity `1/ρ₀` with `G` gives variance `l^d/ρ₀` and the correlation
//! `exp(−π r² / 4l²)`, whose longitudinal velocity spectrum is the Gaussian
//! `E₁₁ = 2u²l/π exp(−k₁²l²/π)`.
//!
//! Filtering and differentiation are done with FFTs on the periodic grid.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{invalid, require_positive, Error, Result};
use crate::fft::{to_complex, FftNd};
use crate::field::{Dimension, FieldGrid, ScalarField, VectorField};
use crate::gaussian_mixture::GaussianMixture;

/// Minimum domain length, in units of the kernel length scale.
pub const DOMAIN_PER_KERNEL_LENGTH: f64 = 8.0;

/// Energy `∫E dk = (3/2)u_t²` carried by every spectrum of the mixture,
/// used as `k_t` when calibrating the source amplitudes. In 3D this equals
/// the kinetic energy `(d/2)u_t²`; in 2D it is what makes the realized `E₁₁`
/// match the target (see `README`).
pub fn calibration_energy(u_t: f64) -> f64 {
    1.5 * u_t * u_t
}

/// Kinetic energy `(d/2) u_t²` of a d-dimensional field with rms `u_t` per
/// component.
pub fn kinetic_energy(u_t: f64, dim: Dimension) -> f64 {
    0.5 * dim.get() as f64 * u_t * u_t
}

/// Source variance `R̂ = 2^(4−d) l² k_t / 3π`.
pub fn source_variance(l: f64, k_t: f64, dim: Dimension) -> f64 {
    2f64.powi(4 - dim.get() as i32) * l * l * k_t / (3.0 * PI)
}

/// Amplitude from a source variance, `Â = √(ρ₀ R̂ / l^d)`.
pub fn amplitude_from_variance(variance: f64, l: f64, rho_0: f64, dim: Dimension) -> f64 {
    (rho_0 * variance / l.powi(dim.get() as i32)).sqrt()
}

/// Per-component amplitude `Â_m = √(ρ₀ / l_m^(d−2) · 2^(4−d) k_t / 3π)`.
pub fn component_amplitude(l_m: f64, k_t: f64, rho_0: f64, d: usize) -> Result<f64> {
    require_positive("l_m", l_m)?;
    require_positive("k_t", k_t)?;
    require_positive("rho_0", rho_0)?;
    let dim = Dimension::from_usize(d)?;
    let d = dim.get() as i32;
    Ok((rho_0 / l_m.powi(d - 2) * 2f64.powi(4 - d) * k_t / (3.0 * PI)).sqrt())
}

/// Deterministic seed for one noise field, mixing the run seed with the
/// realization, streamfunction component and mixture component indices.
pub fn component_seed(seed: u64, realization: usize, stream: usize, component: usize) -> u64 {
    let mut x = seed;
    for v in [realization as u64, stream as u64, component as u64] {
        x = splitmix64(x ^ splitmix64(v.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    x
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// I.i.d. standard normal samples, one per node.
pub fn white_noise(grid: &FieldGrid, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    ScalarField {
        grid: grid.clone(),
        values,
    }
}

fn check_kernel_fits(grid: &FieldGrid, l: f64) -> Result<()> {
    require_positive("l", l)?;
    for axis in 0..grid.shape().len() {
        let domain = grid.domain_length(axis);
        let required = DOMAIN_PER_KERNEL_LENGTH * l;
        if domain < required {
            return Err(Error::KernelExceedsDomain {
                length: l,
                required,
                domain,
                axis,
            });
        }
    }
    Ok(())
}

/// Fourier transform of the kernel, `(√2 l)^d exp(−|k|² l² / 2π)`, on the
/// grid's FFT layout. Its value at `k = 0` is the DC gain.
fn kernel_transfer(grid: &FieldGrid, l: f64) -> Vec<f64> {
    let axes: Vec<Vec<f64>> = (0..grid.shape().len())
        .map(|a| {
            grid.wavenumbers(a)
                .into_iter()
                .map(|k| (-(k * l).powi(2) / (2.0 * PI)).exp() * 2f64.sqrt() * l)
                .collect()
        })
        .collect();
    separable_product(grid, &axes)
}

fn separable_product(grid: &FieldGrid, axes: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![1.0; grid.len()];
    for (p, v) in out.iter_mut().enumerate() {
        for (axis, idx) in grid.unravel(p).into_iter().enumerate() {
            *v *= axes[axis][idx];
        }
    }
    out
}

/// DC gain of the kernel, `∫G d^d x = (√2 l)^d`.
pub fn kernel_dc_gain(l: f64, dim: Dimension) -> f64 {
    (2f64.sqrt() * l).powi(dim.get() as i32)
}

/// Periodic convolution `∫ G(x − x′) φ(x′) d^d x′` of the band-limited field
/// sampled by `field`, evaluated exactly in Fourier space.
pub fn gaussian_filter(field: &ScalarField, l: f64) -> Result<ScalarField> {
    check_kernel_fits(&field.grid, l)?;
    let fft = FftNd::new(field.grid.shape());
    let transfer = kernel_transfer(&field.grid, l);
    let mut data = to_complex(&field.values);
    fft.forward(&mut data);
    for (v, g) in data.iter_mut().zip(&transfer) {
        *v *= *g;
    }
    fft.inverse(&mut data);
    Ok(ScalarField {
        grid: field.grid.clone(),
        values: data.into_iter().map(|c| c.re).collect(),
    })
}

/// Inputs of a synthesis run.
#[derive(Debug, Clone)]
pub struct SynthesisSpec {
    pub mixture: GaussianMixture,
    pub grid: FieldGrid,
    /// Energy `k_t` entering the amplitude calibration (m²/s²).
    pub k_t: f64,
    /// Mean density `ρ₀` (kg/m³).
    pub rho_0: f64,
    pub seed: u64,
    pub ensemble_count: usize,
    /// Multiplies every amplitude. Always 1 outside fault-injection tests.
    pub amplitude_scale: f64,
}

impl SynthesisSpec {
    pub fn new(
        mixture: GaussianMixture,
        grid: FieldGrid,
        k_t: f64,
        rho_0: f64,
        seed: u64,
        ensemble_count: usize,
    ) -> Result<Self> {
        require_positive("k_t", k_t)?;
        require_positive("rho_0", rho_0)?;
        if ensemble_count == 0 {
            return Err(invalid("ensemble_count", "must be at least 1"));
        }
        check_kernel_fits(&grid, mixture.largest_scale())?;
        Ok(Self {
            mixture,
            grid,
            k_t,
            rho_0,
            seed,
            ensemble_count,
            amplitude_scale: 1.0,
        })
    }

    /// A spec whose `k_t` is [`calibration_energy`] of the mixture's `u_t`.
    pub fn for_mixture(
        mixture: GaussianMixture,
        grid: FieldGrid,
        rho_0: f64,
        seed: u64,
        ensemble_count: usize,
    ) -> Result<Self> {
        let k_t = calibration_energy(mixture.model().u_t());
        Self::new(mixture, grid, k_t, rho_0, seed, ensemble_count)
    }

    pub fn dimension(&self) -> Dimension {
        self.grid.dimension()
    }

    /// Number of scalar streamfunction components: 1 in 2D, 3 in 3D.
    pub fn stream_count(&self) -> usize {
        match self.dimension() {
            Dimension::Two => 1,
            Dimension::Three => 3,
        }
    }

    /// `Â_m` for every mixture component.
    pub fn amplitudes(&self) -> Vec<f64> {
        let d = self.dimension().get();
        self.mixture
            .components()
            .iter()
            .map(|c| {
                component_amplitude(c.length, self.k_t, self.rho_0, d).expect("validated spec")
                    * self.amplitude_scale
            })
            .collect()
    }

    /// Expected variance of each streamfunction component,
    /// `Σ_m w_m Â_m² l_m^d / ρ₀`.
    pub fn expected_streamfunction_variance(&self) -> f64 {
        let d = self.dimension().get() as i32;
        self.mixture
            .components()
            .iter()
            .zip(self.amplitudes())
            .map(|(c, a)| c.weight * a * a * c.length.powi(d) / self.rho_0)
            .sum()
    }
}

/// Streamfunction of one realization: the unweighted component fields
/// `ψ_m = Â_m · G_m ∗ 𝒰_m` and the weighted sums `Σ √w_m ψ_m`, per scalar
/// streamfunction component.
#[derive(Debug, Clone)]
pub struct Streamfunction {
    pub components: Vec<Vec<ScalarField>>,
    pub total: Vec<ScalarField>,
}

struct Spectral<'a> {
    spec: &'a SynthesisSpec,
    fft: FftNd,
    transfers: Vec<Vec<f64>>,
    noise_scale: f64,
    amplitudes: Vec<f64>,
}

impl<'a> Spectral<'a> {
    fn new(spec: &'a SynthesisSpec) -> Self {
        let transfers = spec
            .mixture
            .components()
            .iter()
            .map(|c| kernel_transfer(&spec.grid, c.length))
            .collect();
        Self {
            spec,
            fft: FftNd::new(spec.grid.shape()),
            transfers,
            // unit-variance samples → white noise of intensity 1/ρ₀
            noise_scale: 1.0 / (spec.rho_0 * spec.grid.cell_volume()).sqrt(),
            amplitudes: spec.amplitudes(),
        }
    }

    /// Fourier coefficients of `ψ_m` for one noise field.
    fn component_hat(&self, realization: usize, stream: usize, m: usize) -> Vec<Complex64> {
        let seed = component_seed(self.spec.seed, realization, stream, m);
        let noise = white_noise(&self.spec.grid, seed);
        let mut data = to_complex(&noise.values);
        self.fft.forward(&mut data);
        let gain = self.amplitudes[m] * self.noise_scale;
        for (v, g) in data.iter_mut().zip(&self.transfers[m]) {
            *v *= gain * g;
        }
        data
    }

    fn stream_parts(&self, realization: usize, stream: usize) -> Vec<Vec<Complex64>> {
        (0..self.spec.mixture.len())
            .into_par_iter()
            .map(|m| self.component_hat(realization, stream, m))
            .collect()
    }

    /// `Σ √w_m ψ̂_m`, summed in component order.
    fn stream_total(&self, parts: &[Vec<Complex64>]) -> Vec<Complex64> {
        let mut total = vec![Complex64::new(0.0, 0.0); self.spec.grid.len()];
        for (part, c) in parts.iter().zip(self.spec.mixture.components()) {
            let s = c.weight.sqrt();
            for (t, v) in total.iter_mut().zip(part) {
                *t += v * s;
            }
        }
        total
    }

    fn to_real(&self, mut data: Vec<Complex64>) -> ScalarField {
        self.fft.inverse(&mut data);
        ScalarField {
            grid: self.spec.grid.clone(),
            values: data.into_iter().map(|c| c.re).collect(),
        }
    }
}

/// Synthesizes realization `realization` of the streamfunction, keeping the
/// individual component fields.
pub fn synthesize_streamfunction(spec: &SynthesisSpec, realization: usize) -> Streamfunction {
    let sp = Spectral::new(spec);
    let mut components = Vec::with_capacity(spec.stream_count());
    let mut total = Vec::with_capacity(spec.stream_count());
    for stream in 0..spec.stream_count() {
        let parts = sp.stream_parts(realization, stream);
        total.push(sp.to_real(sp.stream_total(&parts)));
        components.push(parts.into_iter().map(|p| sp.to_real(p)).collect());
    }
    Streamfunction { components, total }
}

/// Velocity of one realization, computed without leaving Fourier space
/// between filtering and the curl.
pub fn synthesize_velocity(spec: &SynthesisSpec, realization: usize) -> VectorField {
    let sp = Spectral::new(spec);
    let psi_hat: Vec<Vec<Complex64>> = (0..spec.stream_count())
        .map(|s| sp.stream_total(&sp.stream_parts(realization, s)))
        .collect();
    let components = spectral_curl(&spec.grid, &psi_hat)
        .into_iter()
        .map(|c| sp.to_real(c).values)
        .collect();
    VectorField {
        grid: spec.grid.clone(),
        components,
    }
}

/// All `ensemble_count` realizations, in order.
pub fn synthesize_ensemble(spec: &SynthesisSpec) -> Vec<VectorField> {
    (0..spec.ensemble_count)
        .into_par_iter()
        .map(|r| synthesize_velocity(spec, r))
        .collect()
}

/// `i k_axis` with the Nyquist mode of even-length axes set to zero.
fn derivative_factors(grid: &FieldGrid, axis: usize) -> Vec<f64> {
    let n = grid.shape()[axis];
    let mut k = grid.wavenumbers(axis);
    if n.is_multiple_of(2) {
        k[n / 2] = 0.0;
    }
    k
}

fn derivative(grid: &FieldGrid, data: &[Complex64], axis: usize) -> Vec<Complex64> {
    let k = derivative_factors(grid, axis);
    let stride = grid.stride(axis);
    let n = grid.shape()[axis];
    data.iter()
        .enumerate()
        .map(|(p, v)| {
            let j = (p / stride) % n;
            Complex64::new(0.0, k[j]) * v
        })
        .collect()
}

fn spectral_curl(grid: &FieldGrid, psi_hat: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    match grid.dimension() {
        Dimension::Two => {
            let psi = &psi_hat[0];
            let dx = derivative(grid, psi, 0);
            let dy = derivative(grid, psi, 1);
            vec![dy, dx.into_iter().map(|v| -v).collect()]
        }
        Dimension::Three => {
            let d = |s: usize, axis: usize| derivative(grid, &psi_hat[s], axis);
            let sub = |a: Vec<Complex64>, b: Vec<Complex64>| -> Vec<Complex64> {
                a.into_iter().zip(b).map(|(x, y)| x - y).collect()
            };
            vec![
                sub(d(2, 1), d(1, 2)),
                sub(d(0, 2), d(2, 0)),
                sub(d(1, 0), d(0, 1)),
            ]
        }
    }
}

/// `v = ∇ × ψ` by spectral differentiation. 2D takes one scalar
/// (out-of-plane) streamfunction and returns `(∂ψ/∂y, −∂ψ/∂x)`; 3D takes the
/// three components of a vector streamfunction.
pub fn curl_velocity(psi: &[ScalarField]) -> Result<VectorField> {
    let first = psi.first().ok_or_else(|| invalid("psi", "no streamfunction given"))?;
    let grid = &first.grid;
    let expected = match grid.dimension() {
        Dimension::Two => 1,
        Dimension::Three => 3,
    };
    if psi.len() != expected {
        return Err(invalid(
            "psi",
            format!("{expected} streamfunction component(s) needed, got {}", psi.len()),
        ));
    }
    if psi.iter().any(|p| &p.grid != grid) {
        return Err(Error::GridMismatch("streamfunction components differ in grid".into()));
    }
    let fft = FftNd::new(grid.shape());
    let hats: Vec<Vec<Complex64>> = psi
        .iter()
        .map(|p| {
            let mut d = to_complex(&p.values);
            fft.forward(&mut d);
            d
        })
        .collect();
    let components = spectral_curl(grid, &hats)
        .into_iter()
        .map(|mut c| {
            fft.inverse(&mut c);
            c.into_iter().map(|z| z.re).collect()
        })
        .collect();
    VectorField::new(grid.clone(), components)
}

/// Spectral divergence `∇·v`.
pub fn divergence(v: &VectorField) -> Result<ScalarField> {
    let grid = &v.grid;
    if v.components.len() != grid.shape().len() {
        return Err(invalid("v", "one velocity component per axis is required"));
    }
    let fft = FftNd::new(grid.shape());
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (axis, comp) in v.components.iter().enumerate() {
        let mut d = to_complex(comp);
        fft.forward(&mut d);
        for (a, b) in acc.iter_mut().zip(derivative(grid, &d, axis)) {
            *a += b;
        }
    }
    fft.inverse(&mut acc);
    ScalarField::new(grid.clone(), acc.into_iter().map(|c| c.re).collect())
}

/// `max |∇·v| / (max |v| / h)`, with `h` the finest grid spacing: the
/// divergence relative to the largest velocity gradient the grid can hold.
pub fn divergence_ratio(v: &VectorField) -> Result<f64> {
    let div = divergence(v)?;
    let max_div = div.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let max_v = v.max_magnitude();
    let h = v.grid.spacing().iter().copied().fold(f64::INFINITY, f64::min);
    Ok(if max_v == 0.0 { 0.0 } else { max_div * h / max_v })
}
