//! One-dimensional velocity spectra `E_ii(k₁)` of isotropic turbulence.
//!
//! Spectra are one-sided over `k₁ ≥ 0` and normalized so that
//! `∫₀^∞ E_ii dk₁` is the variance of velocity component `i`.
//!
//! In three dimensions the double integral over `(k₂, k₃)` of the isotropic
//! spectrum tensor reduces, in polar coordinates about the `k₁` axis, to
//!
//! ```text
//! E₁₁(k₁) = ∫_{k₁}^∞ E(k)/k (1 − k₁²/k²) dk
//! E₂₂(k₁) = ½ ∫_{k₁}^∞ E(k)/k (1 + k₁²/k²) dk
//! ```
//!
//! In two dimensions the tensor is `E(k)/(πk) (δ_ij − k_i k_j/k²)` and the line
//! integral over `k₂` gives
//!
//! ```text
//! E₁₁(k₁) = (4/π) ∫₀^∞ E(k) k₂²/k³ dk₂
//! E₂₂(k₁) = (4/π) ∫₀^∞ E(k) k₁²/k³ dk₂,      k = √(k₁² + k₂²)
//! ```
//!
//! where `E` is now the planar energy-spectrum function. A 2D field built
//! from the same Gaussian mixture has the same `E₁₁` as its 3D counterpart;
//! only `E₂₂` and `E(k)` differ. For a single Gaussian of length scale `l`:
//!
//! ```text
//! E₁₁      = 2u²l/π · g              g = exp(−k₁²l²/π)
//! E₂₂ (3D) = u²l/π (1 + 2k₁²l²/π) · g
//! E₂₂ (2D) = 2u²l/π (2k₁²l²/π) · g
//! E   (2D) = 2u²l⁴k³/π² · exp(−k²l²/π)
//! ```

use std::f64::consts::PI;

use crate::error::{invalid, require_positive, Result};
use crate::field::Dimension;
use crate::gaussian_mixture::{reconstruct_unchecked, GaussianMixture};
use crate::model_spectra::{energy_unchecked, SpectrumModel};
use crate::quadrature::{integrate_to_infinity_scaled, Tolerance};

/// Relative tolerance used by the quadrature paths.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VelocityComponent {
    /// `i = 1`, along the separation / wavenumber axis.
    Longitudinal,
    /// `i = 2`.
    Transverse,
}

/// An energy-spectrum function together with the length scale it varies on.
pub trait EnergySpectrum: Sync {
    fn energy(&self, k: f64) -> f64;
    fn length_scale(&self) -> f64;
}

impl EnergySpectrum for SpectrumModel {
    fn energy(&self, k: f64) -> f64 {
        energy_unchecked(self, k)
    }

    fn length_scale(&self) -> f64 {
        self.lambda()
    }
}

impl EnergySpectrum for GaussianMixture {
    fn energy(&self, k: f64) -> f64 {
        reconstruct_unchecked(self, k)
    }

    fn length_scale(&self) -> f64 {
        self.model().lambda()
    }
}

/// The planar energy-spectrum function of a 2D field built from a mixture.
#[derive(Debug, Clone, Copy)]
pub struct PlanarMixture<'a>(pub &'a GaussianMixture);

impl EnergySpectrum for PlanarMixture<'_> {
    fn energy(&self, k: f64) -> f64 {
        let u_t = self.0.model().u_t();
        self.0
            .components()
            .iter()
            .map(|c| c.weight * gaussian_energy_2d(u_t, c.length, k))
            .sum()
    }

    fn length_scale(&self) -> f64 {
        self.0.model().lambda()
    }
}

/// Adapts a closure to [`EnergySpectrum`].
pub struct SpectrumFn<F> {
    pub f: F,
    pub length: f64,
}

impl<F: Fn(f64) -> f64 + Sync> EnergySpectrum for SpectrumFn<F> {
    fn energy(&self, k: f64) -> f64 {
        (self.f)(k)
    }

    fn length_scale(&self) -> f64 {
        self.length
    }
}

/// Planar energy spectrum of one Gaussian component.
pub fn gaussian_energy_2d(u_t: f64, l: f64, k: f64) -> f64 {
    if k == 0.0 {
        return 0.0;
    }
    let kl2 = (k * l).powi(2);
    2.0 * u_t * u_t * kl2 * kl2 / (k * PI * PI) * (-kl2 / PI).exp()
}

/// Closed-form one-dimensional spectrum of a single Gaussian component.
pub fn gaussian_one_d(u_t: f64, l: f64, component: VelocityComponent, dim: Dimension, k1: f64) -> f64 {
    let x = (k1 * l).powi(2) / PI;
    let g = (-x).exp();
    let base = u_t * u_t * l / PI;
    match (component, dim) {
        (VelocityComponent::Longitudinal, _) => 2.0 * base * g,
        (VelocityComponent::Transverse, Dimension::Three) => base * (1.0 + 2.0 * x) * g,
        (VelocityComponent::Transverse, Dimension::Two) => 4.0 * base * x * g,
    }
}

fn check_k1(k1: f64) -> Result<()> {
    if k1.is_finite() && k1 >= 0.0 {
        Ok(())
    } else {
        Err(invalid("k1", format!("must be finite and >= 0, got {k1}")))
    }
}

/// `E_ii(k₁)` from an energy-spectrum function by quadrature. For
/// [`Dimension::Two`] the function must be the planar energy spectrum.
pub fn one_d_from_energy<E: EnergySpectrum + ?Sized>(
    spectrum: &E,
    component: VelocityComponent,
    dim: Dimension,
    k1: f64,
) -> Result<f64> {
    one_d_from_energy_tol(spectrum, component, dim, k1, DEFAULT_REL_TOL)
}

pub fn one_d_from_energy_tol<E: EnergySpectrum + ?Sized>(
    spectrum: &E,
    component: VelocityComponent,
    dim: Dimension,
    k1: f64,
    rel_tol: f64,
) -> Result<f64> {
    check_k1(k1)?;
    let scale = k1.max(1.0 / spectrum.length_scale());
    let tol = Tolerance {
        abs: 1e-300,
        rel: rel_tol,
    };
    let k1s = k1 * k1;
    let est = match (dim, component) {
        (Dimension::Three, VelocityComponent::Longitudinal) => integrate_to_infinity_scaled(
            |k| {
                if k == 0.0 {
                    return 0.0;
                }
                spectrum.energy(k) / k * (1.0 - k1s / (k * k))
            },
            k1,
            scale,
            tol,
        )?,
        (Dimension::Three, VelocityComponent::Transverse) => {
            let half = integrate_to_infinity_scaled(
                |k| {
                    if k == 0.0 {
                        return 0.0;
                    }
                    spectrum.energy(k) / k * (1.0 + k1s / (k * k))
                },
                k1,
                scale,
                tol,
            )?;
            crate::quadrature::Estimate {
                value: 0.5 * half.value,
                error: 0.5 * half.error,
            }
        }
        (Dimension::Two, comp) => {
            if comp == VelocityComponent::Transverse && k1 == 0.0 {
                return Ok(0.0);
            }
            let est = integrate_to_infinity_scaled(
                |k2| {
                    let k = (k1s + k2 * k2).sqrt();
                    if k == 0.0 {
                        return 0.0;
                    }
                    let num = match comp {
                        VelocityComponent::Longitudinal => k2 * k2,
                        VelocityComponent::Transverse => k1s,
                    };
                    spectrum.energy(k) * num / (k * k * k)
                },
                0.0,
                scale,
                tol,
            )?;
            crate::quadrature::Estimate {
                value: 4.0 / PI * est.value,
                error: 4.0 / PI * est.error,
            }
        }
    };
    Ok(est.value.max(0.0))
}

/// `E_ii(k₁)` of a mixture: the weighted sum of closed-form Gaussian spectra.
pub fn one_d_from_mixture(
    mix: &GaussianMixture,
    component: VelocityComponent,
    dim: Dimension,
    k1: f64,
) -> Result<f64> {
    check_k1(k1)?;
    let u_t = mix.model().u_t();
    Ok(mix
        .components()
        .iter()
        .map(|c| c.weight * gaussian_one_d(u_t, c.length, component, dim, k1))
        .sum())
}

/// `E_ii(k₁)` of an analytic (three-dimensional) model. In 2D the
/// longitudinal spectrum is shared with 3D and the transverse one follows
/// from `E₂₂ = −k₁ dE₁₁/dk₁ = 2k₁² ∫_{k₁}^∞ E(k)/k³ dk`.
pub fn one_d_from_model(
    model: &SpectrumModel,
    component: VelocityComponent,
    dim: Dimension,
    k1: f64,
) -> Result<f64> {
    match (dim, component) {
        (Dimension::Three, _) | (Dimension::Two, VelocityComponent::Longitudinal) => {
            one_d_from_energy(model, component, Dimension::Three, k1)
        }
        (Dimension::Two, VelocityComponent::Transverse) => {
            check_k1(k1)?;
            if k1 == 0.0 {
                return Ok(0.0);
            }
            let est = integrate_to_infinity_scaled(
                |k| energy_unchecked(model, k) / (k * k * k),
                k1,
                k1.max(1.0 / model.lambda()),
                Tolerance {
                    abs: 1e-300,
                    rel: DEFAULT_REL_TOL,
                },
            )?;
            Ok(2.0 * k1 * k1 * est.value)
        }
    }
}

/// Where a one-dimensional spectrum comes from.
#[derive(Debug, Clone)]
pub enum OneDSource {
    Model(SpectrumModel),
    Mixture(GaussianMixture),
}

/// A batch evaluation of `E_ii` on a wavenumber axis.
#[derive(Debug, Clone)]
pub struct OneDSpectrumRequest {
    pub source: OneDSource,
    pub component: VelocityComponent,
    pub dimension: Dimension,
    pub k1_axis: Vec<f64>,
}

impl OneDSpectrumRequest {
    pub fn evaluate(&self) -> Result<OneDSpectrum> {
        if self.k1_axis.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
            return Err(invalid("k1_axis", "values must be finite and >= 0"));
        }
        if self.k1_axis.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("k1_axis", "values must be strictly increasing"));
        }
        let density = self
            .k1_axis
            .iter()
            .map(|&k1| match &self.source {
                OneDSource::Model(m) => one_d_from_model(m, self.component, self.dimension, k1),
                OneDSource::Mixture(mix) => {
                    one_d_from_mixture(mix, self.component, self.dimension, k1)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(OneDSpectrum {
            k1: self.k1_axis.clone(),
            density,
        })
    }
}

/// A one-dimensional spectrum sampled on a wavenumber axis (rad/m).
#[derive(Debug, Clone, PartialEq)]
pub struct OneDSpectrum {
    pub k1: Vec<f64>,
    pub density: Vec<f64>,
}

/// A spectrum over frequency (Hz) with density in (m/s)²/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySpectrum {
    pub frequency: Vec<f64>,
    pub psd: Vec<f64>,
}

/// Maps a wavenumber spectrum to frequency under frozen turbulence,
/// `f = u₀ k₁ / 2π`, rescaling the density by `2π/u₀` so that the integrated
/// energy is unchanged.
pub fn frequency_map(spectrum: &OneDSpectrum, u_0: f64) -> Result<FrequencySpectrum> {
    require_positive("u_0", u_0)?;
    Ok(FrequencySpectrum {
        frequency: spectrum.k1.iter().map(|k| u_0 * k / (2.0 * PI)).collect(),
        psd: spectrum.density.iter().map(|e| e * 2.0 * PI / u_0).collect(),
    })
}
