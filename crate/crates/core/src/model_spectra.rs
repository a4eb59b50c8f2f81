//! Analytic energy-spectrum families of isotropic turbulence.
//!
//! All public functions take the dimensional angular wavenumber `k` in rad/m.
//! The reduced wavenumbers (`kΛ`, and `kΛ/k_e` for the von Kármán forms) are
//! formed internally.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_non_negative, require_positive, Result};
use crate::quadrature::{integrate_log_panels, Tolerance};
use crate::special::{gamma, GAMMA_1_3, GAMMA_5_6};

/// Exponents below this underflow `exp` to zero.
const EXP_UNDERFLOW: f64 = -745.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    VonKarman,
    Liepmann,
    ModifiedVonKarman,
    Gaussian,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::VonKarman => "von-karman",
            Family::Liepmann => "liepmann",
            Family::ModifiedVonKarman => "modified-von-karman",
            Family::Gaussian => "gaussian",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "von-karman" => Some(Family::VonKarman),
            "liepmann" => Some(Family::Liepmann),
            "modified-von-karman" => Some(Family::ModifiedVonKarman),
            "gaussian" => Some(Family::Gaussian),
            _ => None,
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A target spectrum: family, mean turbulent velocity `u_t` (m/s), integral
/// length scale `lambda` (m), and the Kolmogorov wavenumber `k_d` (rad/m)
/// for the modified von Kármán family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumModel {
    family: Family,
    u_t: f64,
    lambda: f64,
    k_d: Option<f64>,
}

impl SpectrumModel {
    pub fn new(family: Family, u_t: f64, lambda: f64, k_d: Option<f64>) -> Result<Self> {
        require_positive("u_t", u_t)?;
        require_positive("lambda", lambda)?;
        let k_d = match family {
            Family::ModifiedVonKarman => {
                let k_d = k_d.ok_or_else(|| {
                    invalid("k_d", "required for the modified von Kármán family")
                })?;
                require_positive("k_d", k_d)?;
                Some(k_d)
            }
            _ => None,
        };
        Ok(Self {
            family,
            u_t,
            lambda,
            k_d,
        })
    }

    pub fn von_karman(u_t: f64, lambda: f64) -> Result<Self> {
        Self::new(Family::VonKarman, u_t, lambda, None)
    }

    pub fn liepmann(u_t: f64, lambda: f64) -> Result<Self> {
        Self::new(Family::Liepmann, u_t, lambda, None)
    }

    pub fn modified_von_karman(u_t: f64, lambda: f64, k_d: f64) -> Result<Self> {
        Self::new(Family::ModifiedVonKarman, u_t, lambda, Some(k_d))
    }

    pub fn gaussian(u_t: f64, lambda: f64) -> Result<Self> {
        Self::new(Family::Gaussian, u_t, lambda, None)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn u_t(&self) -> f64 {
        self.u_t
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Kolmogorov wavenumber; `Some` only for the modified von Kármán family.
    pub fn k_d(&self) -> Option<f64> {
        self.k_d
    }

    pub fn with_u_t(self, u_t: f64) -> Result<Self> {
        Self::new(self.family, u_t, self.lambda, self.k_d)
    }
}

/// Turbulence intensity and mean flow speed, as an alternative way of
/// specifying `u_t = T_u · u_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurbulenceIntensitySpec {
    pub t_u: f64,
    pub u_0: f64,
}

impl TurbulenceIntensitySpec {
    pub fn new(t_u: f64, u_0: f64) -> Result<Self> {
        require_non_negative("t_u", t_u)?;
        require_positive("u_0", u_0)?;
        Ok(Self { t_u, u_0 })
    }

    pub fn u_t(&self) -> f64 {
        self.t_u * self.u_0
    }

    pub fn u_t_squared(&self) -> f64 {
        let u = self.u_t();
        u * u
    }
}

/// The von Kármán wavenumber constant `k_e = √π Γ(5/6) / Γ(1/3)`.
pub fn karman_wavenumber_constant() -> f64 {
    PI.sqrt() * GAMMA_5_6 / GAMMA_1_3
}

/// Recomputes the frozen gamma constants with the Lanczos approximation and
/// returns the largest relative discrepancy.
pub fn gamma_self_check() -> f64 {
    let pairs = [(5.0 / 6.0, GAMMA_5_6), (1.0 / 3.0, GAMMA_1_3)];
    pairs
        .iter()
        .map(|&(x, frozen)| ((gamma(x) - frozen) / frozen).abs())
        .fold(0.0, f64::max)
}

fn check_wavenumber(k: f64) -> Result<()> {
    if !k.is_finite() {
        return Err(invalid("k", format!("wavenumber must be finite, got {k}")));
    }
    if k < 0.0 {
        return Err(invalid("k", format!("wavenumber must be >= 0, got {k}")));
    }
    Ok(())
}

/// Gaussian energy spectrum `4 u_t² l / π³ (kl)⁴ exp(-(kl)²/π)` for length
/// scale `l`. No input validation; used on hot paths.
pub(crate) fn gaussian_energy_unchecked(u_t: f64, l: f64, k: f64) -> f64 {
    let ks = k * l;
    let ks2 = ks * ks;
    4.0 * u_t * u_t * l / PI.powi(3) * ks2 * ks2 * (-ks2 / PI).exp()
}

fn von_karman_log_energy(u_t: f64, lambda: f64, k: f64) -> f64 {
    let kh = k * lambda / karman_wavenumber_constant();
    (55.0 / (9.0 * PI) * u_t * u_t * lambda).ln() + 4.0 * kh.ln()
        - 17.0 / 6.0 * (kh * kh).ln_1p()
}

/// Energy spectrum `E(k)` in m³/s².
pub fn energy_spectrum(model: &SpectrumModel, k: f64) -> Result<f64> {
    check_wavenumber(k)?;
    Ok(energy_unchecked(model, k))
}

pub(crate) fn energy_unchecked(model: &SpectrumModel, k: f64) -> f64 {
    if k == 0.0 {
        return 0.0;
    }
    let (u_t, lambda) = (model.u_t, model.lambda);
    match model.family {
        Family::VonKarman => von_karman_log_energy(u_t, lambda, k).exp(),
        Family::Liepmann => {
            let ks2 = (k * lambda).powi(2);
            8.0 * u_t * u_t * lambda / PI * ks2 * ks2 / (1.0 + ks2).powi(3)
        }
        Family::ModifiedVonKarman => {
            let k_d = model.k_d.expect("validated at construction");
            let exponent = von_karman_log_energy(u_t, lambda, k) - 2.0 * (k / k_d).powi(2);
            if exponent < EXP_UNDERFLOW {
                0.0
            } else {
                exponent.exp()
            }
        }
        Family::Gaussian => gaussian_energy_unchecked(u_t, lambda, k),
    }
}

/// Normalized spectrum `e(k) = 2 E(k) / (3 u_t²)`, in m.
pub fn normalized_spectrum(model: &SpectrumModel, k: f64) -> Result<f64> {
    Ok(energy_spectrum(model, k)? * 2.0 / (3.0 * model.u_t * model.u_t))
}

/// `∫₀^∞ E(k) dk` by log-spaced adaptive quadrature over `kΛ ∈ [1e-6, 1e4]`
/// with analytic corrections for both ends: the `k⁴` law below and the
/// family's power-law tail above.
pub fn integrated_energy(model: &SpectrumModel, rel_tol: f64) -> Result<f64> {
    let lo = 1e-6 / model.lambda;
    let hi = 1e4 / model.lambda;
    let body = integrate_log_panels(
        |k| energy_unchecked(model, k),
        lo,
        hi,
        4,
        Tolerance::relative(rel_tol * 1e-2),
    )?;
    let head = energy_unchecked(model, lo) * lo / 5.0;
    let tail_exponent = match model.family {
        Family::VonKarman | Family::ModifiedVonKarman => Some(5.0 / 3.0),
        Family::Liepmann => Some(2.0),
        Family::Gaussian => None,
    };
    let tail = tail_exponent.map_or(0.0, |p| energy_unchecked(model, hi) * hi / (p - 1.0));
    Ok(head + body.value + tail)
}
