//! Run configuration, read from TOML and overridable from the command line.
//!
//! ```toml
//! [model]
//! family = "von-karman"       # liepmann | modified-von-karman | gaussian
//! u_t = 1.0                   # m/s; or give t_u and u_0 instead
//! lambda = 0.008              # m
//! # k_d = 12500.0             # rad/m, modified-von-karman only
//!
//! [mixture]
//! policy = "explicit"         # or "auto"
//! l_0 = 0.0016                # m (explicit)
//! l_max = 0.032               # m (explicit)
//! intervals = 10              # (explicit)
//! # k_min, k_max, per_decade  # (auto)
//! renormalize = false
//! # band = [31.25, 625.0]     # rad/m, reconstruction report band (default 1/l_M..1/l_0)
//!
//! [synthesis]
//! dimension = 2
//! n = 256
//! spacing = 0.001             # m
//! rho_0 = 1.2                 # kg/m^3
//! seed = 0
//! ensemble = 100
//! workers = 0                 # 0: one per CPU
//!
//! [estimate]
//! # u_0 = 60.0                # m/s, adds a frequency-domain table
//! # input = "out"             # directory with field snapshots
//!
//! [output]
//! dir = "out"
//! ```
//!
//! Every key is optional; missing ones take the desk-scale defaults above.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{Dimension, FieldGrid};
use crate::gaussian_mixture::{GridPolicy, COMPONENTS_PER_DECADE};
use crate::model_spectra::{Family, SpectrumModel, TurbulenceIntensitySpec};

pub const DEFAULT_U_T: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub family: Family,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_u: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_0: Option<f64>,
    pub lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_d: Option<f64>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            family: Family::VonKarman,
            u_t: None,
            t_u: None,
            u_0: None,
            lambda: 0.008,
            k_d: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Explicit,
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MixtureConfig {
    pub policy: PolicyKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intervals: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<f64>,
    pub per_decade: usize,
    pub renormalize: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band: Option<[f64; 2]>,
}

impl Default for MixtureConfig {
    fn default() -> Self {
        Self {
            policy: PolicyKind::Explicit,
            l_0: None,
            l_max: None,
            intervals: None,
            k_min: None,
            k_max: None,
            per_decade: COMPONENTS_PER_DECADE,
            renormalize: false,
            band: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthesisConfig {
    pub dimension: usize,
    pub n: usize,
    pub spacing: f64,
    pub rho_0: f64,
    pub seed: u64,
    pub ensemble: usize,
    pub workers: usize,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            dimension: 2,
            n: 256,
            spacing: 0.001,
            rho_0: 1.2,
            seed: 0,
            ensemble: 100,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimateConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub mixture: MixtureConfig,
    pub synthesis: SynthesisConfig,
    pub estimate: EstimateConfig,
    pub output: OutputConfig,
    /// Run record appended to manifests; ignored when read back.
    #[serde(skip_serializing)]
    pub manifest: Option<toml::Value>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Format {
            what: "configuration",
            reason: e.to_string(),
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Format {
            what: "configuration",
            reason: format!("{}: {e}", path.display()),
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }

    /// Checks every parameter by building the objects the commands need.
    pub fn validate(&self) -> Result<()> {
        let model = self.spectrum_model()?;
        self.grid_policy(&model)?;
        self.field_grid()?;
        if self.synthesis.ensemble == 0 {
            return Err(invalid("synthesis.ensemble", "must be at least 1"));
        }
        if !(self.synthesis.rho_0 > 0.0 && self.synthesis.rho_0.is_finite()) {
            return Err(invalid("synthesis.rho_0", "must be positive"));
        }
        if let Some([a, b]) = self.mixture.band {
            if !(a > 0.0 && b > a) {
                return Err(invalid("mixture.band", "needs 0 < k_min < k_max"));
            }
        }
        if let Some(u_0) = self.estimate.u_0 {
            if u_0 <= 0.0 || u_0.is_nan() {
                return Err(invalid("estimate.u_0", "must be positive"));
            }
        }
        Ok(())
    }

    /// `u_t` given directly or as `T_u u_0`; 1 m/s when neither is set.
    pub fn u_t(&self) -> Result<f64> {
        let m = &self.model;
        match (m.u_t, m.t_u, m.u_0) {
            (Some(u), None, None) => Ok(u),
            (None, Some(t), Some(u0)) => Ok(TurbulenceIntensitySpec::new(t, u0)?.u_t()),
            (None, None, None) => Ok(DEFAULT_U_T),
            _ => Err(invalid("model.u_t", "give either u_t or the pair t_u, u_0, not both")),
        }
    }

    pub fn spectrum_model(&self) -> Result<SpectrumModel> {
        if self.model.family != Family::ModifiedVonKarman && self.model.k_d.is_some() {
            return Err(invalid("model.k_d", "only the modified-von-karman family takes k_d"));
        }
        SpectrumModel::new(self.model.family, self.u_t()?, self.model.lambda, self.model.k_d)
    }

    /// Explicit defaults are the `[Λ/5, 4Λ]`, `M = 10` grid; auto defaults
    /// span the wavenumbers the synthesis grid resolves.
    pub fn grid_policy(&self, model: &SpectrumModel) -> Result<GridPolicy> {
        let m = &self.mixture;
        let lambda = model.lambda();
        Ok(match m.policy {
            PolicyKind::Explicit => {
                if m.k_min.is_some() || m.k_max.is_some() {
                    return Err(invalid("mixture.k_min", "k_min/k_max belong to the auto policy"));
                }
                GridPolicy::Explicit {
                    l_0: m.l_0.unwrap_or(lambda / 5.0),
                    l_max: m.l_max.unwrap_or(4.0 * lambda),
                    intervals: m.intervals.unwrap_or(10),
                }
            }
            PolicyKind::Auto => {
                if m.l_0.is_some() || m.l_max.is_some() || m.intervals.is_some() {
                    return Err(invalid(
                        "mixture.l_0",
                        "l_0/l_max/intervals belong to the explicit policy",
                    ));
                }
                let grid = self.field_grid()?;
                let big_l = grid.domain_length(0);
                let h = self.synthesis.spacing;
                GridPolicy::Auto {
                    k_min: m.k_min.unwrap_or(2.0 * std::f64::consts::PI / big_l),
                    k_max: m.k_max.unwrap_or(std::f64::consts::PI / h),
                    per_decade: m.per_decade,
                }
            }
        })
    }

    pub fn dimension(&self) -> Result<Dimension> {
        Dimension::from_usize(self.synthesis.dimension).map_err(|_| {
            invalid(
                "synthesis.dimension",
                format!("must be 2 or 3, got {}", self.synthesis.dimension),
            )
        })
    }

    pub fn field_grid(&self) -> Result<FieldGrid> {
        FieldGrid::uniform(self.dimension()?, self.synthesis.n, self.synthesis.spacing)
    }
}
