//! Isotropic turbulence spectra as superpositions of Gaussian spectra.
//!
//! The crate evaluates the von Kármán, Liepmann and modified von Kármán energy
//! spectra, expresses each as a continuous mixture of Gaussian spectra over
//! length scale, discretizes that mixture, and synthesizes solenoidal velocity
//! fields realizing it by filtering white noise with Gaussian kernels and
//! taking the curl of the resulting streamfunction.
//!
//! Modules, bottom-up:
//!
//! - [`model_spectra`]: analytic energy spectra and their constants.
//! - [`gaussian_mixture`]: weighting functions, length-scale grids, mixtures.
//! - [`one_d_spectra`]: one-dimensional velocity spectra in 2D and 3D.
//! - [`field_synthesis`]: white noise, Gaussian filtering, amplitudes, curl.
//! - [`spectral_estimation`]: periodograms and correlations of fields.
//! - [`cli`]: configuration and the command-line subcommands.

pub mod cli;
pub mod error;
pub mod fft;
pub mod field;
pub mod field_synthesis;
pub mod gaussian_mixture;
pub mod model_spectra;
pub mod one_d_spectra;
pub mod quadrature;
pub mod special;
pub mod spectral_estimation;

pub use error::{Error, Result};
pub use field::{Dimension, FieldGrid, ScalarField, VectorField};
pub use gaussian_mixture::{discretize, GaussianMixture, GridPolicy, WeightingFunction};
pub use model_spectra::{Family, SpectrumModel, TurbulenceIntensitySpec};
pub use one_d_spectra::VelocityComponent;
