//! Periodogram spectra and two-point correlations of periodic velocity
//! fields.
//!
//! Every grid line along the sampling axis is transformed on its own. Squared
//! magnitudes are averaged over lines and realizations and folded onto
//! `k₁ ≥ 0`, doubling the bins that have a negative-frequency partner, so
//! that `Σ density · Δk₁` is the sample variance of the component. No window
//! is applied: the fields are periodic.

use std::io::Write;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};
use crate::field::{FieldGrid, VectorField};

/// Threshold the normalized correlation must fall below before the end of
/// the lag range for an integral length scale to be defined.
pub const DECAY_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    /// Bin centres `k₁ = jΔk₁`, `j = 0..=n/2` (rad/m).
    pub k1_axis: Vec<f64>,
    /// Estimated `E_ii(k₁)` (m³/s²).
    pub density: Vec<f64>,
    /// Per-bin standard error of `density`.
    pub std_error: Vec<f64>,
    pub ensemble_count: usize,
    pub component: usize,
    pub axis: usize,
    pub grid: FieldGrid,
}

impl SpectrumEstimate {
    pub fn bin_width(&self) -> f64 {
        self.k1_axis.get(1).copied().unwrap_or(0.0)
    }

    /// `Σ density · Δk₁`.
    pub fn total(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.bin_width()
    }

    /// Delimited text table `k1  density  std_error` after a `#` header
    /// recording the grid, ensemble size and the seed range it came from.
    pub fn write_text<W: Write>(&self, mut out: W, seeds: Option<(u64, usize)>) -> Result<()> {
        writeln!(out, "# one-dimensional spectrum estimate")?;
        writeln!(out, "# shape\t{:?}", self.grid.shape())?;
        writeln!(out, "# spacing[m]\t{:?}", self.grid.spacing())?;
        writeln!(out, "# component\t{}", self.component + 1)?;
        writeln!(out, "# axis\t{}", self.axis)?;
        writeln!(out, "# ensemble\t{}", self.ensemble_count)?;
        if let Some((seed, count)) = seeds {
            writeln!(out, "# seed\t{seed}\trealizations 0..{count}")?;
        }
        writeln!(out, "# k1[rad/m]\tE_ii[m^3/s^2]\tstd_error[m^3/s^2]")?;
        for ((k, d), e) in self.k1_axis.iter().zip(&self.density).zip(&self.std_error) {
            writeln!(out, "{k:e}\t{d:e}\t{e:e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Correlation {
    /// Separations `r = jh`, `j = 0..=max_lag` (m).
    pub lags: Vec<f64>,
    /// Normalized correlation, exactly 1 at `r = 0`.
    pub values: Vec<f64>,
}

impl Correlation {
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# r[m]\tR(r)/R(0)")?;
        for (r, v) in self.lags.iter().zip(&self.values) {
            writeln!(out, "{r:e}\t{v:e}")?;
        }
        Ok(())
    }
}

fn check_fields(fields: &[VectorField], component: usize, axis: usize) -> Result<&FieldGrid> {
    let first = fields.first().ok_or_else(|| invalid("fields", "at least one field is required"))?;
    let grid = &first.grid;
    if fields.iter().any(|f| &f.grid != grid) {
        return Err(Error::GridMismatch("ensemble members are on different grids".into()));
    }
    if !grid.periodic() {
        return Err(invalid("fields", "the estimator needs periodic grids"));
    }
    if fields.iter().any(|f| component >= f.components.len()) {
        return Err(invalid("component", format!("no velocity component {component}")));
    }
    if axis >= grid.shape().len() {
        return Err(invalid("axis", format!("grid has no axis {axis}")));
    }
    Ok(grid)
}

/// Calls `visit` with every grid line along `axis`, fluctuations about the
/// field mean, as complex samples.
fn for_each_line(grid: &FieldGrid, values: &[f64], axis: usize, mut visit: impl FnMut(&mut [Complex64])) {
    let n = grid.shape()[axis];
    let stride = grid.stride(axis);
    let block = n * stride;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for outer in (0..values.len()).step_by(block) {
        for inner in 0..stride {
            for (j, v) in line.iter_mut().enumerate() {
                *v = Complex64::new(values[outer + inner + j * stride] - mean, 0.0);
            }
            visit(&mut line);
        }
    }
}

fn fold_weight(j: usize, n: usize) -> f64 {
    if j == 0 || (n.is_multiple_of(2) && j == n / 2) {
        1.0
    } else {
        2.0
    }
}

/// Per-line averaged one-sided density of one field, plus the per-line
/// densities when `keep_lines` is set.
fn field_periodogram(grid: &FieldGrid, values: &[f64], axis: usize, keep_lines: bool) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = grid.shape()[axis];
    let bins = n / 2 + 1;
    let dk = 2.0 * std::f64::consts::PI / grid.domain_length(axis);
    let plan = FftPlanner::new().plan_fft_forward(n);
    let mut sum = vec![0.0; bins];
    let mut lines = Vec::new();
    let mut count = 0usize;
    let norm = 1.0 / (n as f64 * n as f64 * dk);
    for_each_line(grid, values, axis, |line| {
        plan.process(line);
        let d: Vec<f64> = (0..bins).map(|j| fold_weight(j, n) * line[j].norm_sqr() * norm).collect();
        for (s, v) in sum.iter_mut().zip(&d) {
            *s += v;
        }
        if keep_lines {
            lines.push(d);
        }
        count += 1;
    });
    for s in &mut sum {
        *s /= count as f64;
    }
    (sum, lines)
}

fn mean_and_std_error(samples: &[Vec<f64>], bins: usize) -> (Vec<f64>, Vec<f64>) {
    let n = samples.len() as f64;
    let mut mean = vec![0.0; bins];
    for s in samples {
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v / n;
        }
    }
    let se = if samples.len() < 2 {
        vec![f64::NAN; bins]
    } else {
        (0..bins)
            .map(|j| {
                let var = samples.iter().map(|s| (s[j] - mean[j]).powi(2)).sum::<f64>() / (n - 1.0);
                (var / n).sqrt()
            })
            .collect()
    };
    (mean, se)
}

/// Ensemble-averaged one-sided spectrum of velocity component `component`
/// sampled along `axis` (both zero-based).
///
/// The standard error is the spread of the per-realization estimates. With a
/// single realization the grid lines stand in for realizations, which
/// understates the error when lines are correlated.
pub fn estimate_one_d_spectrum(fields: &[VectorField], component: usize, axis: usize) -> Result<SpectrumEstimate> {
    let grid = check_fields(fields, component, axis)?;
    let n = grid.shape()[axis];
    let bins = n / 2 + 1;
    let single = fields.len() == 1;
    let per_field: Vec<(Vec<f64>, Vec<Vec<f64>>)> = fields
        .par_iter()
        .map(|f| field_periodogram(grid, &f.components[component], axis, single))
        .collect();
    let (density, std_error) = if single {
        let (mean, _) = mean_and_std_error(&[per_field[0].0.clone()], bins);
        let (_, se) = mean_and_std_error(&per_field[0].1, bins);
        (mean, se)
    } else {
        let samples: Vec<Vec<f64>> = per_field.into_iter().map(|p| p.0).collect();
        mean_and_std_error(&samples, bins)
    };
    let dk = 2.0 * std::f64::consts::PI / grid.domain_length(axis);
    Ok(SpectrumEstimate {
        k1_axis: (0..bins).map(|j| j as f64 * dk).collect(),
        density,
        std_error,
        ensemble_count: fields.len(),
        component,
        axis,
        grid: grid.clone(),
    })
}

/// Ensemble- and space-averaged two-point correlation of `component` for
/// separations along `axis`, from the circular autocorrelation of each line,
/// normalized to 1 at zero lag.
pub fn estimate_correlation(fields: &[VectorField], component: usize, axis: usize, max_lag: usize) -> Result<Correlation> {
    let grid = check_fields(fields, component, axis)?;
    let n = grid.shape()[axis];
    if max_lag > n / 2 {
        return Err(invalid("max_lag", format!("must not exceed half the line length ({})", n / 2)));
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let per_field: Vec<Vec<f64>> = fields
        .par_iter()
        .map(|f| {
            let mut acc = vec![0.0; max_lag + 1];
            for_each_line(grid, &f.components[component], axis, |line| {
                fwd.process(line);
                for v in line.iter_mut() {
                    *v = Complex64::new(v.norm_sqr(), 0.0);
                }
                inv.process(line);
                for (a, v) in acc.iter_mut().zip(line.iter()) {
                    *a += v.re;
                }
            });
            acc
        })
        .collect();
    let mut acc = vec![0.0; max_lag + 1];
    for f in &per_field {
        for (a, v) in acc.iter_mut().zip(f) {
            *a += v;
        }
    }
    let zero = acc[0];
    if zero <= 0.0 {
        return Err(invalid("fields", "component is identically constant"));
    }
    let h = grid.spacing()[axis];
    Ok(Correlation {
        lags: (0..=max_lag).map(|j| j as f64 * h).collect(),
        values: acc.iter().map(|v| v / zero).collect(),
    })
}

/// `∫₀ R(r)/R(0) dr` by the trapezoidal rule, up to the first zero crossing
/// (located by linear interpolation) or the end of the lag range.
pub fn integral_length_scale(corr: &Correlation) -> Result<f64> {
    let minimum = corr.values.iter().copied().fold(f64::INFINITY, f64::min);
    if corr.values.len() < 2 || minimum >= DECAY_THRESHOLD {
        return Err(Error::NonDecayingCorrelation {
            threshold: DECAY_THRESHOLD,
            minimum,
        });
    }
    let r0 = corr.values[0];
    let mut total = 0.0;
    for j in 1..corr.values.len() {
        let (a, b) = (corr.values[j - 1] / r0, corr.values[j] / r0);
        let dr = corr.lags[j] - corr.lags[j - 1];
        if b <= 0.0 {
            total += 0.5 * a * dr * a / (a - b);
            break;
        }
        total += 0.5 * (a + b) * dr;
    }
    Ok(total)
}
