//! The five subcommands. Each writes its tables into the output directory
//! together with a manifest and returns the paths it wrote.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::cli::config::RunConfig;
use crate::error::{invalid, Error, Result};
use crate::field::{Dimension, VectorField};
use crate::field_synthesis::{
    calibration_energy, component_seed, divergence_ratio, synthesize_velocity, SynthesisSpec,
};
use crate::gaussian_mixture::{
    discretize, log_space, reconstruct_spectrum, reconstruction_error, GaussianMixture,
    WeightingFunction,
};
use crate::model_spectra::{energy_spectrum, normalized_spectrum, Family};
use crate::one_d_spectra::{
    frequency_map, one_d_from_mixture, one_d_from_model, OneDSpectrum, VelocityComponent,
};
use crate::spectral_estimation::{
    estimate_correlation, estimate_one_d_spectrum, integral_length_scale, SpectrumEstimate,
};

/// Rows in the spectrum and weighting tables.
pub const TABLE_ROWS: usize = 401;
/// Samples for the reconstruction-error report.
pub const REPORT_SAMPLES: usize = 200;

/// E₁₁ agreement required by `validate` over the resolved band (dB).
pub const SPECTRUM_TOLERANCE_DB: f64 = 1.0;
/// Relative tolerance of the velocity-variance check.
pub const VARIANCE_TOLERANCE: f64 = 0.05;
/// Largest admissible `max|∇·v| h / max|v|`.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-10;
/// Absolute tolerance of the exponential-correlation check.
pub const CORRELATION_TOLERANCE: f64 = 0.05;
/// Relative tolerance on the recovered integral length scale.
pub const LENGTH_SCALE_TOLERANCE: f64 = 0.10;

pub fn version_string() -> String {
    match option_env!("TURBSYNTH_GIT_DESCRIBE") {
        Some(g) => format!("{} ({g})", env!("CARGO_PKG_VERSION")),
        None => env!("CARGO_PKG_VERSION").to_string(),
    }
}

fn out_dir(cfg: &RunConfig) -> Result<&Path> {
    let dir = cfg.output.dir.as_path();
    fs::create_dir_all(dir)?;
    Ok(dir)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes `header` lines as `#` comments, the column names, then the rows.
fn write_table(path: &Path, header: &[String], columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = create(path)?;
    for line in header {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "# {}", columns.join("\t"))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "{}", cells.join("\t"))?;
    }
    out.flush()?;
    Ok(())
}

fn model_header(cfg: &RunConfig) -> Result<Vec<String>> {
    let m = cfg.spectrum_model()?;
    let mut h = vec![
        format!("family {}", m.family()),
        format!("u_t[m/s] {:e}", m.u_t()),
        format!("lambda[m] {:e}", m.lambda()),
    ];
    if let Some(k_d) = m.k_d() {
        h.push(format!("k_d[rad/m] {k_d:e}"));
    }
    Ok(h)
}

/// Writes `<command>.manifest.toml`: the full configuration, loadable with
/// `--config`, followed by a `[manifest]` record of the run.
fn write_manifest(
    cfg: &RunConfig,
    command: &str,
    files: &[PathBuf],
    extra: toml::Table,
) -> Result<PathBuf> {
    let path = cfg.output.dir.join(format!("{command}.manifest.toml"));
    let mut record = toml::Table::new();
    record.insert("command".into(), command.into());
    record.insert("version".into(), version_string().into());
    let names: Vec<toml::Value> = files
        .iter()
        .map(|f| f.file_name().unwrap_or_default().to_string_lossy().into_owned().into())
        .collect();
    record.insert("files".into(), toml::Value::Array(names));
    record.extend(extra);
    let mut wrapper = toml::Table::new();
    wrapper.insert("manifest".into(), toml::Value::Table(record));
    let mut out = create(&path)?;
    write!(out, "{}", cfg.to_toml())?;
    writeln!(out)?;
    write!(out, "{}", toml::to_string(&wrapper).expect("manifest is serializable"))?;
    out.flush()?;
    Ok(path)
}

pub fn build_mixture(cfg: &RunConfig) -> Result<GaussianMixture> {
    let model = cfg.spectrum_model()?;
    let mix = discretize(&model, &cfg.grid_policy(&model)?)?;
    Ok(if cfg.mixture.renormalize {
        mix.renormalized()
    } else {
        mix
    })
}

pub fn synthesis_spec(cfg: &RunConfig, amplitude_scale: f64) -> Result<SynthesisSpec> {
    let mix = build_mixture(cfg)?;
    let k_t = calibration_energy(mix.model().u_t());
    let mut spec = SynthesisSpec::new(
        mix,
        cfg.field_grid()?,
        k_t,
        cfg.synthesis.rho_0,
        cfg.synthesis.seed,
        cfg.synthesis.ensemble,
    )?;
    spec.amplitude_scale = amplitude_scale;
    Ok(spec)
}

/// `E(k)` and `e(k)` over `kΛ ∈ [10⁻², 10²]`, and `f(l)` over `[0, 4Λ]`.
pub fn cmd_spectra(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let model = cfg.spectrum_model()?;
    let dir = out_dir(cfg)?;
    let header = model_header(cfg)?;
    let lambda = model.lambda();
    let mut files = Vec::new();

    let rows = log_space(1e-2 / lambda, 1e2 / lambda, TABLE_ROWS)
        .into_iter()
        .map(|k| Ok(vec![k, energy_spectrum(&model, k)?, normalized_spectrum(&model, k)?]))
        .collect::<Result<Vec<_>>>()?;
    let path = dir.join("energy_spectrum.tsv");
    write_table(&path, &header, &["k[rad/m]", "E[m^3/s^2]", "e[1]"], &rows)?;
    files.push(path);

    if model.family() != Family::Gaussian {
        let weighting = WeightingFunction::new(model)?;
        let l_max = 4.0 * lambda;
        let step = l_max / (TABLE_ROWS - 1) as f64;
        // the von Kármán weight is singular at l = 0
        let first = usize::from(model.family() == Family::VonKarman);
        let rows = (first..TABLE_ROWS)
            .map(|j| {
                let l = j as f64 * step;
                let f = if l < weighting.support_start() { 0.0 } else { weighting.evaluate(l)? };
                Ok(vec![l, f])
            })
            .collect::<Result<Vec<_>>>()?;
        let path = dir.join("weighting_function.tsv");
        write_table(&path, &header, &["l[m]", "f(l)[1/m]"], &rows)?;
        files.push(path);
    }
    files.push(write_manifest(cfg, "spectra", &files, toml::Table::new())?);
    Ok(files)
}

/// Band over which the mixture report measures the reconstruction error:
/// the configured band, or `1/l_M .. 1/l_0`.
pub fn report_band(cfg: &RunConfig, mix: &GaussianMixture) -> (f64, f64) {
    match cfg.mixture.band {
        Some([a, b]) => (a, b),
        None if mix.len() > 1 => (1.0 / mix.largest_scale(), 1.0 / mix.smallest_scale()),
        None => (0.1 / mix.largest_scale(), 10.0 / mix.largest_scale()),
    }
}

pub struct MixtureOutcome {
    pub files: Vec<PathBuf>,
    pub max_error: f64,
    pub mean_error: f64,
}

/// Mixture table, reconstructed against target spectrum, and the error report.
pub fn cmd_mixture(cfg: &RunConfig) -> Result<MixtureOutcome> {
    cfg.validate()?;
    let mix = build_mixture(cfg)?;
    let dir = out_dir(cfg)?;
    let mut files = Vec::new();

    let path = dir.join("mixture.tsv");
    let mut out = create(&path)?;
    mix.write_table(&mut out)?;
    out.flush()?;
    files.push(path);

    let (k_min, k_max) = report_band(cfg, &mix);
    let rows = log_space(k_min, k_max, REPORT_SAMPLES)
        .into_iter()
        .map(|k| {
            let rec = reconstruct_spectrum(&mix, k)?;
            let target = energy_spectrum(mix.model(), k)?;
            Ok(vec![k, rec, target, rec / target - 1.0])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut header = model_header(cfg)?;
    header.push(format!("components {}", mix.len()));
    header.push(format!("total_weight {:e}", mix.total_weight()));
    let path = dir.join("reconstruction.tsv");
    write_table(
        &path,
        &header,
        &["k[rad/m]", "E_mixture[m^3/s^2]", "E_target[m^3/s^2]", "relative_error[1]"],
        &rows,
    )?;
    files.push(path);

    let err = reconstruction_error(&mix, k_min, k_max, REPORT_SAMPLES)?;
    let path = dir.join("mixture_report.txt");
    let mut out = create(&path)?;
    writeln!(out, "components\t{}", mix.len())?;
    writeln!(out, "total_weight\t{:e}", mix.total_weight())?;
    writeln!(out, "band[rad/m]\t{k_min:e}\t{k_max:e}")?;
    writeln!(out, "max_relative_error\t{:e}", err.max)?;
    writeln!(out, "mean_relative_error\t{:e}", err.mean)?;
    writeln!(out, "worst_k[rad/m]\t{:e}", err.worst_k)?;
    out.flush()?;
    files.push(path);

    files.push(write_manifest(cfg, "mixture", &files, toml::Table::new())?);
    Ok(MixtureOutcome {
        files,
        max_error: err.max,
        mean_error: err.mean,
    })
}

fn snapshot_name(r: usize) -> String {
    format!("field_{r:04}.tspf")
}

/// `ensemble` velocity snapshots and a manifest listing seeds, `Â_m` and `w_m`.
pub fn cmd_synthesize(cfg: &RunConfig, amplitude_scale: f64) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let spec = synthesis_spec(cfg, amplitude_scale)?;
    let dir = out_dir(cfg)?;
    let mut files = Vec::new();
    for r in 0..spec.ensemble_count {
        let v = synthesize_velocity(&spec, r);
        let path = dir.join(snapshot_name(r));
        let mut out = create(&path)?;
        v.write_snapshot(&mut out)?;
        out.flush()?;
        files.push(path);
    }

    let mut extra = toml::Table::new();
    extra.insert("k_t".into(), spec.k_t.into());
    extra.insert(
        "seed_rule".into(),
        "component_seed(seed, realization, stream, component)".into(),
    );
    let mut seeds = Vec::new();
    for r in 0..spec.ensemble_count {
        for s in 0..spec.stream_count() {
            for m in 0..spec.mixture.len() {
                let seed = component_seed(spec.seed, r, s, m);
                seeds.push(toml::Value::String(format!("{seed:016x}")));
            }
        }
    }
    extra.insert("component_seeds".into(), toml::Value::Array(seeds));
    let floats = |v: Vec<f64>| toml::Value::Array(v.into_iter().map(toml::Value::Float).collect());
    extra.insert(
        "lengths".into(),
        floats(spec.mixture.components().iter().map(|c| c.length).collect()),
    );
    extra.insert(
        "weights".into(),
        floats(spec.mixture.components().iter().map(|c| c.weight).collect()),
    );
    extra.insert("amplitudes".into(), floats(spec.amplitudes()));
    files.push(write_manifest(cfg, "synthesize", &files, extra)?);
    Ok(files)
}

/// Snapshots `field_*.tspf` in `dir`, in name order.
pub fn read_snapshots(dir: &Path) -> Result<Vec<VectorField>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().unwrap_or_default().to_string_lossy();
            name.starts_with("field_") && name.ends_with(".tspf")
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(invalid("estimate.input", format!("no field snapshots in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| VectorField::read_snapshot(BufReader::new(File::open(p)?)))
        .collect()
}

fn write_estimate(
    path: &Path,
    est: &SpectrumEstimate,
    target: &[f64],
    header: &[String],
    seed: u64,
) -> Result<()> {
    let mut out = create(path)?;
    for line in header {
        writeln!(out, "# {line}")?;
    }
    let mut body = Vec::new();
    est.write_text(&mut body, Some((seed, est.ensemble_count)))?;
    let text = String::from_utf8(body).expect("estimate text is utf-8");
    let mut lines = text.lines();
    for line in lines.by_ref() {
        if line.starts_with("# k1") {
            writeln!(out, "{line}\tE_mixture[m^3/s^2]")?;
            break;
        }
        writeln!(out, "{line}")?;
    }
    for (line, t) in lines.zip(target) {
        writeln!(out, "{line}\t{t:e}")?;
    }
    out.flush()?;
    Ok(())
}

/// Spectra `E₁₁`, `E₂₂` estimated from snapshots along axis 0, next to the
/// mixture's analytic spectra; frequency tables when `u_0` is set.
pub fn cmd_estimate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let mix = build_mixture(cfg)?;
    let input = cfg.estimate.input.clone().unwrap_or_else(|| cfg.output.dir.clone());
    let fields = read_snapshots(&input)?;
    let dim = fields[0].grid.dimension();
    let dir = out_dir(cfg)?;
    let header = model_header(cfg)?;
    let mut files = Vec::new();
    for (i, comp, name) in [
        (0, VelocityComponent::Longitudinal, "e11"),
        (1, VelocityComponent::Transverse, "e22"),
    ] {
        let est = estimate_one_d_spectrum(&fields, i, 0)?;
        let target = est
            .k1_axis
            .iter()
            .map(|&k| one_d_from_mixture(&mix, comp, dim, k))
            .collect::<Result<Vec<_>>>()?;
        let path = dir.join(format!("estimate_{name}.tsv"));
        write_estimate(&path, &est, &target, &header, cfg.synthesis.seed)?;
        files.push(path);
        if let Some(u_0) = cfg.estimate.u_0 {
            let f_est = frequency_map(
                &OneDSpectrum {
                    k1: est.k1_axis.clone(),
                    density: est.density.clone(),
                },
                u_0,
            )?;
            let f_tgt = frequency_map(
                &OneDSpectrum {
                    k1: est.k1_axis.clone(),
                    density: target,
                },
                u_0,
            )?;
            let rows: Vec<Vec<f64>> = (0..f_est.frequency.len())
                .map(|j| vec![f_est.frequency[j], f_est.psd[j], f_tgt.psd[j]])
                .collect();
            let mut h = header.clone();
            h.push(format!("u_0[m/s] {u_0:e}"));
            let path = dir.join(format!("psd_{name}.tsv"));
            write_table(&path, &h, &["f[Hz]", "PSD[m^2/s^2/Hz]", "PSD_mixture[m^2/s^2/Hz]"], &rows)?;
            files.push(path);
        }
    }
    files.push(write_manifest(cfg, "estimate", &files, toml::Table::new())?);
    Ok(files)
}

/// One line of the validation report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    /// Informational checks are reported but do not decide the outcome.
    pub gating: bool,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.limit
    }

    /// Distance to the limit; negative when failing.
    pub fn margin(&self) -> f64 {
        self.limit - self.value
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().filter(|c| c.gating).all(Check::passed)
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# status\tcheck\tvalue\tlimit\tmargin")?;
        for c in &self.checks {
            let status = match (c.passed(), c.gating) {
                (true, _) => "PASS",
                (false, true) => "FAIL",
                (false, false) => "INFO",
            };
            writeln!(
                out,
                "{status}\t{}\t{:e}\t{:e}\t{:e}",
                c.name,
                c.value,
                c.limit,
                c.margin()
            )?;
        }
        writeln!(out, "# overall\t{}", if self.passed() { "PASS" } else { "FAIL" })?;
        Ok(())
    }
}

/// Largest `|10 log₁₀(est/target)|` over bins with `k_lo ≤ k₁ ≤ k_hi`.
pub fn max_db_deviation(k1: &[f64], est: &[f64], target: &[f64], k_lo: f64, k_hi: f64) -> f64 {
    k1.iter()
        .zip(est.iter().zip(target))
        .filter(|(k, _)| **k >= k_lo && **k <= k_hi)
        .map(|(_, (e, t))| (10.0 * (e / t).log10()).abs())
        .fold(0.0, f64::max)
}

/// Resolved band of the validation: `2π/l_M` to a fifth of the Nyquist
/// wavenumber.
pub fn resolved_band(mix: &GaussianMixture, h: f64) -> (f64, f64) {
    (
        2.0 * std::f64::consts::PI / mix.largest_scale(),
        std::f64::consts::PI / (5.0 * h),
    )
}

/// Runs mixture → synthesis → estimation → comparison in memory.
pub fn run_validation(cfg: &RunConfig, amplitude_scale: f64) -> Result<ValidationReport> {
    cfg.validate()?;
    let spec = synthesis_spec(cfg, amplitude_scale)?;
    let mix = &spec.mixture;
    let model = *mix.model();
    let dim = spec.dimension();
    let fields: Vec<VectorField> =
        (0..spec.ensemble_count).map(|r| synthesize_velocity(&spec, r)).collect();
    let mut checks = Vec::new();

    // each Gaussian component carries u_t² per velocity component
    let expected = model.u_t().powi(2) * mix.total_weight();
    let realized = fields
        .iter()
        .map(|f| f.components[0].iter().map(|v| v * v).sum::<f64>() / f.grid.len() as f64)
        .sum::<f64>()
        / fields.len() as f64;
    checks.push(Check {
        name: "velocity_variance_relative_error".into(),
        value: (realized / expected - 1.0).abs(),
        limit: VARIANCE_TOLERANCE,
        gating: true,
    });

    let div = fields
        .iter()
        .map(divergence_ratio)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "max_divergence_ratio".into(),
        value: div,
        limit: DIVERGENCE_TOLERANCE,
        gating: true,
    });

    let est = estimate_one_d_spectrum(&fields, 0, 0)?;
    let (k_lo, k_hi) = resolved_band(mix, spec.grid.spacing()[0]);
    let target_mix = est
        .k1_axis
        .iter()
        .map(|&k| one_d_from_mixture(mix, VelocityComponent::Longitudinal, dim, k))
        .collect::<Result<Vec<_>>>()?;
    checks.push(Check {
        name: "e11_vs_mixture_db".into(),
        value: max_db_deviation(&est.k1_axis, &est.density, &target_mix, k_lo, k_hi),
        limit: SPECTRUM_TOLERANCE_DB,
        gating: true,
    });
    if model.family() != Family::Gaussian || dim == Dimension::Three {
        let target_model = est
            .k1_axis
            .iter()
            .map(|&k| {
                if k >= k_lo && k <= k_hi {
                    one_d_from_model(&model, VelocityComponent::Longitudinal, dim, k)
                } else {
                    Ok(f64::NAN)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        checks.push(Check {
            name: "e11_vs_model_db".into(),
            value: max_db_deviation(&est.k1_axis, &est.density, &target_model, k_lo, k_hi),
            limit: SPECTRUM_TOLERANCE_DB,
            gating: false,
        });
    }

    if model.family() == Family::Liepmann {
        let lambda = model.lambda();
        let n = spec.grid.shape()[0];
        let corr = estimate_correlation(&fields, 0, 0, n / 2)?;
        let worst = corr
            .lags
            .iter()
            .zip(&corr.values)
            .filter(|(r, _)| **r >= 0.2 * lambda && **r <= 2.0 * lambda)
            .map(|(r, v)| (v - (-r / lambda).exp()).abs())
            .fold(0.0, f64::max);
        checks.push(Check {
            name: "correlation_vs_exponential".into(),
            value: worst,
            limit: CORRELATION_TOLERANCE,
            gating: true,
        });
        let scale = integral_length_scale(&corr)?;
        checks.push(Check {
            name: "integral_length_scale_relative_error".into(),
            value: (scale / lambda - 1.0).abs(),
            limit: LENGTH_SCALE_TOLERANCE,
            gating: true,
        });
    }
    Ok(ValidationReport { checks })
}

pub struct ValidationOutcome {
    pub files: Vec<PathBuf>,
    pub report: ValidationReport,
}

pub fn cmd_validate(cfg: &RunConfig, amplitude_scale: f64) -> Result<ValidationOutcome> {
    let report = run_validation(cfg, amplitude_scale)?;
    let dir = out_dir(cfg)?;
    let path = dir.join("validation_report.tsv");
    let mut out = create(&path)?;
    report.write(&mut out)?;
    out.flush()?;
    let mut files = vec![path];
    let mut extra = toml::Table::new();
    extra.insert("passed".into(), report.passed().into());
    if amplitude_scale != 1.0 {
        extra.insert("amplitude_scale".into(), amplitude_scale.into());
    }
    files.push(write_manifest(cfg, "validate", &files, extra)?);
    Ok(ValidationOutcome { files, report })
}

/// Exit code 1 is reserved for a failed validation; any error that stops a run is 2.
pub fn exit_code_for(_err: &Error) -> i32 {
    2
}
