//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use turbsynth::cli::commands::{max_db_deviation, resolved_band};
use turbsynth::field_synthesis::{
    amplitude_from_variance, component_amplitude, divergence_ratio, source_variance,
    synthesize_streamfunction, synthesize_velocity, SynthesisSpec,
};
use turbsynth::gaussian_mixture::{
    dissipation_cutoff, log_space, reconstruct_spectrum, weight_liepmann,
    weight_modified_von_karman, weight_von_karman,
};
use turbsynth::model_spectra::{karman_wavenumber_constant, normalized_spectrum};
use turbsynth::one_d_spectra::{one_d_from_mixture, one_d_from_model};
use turbsynth::spectral_estimation::{
    estimate_correlation, estimate_one_d_spectrum, integral_length_scale,
};
use turbsynth::{
    discretize, Dimension, FieldGrid, GaussianMixture, GridPolicy, SpectrumModel,
    VectorField, VelocityComponent,
};

const LAMBDA: f64 = 0.008;

const WEIGHT_NORM_TOL: f64 = 1e-6;
const WEIGHT_NORM_TOL_MODIFIED: f64 = 1e-4;
const RECONSTRUCTION_TOL: f64 = 1e-4;
const DESK_MIXTURE_TOL: f64 = 0.03;
const CUTOFF_RATIO_TOL: f64 = 1e-3;
const AMPLITUDE_CHAIN_TOL: f64 = 1e-12;
const VARIANCE_TOL: f64 = 0.05;
const DIVERGENCE_TOL: f64 = 1e-10;
const SPECTRUM_DB_TOL: f64 = 1.0;
const ONE_D_ORACLE_TOL: f64 = 1e-3;
const LENGTH_SCALE_TOL: f64 = 0.10;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn weight_normalization() -> Outcome {
    let upper = 40.0 * LAMBDA;
    let fk = common::over_length(|l| weight_von_karman(LAMBDA, l).unwrap(), 1e-14 * LAMBDA, upper);
    let fl = common::over_length(|l| weight_liepmann(LAMBDA, l).unwrap(), 1e-14 * LAMBDA, upper);
    let k_d = 100.0 / LAMBDA;
    let fm = common::over_length(
        |l| weight_modified_von_karman(LAMBDA, k_d, l).unwrap(),
        dissipation_cutoff(k_d),
        upper,
    );
    // the modified weight integrates to the energy fraction left after the
    // dissipation factor, ∫ e_M dk
    let model = SpectrumModel::modified_von_karman(1.0, LAMBDA, k_d).unwrap();
    let em = common::half_line(|k| normalized_spectrum(&model, k).unwrap(), 1.0 / LAMBDA, 400, 16);
    let (ek, el, emod) = ((fk - 1.0).abs(), (fl - 1.0).abs(), (fm - 1.0).abs());
    outcome(
        ek <= WEIGHT_NORM_TOL && el <= WEIGHT_NORM_TOL && emod <= WEIGHT_NORM_TOL_MODIFIED,
        format!(
            "|∫f_K−1| = {ek:.2e}, |∫f_L−1| = {el:.2e} (≤ {WEIGHT_NORM_TOL:.0e}); \
             |∫f_M−1| = {emod:.3e} (≤ {WEIGHT_NORM_TOL_MODIFIED:.0e}), k_dΛ = 100; \
             ∫f_M = {fm:.6} vs ∫e_M dk = {em:.6}"
        ),
    )
}

fn master_reconstruction() -> Outcome {
    let ke = karman_wavenumber_constant();
    let k_d = 100.0 / LAMBDA;
    // name, model, weight, wavenumber unit, lower end of the weight's support
    type Case = (&'static str, SpectrumModel, Box<dyn Fn(f64) -> f64>, f64, f64);
    let cases: [Case; 3] = [
        (
            "e_K",
            SpectrumModel::von_karman(1.0, LAMBDA).unwrap(),
            Box::new(|l| weight_von_karman(LAMBDA, l).unwrap()),
            ke / LAMBDA,
            1e-14 * LAMBDA,
        ),
        (
            "e_L",
            SpectrumModel::liepmann(1.0, LAMBDA).unwrap(),
            Box::new(|l| weight_liepmann(LAMBDA, l).unwrap()),
            1.0 / LAMBDA,
            1e-14 * LAMBDA,
        ),
        (
            "e_M",
            SpectrumModel::modified_von_karman(1.0, LAMBDA, k_d).unwrap(),
            Box::new(move |l| weight_modified_von_karman(LAMBDA, k_d, l).unwrap()),
            ke / LAMBDA,
            dissipation_cutoff(k_d),
        ),
    ];
    let mut worst = Vec::new();
    for (name, model, weight, k_unit, lo) in &cases {
        let max = log_space(1e-2, 1e2, 30)
            .into_iter()
            .map(|kh| {
                let k = kh * k_unit;
                let rec = common::over_length(
                    |l| weight(l) * common::gaussian_normalized(k, l),
                    *lo,
                    40.0 * LAMBDA,
                );
                (rec / normalized_spectrum(model, k).unwrap() - 1.0).abs()
            })
            .fold(0.0, f64::max);
        worst.push((name, max));
    }
    let passed = worst.iter().all(|(_, e)| *e <= RECONSTRUCTION_TOL);
    let detail = worst
        .iter()
        .map(|(n, e)| format!("{n} {e:.2e}"))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(passed, format!("max relative error {detail} (≤ {RECONSTRUCTION_TOL:.0e})"))
}

fn max_error_on(mix: &GaussianMixture, ks: &[f64]) -> f64 {
    let model = mix.model();
    ks.iter()
        .map(|&k| {
            let target = turbsynth::model_spectra::energy_spectrum(model, k).unwrap();
            (reconstruct_spectrum(mix, k).unwrap() / target - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

fn desk_mixture() -> Outcome {
    let model = SpectrumModel::von_karman(1.0, LAMBDA).unwrap();
    let mix = |m| {
        discretize(
            &model,
            &GridPolicy::Explicit {
                l_0: LAMBDA / 5.0,
                l_max: 4.0 * LAMBDA,
                intervals: m,
            },
        )
        .unwrap()
    };
    let (m10, m5) = (mix(10), mix(5));
    // the two-decade window where M = 10 does best
    let per_decade = 100;
    let ks = log_space(1e-3 / LAMBDA, 1e3 / LAMBDA, 6 * per_decade + 1);
    let width = 2 * per_decade + 1;
    let (start, best) = (0..=ks.len() - width)
        .map(|s| (s, max_error_on(&m10, &ks[s..s + width])))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let window = &ks[start..start + width];
    let e5 = max_error_on(&m5, window);
    outcome(
        best <= DESK_MIXTURE_TOL && e5 > best,
        format!(
            "best two-decade window kΛ ∈ [{:.3}, {:.1}]: M=10 max error {:.3} (≤ {DESK_MIXTURE_TOL}), \
             M=5 {:.3} (> M=10: {})",
            window[0] * LAMBDA,
            window[width - 1] * LAMBDA,
            best,
            e5,
            e5 > best
        ),
    )
}

fn cutoff_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let k_d = 5.0 / LAMBDA;
    let lc = dissipation_cutoff(k_d);
    let nonzero = (0..10_000)
        .filter(|_| {
            let l = rng.gen_range(0.0..1.0) * lc;
            l > 0.0 && weight_modified_von_karman(LAMBDA, k_d, l).unwrap() != 0.0
        })
        .count();
    let ratio = weight_modified_von_karman(LAMBDA, 1e6 / LAMBDA, LAMBDA).unwrap()
        / weight_von_karman(LAMBDA, LAMBDA).unwrap();
    outcome(
        nonzero == 0 && (ratio - 1.0).abs() <= CUTOFF_RATIO_TOL,
        format!(
            "{nonzero} nonzero of 10⁴ probes below √(2π)/k_d; f_M/f_K at l=Λ, k_dΛ=10⁶: {ratio:.6}"
        ),
    )
}

fn amplitude_chain() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let l = 10f64.powf(rng.gen_range(-5.0..0.0));
        let k_t = 10f64.powf(rng.gen_range(-3.0..3.0));
        let rho = 10f64.powf(rng.gen_range(-1.0..2.0));
        for dim in [Dimension::Two, Dimension::Three] {
            let chained = amplitude_from_variance(source_variance(l, k_t, dim), l, rho, dim);
            let direct = component_amplitude(l, k_t, rho, dim.get()).unwrap();
            worst = worst.max((chained / direct - 1.0).abs());
        }
    }
    outcome(
        worst <= AMPLITUDE_CHAIN_TOL,
        format!("max relative deviation {worst:.2e} over 10³ draws, d = 2 and 3"),
    )
}

fn variance_calibration(div: &mut Vec<f64>) -> Outcome {
    let l = LAMBDA;
    let mix = GaussianMixture::single(1.0, l).unwrap();
    let grid = FieldGrid::uniform(Dimension::Two, 256, 0.001).unwrap();
    let spec = SynthesisSpec::for_mixture(mix, grid, 1.2, 6, 100).unwrap();
    let mut sum = 0.0;
    for r in 0..spec.ensemble_count {
        let psi = synthesize_streamfunction(&spec, r);
        let f = &psi.components[0][0].values;
        sum += f.iter().map(|v| v * v).sum::<f64>() / f.len() as f64;
        div.push(divergence_ratio(&turbsynth::field_synthesis::curl_velocity(&psi.total).unwrap()).unwrap());
    }
    let realized = sum / spec.ensemble_count as f64;
    let expected = 4.0 * l * l * spec.k_t / (3.0 * PI);
    let err = (realized / expected - 1.0).abs();
    outcome(
        err <= VARIANCE_TOL,
        format!("Var(ψ) = {realized:.4e}, R̂ = {expected:.4e}, relative error {err:.4} (≤ {VARIANCE_TOL})"),
    )
}

fn ensemble(spec: &SynthesisSpec, div: &mut Vec<f64>) -> Vec<VectorField> {
    (0..spec.ensemble_count)
        .map(|r| {
            let v = synthesize_velocity(spec, r);
            div.push(divergence_ratio(&v).unwrap());
            v
        })
        .collect()
}

fn desk_spectrum(div: &mut Vec<f64>) -> Outcome {
    let model = SpectrumModel::von_karman(1.0, LAMBDA).unwrap();
    let mix = discretize(
        &model,
        &GridPolicy::Explicit {
            l_0: LAMBDA / 5.0,
            l_max: 4.0 * LAMBDA,
            intervals: 10,
        },
    )
    .unwrap();
    let h = 0.001;
    let grid = FieldGrid::uniform(Dimension::Two, 256, h).unwrap();
    let spec = SynthesisSpec::for_mixture(mix, grid, 1.2, 8, 100).unwrap();
    let fields = ensemble(&spec, div);
    let est = estimate_one_d_spectrum(&fields, 0, 0).unwrap();
    let target: Vec<f64> = est
        .k1_axis
        .iter()
        .map(|&k| one_d_from_mixture(&spec.mixture, VelocityComponent::Longitudinal, Dimension::Two, k).unwrap())
        .collect();
    let (lo, hi) = resolved_band(&spec.mixture, h);
    let db = max_db_deviation(&est.k1_axis, &est.density, &target, lo, hi);
    outcome(
        db <= SPECTRUM_DB_TOL,
        format!("max |ΔE₁₁| = {db:.3} dB over k₁ ∈ [{lo:.0}, {hi:.0}] rad/m (≤ {SPECTRUM_DB_TOL} dB)"),
    )
}

fn one_d_oracle() -> Outcome {
    let models = [
        SpectrumModel::von_karman(1.0, LAMBDA).unwrap(),
        SpectrumModel::liepmann(1.0, LAMBDA).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for model in &models {
        for k1l in [0.0, 1.0, 5.0] {
            let k1 = k1l / LAMBDA;
            for (i, comp) in [(1, VelocityComponent::Longitudinal), (2, VelocityComponent::Transverse)] {
                let reduced = one_d_from_model(model, comp, Dimension::Three, k1).unwrap();
                let direct = common::one_d_direct(model, i, k1);
                worst = worst.max((reduced / direct - 1.0).abs());
            }
        }
    }
    outcome(
        worst <= ONE_D_ORACLE_TOL,
        format!("max relative deviation {worst:.2e} (von Kármán, Liepmann; E₁₁, E₂₂; k₁Λ ∈ {{0,1,5}})"),
    )
}

fn length_scale_recovery(div: &mut Vec<f64>) -> Outcome {
    let model = SpectrumModel::liepmann(1.0, LAMBDA).unwrap();
    let mix = discretize(
        &model,
        &GridPolicy::Explicit {
            l_0: LAMBDA / 16.0,
            l_max: 4.0 * LAMBDA,
            intervals: 10,
        },
    )
    .unwrap();
    let grid = FieldGrid::uniform(Dimension::Two, 512, LAMBDA / 16.0).unwrap();
    let spec = SynthesisSpec::for_mixture(mix, grid, 1.2, 10, 100).unwrap();
    let fields = ensemble(&spec, div);
    let corr = estimate_correlation(&fields, 0, 0, 256).unwrap();
    let scale = integral_length_scale(&corr).unwrap();
    let err = (scale / LAMBDA - 1.0).abs();
    outcome(
        err <= LENGTH_SCALE_TOL,
        format!("Λ_est = {:.3} mm vs Λ = 8 mm, relative error {err:.3} (≤ {LENGTH_SCALE_TOL})", scale * 1e3),
    )
}

fn main() -> ExitCode {
    let mut div = Vec::new();
    let mut results: Vec<(&str, Outcome, f64)> = Vec::new();
    let mut run = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        let secs = t.elapsed().as_secs_f64();
        println!(
            "{} {name} [{secs:.1}s]: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((name, o, secs));
    };
    run("C1 weighting normalization", &mut weight_normalization);
    run("C2 master reconstruction", &mut master_reconstruction);
    run("C3 desk-scale mixture", &mut desk_mixture);
    run("C4 cut-off exactness", &mut cutoff_exactness);
    run("C5 amplitude chain", &mut amplitude_chain);
    run("C6 variance calibration", &mut || variance_calibration(&mut div));
    run("C8 desk-scale E11", &mut || desk_spectrum(&mut div));
    run("C9 one-dimensional oracle", &mut one_d_oracle);
    run("C10 integral length scale", &mut || length_scale_recovery(&mut div));
    let worst = div.iter().copied().fold(0.0, f64::max);
    run("C7 solenoidality", &mut || {
        outcome(
            worst <= DIVERGENCE_TOL,
            format!("max |∇·v| h/max|v| = {worst:.2e} over {} fields (≤ {DIVERGENCE_TOL:.0e})", div.len()),
        )
    });
    let failed = results.iter().filter(|r| !r.1.passed).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
