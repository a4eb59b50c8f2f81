//! Statistical properties of synthesized fields.

use std::f64::consts::PI;

use turbsynth::field_synthesis::{divergence_ratio, synthesize_ensemble, synthesize_velocity, SynthesisSpec};
use turbsynth::spectral_estimation::{estimate_correlation, estimate_one_d_spectrum};
use turbsynth::{discretize, Dimension, FieldGrid, GaussianMixture, GridPolicy, SpectrumModel};

fn desk_spec(ensemble: usize, seed: u64) -> SynthesisSpec {
    let lambda = 0.008;
    let model = SpectrumModel::von_karman(1.0, lambda).unwrap();
    let mix = discretize(
        &model,
        &GridPolicy::Explicit {
            l_0: lambda / 5.0,
            l_max: 4.0 * lambda,
            intervals: 10,
        },
    )
    .unwrap();
    let grid = FieldGrid::uniform(Dimension::Two, 256, 0.001).unwrap();
    SynthesisSpec::for_mixture(mix, grid, 1.2, seed, ensemble).unwrap()
}

#[test]
fn single_component_correlation_halves_at_design_separation() {
    let l = 0.008;
    let r_half = 2.0 * l * (2f64.ln() / PI).sqrt();
    // put r_half on the eighth lag
    let h = r_half / 8.0;
    let grid = FieldGrid::uniform(Dimension::Two, 256, h).unwrap();
    let spec = SynthesisSpec::for_mixture(GaussianMixture::single(1.0, l).unwrap(), grid, 1.2, 21, 20).unwrap();
    let fields = synthesize_ensemble(&spec);
    let corr = estimate_correlation(&fields, 0, 0, 32).unwrap();
    assert_eq!(corr.values[0], 1.0);
    assert!((corr.values[8] - 0.5).abs() <= 0.03 * 0.5, "R(r½) = {}", corr.values[8]);
}

#[test]
fn longitudinal_spectrum_is_isotropic() {
    let fields = synthesize_ensemble(&desk_spec(40, 3));
    let along_x = estimate_one_d_spectrum(&fields, 0, 0).unwrap();
    let along_y = estimate_one_d_spectrum(&fields, 1, 1).unwrap();
    let bins = along_x.density.len() - 1;
    let outside = (1..=bins)
        .filter(|&j| {
            let band = 2.0 * along_x.std_error[j].hypot(along_y.std_error[j]);
            (along_x.density[j] - along_y.density[j]).abs() > band
        })
        .count();
    assert!(outside as f64 <= 0.1 * bins as f64, "{outside} of {bins} bins outside 2 SE");
}

#[test]
fn standard_error_scales_with_ensemble() {
    let fields = synthesize_ensemble(&desk_spec(64, 9));
    let se = |f: &[_]| {
        let e = estimate_one_d_spectrum(f, 0, 0).unwrap();
        e.std_error[1..100].iter().zip(&e.density[1..100]).map(|(s, d)| s / d).sum::<f64>() / 99.0
    };
    let ratio = se(&fields[..32]) / se(&fields);
    assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn realizations_do_not_depend_on_thread_count() {
    let spec = desk_spec(1, 4);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| synthesize_velocity(&spec, 0))
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn three_dimensional_energy_and_solenoidality() {
    let lambda = 0.008;
    let model = SpectrumModel::von_karman(1.0, lambda).unwrap();
    let mix = discretize(
        &model,
        &GridPolicy::Explicit {
            l_0: 0.002,
            l_max: 0.008,
            intervals: 3,
        },
    )
    .unwrap();
    let grid = FieldGrid::uniform(Dimension::Three, 64, 0.001).unwrap();
    let spec = SynthesisSpec::for_mixture(mix, grid, 1.2, 1, 4).unwrap();
    let fields = synthesize_ensemble(&spec);
    let target = 1.5 * spec.mixture.total_weight();
    let realized = fields.iter().map(|f| f.kinetic_energy()).sum::<f64>() / fields.len() as f64;
    assert!((realized / target - 1.0).abs() < 0.1, "{realized} vs {target}");
    for f in &fields {
        assert!(divergence_ratio(f).unwrap() <= 1e-10);
    }
}

#[test]
fn two_dimensional_kinetic_energy_is_two_thirds_of_k_t() {
    let spec = desk_spec(20, 12);
    let fields = synthesize_ensemble(&spec);
    let realized = fields.iter().map(|f| f.kinetic_energy()).sum::<f64>() / fields.len() as f64;
    let target = 2.0 / 3.0 * spec.k_t * spec.mixture.total_weight();
    assert!((realized / target - 1.0).abs() < 0.05, "{realized} vs {target}");
}

#[test]
fn filtered_noise_correlation_halves_at_design_separation() {
    use turbsynth::field_synthesis::{gaussian_filter, white_noise};
    use turbsynth::VectorField;
    let l = 0.008;
    let h = 2.0 * l * (2f64.ln() / PI).sqrt() / 8.0;
    let grid = FieldGrid::uniform(Dimension::Two, 256, h).unwrap();
    let fields: Vec<VectorField> = (0..20)
        .map(|s| {
            let f = gaussian_filter(&white_noise(&grid, 300 + s), l).unwrap();
            VectorField::new(grid.clone(), vec![f.values]).unwrap()
        })
        .collect();
    for axis in 0..2 {
        let corr = estimate_correlation(&fields, 0, axis, 16).unwrap();
        assert!((corr.values[8] - 0.5).abs() <= 0.03 * 0.5, "axis {axis}: {}", corr.values[8]);
    }
}

/// Energy spectrum of a periodic 3D velocity field, one shell per
/// `Δk = 2π/L`: mean modal energy in the shell times `4πk²`, which removes
/// the scatter of lattice-point counts between shells.
fn shell_spectrum(v: &turbsynth::VectorField) -> Vec<f64> {
    use rustfft::num_complex::Complex64;
    use turbsynth::fft::FftNd;
    let grid = &v.grid;
    let n = grid.shape()[0];
    let fft = FftNd::new(grid.shape());
    let dk = 2.0 * PI / grid.domain_length(0);
    let mut shells = vec![0.0; n];
    let mut counts = vec![0usize; n];
    for (ci, c) in v.components.iter().enumerate() {
        let mut data: Vec<Complex64> = c.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fft.forward(&mut data);
        for (p, z) in data.iter().enumerate() {
            let k: f64 = grid
                .unravel(p)
                .iter()
                .enumerate()
                .map(|(axis, &j)| grid.wavenumbers(axis)[j].powi(2))
                .sum::<f64>()
                .sqrt();
            let bin = (k / dk).round() as usize;
            if bin < n {
                shells[bin] += z.norm_sqr();
                if ci == 0 {
                    counts[bin] += 1;
                }
            }
        }
    }
    for (j, (s, c)) in shells.iter_mut().zip(&counts).enumerate() {
        if *c > 0 {
            *s *= (j * j) as f64 / *c as f64;
        }
    }
    shells
}

#[test]
fn realized_gaussian_spectrum_peaks_at_design_wavenumber() {
    let l = 0.004;
    let grid = FieldGrid::uniform(Dimension::Three, 64, 0.001).unwrap();
    let spec = SynthesisSpec::for_mixture(GaussianMixture::single(1.0, l).unwrap(), grid.clone(), 1.2, 2, 3).unwrap();
    let mut total = vec![0.0; 64];
    for v in synthesize_ensemble(&spec) {
        for (t, s) in total.iter_mut().zip(shell_spectrum(&v)) {
            *t += s;
        }
    }
    let dk = 2.0 * PI / grid.domain_length(0);
    let peak = total
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0 as f64
        * dk;
    let expected = (2.0 * PI).sqrt() / l;
    assert!((peak - expected).abs() <= dk, "peak {peak}, expected {expected}");
}

#[test]
fn independent_components_add_in_variance() {
    use turbsynth::field_synthesis::synthesize_streamfunction;
    use turbsynth::gaussian_mixture::{Component, GridMeta};
    let model = SpectrumModel::von_karman(1.0, 0.008).unwrap();
    let comps = [0.006, 0.008]
        .iter()
        .map(|&l| Component {
            length: l,
            density: 0.5 / l,
            width: l,
            weight: 0.5,
        })
        .collect();
    let meta = GridMeta {
        l_0: 0.006,
        l_max: 0.008,
        intervals: 1,
        ratio: None,
    };
    let mix = GaussianMixture::from_components(model, comps, meta).unwrap();
    let grid = FieldGrid::uniform(Dimension::Two, 256, 0.001).unwrap();
    let spec = SynthesisSpec::for_mixture(mix, grid, 1.2, 33, 50).unwrap();
    let ms = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
    let (mut total, mut parts) = (0.0, 0.0);
    for r in 0..spec.ensemble_count {
        let psi = synthesize_streamfunction(&spec, r);
        total += ms(&psi.total[0].values);
        parts += psi.components[0]
            .iter()
            .zip(spec.mixture.components())
            .map(|(f, c)| c.weight * ms(&f.values))
            .sum::<f64>();
    }
    assert!((total / parts - 1.0).abs() < 0.05, "{total} vs {parts}");
}
