//! Weighting functions over Gaussian length scales and their discretization
//! into finite Gaussian mixtures.
//!
//! A target normalized spectrum is the continuous superposition
//! `e(k) = ∫ f(l) e_G(k, l) dl` of unit-energy Gaussian spectra. The closed-form
//! weights `f` for the von Kármán, Liepmann and modified von Kármán families
//! are evaluated here, and the integral is replaced by a trapezoidal sum over
//! a geometric grid of length scales.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use crate::error::{invalid, require_positive, Error, Result};
use crate::model_spectra::{
    energy_spectrum, gaussian_energy_unchecked, karman_wavenumber_constant, Family, SpectrumModel,
};
use crate::quadrature::{integrate_to_infinity, Tolerance};
use crate::special::GAMMA_17_6;

/// Default number of mixture components per decade of length scale.
pub const COMPONENTS_PER_DECADE: usize = 5;
/// The auto grid places its largest component at this multiple of `Λ`.
pub const LARGEST_SCALE_FACTOR: f64 = 4.0;

/// `f_K(l)` for the von Kármán spectrum of integral length scale `lambda`.
pub fn weight_von_karman(lambda: f64, l: f64) -> Result<f64> {
    require_positive("lambda", lambda)?;
    require_positive("l", l)?;
    Ok(von_karman_unchecked(lambda, l))
}

fn von_karman_unchecked(lambda: f64, l: f64) -> f64 {
    let ke = karman_wavenumber_constant();
    55.0 / (18.0 * GAMMA_17_6 * PI.sqrt())
        * (ke.powi(5) / (PI * lambda * lambda * l)).cbrt()
        * (-(ke * l / lambda).powi(2) / PI).exp()
}

/// `f_L(l)` for the Liepmann spectrum; a half-Gaussian in `l`.
pub fn weight_liepmann(lambda: f64, l: f64) -> Result<f64> {
    require_positive("lambda", lambda)?;
    if !(l.is_finite() && l >= 0.0) {
        return Err(invalid("l", format!("must be finite and >= 0, got {l}")));
    }
    Ok(liepmann_unchecked(lambda, l))
}

fn liepmann_unchecked(lambda: f64, l: f64) -> f64 {
    2.0 / (PI * lambda) * (-(l * l) / (PI * lambda * lambda)).exp()
}

/// Smallest length scale carrying weight in the modified von Kármán mixture,
/// `√(2π) / k_d`.
pub fn dissipation_cutoff(k_d: f64) -> f64 {
    (2.0 * PI).sqrt() / k_d
}

/// `f_M(l)` for the modified von Kármán spectrum. Exactly zero below
/// `√(2π)/k_d`.
pub fn weight_modified_von_karman(lambda: f64, k_d: f64, l: f64) -> Result<f64> {
    require_positive("lambda", lambda)?;
    require_positive("k_d", k_d)?;
    require_positive("l", l)?;
    Ok(modified_unchecked(lambda, k_d, l))
}

fn modified_unchecked(lambda: f64, k_d: f64, l: f64) -> f64 {
    let scale = l * l / PI;
    let bracket = scale - 2.0 / (k_d * k_d);
    // cancellation band around the cut-off
    if bracket <= 1e-15 * scale {
        return 0.0;
    }
    let ke = karman_wavenumber_constant();
    let log_f = (55.0 * PI / (18.0 * GAMMA_17_6)).ln() + (5.0 * ke.ln() - 2.0 * lambda.ln()) / 3.0
        - 4.0 * l.ln()
        + 11.0 / 6.0 * bracket.ln()
        - (ke / lambda).powi(2) * bracket;
    log_f.exp()
}

/// The weighting function `f(l)` of one of the three mixture families.
#[derive(Debug, Clone, Copy)]
pub struct WeightingFunction {
    model: SpectrumModel,
}

impl WeightingFunction {
    pub fn new(model: SpectrumModel) -> Result<Self> {
        if model.family() == Family::Gaussian {
            return Err(invalid(
                "family",
                "the Gaussian family is a single component, not a weighted mixture",
            ));
        }
        Ok(Self { model })
    }

    pub fn model(&self) -> &SpectrumModel {
        &self.model
    }

    /// Lower end of the support: `√(2π)/k_d` for the modified family, else 0.
    pub fn support_start(&self) -> f64 {
        self.model.k_d().map_or(0.0, dissipation_cutoff)
    }

    pub fn evaluate(&self, l: f64) -> Result<f64> {
        let lambda = self.model.lambda();
        match self.model.family() {
            Family::VonKarman => weight_von_karman(lambda, l),
            Family::Liepmann => weight_liepmann(lambda, l),
            Family::ModifiedVonKarman => {
                weight_modified_von_karman(lambda, self.model.k_d().unwrap(), l)
            }
            Family::Gaussian => unreachable!("rejected at construction"),
        }
    }

    pub(crate) fn evaluate_unchecked(&self, l: f64) -> f64 {
        let lambda = self.model.lambda();
        match self.model.family() {
            Family::VonKarman => von_karman_unchecked(lambda, l),
            Family::Liepmann => liepmann_unchecked(lambda, l),
            Family::ModifiedVonKarman => modified_unchecked(lambda, self.model.k_d().unwrap(), l),
            Family::Gaussian => unreachable!("rejected at construction"),
        }
    }

    /// `∫₀^∞ f(l) dl`. The von Kármán weight has an integrable `l^(-1/3)`
    /// singularity at the origin and is integrated in `t` with `l = t³`.
    pub fn integral(&self, rel_tol: f64) -> Result<f64> {
        let tol = Tolerance::relative(rel_tol);
        let est = match self.model.family() {
            Family::VonKarman => integrate_to_infinity(
                |t| {
                    if t == 0.0 {
                        // f(t³)·3t² ~ t: vanishes at the origin
                        return 0.0;
                    }
                    self.evaluate_unchecked(t * t * t) * 3.0 * t * t
                },
                0.0,
                tol,
            )?,
            _ => integrate_to_infinity(|l| self.evaluate_unchecked(l), self.support_start(), tol)?,
        };
        Ok(est.value)
    }
}

/// Geometric length-scale grid with trapezoidal widths.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthScaleGrid {
    pub nodes: Vec<f64>,
    pub widths: Vec<f64>,
    pub l_0: f64,
    pub l_max: f64,
    pub intervals: usize,
    pub ratio: f64,
}

/// `l_m = l_0 q^m` with `q = (l_M/l_0)^(1/M)` for `m = 0..=M`, and the
/// trapezoidal widths `Δl_m`.
pub fn build_length_scale_grid(l_0: f64, l_max: f64, intervals: usize) -> Result<LengthScaleGrid> {
    require_positive("l_0", l_0)?;
    require_positive("l_M", l_max)?;
    if intervals == 0 {
        return Err(invalid("M", "at least one interval is required"));
    }
    if l_0 >= l_max {
        return Err(invalid("l_0", format!("must be below l_M ({l_0} >= {l_max})")));
    }
    let ratio = (l_max / l_0).powf(1.0 / intervals as f64);
    let mut nodes: Vec<f64> = (0..=intervals).map(|m| l_0 * ratio.powi(m as i32)).collect();
    nodes[intervals] = l_max;
    let mut widths = Vec::with_capacity(nodes.len());
    widths.push(0.5 * (nodes[1] - nodes[0]));
    for m in 1..intervals {
        widths.push(0.5 * (nodes[m + 1] - nodes[m - 1]));
    }
    widths.push(0.5 * (nodes[intervals] - nodes[intervals - 1]));
    Ok(LengthScaleGrid {
        nodes,
        widths,
        l_0,
        l_max,
        intervals,
        ratio,
    })
}

/// How the mixture's length scales are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum GridPolicy {
    /// Geometric grid over `[l_0, l_M]` with `M` intervals.
    Explicit { l_0: f64, l_max: f64, intervals: usize },
    /// Arbitrary `(l, Δl)` nodes, taken as given.
    Nodes(Vec<(f64, f64)>),
    /// Grid derived from the wavenumber band to be resolved.
    Auto {
        k_min: f64,
        k_max: f64,
        per_decade: usize,
    },
}

impl GridPolicy {
    pub fn auto(k_min: f64, k_max: f64) -> Self {
        GridPolicy::Auto {
            k_min,
            k_max,
            per_decade: COMPONENTS_PER_DECADE,
        }
    }
}

/// The auto policy's grid: `l_M = 4Λ`, `l_0 = 2π/(5 k_max)` raised to the
/// dissipation cut-off when there is one, and `per_decade` intervals per decade
/// of `l_M/l_0` (rounded up).
pub fn auto_grid(
    model: &SpectrumModel,
    k_min: f64,
    k_max: f64,
    per_decade: usize,
) -> Result<LengthScaleGrid> {
    require_positive("k_min", k_min)?;
    require_positive("k_max", k_max)?;
    if k_min >= k_max {
        return Err(invalid("k_min", format!("must be below k_max ({k_min} >= {k_max})")));
    }
    if per_decade == 0 {
        return Err(invalid("per_decade", "must be at least 1"));
    }
    let mut l_0 = 2.0 * PI / (5.0 * k_max);
    if let Some(k_d) = model.k_d() {
        l_0 = l_0.max(dissipation_cutoff(k_d));
    }
    let l_max = LARGEST_SCALE_FACTOR * model.lambda();
    if l_0 >= l_max {
        return Err(invalid(
            "k_max",
            format!("band too narrow: smallest scale {l_0:e} m is not below 4Λ = {l_max:e} m"),
        ));
    }
    let decades = (l_max / l_0).log10();
    let intervals = ((per_decade as f64 * decades - 1e-9).ceil() as usize).max(1);
    build_length_scale_grid(l_0, l_max, intervals)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    /// Length scale `l_m` (m).
    pub length: f64,
    /// Weighting function value `f(l_m)` (1/m).
    pub density: f64,
    /// Trapezoidal width `Δl_m` (m).
    pub width: f64,
    /// Energy weight `w_m = f(l_m) Δl_m`.
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMeta {
    pub l_0: f64,
    pub l_max: f64,
    pub intervals: usize,
    pub ratio: Option<f64>,
}

/// A finite set of weighted Gaussian spectra approximating a target.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    components: Vec<Component>,
    model: SpectrumModel,
    grid: GridMeta,
}

impl GaussianMixture {
    /// Builds a mixture from explicit components, checking the ordering and
    /// sign invariants.
    pub fn from_components(
        model: SpectrumModel,
        components: Vec<Component>,
        grid: GridMeta,
    ) -> Result<Self> {
        if components.is_empty() || components.iter().all(|c| c.weight == 0.0) {
            return Err(Error::EmptyMixture);
        }
        for c in &components {
            require_positive("l_m", c.length)?;
            if !(c.weight.is_finite() && c.weight >= 0.0) {
                return Err(invalid("w_m", format!("must be finite and >= 0, got {}", c.weight)));
            }
        }
        if components.windows(2).any(|p| p[1].length <= p[0].length) {
            return Err(invalid("l_m", "length scales must be strictly increasing"));
        }
        Ok(Self {
            components,
            model,
            grid,
        })
    }

    /// One Gaussian of length scale `l` carrying the full energy of a
    /// spectrum with velocity `u_t`. Stored as a box of width `l` and height
    /// `1/l`.
    pub fn single(u_t: f64, l: f64) -> Result<Self> {
        let model = SpectrumModel::gaussian(u_t, l)?;
        Self::from_components(
            model,
            vec![Component {
                length: l,
                density: 1.0 / l,
                width: l,
                weight: 1.0,
            }],
            GridMeta {
                l_0: l,
                l_max: l,
                intervals: 0,
                ratio: None,
            },
        )
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn model(&self) -> &SpectrumModel {
        &self.model
    }

    pub fn grid(&self) -> &GridMeta {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    pub fn largest_scale(&self) -> f64 {
        self.components.last().map_or(0.0, |c| c.length)
    }

    pub fn smallest_scale(&self) -> f64 {
        self.components.first().map_or(0.0, |c| c.length)
    }

    /// Rescales the weights to sum to one.
    pub fn renormalized(&self) -> Self {
        let total = self.total_weight();
        let mut out = self.clone();
        for c in &mut out.components {
            c.weight /= total;
        }
        out
    }

    /// Multiplies every weight by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.components {
            c.weight *= factor;
        }
        out
    }

    /// Writes the mixture as a whitespace-delimited table with `#` metadata
    /// lines and the column header
    /// `m l_m[m] f(l_m)[1/m] dl_m[m] w_m[1]`.
    pub fn write_table<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# turbsynth gaussian mixture v1")?;
        writeln!(out, "# family = {}", self.model.family())?;
        writeln!(out, "# u_t = {:e}", self.model.u_t())?;
        writeln!(out, "# lambda = {:e}", self.model.lambda())?;
        match self.model.k_d() {
            Some(k_d) => writeln!(out, "# k_d = {k_d:e}")?,
            None => writeln!(out, "# k_d = none")?,
        }
        writeln!(out, "# l_0 = {:e}", self.grid.l_0)?;
        writeln!(out, "# l_M = {:e}", self.grid.l_max)?;
        writeln!(out, "# M = {}", self.grid.intervals)?;
        match self.grid.ratio {
            Some(q) => writeln!(out, "# q = {q:e}")?,
            None => writeln!(out, "# q = none")?,
        }
        writeln!(out, "# m\tl_m[m]\tf(l_m)[1/m]\tdl_m[m]\tw_m[1]")?;
        for (m, c) in self.components.iter().enumerate() {
            writeln!(
                out,
                "{m}\t{:e}\t{:e}\t{:e}\t{:e}",
                c.length, c.density, c.width, c.weight
            )?;
        }
        Ok(())
    }

    /// Parses a table written by [`GaussianMixture::write_table`].
    pub fn read_table<R: BufRead>(input: R) -> Result<Self> {
        fn bad(reason: impl Into<String>) -> Error {
            Error::Format {
                what: "mixture table",
                reason: reason.into(),
            }
        }
        fn num(s: &str) -> Result<f64> {
            s.trim().parse().map_err(|_| bad(format!("not a number: `{s}`")))
        }
        fn opt_num(s: &str) -> Result<Option<f64>> {
            if s.trim() == "none" {
                Ok(None)
            } else {
                num(s).map(Some)
            }
        }

        let (mut family, mut u_t, mut lambda, mut k_d) = (None, None, None, None);
        let (mut l_0, mut l_max, mut intervals, mut ratio) = (None, None, None, None);
        let mut components = Vec::new();
        for line in input.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((key, value)) = meta.split_once('=') {
                    let value = value.trim();
                    match key.trim() {
                        "family" => {
                            family = Some(
                                Family::parse(value)
                                    .ok_or_else(|| bad(format!("unknown family `{value}`")))?,
                            )
                        }
                        "u_t" => u_t = Some(num(value)?),
                        "lambda" => lambda = Some(num(value)?),
                        "k_d" => k_d = opt_num(value)?,
                        "l_0" => l_0 = Some(num(value)?),
                        "l_M" => l_max = Some(num(value)?),
                        "M" => {
                            intervals = Some(
                                value.parse::<usize>().map_err(|_| bad("M is not an integer"))?,
                            )
                        }
                        "q" => ratio = opt_num(value)?,
                        _ => {}
                    }
                }
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 5 {
                return Err(bad(format!("expected 5 columns, found {}", cols.len())));
            }
            components.push(Component {
                length: num(cols[1])?,
                density: num(cols[2])?,
                width: num(cols[3])?,
                weight: num(cols[4])?,
            });
        }
        let model = SpectrumModel::new(
            family.ok_or_else(|| bad("missing family"))?,
            u_t.ok_or_else(|| bad("missing u_t"))?,
            lambda.ok_or_else(|| bad("missing lambda"))?,
            k_d,
        )?;
        let grid = GridMeta {
            l_0: l_0.ok_or_else(|| bad("missing l_0"))?,
            l_max: l_max.ok_or_else(|| bad("missing l_M"))?,
            intervals: intervals.ok_or_else(|| bad("missing M"))?,
            ratio,
        };
        Self::from_components(model, components, grid)
    }
}

/// Discretizes the model's weighting function into a finite mixture with
/// `w_m = f(l_m) Δl_m`. Zero-weight components (below the modified family's
/// cut-off) are dropped. The Gaussian family maps to a single unit-weight
/// component at `Λ`.
pub fn discretize(model: &SpectrumModel, policy: &GridPolicy) -> Result<GaussianMixture> {
    if model.family() == Family::Gaussian {
        return GaussianMixture::single(model.u_t(), model.lambda());
    }
    let weighting = WeightingFunction::new(*model)?;
    let (nodes, meta): (Vec<(f64, f64)>, GridMeta) = match policy {
        GridPolicy::Explicit {
            l_0,
            l_max,
            intervals,
        } => grid_nodes(build_length_scale_grid(*l_0, *l_max, *intervals)?),
        GridPolicy::Auto {
            k_min,
            k_max,
            per_decade,
        } => grid_nodes(auto_grid(model, *k_min, *k_max, *per_decade)?),
        GridPolicy::Nodes(nodes) => {
            if nodes.is_empty() {
                return Err(Error::EmptyMixture);
            }
            for &(l, dl) in nodes {
                require_positive("l_m", l)?;
                require_positive("dl_m", dl)?;
            }
            let meta = GridMeta {
                l_0: nodes[0].0,
                l_max: nodes[nodes.len() - 1].0,
                intervals: nodes.len() - 1,
                ratio: None,
            };
            (nodes.clone(), meta)
        }
    };
    let components: Vec<Component> = nodes
        .into_iter()
        .map(|(l, dl)| {
            let density = weighting.evaluate_unchecked(l);
            Component {
                length: l,
                density,
                width: dl,
                weight: density * dl,
            }
        })
        .filter(|c| c.weight > 0.0)
        .collect();
    GaussianMixture::from_components(*model, components, meta)
}

fn grid_nodes(grid: LengthScaleGrid) -> (Vec<(f64, f64)>, GridMeta) {
    let meta = GridMeta {
        l_0: grid.l_0,
        l_max: grid.l_max,
        intervals: grid.intervals,
        ratio: Some(grid.ratio),
    };
    (grid.nodes.into_iter().zip(grid.widths).collect(), meta)
}

/// `Σ_m w_m E_G(k, l_m)`, each Gaussian carrying the model's `u_t`.
pub fn reconstruct_spectrum(mix: &GaussianMixture, k: f64) -> Result<f64> {
    if !(k.is_finite() && k >= 0.0) {
        return Err(invalid("k", format!("wavenumber must be finite and >= 0, got {k}")));
    }
    Ok(reconstruct_unchecked(mix, k))
}

pub(crate) fn reconstruct_unchecked(mix: &GaussianMixture, k: f64) -> f64 {
    let u_t = mix.model.u_t();
    mix.components
        .iter()
        .map(|c| c.weight * gaussian_energy_unchecked(u_t, c.length, k))
        .sum()
}

/// Relative error of the reconstruction against the model spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionError {
    pub max: f64,
    pub mean: f64,
    /// Wavenumber of the largest error.
    pub worst_k: f64,
}

/// Evaluates `|E_rec/E − 1|` at `samples` log-spaced wavenumbers in
/// `[k_min, k_max]`.
pub fn reconstruction_error(
    mix: &GaussianMixture,
    k_min: f64,
    k_max: f64,
    samples: usize,
) -> Result<ReconstructionError> {
    require_positive("k_min", k_min)?;
    require_positive("k_max", k_max)?;
    if samples < 2 || k_max <= k_min {
        return Err(invalid("samples", "need k_min < k_max and at least two samples"));
    }
    let mut worst = ReconstructionError {
        max: 0.0,
        mean: 0.0,
        worst_k: k_min,
    };
    for k in log_space(k_min, k_max, samples) {
        let target = energy_spectrum(mix.model(), k)?;
        let err = (reconstruct_unchecked(mix, k) / target - 1.0).abs();
        worst.mean += err / samples as f64;
        if err > worst.max {
            worst.max = err;
            worst.worst_k = k;
        }
    }
    Ok(worst)
}

/// `n` points spaced geometrically from `a` to `b` inclusive.
pub fn log_space(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let r = (b / a).ln() / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { b } else { a * (r * i as f64).exp() })
        .collect()
}
