//! Parameter extraction from multi-cut transmission traces.
//!
//! The protocol: a wide scan pins the cavity parameters first
//! ([`prefit_cavity`]); the narrow-band cuts are then fit jointly with a
//! genetic algorithm, sharing every mechanical parameter and the couplings
//! across cuts while the microwave frequency and intrinsic linewidth float
//! per cut. Residuals are taken on linear |S21| by default; a complex
//! residual mode exists behind a flag.

mod ga;

use crate::error::{Error, Result};
use crate::model::{validate, CavityParams, ModeParams, SystemParams};
use crate::scattering::{s21_raw, SpectrumTrace, SweepGrid};
use crate::tuning::{frequency_at_current, TuningModel};
use crate::{c64, Mat};
use faer::prelude::Solve;
use std::f64::consts::TAU;
use std::fmt::Write as _;

/// Mutation / initialization space of one gene.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// Additive Gaussian kicks; used for frequencies.
    Linear,
    /// Multiplicative Gaussian kicks; used for rates, couplings and scale
    /// factors.
    Log,
}

/// Box bounds of one gene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
    pub scale: Scale,
}

impl Bounds {
    pub fn new(lo: f64, hi: f64, scale: Scale) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::Precondition(format!("bounds need lo < hi, got [{lo}, {hi}]")));
        }
        if scale == Scale::Log && !(lo > 0.0) {
            return Err(Error::Precondition(format!("log-scale bounds need lo > 0, got {lo}")));
        }
        Ok(Self { lo, hi, scale })
    }

    pub fn linear(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, Scale::Linear)
    }

    pub fn log(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, Scale::Log)
    }

    fn validate(&self) -> Result<()> {
        Self::new(self.lo, self.hi, self.scale).map(|_| ())
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// One fixed-current transmission trace used in a joint fit.
#[derive(Debug, Clone, PartialEq)]
pub struct CutTrace {
    pub cut_id: String,
    pub trace: SpectrumTrace,
    /// Coil current of the cut (mA); optional metadata, needed only for
    /// sweep reconstruction.
    pub current_ma: Option<f64>,
}

/// Bounds of the parameters shared by every cut: mechanical frequencies,
/// mechanical linewidths, microwave-mechanics couplings, the
/// cavity-microwave coupling and the transmission offset scale.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedBounds {
    pub omega_m: Vec<Bounds>,
    pub gamma: Vec<Bounds>,
    pub g_ab: Vec<Bounds>,
    pub g_ac: Bounds,
    pub c_offset: Bounds,
}

/// Bounds of the per-cut parameters: microwave frequency and intrinsic
/// linewidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerCutBounds {
    pub omega_a: Bounds,
    pub kappa_ai: Bounds,
}

/// Residual space of the cost function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResidualSpace {
    /// Squared residuals of linear |S21| (default).
    #[default]
    Magnitude,
    /// Squared moduli of complex S21 residuals.
    Complex,
}

/// Genetic-algorithm settings. All operator choices beyond these knobs are
/// pinned: tournament selection of size 3, uniform crossover, Gaussian
/// mutation, elitism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaSettings {
    pub population: usize,
    pub generations: usize,
    /// Probability that a child is produced by uniform crossover instead of
    /// cloning its first parent.
    pub crossover_rate: f64,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    /// Relative mutation sigma: scales the gene's bound span (linear) or
    /// log-span (log).
    pub mutation_scale: f64,
    pub elite_count: usize,
    pub seed: u64,
    /// Stop after this many generations without improvement; 0 disables
    /// early stopping.
    pub stall_generations: usize,
}

impl Default for GaSettings {
    fn default() -> Self {
        Self {
            population: 200,
            generations: 500,
            crossover_rate: 0.9,
            mutation_rate: 0.18,
            mutation_scale: 0.04,
            elite_count: 2,
            seed: 1,
            stall_generations: 0,
        }
    }
}

impl GaSettings {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::Precondition("population must be >= 2".into()));
        }
        if self.population < 2 * self.elite_count {
            return Err(Error::Precondition(format!(
                "population {} must be >= 2 * elite_count {}",
                self.population, self.elite_count
            )));
        }
        if self.generations == 0 {
            return Err(Error::Precondition("generations must be >= 1".into()));
        }
        for (name, r) in [("crossover_rate", self.crossover_rate), ("mutation_rate", self.mutation_rate)]
        {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::Precondition(format!("{name} must be in [0, 1], got {r}")));
            }
        }
        if !(self.mutation_scale > 0.0) {
            return Err(Error::Precondition("mutation_scale must be > 0".into()));
        }
        Ok(())
    }
}

/// A joint multi-cut fit: data, fixed cavity, bounds, and GA settings.
#[derive(Debug, Clone, PartialEq)]
pub struct FitProblem {
    pub cuts: Vec<CutTrace>,
    /// Cavity parameters pre-fit from a wide scan; held fixed.
    pub fixed: CavityParams,
    pub shared: SharedBounds,
    /// One entry per cut, same order as `cuts`.
    pub per_cut: Vec<PerCutBounds>,
    pub residual: ResidualSpace,
    pub ga: GaSettings,
}

impl FitProblem {
    /// Number of mechanical modes N declared by the shared bounds.
    pub fn n_mech(&self) -> usize {
        self.shared.omega_m.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.cuts.is_empty() {
            return Err(Error::Precondition("fit needs at least one cut".into()));
        }
        for cut in &self.cuts {
            if cut.trace.is_empty() {
                return Err(Error::Precondition(format!("cut '{}' has an empty trace", cut.cut_id)));
            }
        }
        if self.per_cut.len() != self.cuts.len() {
            return Err(Error::Precondition(format!(
                "{} per-cut bound entries for {} cuts",
                self.per_cut.len(),
                self.cuts.len()
            )));
        }
        let n = self.n_mech();
        if self.shared.gamma.len() != n || self.shared.g_ab.len() != n {
            return Err(Error::Precondition(format!(
                "shared bound lists disagree on N: {} omega_m, {} gamma, {} g_ab",
                n,
                self.shared.gamma.len(),
                self.shared.g_ab.len()
            )));
        }
        for b in self
            .shared
            .omega_m
            .iter()
            .chain(&self.shared.gamma)
            .chain(&self.shared.g_ab)
            .chain([&self.shared.g_ac, &self.shared.c_offset])
            .chain(self.per_cut.iter().flat_map(|p| [&p.omega_a, &p.kappa_ai]))
        {
            b.validate()?;
        }
        if !(self.fixed.omega_c > 0.0)
            || self.fixed.kappa_c1 < 0.0
            || self.fixed.kappa_c2 < 0.0
            || self.fixed.kappa_ci < 0.0
        {
            return Err(Error::Precondition("fixed cavity parameters are invalid".into()));
        }
        self.ga.validate()
    }

    /// Gene bounds in the fixed decode order:
    /// `[omega_m x N, gamma x N, g_ab x N, g_ac, c_offset,
    ///  (omega_a, kappa_ai) per cut]`.
    pub fn gene_bounds(&self) -> Vec<Bounds> {
        let mut bounds = Vec::with_capacity(3 * self.n_mech() + 2 + 2 * self.cuts.len());
        bounds.extend_from_slice(&self.shared.omega_m);
        bounds.extend_from_slice(&self.shared.gamma);
        bounds.extend_from_slice(&self.shared.g_ab);
        bounds.push(self.shared.g_ac);
        bounds.push(self.shared.c_offset);
        for pc in &self.per_cut {
            bounds.push(pc.omega_a);
            bounds.push(pc.kappa_ai);
        }
        bounds
    }

    /// Decode a candidate vector into one SystemParams per cut. Mechanical
    /// and coupling fields are identical across cuts by construction.
    pub fn decode(&self, candidate: &[f64]) -> Vec<SystemParams> {
        let n = self.n_mech();
        assert_eq!(candidate.len(), 3 * n + 2 + 2 * self.cuts.len(), "candidate length");
        let mechanical: Vec<ModeParams> = (0..n)
            .map(|k| ModeParams::new(candidate[k], candidate[n + k]))
            .collect();
        let g_ab: Vec<f64> = candidate[2 * n..3 * n].to_vec();
        let g_ac = candidate[3 * n];
        let c_offset = candidate[3 * n + 1];
        (0..self.cuts.len())
            .map(|k| SystemParams {
                cavity: self.fixed,
                microwave: ModeParams::new(candidate[3 * n + 2 + 2 * k], candidate[3 * n + 3 + 2 * k]),
                mechanical: mechanical.clone(),
                g_ac,
                g_ab: g_ab.clone(),
                c_offset,
            })
            .collect()
    }
}

/// Prepared cost evaluator: caches angular frequencies and data magnitudes
/// so the GA's hot loop is pure arithmetic.
struct Evaluator<'a> {
    problem: &'a FitProblem,
    omegas: Vec<Vec<f64>>,
    data: Vec<&'a [c64]>,
    data_mag: Vec<Vec<f64>>,
}

impl<'a> Evaluator<'a> {
    fn new(problem: &'a FitProblem) -> Self {
        let omegas = problem
            .cuts
            .iter()
            .map(|c| c.trace.freqs.iter().map(|&f| TAU * f).collect())
            .collect();
        let data = problem.cuts.iter().map(|c| c.trace.values.as_slice()).collect();
        let data_mag = problem.cuts.iter().map(|c| c.trace.magnitudes()).collect();
        Self { problem, omegas, data, data_mag }
    }

    fn cost(&self, candidate: &[f64]) -> f64 {
        let params_per_cut = self.problem.decode(candidate);
        let mut total = 0.0;
        for (k, params) in params_per_cut.iter().enumerate() {
            match self.problem.residual {
                ResidualSpace::Magnitude => {
                    for (&omega, &mag) in self.omegas[k].iter().zip(&self.data_mag[k]) {
                        let model = s21_raw(params, omega).norm();
                        let r = model - mag;
                        if !r.is_finite() {
                            return f64::INFINITY;
                        }
                        total += r * r;
                    }
                }
                ResidualSpace::Complex => {
                    for (&omega, &value) in self.omegas[k].iter().zip(self.data[k]) {
                        let d = s21_raw(params, omega) - value;
                        let r = d.norm_sqr();
                        if !r.is_finite() {
                            return f64::INFINITY;
                        }
                        total += r;
                    }
                }
            }
        }
        total
    }
}

/// Sum of squared residuals between the candidate's model and the cut data,
/// in fixed index order (cuts in declaration order, frequencies ascending).
/// Candidates whose model evaluation fails anywhere map to +inf so the GA
/// culls them.
pub fn cost(problem: &FitProblem, candidate: &[f64]) -> f64 {
    Evaluator::new(problem).cost(candidate)
}

/// Result of [`fit`]: the best candidate decoded per cut, the final cost,
/// and the best-cost trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// One SystemParams per cut. Mechanical and coupling fields are
    /// identical across entries; the microwave mode differs.
    pub params_per_cut: Vec<SystemParams>,
    pub cost: f64,
    /// Best population cost per generation, generation 0 first; monotone
    /// non-increasing.
    pub history: Vec<f64>,
    pub seed_used: u64,
}

impl FitResult {
    /// The shared parameter view (taken from the first cut).
    pub fn shared(&self) -> &SystemParams {
        &self.params_per_cut[0]
    }
}

/// Prominent local maxima of a cut's |S21| used as initialization hints for
/// the frequency genes: everything above 15% of the cut's tallest value.
fn data_peak_hints(trace: &SpectrumTrace) -> Vec<f64> {
    let mags = trace.magnitudes();
    let top = mags.iter().cloned().fold(0.0_f64, f64::max);
    crate::scattering::local_maxima(&mags)
        .into_iter()
        .filter(|&i| mags[i] >= 0.15 * top)
        .map(|i| TAU * trace.freqs[i])
        .collect()
}

/// Initialization hints per gene: shared mechanical frequencies get every
/// data peak (from any cut) inside their bounds; each per-cut microwave
/// frequency gets that cut's peaks inside its bounds; rate genes get none.
fn gene_hints(problem: &FitProblem, bounds: &[Bounds]) -> Vec<Vec<f64>> {
    let per_cut_peaks: Vec<Vec<f64>> =
        problem.cuts.iter().map(|c| data_peak_hints(&c.trace)).collect();
    let all_peaks: Vec<f64> = per_cut_peaks.iter().flatten().copied().collect();

    let n = problem.n_mech();
    let mut hints = vec![Vec::new(); bounds.len()];
    for (g, hint_slot) in hints.iter_mut().enumerate() {
        let source: Option<&[f64]> = if g < n {
            Some(&all_peaks)
        } else if g >= 3 * n + 2 && (g - (3 * n + 2)) % 2 == 0 {
            let cut = (g - (3 * n + 2)) / 2;
            Some(&per_cut_peaks[cut])
        } else {
            None
        };
        if let Some(peaks) = source {
            hint_slot.extend(peaks.iter().filter(|&&p| bounds[g].contains(p)));
        }
    }
    hints
}

/// Companion update for coupling mutations: the visible microwave-like peak
/// sits near `omega_a - g_ac^2 / (omega_c - omega_a)`, so a g_ac mutation
/// alone throws every cut's peak off the data and gets culled even when the
/// new g_ac is better. Shifting each omega_a to hold the dressed positions
/// fixed aligns that cost valley with the g_ac axis.
fn pull_repair(problem: &FitProblem, bounds: &[Bounds]) -> impl Fn(&mut [f64], usize, f64) + Sync {
    let n = problem.n_mech();
    let idx_gac = 3 * n;
    let omega_c = problem.fixed.omega_c;
    let n_cuts = problem.cuts.len();
    let omega_a_bounds: Vec<Bounds> =
        (0..n_cuts).map(|k| bounds[3 * n + 2 + 2 * k]).collect();
    move |genome: &mut [f64], gene: usize, old: f64| {
        if gene != idx_gac {
            return;
        }
        let new = genome[idx_gac];
        for (k, b) in omega_a_bounds.iter().enumerate() {
            let slot = 3 * n + 2 + 2 * k;
            let omega_a = genome[slot];
            let delta = omega_c - omega_a;
            if delta.abs() > 0.0 {
                genome[slot] = (omega_a + (new * new - old * old) / delta).clamp(b.lo, b.hi);
            }
        }
    }
}

/// Run the genetic algorithm on a validated problem. Deterministic for
/// identical problem, settings, and seed.
pub fn fit(problem: &FitProblem) -> Result<FitResult> {
    problem.validate()?;
    let evaluator = Evaluator::new(problem);
    let bounds = problem.gene_bounds();
    let hints = gene_hints(problem, &bounds);
    let repair = pull_repair(problem, &bounds);
    let outcome = ga::run(&bounds, &hints, Some(&repair), |v| evaluator.cost(v), &problem.ga)?;
    let params_per_cut = problem.decode(&outcome.best);
    debug_assert!(params_per_cut.iter().all(|p| validate(p).is_valid()));
    Ok(FitResult {
        params_per_cut,
        cost: outcome.cost,
        history: outcome.history,
        seed_used: problem.ga.seed,
    })
}

/// How the total cavity linewidth from a wide-scan fit is split into the
/// two port couplings and intrinsic loss. The transmission data alone does
/// not determine the split, so it is explicit configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortSplit {
    pub port1_fraction: f64,
    pub port2_fraction: f64,
}

impl PortSplit {
    pub fn new(port1_fraction: f64, port2_fraction: f64) -> Result<Self> {
        if !(port1_fraction >= 0.0 && port2_fraction >= 0.0)
            || port1_fraction + port2_fraction > 1.0
        {
            return Err(Error::Precondition(format!(
                "port fractions must be nonnegative with sum <= 1, got {port1_fraction} and {port2_fraction}"
            )));
        }
        Ok(Self { port1_fraction, port2_fraction })
    }

    /// Equal port fractions.
    pub fn symmetric(each: f64) -> Result<Self> {
        Self::new(each, each)
    }
}

/// Fit the isolated cavity peak of a wide scan with a Lorentzian magnitude
/// model `A (kappa/2) / sqrt(delta^2 + kappa^2/4)` and return cavity
/// parameters with the given port split applied to the total linewidth.
pub fn prefit_cavity(trace: &SpectrumTrace, split: PortSplit) -> Result<CavityParams> {
    if trace.len() < 5 {
        return Err(Error::Precondition("cavity pre-fit needs at least 5 points".into()));
    }
    let mags = trace.magnitudes();
    let (i_max, &peak) = mags
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty trace");
    let floor = mags.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(peak > 0.0) || (peak - floor) <= 1e-9 * peak {
        return Err(Error::NoPeak);
    }
    if i_max == 0 || i_max + 1 == trace.len() {
        return Err(Error::PeakNotBracketed);
    }

    // initial width from the half-power points, if the grid reaches them
    let target = peak / std::f64::consts::SQRT_2;
    let left = (0..i_max).rev().find(|&k| mags[k] < target);
    let right = (i_max + 1..trace.len()).find(|&k| mags[k] < target);
    let span = trace.freqs[trace.len() - 1] - trace.freqs[0];
    let kappa0 = TAU
        * match (left, right) {
            (Some(l), Some(r)) => trace.freqs[r] - trace.freqs[l],
            _ => span / 10.0,
        };
    let mut a = peak;
    let mut omega0 = TAU * trace.freqs[i_max];
    let mut kappa = kappa0.max(TAU * span * 1e-6);

    // Gauss-Newton on the magnitude residuals
    let ssr = |a: f64, w0: f64, k: f64| -> f64 {
        trace
            .freqs
            .iter()
            .zip(&mags)
            .map(|(&f, &m)| {
                let d = TAU * f - w0;
                let model = a * (k / 2.0) / (d * d + k * k / 4.0).sqrt();
                (model - m) * (model - m)
            })
            .sum()
    };
    let mut best = ssr(a, omega0, kappa);
    for _ in 0..80 {
        let mut jtj = Mat::<c64>::zeros(3, 3);
        let mut jtr = Mat::<c64>::zeros(3, 1);
        for (&f, &m) in trace.freqs.iter().zip(&mags) {
            let d = TAU * f - omega0;
            let u = d * d + kappa * kappa / 4.0;
            let s = u.sqrt();
            let model = a * (kappa / 2.0) / s;
            let r = model - m;
            let j = [
                kappa / (2.0 * s),
                a * kappa / 2.0 * d / (u * s),
                a / (2.0 * s) * (d * d / u),
            ];
            for p in 0..3 {
                for q in 0..3 {
                    jtj[(p, q)] += c64::new(j[p] * j[q], 0.0);
                }
                jtr[(p, 0)] += c64::new(j[p] * r, 0.0);
            }
        }
        let delta = jtj.partial_piv_lu().solve(&jtr);
        let (da, dw, dk) = (-delta[(0, 0)].re, -delta[(1, 0)].re, -delta[(2, 0)].re);
        if !(da.is_finite() && dw.is_finite() && dk.is_finite()) {
            break;
        }
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let (a_t, w_t, k_t) = (a + step * da, omega0 + step * dw, kappa + step * dk);
            if a_t > 0.0 && k_t > 0.0 && w_t > 0.0 {
                let s = ssr(a_t, w_t, k_t);
                if s < best {
                    let rel_step = (step * dw / omega0).abs().max((step * dk / kappa).abs());
                    a = a_t;
                    omega0 = w_t;
                    kappa = k_t;
                    improved = rel_step > 1e-14;
                    best = s;
                    break;
                }
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }

    let split_sum = split.port1_fraction + split.port2_fraction;
    Ok(CavityParams {
        omega_c: omega0,
        kappa_c1: split.port1_fraction * kappa,
        kappa_c2: split.port2_fraction * kappa,
        kappa_ci: (1.0 - split_sum) * kappa,
    })
}

/// A reconstructed coil sweep plus the overlay polylines of the bare mode
/// frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionBundle {
    pub grid: SweepGrid,
    /// Fitted bare mechanical frequencies (Hz), one horizontal overlay each.
    pub mechanical_lines_hz: Vec<f64>,
    /// Tuned microwave frequency overlay, (current mA, frequency Hz).
    pub microwave_line: Vec<(f64, f64)>,
}

/// Rebuild the full coil sweep from fitted parameters and a tuning model
/// calibrated from the per-cut microwave frequencies.
///
/// Per current, the microwave frequency comes from the tuning model and the
/// microwave linewidth from the cut whose fitted frequency is nearest, so
/// evaluating exactly at a cut current reproduces that cut's spectrum.
pub fn reconstruct_sweep(
    result: &FitResult,
    tuning: &TuningModel,
    currents_ma: &[f64],
    freqs_hz: &[f64],
) -> Result<ReconstructionBundle> {
    if result.params_per_cut.is_empty() {
        return Err(Error::Precondition("fit result has no cuts".into()));
    }
    if currents_ma.is_empty() || freqs_hz.is_empty() {
        return Err(Error::Precondition("reconstruction needs currents and frequencies".into()));
    }
    let mut magnitude = Vec::with_capacity(currents_ma.len());
    let mut microwave_line = Vec::with_capacity(currents_ma.len());
    for &i_ma in currents_ma {
        let omega_a = frequency_at_current(tuning, i_ma);
        let nearest = result
            .params_per_cut
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (a.microwave.omega - omega_a)
                    .abs()
                    .total_cmp(&(b.microwave.omega - omega_a).abs())
            })
            .map(|(k, _)| k)
            .expect("non-empty cuts");
        let mut params = result.params_per_cut[nearest].clone();
        params.microwave.omega = omega_a;
        let row = freqs_hz
            .iter()
            .map(|&f| crate::scattering::s21(&params, TAU * f).map(|v| v.norm()))
            .collect::<Result<Vec<f64>>>()?;
        magnitude.push(row);
        microwave_line.push((i_ma, omega_a / TAU));
    }
    Ok(ReconstructionBundle {
        grid: SweepGrid::new(currents_ma.to_vec(), freqs_hz.to_vec(), magnitude)?,
        mechanical_lines_hz: result.shared().mechanical.iter().map(|m| m.omega / TAU).collect(),
        microwave_line,
    })
}

/// Serialize a trace as `freq_hz,s21_mag_linear,s21_phase_rad` CSV with
/// `#`-prefixed comment lines.
pub fn trace_to_csv(trace: &SpectrumTrace, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    out.push_str("freq_hz,s21_mag_linear,s21_phase_rad\n");
    for (&f, v) in trace.freqs.iter().zip(&trace.values) {
        let _ = writeln!(out, "{f},{},{}", v.norm(), v.arg());
    }
    out
}

/// Parse a trace from CSV with columns `freq_hz,s21_mag_linear` and an
/// optional `s21_phase_rad` third column. Comment lines start with `#`; a
/// non-numeric first row is treated as a header.
pub fn trace_from_csv(text: &str) -> Result<SpectrumTrace> {
    let mut freqs = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 && fields.len() != 3 {
            return Err(Error::Precondition(format!(
                "line {}: expected 2 or 3 CSV columns, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let parsed: Option<Vec<f64>> = fields.iter().map(|f| f.parse().ok()).collect();
        match parsed {
            None if freqs.is_empty() && values.is_empty() => continue, // header row
            None => {
                return Err(Error::Precondition(format!("line {}: non-numeric data", lineno + 1)))
            }
            Some(nums) => {
                let phase = nums.get(2).copied().unwrap_or(0.0);
                freqs.push(nums[0]);
                values.push(c64::from_polar(nums[1], phase));
            }
        }
    }
    if freqs.is_empty() {
        return Err(Error::Precondition("trace CSV contains no data rows".into()));
    }
    SpectrumTrace::new(freqs, values)
}
