//! The five subcommands: config loading, computation, artifact emission.

use crate::error::CliError;
use crate::schema::*;
use cmtio::circuit;
use cmtio::fit::{self, CutTrace, FitProblem};
use cmtio::scattering;
use cmtio::tuning;
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub struct Ctx {
    pub out_dir: PathBuf,
    pub seed_override: Option<u64>,
    pub verbose: u8,
    config_bytes: Vec<u8>,
}

impl Ctx {
    pub fn new(config_path: &Path, out_dir: &Path, seed_override: Option<u64>, verbose: u8) -> Result<Self, CliError> {
        let config_bytes = fs::read(config_path)
            .map_err(|e| CliError::Config(format!("reading {}: {e}", config_path.display())))?;
        Ok(Self { out_dir: out_dir.to_path_buf(), seed_override, verbose, config_bytes })
    }

    fn parse<T: DeserializeOwned>(&self) -> Result<T, CliError> {
        serde_json::from_slice(&self.config_bytes)
            .map_err(|e| CliError::Config(format!("config schema error: {e}")))
    }

    fn provenance(&self, config_seed: Option<u64>) -> Provenance {
        let mut hasher = Sha256::new();
        hasher.update(&self.config_bytes);
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for byte in digest {
            let _ = write!(hex, "{byte:02x}");
        }
        Provenance {
            config_sha256: hex,
            seed: self.seed_override.or(config_seed).unwrap_or(0),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    fn write_text(&self, name: &str, content: &str) -> Result<(), CliError> {
        fs::create_dir_all(&self.out_dir)
            .map_err(|e| CliError::Io(format!("creating {}: {e}", self.out_dir.display())))?;
        let path = self.out_dir.join(name);
        fs::write(&path, content).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
        if self.verbose > 0 {
            eprintln!("wrote {}", path.display());
        }
        Ok(())
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Io(format!("serializing {name}: {e}")))?;
        text.push('\n');
        self.write_text(name, &text)
    }
}

pub fn simulate(ctx: &Ctx) -> Result<(), CliError> {
    let config: SimulateConfig = ctx.parse()?;
    let provenance = ctx.provenance(config.seed);
    let params = config.params.to_params();
    let report = cmtio::model::validate(&params);
    if let Some(v) = report.violations.first() {
        return Err(CliError::Config(format!("invalid parameters: {v}")));
    }
    let freqs = config.grid.freqs().map_err(CliError::Config)?;

    let trace = scattering::simulate_trace(&params, &freqs)?;
    let modes = scattering::hybridized_modes(&params)?;

    ctx.write_text("trace.csv", &fit::trace_to_csv(&trace, &provenance.comment_lines()))?;
    ctx.write_json(
        "summary.json",
        &SimulateSummary {
            n_points: freqs.len(),
            f_min_hz: freqs[0],
            f_max_hz: freqs[freqs.len() - 1],
            hybrid_modes: modes
                .iter()
                .map(|m| HybridModeOut { freq_hz: m.omega / TAU, decay_hz: m.decay / TAU })
                .collect(),
            provenance,
        },
    )
}

pub fn sweep(ctx: &Ctx) -> Result<(), CliError> {
    let config: SweepConfig = ctx.parse()?;
    let provenance = ctx.provenance(config.seed);
    let params = config.params.to_params();
    if let Some(v) = cmtio::model::validate(&params).violations.first() {
        return Err(CliError::Config(format!("invalid parameters: {v}")));
    }
    let tuning = config.tuning.to_model().map_err(|e| CliError::Config(e.to_string()))?;
    let currents = config.currents_ma.values().map_err(CliError::Config)?;
    let freqs = config.grid.freqs().map_err(CliError::Config)?;

    let grid = scattering::sweep(&params, &tuning, &currents, &freqs)?;
    let comments = provenance.comment_lines();
    ctx.write_text("sweep.csv", &grid.to_csv(&comments))?;
    ctx.write_text("sweep.pgm", &grid.to_pgm(&comments))?;
    let flat: Vec<f64> = grid.magnitude.iter().flatten().copied().collect();
    ctx.write_json(
        "summary.json",
        &SweepSummary {
            n_currents: currents.len(),
            n_freqs: freqs.len(),
            magnitude_min: flat.iter().cloned().fold(f64::INFINITY, f64::min),
            magnitude_max: flat.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            provenance,
        },
    )
}

/// Human-readable parameter table in the layout of the reference device
/// tables: one row per parameter, multi-cut values comma-separated.
fn fit_table(out: &FitResultOut) -> String {
    let ghz = |hz: f64| format!("{:.6}", hz / 1e9);
    let khz = |hz: f64| format!("{:.3}", hz / 1e3);
    let mhz = |hz: f64| format!("{:.3}", hz / 1e6);
    let join = |values: Vec<String>| values.join(", ");

    let mut table = String::new();
    let mut row = |name: &str, value: String| {
        let _ = writeln!(table, "{name:<16} {value}");
    };
    row("parameter", "value".to_string());
    row("---------", "-----".to_string());
    row("omega_c/2pi", format!("{} GHz", ghz(out.cavity.omega_c_hz)));
    row("kappa_c/2pi", format!("{} kHz", khz(out.cavity.kappa_c_hz)));
    row(
        "omega_a/2pi",
        format!("{} GHz", join(out.per_cut.iter().map(|c| ghz(c.omega_a_hz)).collect())),
    );
    row(
        "kappa_ai/2pi",
        format!("{} kHz", join(out.per_cut.iter().map(|c| khz(c.kappa_ai_hz)).collect())),
    );
    row(
        "omega_m/2pi",
        format!("{} GHz", join(out.mechanical.iter().map(|m| ghz(m.omega_hz)).collect())),
    );
    row(
        "gamma/2pi",
        format!("{} kHz", join(out.mechanical.iter().map(|m| khz(m.linewidth_hz)).collect())),
    );
    row("g_ac/2pi", format!("{} MHz", mhz(out.g_ac_hz)));
    row("g_ab/2pi", format!("{} MHz", join(out.g_ab_hz.iter().map(|&g| mhz(g)).collect())));
    row("c_offset", format!("{:.6}", out.c_offset));
    table
}

pub fn fit_cmd(ctx: &Ctx) -> Result<(), CliError> {
    let config: FitConfig = ctx.parse()?;
    let provenance = ctx.provenance(config.seed.or(config.ga.seed));
    let residual = config.residual_space().map_err(CliError::Config)?;

    let cavity = match (&config.cavity.params, &config.cavity.prefit) {
        (Some(p), None) => p.to_params(),
        (None, Some(prefit)) => {
            let text = fs::read_to_string(&prefit.csv)
                .map_err(|e| CliError::Config(format!("reading {}: {e}", prefit.csv.display())))?;
            let trace = fit::trace_from_csv(&text)?;
            fit::prefit_cavity(&trace, prefit.split().map_err(|e| CliError::Config(e.to_string()))?)?
        }
        _ => {
            return Err(CliError::Config(
                "cavity must have exactly one of 'params' or 'prefit'".into(),
            ))
        }
    };

    let mut cuts = Vec::new();
    for cut in &config.cuts {
        let text = fs::read_to_string(&cut.csv)
            .map_err(|e| CliError::Config(format!("reading {}: {e}", cut.csv.display())))?;
        cuts.push(CutTrace {
            cut_id: cut.id.clone(),
            trace: fit::trace_from_csv(&text)?,
            current_ma: cut.current_ma.map(|c| c.0),
        });
    }

    let mut ga = config.ga.to_settings();
    if let Some(seed) = ctx.seed_override.or(config.seed) {
        ga.seed = seed;
    }
    let problem = FitProblem {
        cuts,
        fixed: cavity,
        shared: config.bounds.to_shared().map_err(|e| CliError::Config(e.to_string()))?,
        per_cut: config.bounds.to_per_cut().map_err(|e| CliError::Config(e.to_string()))?,
        residual,
        ga,
    };
    if ctx.verbose > 0 {
        eprintln!(
            "fitting {} cuts, {} genes, population {} x {} generations",
            problem.cuts.len(),
            problem.gene_bounds().len(),
            problem.ga.population,
            problem.ga.generations
        );
    }
    let result = fit::fit(&problem)?;

    let cut_ids: Vec<String> = config.cuts.iter().map(|c| c.id.clone()).collect();
    let cut_currents: Vec<Option<f64>> = config.cuts.iter().map(|c| c.current_ma.map(|v| v.0)).collect();
    let out = FitResultOut::new(provenance, &result, &cut_ids, &cut_currents);
    ctx.write_json("fit_result.json", &out)?;
    ctx.write_text("fit_table.txt", &fit_table(&out))?;

    if let Some(recon) = &config.reconstruction {
        let currents: Vec<f64> = cut_currents.iter().flatten().copied().collect();
        if currents.len() != result.params_per_cut.len() {
            return Err(CliError::Config(
                "reconstruction needs a current_ma on every cut".into(),
            ));
        }
        let points: Vec<(f64, f64)> = currents
            .iter()
            .zip(&result.params_per_cut)
            .map(|(&i, p)| (i, p.microwave.omega))
            .collect();
        let hint = result.params_per_cut[0].microwave.omega;
        let model = tuning::calibrate(&points, hint)?;
        let grid_currents = recon.currents_ma.values().map_err(CliError::Config)?;
        let grid_freqs = recon.grid.freqs().map_err(CliError::Config)?;
        let bundle = fit::reconstruct_sweep(&result, &model, &grid_currents, &grid_freqs)?;

        let provenance = ctx.provenance(config.seed.or(config.ga.seed));
        ctx.write_text("reconstruction.pgm", &bundle.grid.to_pgm(&provenance.comment_lines()))?;
        ctx.write_json(
            "reconstruction.json",
            &ReconstructionOut {
                currents_ma: bundle.grid.currents.clone(),
                freqs_hz: bundle.grid.freqs.clone(),
                magnitude: bundle.grid.magnitude.clone(),
                mechanical_lines_hz: bundle.mechanical_lines_hz.clone(),
                microwave_line: bundle.microwave_line.clone(),
                provenance,
            },
        )?;
    }
    Ok(())
}

pub fn circuit_cmd(ctx: &Ctx) -> Result<(), CliError> {
    let config: CircuitConfig = ctx.parse()?;
    let provenance = ctx.provenance(config.seed);
    let params = config.params.to_params().map_err(CliError::Config)?;
    params.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let lengths = config.lengths_mm.values().map_err(CliError::Config)?;
    if let Some(bad) = lengths.iter().find(|&&l| !(l > 0.0)) {
        return Err(CliError::Config(format!("lengths must be > 0, got {bad}")));
    }

    let rows = circuit::coupling_and_shift_vs_length(&params, &lengths);
    let mut csv = String::new();
    for line in provenance.comment_lines() {
        let _ = writeln!(csv, "# {line}");
    }
    csv.push_str("length_mm,coupling_hz,shift_hz,status\n");
    let mut n_failed = 0usize;
    for (length, result) in &rows {
        match result {
            Ok(cs) => {
                let _ = writeln!(csv, "{length},{},{},ok", cs.coupling, cs.shift);
            }
            Err(e) => {
                n_failed += 1;
                let _ = writeln!(csv, "{length},,,error: {e}");
            }
        }
        if ctx.verbose > 0 {
            eprintln!("length {length} mm done");
        }
    }
    ctx.write_text("circuit.csv", &csv)?;
    ctx.write_json(
        "summary.json",
        &CircuitSummary {
            bare_microwave_resonance_hz: params.microwave_resonance_hz(),
            mechanical_resonance_hz: params.mechanical_resonance_hz(),
            characteristic_impedance_ohm: params.characteristic_impedance(),
            n_lengths: rows.len(),
            n_failed,
            provenance,
        },
    )
}

pub fn tune(ctx: &Ctx) -> Result<(), CliError> {
    let config: TuneConfig = ctx.parse()?;
    let provenance = ctx.provenance(config.seed);
    if config.points.is_empty() {
        return Err(CliError::Config("tune needs at least one calibration point".into()));
    }
    let points: Vec<(f64, f64)> =
        config.points.iter().map(|p| (p.current_ma.0, TAU * p.freq_hz.0)).collect();
    let hint = config
        .omega_a0_hint_hz
        .map(|h| TAU * h.0)
        .unwrap_or_else(|| points.iter().map(|p| p.1).fold(0.0, f64::max) * 1.001);

    let model = tuning::calibrate(&points, hint)?;
    ctx.write_json("tuning_model.json", &TuningModelOut::new(provenance, &model))?;

    let currents = match &config.currents_out_ma {
        Some(spec) => spec.values().map_err(CliError::Config)?,
        None => {
            let max = points.iter().map(|p| p.0.abs()).fold(0.0, f64::max).max(1.0);
            (0..201).map(|k| -max + 2.0 * max * k as f64 / 200.0).collect()
        }
    };
    let mut csv = String::new();
    for line in ctx.provenance(config.seed).comment_lines() {
        let _ = writeln!(csv, "# {line}");
    }
    csv.push_str("current_ma,freq_hz\n");
    for &i in &currents {
        let _ = writeln!(csv, "{i},{}", tuning::frequency_at_current(&model, i) / TAU);
    }
    ctx.write_text("tuning_curve.csv", &csv)
}
