//! JSON config schemas for the five subcommands and the JSON output
//! documents. Configs speak Hz / mA / mm with optional SI-suffix strings;
//! conversion to the library's rad/s representation happens here and only
//! here. Unknown keys are rejected everywhere.

use crate::si::{parse_in_unit, parse_si, Unit};
use cmtio::fit::{
    Bounds, FitResult, GaSettings, PerCutBounds, PortSplit, ResidualSpace, SharedBounds,
};
use cmtio::model::{CavityParams, ModeParams, SystemParams};
use cmtio::circuit::{CpPlacement, WirebondModelParams};
use cmtio::tuning::{TuningModel, DEFAULT_COIL_CAL_MT_PER_MA};
use serde::{Deserialize, Deserializer, Serialize};
use std::f64::consts::TAU;
use std::path::PathBuf;

#[derive(Deserialize)]
#[serde(untagged)]
enum Raw {
    Num(f64),
    Text(String),
}

fn si_field<'de, D>(d: D, expected: Unit, to_field: f64) -> Result<f64, D::Error>
where
    D: Deserializer<'de>,
{
    match Raw::deserialize(d)? {
        Raw::Num(v) => Ok(v),
        Raw::Text(s) => parse_in_unit(&s, expected, "value")
            .map(|base| base * to_field)
            .map_err(serde::de::Error::custom),
    }
}

macro_rules! si_wrapper {
    ($(#[$doc:meta])* $name:ident, $unit:expr, $to_field:expr) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct $name(pub f64);

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                si_field(d, $unit, $to_field).map($name)
            }
        }
    };
}

si_wrapper!(
    /// Frequency field in Hz; accepts numbers (Hz) or strings like "2.923GHz".
    Hz, Unit::Hertz, 1.0
);
si_wrapper!(
    /// Current field in mA; accepts numbers (mA) or strings like "150mA".
    MilliAmp, Unit::Ampere, 1e3
);
si_wrapper!(
    /// Length field in mm; accepts numbers (mm) or strings like "500um".
    Millimeter, Unit::Meter, 1e3
);
si_wrapper!(Henry, Unit::Henry, 1.0);
si_wrapper!(Farad, Unit::Farad, 1.0);
si_wrapper!(Ohm, Unit::Ohm, 1.0);

/// Per-millimeter inductance: accepts numbers (H/mm) or strings "1nH" /
/// "1nH/mm", both meaning per millimeter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HenryPerMm(pub f64);

/// Per-millimeter capacitance, same conventions as [`HenryPerMm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaradPerMm(pub f64);

fn per_mm_field<'de, D>(d: D, expected: Unit) -> Result<f64, D::Error>
where
    D: Deserializer<'de>,
{
    match Raw::deserialize(d)? {
        Raw::Num(v) => Ok(v),
        Raw::Text(s) => {
            let parsed = parse_si(&s).map_err(serde::de::Error::custom)?;
            if parsed.unit != expected && parsed.unit != Unit::None {
                return Err(serde::de::Error::custom(format!(
                    "expected {expected} per mm, got {} in '{s}'",
                    parsed.unit
                )));
            }
            Ok(parsed.value)
        }
    }
}

impl<'de> Deserialize<'de> for HenryPerMm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        per_mm_field(d, Unit::Henry).map(HenryPerMm)
    }
}

impl<'de> Deserialize<'de> for FaradPerMm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        per_mm_field(d, Unit::Farad).map(FaradPerMm)
    }
}

// ---------------------------------------------------------------------------
// shared pieces

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub omega_hz: Hz,
    pub linewidth_hz: Hz,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityConfig {
    pub omega_c_hz: Hz,
    pub kappa_c1_hz: Hz,
    pub kappa_c2_hz: Hz,
    pub kappa_ci_hz: Hz,
}

impl CavityConfig {
    pub fn to_params(&self) -> CavityParams {
        CavityParams {
            omega_c: TAU * self.omega_c_hz.0,
            kappa_c1: TAU * self.kappa_c1_hz.0,
            kappa_c2: TAU * self.kappa_c2_hz.0,
            kappa_ci: TAU * self.kappa_ci_hz.0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub cavity: CavityConfig,
    pub microwave: ModeConfig,
    #[serde(default)]
    pub mechanical: Vec<ModeConfig>,
    pub g_ac_hz: Hz,
    #[serde(default)]
    pub g_ab_hz: Vec<Hz>,
    pub c_offset: f64,
}

impl SystemConfig {
    pub fn to_params(&self) -> SystemParams {
        SystemParams {
            cavity: self.cavity.to_params(),
            microwave: ModeParams::new(TAU * self.microwave.omega_hz.0, TAU * self.microwave.linewidth_hz.0),
            mechanical: self
                .mechanical
                .iter()
                .map(|m| ModeParams::new(TAU * m.omega_hz.0, TAU * m.linewidth_hz.0))
                .collect(),
            g_ac: TAU * self.g_ac_hz.0,
            g_ab: self.g_ab_hz.iter().map(|g| TAU * g.0).collect(),
            c_offset: self.c_offset,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub f_min_hz: Hz,
    pub f_max_hz: Hz,
    pub n_points: usize,
}

impl GridConfig {
    pub fn freqs(&self) -> Result<Vec<f64>, String> {
        if self.n_points < 2 {
            return Err(format!("grid needs n_points >= 2, got {}", self.n_points));
        }
        if !(self.f_min_hz.0 < self.f_max_hz.0) {
            return Err(format!(
                "grid needs f_min < f_max, got [{}, {}]",
                self.f_min_hz.0, self.f_max_hz.0
            ));
        }
        let n = self.n_points;
        let (lo, hi) = (self.f_min_hz.0, self.f_max_hz.0);
        Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurrentRange {
    pub min_ma: MilliAmp,
    pub max_ma: MilliAmp,
    pub n: usize,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum CurrentsSpec {
    Range(CurrentRange),
    List(Vec<MilliAmp>),
}

impl CurrentsSpec {
    pub fn values(&self) -> Result<Vec<f64>, String> {
        match self {
            CurrentsSpec::List(v) if v.is_empty() => Err("currents list is empty".into()),
            CurrentsSpec::List(v) => Ok(v.iter().map(|c| c.0).collect()),
            CurrentsSpec::Range(r) => {
                if r.n < 2 {
                    return Err(format!("current range needs n >= 2, got {}", r.n));
                }
                if !(r.min_ma.0 < r.max_ma.0) {
                    return Err("current range needs min < max".into());
                }
                let (lo, hi, n) = (r.min_ma.0, r.max_ma.0, r.n);
                Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningConfig {
    pub omega_a0_hz: Hz,
    pub alpha_k: f64,
    pub i_star_eff_ma: MilliAmp,
    /// Coil calibration in mT/mA; reporting only.
    pub coil_cal_mt_per_ma: Option<f64>,
}

impl TuningConfig {
    pub fn to_model(&self) -> Result<TuningModel, cmtio::Error> {
        TuningModel::new(
            TAU * self.omega_a0_hz.0,
            self.alpha_k,
            self.i_star_eff_ma.0,
            self.coil_cal_mt_per_ma.unwrap_or(DEFAULT_COIL_CAL_MT_PER_MA),
        )
    }
}

// ---------------------------------------------------------------------------
// per-command configs

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub params: SystemConfig,
    pub grid: GridConfig,
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub params: SystemConfig,
    pub tuning: TuningConfig,
    pub currents_ma: CurrentsSpec,
    pub grid: GridConfig,
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeHz {
    pub lo: Hz,
    pub hi: Hz,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangePlain {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechBoundsConfig {
    pub omega_hz: RangeHz,
    pub linewidth_hz: RangeHz,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerCutBoundsConfig {
    pub omega_a_hz: RangeHz,
    pub kappa_ai_hz: RangeHz,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub mechanical: Vec<MechBoundsConfig>,
    pub g_ab_hz: Vec<RangeHz>,
    pub g_ac_hz: RangeHz,
    pub c_offset: RangePlain,
    pub per_cut: Vec<PerCutBoundsConfig>,
}

impl BoundsConfig {
    /// Frequencies get linear bounds; rates, couplings and the offset scale
    /// get log bounds, matching the mutation spaces of the fitter.
    pub fn to_shared(&self) -> Result<SharedBounds, cmtio::Error> {
        let lin = |r: &RangeHz| Bounds::linear(TAU * r.lo.0, TAU * r.hi.0);
        let log = |r: &RangeHz| Bounds::log(TAU * r.lo.0, TAU * r.hi.0);
        Ok(SharedBounds {
            omega_m: self.mechanical.iter().map(|m| lin(&m.omega_hz)).collect::<Result<_, _>>()?,
            gamma: self
                .mechanical
                .iter()
                .map(|m| log(&m.linewidth_hz))
                .collect::<Result<_, _>>()?,
            g_ab: self.g_ab_hz.iter().map(log).collect::<Result<_, _>>()?,
            g_ac: log(&self.g_ac_hz)?,
            c_offset: Bounds::log(self.c_offset.lo, self.c_offset.hi)?,
        })
    }

    pub fn to_per_cut(&self) -> Result<Vec<PerCutBounds>, cmtio::Error> {
        self.per_cut
            .iter()
            .map(|p| {
                Ok(PerCutBounds {
                    omega_a: Bounds::linear(TAU * p.omega_a_hz.lo.0, TAU * p.omega_a_hz.hi.0)?,
                    kappa_ai: Bounds::log(TAU * p.kappa_ai_hz.lo.0, TAU * p.kappa_ai_hz.hi.0)?,
                })
            })
            .collect()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutConfig {
    pub id: String,
    pub csv: PathBuf,
    pub current_ma: Option<MilliAmp>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrefitConfig {
    pub csv: PathBuf,
    pub port1_fraction: f64,
    pub port2_fraction: f64,
}

impl PrefitConfig {
    pub fn split(&self) -> Result<PortSplit, cmtio::Error> {
        PortSplit::new(self.port1_fraction, self.port2_fraction)
    }
}

/// Exactly one of `params` (explicit cavity) or `prefit` (wide-scan CSV).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySourceConfig {
    pub params: Option<CavityConfig>,
    pub prefit: Option<PrefitConfig>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GaConfig {
    pub population: Option<usize>,
    pub generations: Option<usize>,
    pub crossover_rate: Option<f64>,
    pub mutation_rate: Option<f64>,
    pub mutation_scale: Option<f64>,
    pub elite_count: Option<usize>,
    pub seed: Option<u64>,
    pub stall_generations: Option<usize>,
}

impl GaConfig {
    pub fn to_settings(&self) -> GaSettings {
        let d = GaSettings::default();
        GaSettings {
            population: self.population.unwrap_or(d.population),
            generations: self.generations.unwrap_or(d.generations),
            crossover_rate: self.crossover_rate.unwrap_or(d.crossover_rate),
            mutation_rate: self.mutation_rate.unwrap_or(d.mutation_rate),
            mutation_scale: self.mutation_scale.unwrap_or(d.mutation_scale),
            elite_count: self.elite_count.unwrap_or(d.elite_count),
            seed: self.seed.unwrap_or(d.seed),
            stall_generations: self.stall_generations.unwrap_or(d.stall_generations),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructionConfig {
    pub currents_ma: CurrentsSpec,
    pub grid: GridConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub cuts: Vec<CutConfig>,
    pub cavity: CavitySourceConfig,
    pub bounds: BoundsConfig,
    #[serde(default)]
    pub ga: GaConfig,
    /// "magnitude" (default) or "complex".
    pub residual: Option<String>,
    pub reconstruction: Option<ReconstructionConfig>,
    pub seed: Option<u64>,
}

impl FitConfig {
    pub fn residual_space(&self) -> Result<ResidualSpace, String> {
        match self.residual.as_deref() {
            None | Some("magnitude") => Ok(ResidualSpace::Magnitude),
            Some("complex") => Ok(ResidualSpace::Complex),
            Some(other) => Err(format!("residual must be 'magnitude' or 'complex', got '{other}'")),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WirebondConfig {
    pub l_m: Henry,
    pub c_m: Farad,
    pub r_m: Ohm,
    pub c_o: Farad,
    pub c_pm: Farad,
    pub l_mw: Henry,
    pub c_mw: Farad,
    pub r_mw: Ohm,
    pub l_wb_per_mm: HenryPerMm,
    pub c_p: Farad,
    pub c_wb: Farad,
    pub r_wb: Ohm,
    pub c_pwb_per_mm: FaradPerMm,
    pub length_mm: Millimeter,
    /// "mechanics" (default) or "microwave": which side of the bond
    /// inductance carries the shunt C_p.
    pub c_p_side: Option<String>,
}

impl WirebondConfig {
    pub fn to_params(&self) -> Result<WirebondModelParams, String> {
        let c_p_side = match self.c_p_side.as_deref() {
            None | Some("mechanics") => CpPlacement::MechanicsSide,
            Some("microwave") => CpPlacement::MicrowaveSide,
            Some(other) => {
                return Err(format!("c_p_side must be 'mechanics' or 'microwave', got '{other}'"))
            }
        };
        Ok(WirebondModelParams {
            l_m: self.l_m.0,
            c_m: self.c_m.0,
            r_m: self.r_m.0,
            c_o: self.c_o.0,
            c_pm: self.c_pm.0,
            l_mw: self.l_mw.0,
            c_mw: self.c_mw.0,
            r_mw: self.r_mw.0,
            l_wb_per_mm: self.l_wb_per_mm.0,
            c_p: self.c_p.0,
            c_wb: self.c_wb.0,
            r_wb: self.r_wb.0,
            c_pwb_per_mm: self.c_pwb_per_mm.0,
            length: self.length_mm.0,
            c_p_side,
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LengthRange {
    pub min_mm: Millimeter,
    pub max_mm: Millimeter,
    pub n: usize,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum LengthsSpec {
    Range(LengthRange),
    List(Vec<Millimeter>),
}

impl LengthsSpec {
    pub fn values(&self) -> Result<Vec<f64>, String> {
        match self {
            LengthsSpec::List(v) if v.is_empty() => Err("lengths list is empty".into()),
            LengthsSpec::List(v) => Ok(v.iter().map(|c| c.0).collect()),
            LengthsSpec::Range(r) => {
                if r.n < 2 || !(r.min_mm.0 < r.max_mm.0) {
                    return Err("length range needs n >= 2 and min < max".into());
                }
                let (lo, hi, n) = (r.min_mm.0, r.max_mm.0, r.n);
                Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    pub params: WirebondConfig,
    pub lengths_mm: LengthsSpec,
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TunePointConfig {
    pub current_ma: MilliAmp,
    pub freq_hz: Hz,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneConfig {
    pub points: Vec<TunePointConfig>,
    pub omega_a0_hint_hz: Option<Hz>,
    pub currents_out_ma: Option<CurrentsSpec>,
    pub seed: Option<u64>,
}

// ---------------------------------------------------------------------------
// output documents

#[derive(Debug, Serialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub seed: u64,
    pub version: String,
}

impl Provenance {
    pub fn comment_lines(&self) -> Vec<String> {
        vec![
            format!("config_sha256: {}", self.config_sha256),
            format!("seed: {}", self.seed),
            format!("version: {}", self.version),
        ]
    }
}

#[derive(Debug, Serialize)]
pub struct HybridModeOut {
    pub freq_hz: f64,
    pub decay_hz: f64,
}

#[derive(Debug, Serialize)]
pub struct SimulateSummary {
    pub provenance: Provenance,
    pub n_points: usize,
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub hybrid_modes: Vec<HybridModeOut>,
}

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub provenance: Provenance,
    pub n_currents: usize,
    pub n_freqs: usize,
    pub magnitude_min: f64,
    pub magnitude_max: f64,
}

#[derive(Debug, Serialize)]
pub struct ModeOut {
    pub omega_hz: f64,
    pub linewidth_hz: f64,
}

#[derive(Debug, Serialize)]
pub struct CavityOut {
    pub omega_c_hz: f64,
    pub kappa_c1_hz: f64,
    pub kappa_c2_hz: f64,
    pub kappa_ci_hz: f64,
    pub kappa_c_hz: f64,
}

impl CavityOut {
    pub fn from_params(c: &CavityParams) -> Self {
        Self {
            omega_c_hz: c.omega_c / TAU,
            kappa_c1_hz: c.kappa_c1 / TAU,
            kappa_c2_hz: c.kappa_c2 / TAU,
            kappa_ci_hz: c.kappa_ci / TAU,
            kappa_c_hz: c.kappa_c() / TAU,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PerCutOut {
    pub cut_id: String,
    pub current_ma: Option<f64>,
    pub omega_a_hz: f64,
    pub kappa_ai_hz: f64,
}

#[derive(Debug, Serialize)]
pub struct FitResultOut {
    pub provenance: Provenance,
    pub cost: f64,
    pub seed_used: u64,
    pub generations_run: usize,
    pub cavity: CavityOut,
    pub mechanical: Vec<ModeOut>,
    pub g_ab_hz: Vec<f64>,
    pub g_ac_hz: f64,
    pub c_offset: f64,
    pub per_cut: Vec<PerCutOut>,
    pub history: Vec<f64>,
}

impl FitResultOut {
    pub fn new(
        provenance: Provenance,
        result: &FitResult,
        cut_ids: &[String],
        cut_currents: &[Option<f64>],
    ) -> Self {
        let shared = result.shared();
        Self {
            provenance,
            cost: result.cost,
            seed_used: result.seed_used,
            generations_run: result.history.len().saturating_sub(1),
            cavity: CavityOut::from_params(&shared.cavity),
            mechanical: shared
                .mechanical
                .iter()
                .map(|m| ModeOut { omega_hz: m.omega / TAU, linewidth_hz: m.linewidth / TAU })
                .collect(),
            g_ab_hz: shared.g_ab.iter().map(|g| g / TAU).collect(),
            g_ac_hz: shared.g_ac / TAU,
            c_offset: shared.c_offset,
            per_cut: result
                .params_per_cut
                .iter()
                .zip(cut_ids.iter().zip(cut_currents))
                .map(|(p, (id, current))| PerCutOut {
                    cut_id: id.clone(),
                    current_ma: *current,
                    omega_a_hz: p.microwave.omega / TAU,
                    kappa_ai_hz: p.microwave.linewidth / TAU,
                })
                .collect(),
            history: result.history.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct TuningModelOut {
    pub provenance: Provenance,
    pub omega_a0_hz: f64,
    pub alpha_k: f64,
    pub i_star_eff_ma: f64,
    pub coil_cal_mt_per_ma: f64,
    pub curvature_per_ma2: f64,
}

impl TuningModelOut {
    pub fn new(provenance: Provenance, m: &TuningModel) -> Self {
        Self {
            provenance,
            omega_a0_hz: m.omega_a0 / TAU,
            alpha_k: m.alpha_k,
            i_star_eff_ma: m.i_star_eff,
            coil_cal_mt_per_ma: m.coil_cal,
            curvature_per_ma2: m.curvature(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CircuitSummary {
    pub provenance: Provenance,
    pub bare_microwave_resonance_hz: f64,
    pub mechanical_resonance_hz: f64,
    pub characteristic_impedance_ohm: f64,
    pub n_lengths: usize,
    pub n_failed: usize,
}

#[derive(Debug, Serialize)]
pub struct ReconstructionOut {
    pub provenance: Provenance,
    pub currents_ma: Vec<f64>,
    pub freqs_hz: Vec<f64>,
    /// Row-major |S21|, one row per current.
    pub magnitude: Vec<Vec<f64>>,
    /// Fitted bare mechanical frequencies (Hz); horizontal overlays.
    pub mechanical_lines_hz: Vec<f64>,
    /// Tuned microwave frequency overlay, one (current, freq) pair per row.
    pub microwave_line: Vec<(f64, f64)>,
}
