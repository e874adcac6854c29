//! Physical parameters of the coupled three-tier system (3D cavity,
//! kinetic-inductance microwave resonator, nanomechanical resonators) and the
//! dynamical mode matrix built from them.
//!
//! All frequencies and rates are stored as angular quantities in rad/s.
//! External interfaces (config files, CSV) use Hz and convert at the
//! boundary.

use crate::error::{Error, Result};
use crate::{c64, Col, Mat};
use std::fmt;

/// One bare mode: angular frequency and intrinsic energy decay rate, rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParams {
    /// Angular frequency (rad/s).
    pub omega: f64,
    /// Intrinsic energy decay rate (rad/s).
    pub linewidth: f64,
}

impl ModeParams {
    pub fn new(omega: f64, linewidth: f64) -> Self {
        Self { omega, linewidth }
    }
}

/// Readout cavity parameters. The two external port couplings are kept
/// separate from the intrinsic loss because the transmission magnitude
/// depends on the split, not just on the total linewidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    /// Cavity angular frequency (rad/s).
    pub omega_c: f64,
    /// Port-1 external coupling rate (rad/s).
    pub kappa_c1: f64,
    /// Port-2 external coupling rate (rad/s).
    pub kappa_c2: f64,
    /// Intrinsic loss rate (rad/s).
    pub kappa_ci: f64,
}

impl CavityParams {
    /// Total cavity linewidth, kappa_c1 + kappa_c2 + kappa_ci. Derived, never
    /// stored separately.
    pub fn kappa_c(&self) -> f64 {
        self.kappa_c1 + self.kappa_c2 + self.kappa_ci
    }
}

/// Complete parameter set of one coupled system.
///
/// Mode ordering throughout the crate is fixed:
/// `[cavity, microwave, mech_1 .. mech_N]`.
///
/// Coupling rates are stored as nonnegative reals. Any physical coupling
/// phase is unobservable in |S21| for this chain topology, so phases are
/// absorbed into the mode amplitudes by convention.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub cavity: CavityParams,
    /// Microwave mode; `linewidth` is its intrinsic loss rate.
    pub microwave: ModeParams,
    /// Mechanical modes, length N >= 0.
    pub mechanical: Vec<ModeParams>,
    /// Cavity-microwave coupling rate (rad/s).
    pub g_ac: f64,
    /// Microwave-mechanical coupling rates (rad/s), one per mechanical mode.
    pub g_ab: Vec<f64>,
    /// Dimensionless transmission scale applied by [`crate::scattering::s21`],
    /// absorbing uncalibrated gain/attenuation of a measurement chain.
    /// Positive real by convention.
    pub c_offset: f64,
}

impl SystemParams {
    /// Number of mechanical modes N.
    pub fn n_mech(&self) -> usize {
        self.mechanical.len()
    }
}

/// A single violated invariant found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// A mode frequency is zero or negative.
    NonPositiveFrequency { field: String, value: f64 },
    /// A decay or loss rate is negative.
    NegativeRate { field: String, value: f64 },
    /// A coupling rate is negative.
    NegativeCoupling { field: String, value: f64 },
    /// `g_ab` does not have one entry per mechanical mode.
    CouplingLengthMismatch { couplings: usize, modes: usize },
    /// The transmission offset scale is not positive.
    NonPositiveOffset { value: f64 },
    /// A value is NaN.
    NotANumber { field: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveFrequency { field, value } => {
                write!(f, "non-positive frequency: {field} = {value} rad/s")
            }
            Violation::NegativeRate { field, value } => {
                write!(f, "negative rate: {field} = {value} rad/s")
            }
            Violation::NegativeCoupling { field, value } => {
                write!(f, "negative coupling: {field} = {value} rad/s")
            }
            Violation::CouplingLengthMismatch { couplings, modes } => {
                write!(
                    f,
                    "coupling list length mismatch: {couplings} couplings for {modes} mechanical modes"
                )
            }
            Violation::NonPositiveOffset { value } => {
                write!(f, "non-positive offset: c_offset = {value}")
            }
            Violation::NotANumber { field } => write!(f, "not a number: {field}"),
        }
    }
}

/// Outcome of [`validate`]: every violated invariant, in declaration order.
/// An empty list means the parameters are valid. Validation failures are
/// data, not errors.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn check_rate(report: &mut Vec<Violation>, field: impl FnOnce() -> String, value: f64) {
    if value.is_nan() {
        report.push(Violation::NotANumber { field: field() });
    } else if value < 0.0 {
        report.push(Violation::NegativeRate { field: field(), value });
    }
}

fn check_freq(report: &mut Vec<Violation>, field: impl FnOnce() -> String, value: f64) {
    if value.is_nan() {
        report.push(Violation::NotANumber { field: field() });
    } else if value <= 0.0 {
        report.push(Violation::NonPositiveFrequency { field: field(), value });
    }
}

/// Check every invariant of a [`SystemParams`]; never mutates the input.
pub fn validate(params: &SystemParams) -> ValidationReport {
    let mut v = Vec::new();

    check_freq(&mut v, || "cavity.omega_c".into(), params.cavity.omega_c);
    check_rate(&mut v, || "cavity.kappa_c1".into(), params.cavity.kappa_c1);
    check_rate(&mut v, || "cavity.kappa_c2".into(), params.cavity.kappa_c2);
    check_rate(&mut v, || "cavity.kappa_ci".into(), params.cavity.kappa_ci);

    check_freq(&mut v, || "microwave.omega".into(), params.microwave.omega);
    check_rate(&mut v, || "microwave.linewidth".into(), params.microwave.linewidth);

    for (n, mode) in params.mechanical.iter().enumerate() {
        check_freq(&mut v, || format!("mechanical[{n}].omega"), mode.omega);
        check_rate(&mut v, || format!("mechanical[{n}].linewidth"), mode.linewidth);
    }

    if params.g_ac.is_nan() {
        v.push(Violation::NotANumber { field: "g_ac".into() });
    } else if params.g_ac < 0.0 {
        v.push(Violation::NegativeCoupling { field: "g_ac".into(), value: params.g_ac });
    }

    if params.g_ab.len() != params.mechanical.len() {
        v.push(Violation::CouplingLengthMismatch {
            couplings: params.g_ab.len(),
            modes: params.mechanical.len(),
        });
    }
    for (n, &g) in params.g_ab.iter().enumerate() {
        if g.is_nan() {
            v.push(Violation::NotANumber { field: format!("g_ab[{n}]") });
        } else if g < 0.0 {
            v.push(Violation::NegativeCoupling { field: format!("g_ab[{n}]"), value: g });
        }
    }

    if params.c_offset.is_nan() {
        v.push(Violation::NotANumber { field: "c_offset".into() });
    } else if params.c_offset <= 0.0 {
        v.push(Violation::NonPositiveOffset { value: params.c_offset });
    }

    ValidationReport { violations: v }
}

/// Reject invalid parameters with the first violated invariant named.
pub(crate) fn ensure_valid(params: &SystemParams) -> Result<()> {
    let report = validate(params);
    match report.violations.first() {
        None => Ok(()),
        Some(v) => Err(Error::InvalidParams(v.to_string())),
    }
}

/// Dense dynamical matrix of the coupled mode amplitudes.
///
/// With the mode-amplitude vector `x = [c, a, b_1 .. b_N]` the equations of
/// motion in the Fourier domain read
///
/// ```text
///   -i omega x = M x + drive * c_in
/// ```
///
/// where `drive = [sqrt(kappa_c1), 0, .., 0]` injects the port-1 input field
/// into the cavity row. The two-port boundary conditions
/// `c_out1 = c_in - sqrt(kappa_c1) c` and `c_out2 = -sqrt(kappa_c2) c`
/// then produce the reflection and transmission coefficients.
#[derive(Debug, Clone)]
pub struct ModeMatrix {
    /// N + 2.
    pub dimension: usize,
    /// Dense complex matrix, entries in rad/s. Diagonal entries are
    /// `-i omega_k - decay_k / 2`; coupling entries are `-i g` and symmetric.
    pub matrix: Mat<c64>,
    /// Input coupling column for the port-1 drive.
    pub drive_vector: Col<c64>,
}

/// Build the (N+2) x (N+2) dynamical matrix for valid parameters.
///
/// Mode ordering is `[cavity, microwave, mech_1 .. mech_N]`. The cavity
/// diagonal carries the full linewidth `kappa_c` (both ports plus intrinsic
/// loss); the microwave and mechanical diagonals carry their intrinsic rates.
pub fn build_mode_matrix(params: &SystemParams) -> Result<ModeMatrix> {
    ensure_valid(params)?;

    let n = params.n_mech();
    let dim = n + 2;
    let mut m = Mat::<c64>::zeros(dim, dim);

    let diag = |omega: f64, decay: f64| c64::new(-decay / 2.0, -omega);

    m[(0, 0)] = diag(params.cavity.omega_c, params.cavity.kappa_c());
    m[(1, 1)] = diag(params.microwave.omega, params.microwave.linewidth);
    for (k, mode) in params.mechanical.iter().enumerate() {
        m[(2 + k, 2 + k)] = diag(mode.omega, mode.linewidth);
    }

    m[(0, 1)] = c64::new(0.0, -params.g_ac);
    m[(1, 0)] = m[(0, 1)];
    for (k, &g) in params.g_ab.iter().enumerate() {
        m[(1, 2 + k)] = c64::new(0.0, -g);
        m[(2 + k, 1)] = m[(1, 2 + k)];
    }

    let mut drive = Col::<c64>::zeros(dim);
    drive[0] = c64::new(params.cavity.kappa_c1.sqrt(), 0.0);

    Ok(ModeMatrix { dimension: dim, matrix: m, drive_vector: drive })
}
