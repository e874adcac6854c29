//! Reflection and transmission coefficients of the coupled system, hybridized
//! eigenmodes, and 2D coil-sweep maps.
//!
//! Two independent evaluation routes exist on purpose. The closed forms
//! [`reflection`] / [`transmission`] evaluate the nested continued-fraction
//! self-energy exactly as written:
//!
//! ```text
//!   D_a(w) = -i (w - w_a) + kappa_ai/2 + sum_n g_ab_n^2 / (-i (w - w_mn) + gamma_n/2)
//!   D_c(w) = -i (w - w_c) + kappa_c/2  + g_ac^2 / D_a(w)
//!   r(w) = 1 - kappa_c1 / D_c(w)
//!   t(w) = -sqrt(kappa_c1 kappa_c2) / D_c(w)
//! ```
//!
//! while [`brute_force_response`] solves the full linear system of motion
//! over the mode matrix and applies the two-port boundary conditions. The
//! two routes share no code past parameter validation, so their agreement is
//! a real cross-check rather than a tautology.
//!
//! No epsilon is ever added to a denominator: an exact lossless pole
//! surfaces as [`Error::NonFiniteResponse`] instead of being silently
//! regularized, which would corrupt the unitarity checks.

use crate::error::{Error, Result};
use crate::model::{build_mode_matrix, ensure_valid, SystemParams};
use crate::tuning::{frequency_at_current, TuningModel};
use crate::{c64, Mat};
use faer::prelude::Solve;
use std::f64::consts::TAU;
use std::fmt::Write as _;

/// A frequency grid with complex response values.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    /// Probe frequencies in Hz, strictly increasing.
    pub freqs: Vec<f64>,
    /// Dimensionless complex response, one value per frequency.
    pub values: Vec<c64>,
}

impl SpectrumTrace {
    pub fn new(freqs: Vec<f64>, values: Vec<c64>) -> Result<Self> {
        if freqs.len() != values.len() {
            return Err(Error::Precondition(format!(
                "trace length mismatch: {} freqs vs {} values",
                freqs.len(),
                values.len()
            )));
        }
        if freqs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Precondition("trace frequencies must be strictly increasing".into()));
        }
        Ok(Self { freqs, values })
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Linear magnitudes |value|.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }
}

/// |S21| magnitude map over a (coil current, probe frequency) grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    /// Coil currents (mA), one per row.
    pub currents: Vec<f64>,
    /// Probe frequencies (Hz), one per column.
    pub freqs: Vec<f64>,
    /// Linear |S21|, `magnitude[row][col]`, all values >= 0.
    pub magnitude: Vec<Vec<f64>>,
}

impl SweepGrid {
    pub fn new(currents: Vec<f64>, freqs: Vec<f64>, magnitude: Vec<Vec<f64>>) -> Result<Self> {
        if magnitude.len() != currents.len()
            || magnitude.iter().any(|row| row.len() != freqs.len())
        {
            return Err(Error::Precondition("sweep grid dimensions mismatch".into()));
        }
        if magnitude.iter().flatten().any(|&m| !(m >= 0.0)) {
            return Err(Error::Precondition("sweep magnitudes must be >= 0".into()));
        }
        Ok(Self { currents, freqs, magnitude })
    }

    /// CSV serialization: `#`-prefixed comment lines, then a header row of
    /// frequencies, then one row per current with the current in the first
    /// column.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "# {c}");
        }
        out.push_str("current_ma");
        for f in &self.freqs {
            let _ = write!(out, ",{f}");
        }
        out.push('\n');
        for (i, row) in self.magnitude.iter().enumerate() {
            let _ = write!(out, "{}", self.currents[i]);
            for m in row {
                let _ = write!(out, ",{m}");
            }
            out.push('\n');
        }
        out
    }

    /// Plain-text portable graymap (P2, maxval 65535), row-major with one
    /// grid row per image row. Magnitudes are min-max normalized per file;
    /// a constant grid maps to all zeros.
    pub fn to_pgm(&self, comments: &[String]) -> String {
        let mut out = String::from("P2\n");
        for c in comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "{} {}", self.freqs.len(), self.currents.len());
        out.push_str("65535\n");
        let lo = self.magnitude.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.magnitude.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        for row in &self.magnitude {
            let mut first = true;
            for &m in row {
                let v = if span > 0.0 { ((m - lo) / span * 65535.0).round() as u32 } else { 0 };
                if !first {
                    out.push(' ');
                }
                let _ = write!(out, "{v}");
                first = false;
            }
            out.push('\n');
        }
        out
    }
}

/// Denominator D_c(w) shared by the reflection and transmission closed forms.
fn response_denominator(params: &SystemParams, omega: f64) -> c64 {
    let mut d_a = c64::new(
        params.microwave.linewidth / 2.0,
        -(omega - params.microwave.omega),
    );
    for (mode, &g) in params.mechanical.iter().zip(&params.g_ab) {
        if g != 0.0 {
            let d_b = c64::new(mode.linewidth / 2.0, -(omega - mode.omega));
            d_a += g * g / d_b;
        }
    }
    let mut d_c = c64::new(
        params.cavity.kappa_c() / 2.0,
        -(omega - params.cavity.omega_c),
    );
    if params.g_ac != 0.0 {
        d_c += params.g_ac * params.g_ac / d_a;
    }
    d_c
}

fn finite_or_pole(value: c64, omega: f64) -> Result<c64> {
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteResponse { omega })
    }
}

/// Port-1 reflection coefficient r(omega); `omega` in rad/s.
pub fn reflection(params: &SystemParams, omega: f64) -> Result<c64> {
    ensure_valid(params)?;
    let d_c = response_denominator(params, omega);
    finite_or_pole(c64::new(1.0, 0.0) - params.cavity.kappa_c1 / d_c, omega)
}

/// Port-1 to port-2 transmission coefficient t(omega); `omega` in rad/s.
pub fn transmission(params: &SystemParams, omega: f64) -> Result<c64> {
    ensure_valid(params)?;
    let d_c = response_denominator(params, omega);
    let num = -(params.cavity.kappa_c1 * params.cavity.kappa_c2).sqrt();
    finite_or_pole(num / d_c, omega)
}

/// Scaled transmission `S21 = c_offset * t(omega)`, the quantity compared
/// against measured data.
pub fn s21(params: &SystemParams, omega: f64) -> Result<c64> {
    Ok(transmission(params, omega)? * params.c_offset)
}

/// S21 without validation or pole detection; may return non-finite values.
/// Hot path of the fit cost function, which validates candidates once and
/// treats non-finite results as an infeasibility sentinel.
pub(crate) fn s21_raw(params: &SystemParams, omega: f64) -> c64 {
    let d_c = response_denominator(params, omega);
    let num = -(params.cavity.kappa_c1 * params.cavity.kappa_c2).sqrt();
    params.c_offset * num / d_c
}

/// One hybridized eigenmode of the coupled system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridMode {
    /// Mode angular frequency (rad/s).
    pub omega: f64,
    /// Full energy decay rate (rad/s).
    pub decay: f64,
}

/// Diagonalize the mode matrix and return all N+2 hybridized modes, sorted
/// ascending by frequency with ties broken by decay rate.
///
/// Each eigenvalue `lambda` maps to frequency `-Im lambda` and decay rate
/// `-2 Re lambda`.
pub fn hybridized_modes(params: &SystemParams) -> Result<Vec<HybridMode>> {
    let mm = build_mode_matrix(params)?;
    let eigs: Vec<c64> = mm
        .matrix
        .eigenvalues()
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let mut modes: Vec<HybridMode> = eigs
        .into_iter()
        .map(|l| HybridMode { omega: -l.im, decay: -2.0 * l.re })
        .collect();
    modes.sort_by(|a, b| {
        a.omega.total_cmp(&b.omega).then(a.decay.total_cmp(&b.decay))
    });
    Ok(modes)
}

/// Solve the equations of motion directly and return `(r, t)`.
///
/// Builds `A = -i omega I - M` and solves `A x = drive` for a unit input
/// field, then applies the two-port boundary conditions
/// `r = 1 - sqrt(kappa_c1) x_c` and `t = -sqrt(kappa_c2) x_c`. This route is
/// the independent check for the closed forms.
pub fn brute_force_response(params: &SystemParams, omega: f64) -> Result<(c64, c64)> {
    let mm = build_mode_matrix(params)?;
    let dim = mm.dimension;
    let mut a = Mat::<c64>::zeros(dim, dim);
    for j in 0..dim {
        for k in 0..dim {
            a[(j, k)] = -mm.matrix[(j, k)];
        }
        a[(j, j)] += c64::new(0.0, -omega);
    }
    let mut rhs = Mat::<c64>::zeros(dim, 1);
    for j in 0..dim {
        rhs[(j, 0)] = mm.drive_vector[j];
    }
    let x = a.partial_piv_lu().solve(&rhs);
    let c = x[(0, 0)];
    if !(c.re.is_finite() && c.im.is_finite()) {
        return Err(Error::SingularSystem { omega });
    }
    let r = c64::new(1.0, 0.0) - params.cavity.kappa_c1.sqrt() * c;
    let t = -params.cavity.kappa_c2.sqrt() * c;
    Ok((r, t))
}

/// Evaluate |s21| over a frequency grid (Hz) into a trace.
pub fn simulate_trace(params: &SystemParams, freqs_hz: &[f64]) -> Result<SpectrumTrace> {
    let values = freqs_hz
        .iter()
        .map(|&f| s21(params, TAU * f))
        .collect::<Result<Vec<c64>>>()?;
    SpectrumTrace::new(freqs_hz.to_vec(), values)
}

/// Coil sweep: for each current the microwave frequency is replaced by the
/// tuning-model output and one row of |s21| is evaluated; all other
/// parameters stay fixed.
pub fn sweep(
    params: &SystemParams,
    tuning: &TuningModel,
    currents_ma: &[f64],
    freqs_hz: &[f64],
) -> Result<SweepGrid> {
    ensure_valid(params)?;
    if currents_ma.is_empty() || freqs_hz.is_empty() {
        return Err(Error::Precondition("sweep needs at least one current and one frequency".into()));
    }
    let mut magnitude = Vec::with_capacity(currents_ma.len());
    let mut row_params = params.clone();
    for &i_ma in currents_ma {
        row_params.microwave.omega = frequency_at_current(tuning, i_ma);
        let row = freqs_hz
            .iter()
            .map(|&f| s21(&row_params, TAU * f).map(|v| v.norm()))
            .collect::<Result<Vec<f64>>>()?;
        magnitude.push(row);
    }
    SweepGrid::new(currents_ma.to_vec(), freqs_hz.to_vec(), magnitude)
}

/// Indices of strict three-point local maxima of a sampled curve.
///
/// For peak-position work the grid step should resolve the narrowest
/// feature; a step of at most one tenth of the smallest linewidth keeps the
/// discretization bias well below a linewidth.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] > values[i + 1])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CavityParams, ModeParams};
    use crate::presets;

    fn bare_cavity(kappa_c1: f64, kappa_c2: f64, kappa_ci: f64) -> SystemParams {
        SystemParams {
            cavity: CavityParams { omega_c: TAU * 2.923e9, kappa_c1, kappa_c2, kappa_ci },
            microwave: ModeParams::new(TAU * 2.589e9, TAU * 300e3),
            mechanical: vec![],
            g_ac: 0.0,
            g_ab: vec![],
            c_offset: 1.0,
        }
    }

    #[test]
    fn critically_coupled_reflection_vanishes_on_resonance() {
        let kappa = TAU * 400e3;
        let p = bare_cavity(kappa / 2.0, kappa / 2.0, 0.0);
        let r = reflection(&p, p.cavity.omega_c).unwrap();
        assert!(r.norm() < 1e-14, "|r| = {}", r.norm());
    }

    #[test]
    fn far_detuned_reflection_approaches_unity() {
        let p = bare_cavity(TAU * 100e3, TAU * 100e3, TAU * 244e3);
        for delta in [1e9, -1e9, 5e9] {
            let r = reflection(&p, p.cavity.omega_c + TAU * delta).unwrap();
            assert!((r - c64::new(1.0, 0.0)).norm() < 1e-3);
        }
    }

    #[test]
    fn bare_cavity_peak_transmission_matches_lorentzian_formula() {
        let p = bare_cavity(TAU * 100e3, TAU * 150e3, TAU * 194e3);
        let t = transmission(&p, p.cavity.omega_c).unwrap();
        let expected = (p.cavity.kappa_c1 * p.cavity.kappa_c2).sqrt() / (p.cavity.kappa_c() / 2.0);
        assert!((t.norm() - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn s21_scales_linearly_with_offset() {
        let mut p = presets::flip_chip_bonded();
        let omega = TAU * 2.55e9;
        let t = transmission(&p, omega).unwrap();
        assert_eq!(s21(&p, omega).unwrap(), t);
        p.c_offset = 0.5;
        let half = s21(&p, omega).unwrap();
        assert!((half - 0.5 * t).norm() < 1e-18);
    }

    #[test]
    fn lossless_two_port_is_unitary() {
        let mut p = presets::flip_chip_bonded();
        p.cavity.kappa_ci = 0.0;
        p.microwave.linewidth = 0.0;
        for m in &mut p.mechanical {
            m.linewidth = 0.0;
        }
        for k in 0..2000 {
            let omega = TAU * (2.4e9 + 0.6e9 * (k as f64 + 0.21) / 2000.0);
            let r = reflection(&p, omega).unwrap();
            let t = transmission(&p, omega).unwrap();
            let sum = r.norm_sqr() + t.norm_sqr();
            assert!((sum - 1.0).abs() < 1e-10, "|r|^2+|t|^2 = {sum} at {omega}");
        }
    }

    #[test]
    fn exact_lossless_pole_is_an_error_not_a_crash() {
        let mut p = bare_cavity(TAU * 100e3, TAU * 100e3, 0.0);
        p.mechanical = vec![ModeParams::new(TAU * 2.55e9, 0.0)];
        p.g_ab = vec![TAU * 10e6];
        p.g_ac = TAU * 50e6;
        p.microwave.linewidth = 0.0;
        // probing exactly the lossless mechanical frequency hits the bare pole
        let err = transmission(&p, TAU * 2.55e9).unwrap_err();
        assert!(matches!(err, Error::NonFiniteResponse { .. }));
    }

    #[test]
    fn uncoupled_hybrid_modes_equal_bare_modes() {
        let mut p = presets::flip_chip_bonded();
        p.g_ac = 0.0;
        p.g_ab = vec![0.0; p.n_mech()];
        let modes = hybridized_modes(&p).unwrap();
        let mut bare: Vec<(f64, f64)> = vec![
            (p.cavity.omega_c, p.cavity.kappa_c()),
            (p.microwave.omega, p.microwave.linewidth),
        ];
        bare.extend(p.mechanical.iter().map(|m| (m.omega, m.linewidth)));
        bare.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(modes.len(), bare.len());
        for (mode, (w, d)) in modes.iter().zip(bare) {
            assert!((mode.omega - w).abs() / w < 1e-12);
            assert!((mode.decay - d).abs() <= 1e-9 * d.max(1.0));
        }
    }

    #[test]
    fn degenerate_lossless_pair_splits_by_exactly_2g() {
        let g = TAU * 14e6;
        let omega0 = TAU * 2.55e9;
        let p = SystemParams {
            cavity: CavityParams {
                omega_c: TAU * 2.923e9,
                kappa_c1: 0.0,
                kappa_c2: 0.0,
                kappa_ci: 0.0,
            },
            microwave: ModeParams::new(omega0, 0.0),
            mechanical: vec![ModeParams::new(omega0, 0.0)],
            g_ac: 0.0,
            g_ab: vec![g],
            c_offset: 1.0,
        };
        let modes = hybridized_modes(&p).unwrap();
        // modes are [omega0 - g, omega0 + g, cavity]
        let split = modes[1].omega - modes[0].omega;
        assert!((split - 2.0 * g).abs() / (2.0 * g) < 1e-9, "split = {split}");
    }

    #[test]
    fn brute_force_agrees_with_closed_form_at_reference_point() {
        let p = presets::flip_chip_bonded();
        let omega = TAU * 2.50e9;
        let (r_bf, t_bf) = brute_force_response(&p, omega).unwrap();
        let r = reflection(&p, omega).unwrap();
        let t = transmission(&p, omega).unwrap();
        assert!((r - r_bf).norm() / r_bf.norm() < 1e-9);
        assert!((t - t_bf).norm() / t_bf.norm() < 1e-9);
    }

    #[test]
    fn decoupled_brute_force_matches_bare_cavity_formula() {
        let p = bare_cavity(TAU * 120e3, TAU * 90e3, TAU * 200e3);
        let omega = p.cavity.omega_c + TAU * 150e3;
        let (r, t) = brute_force_response(&p, omega).unwrap();
        let d = c64::new(p.cavity.kappa_c() / 2.0, -(omega - p.cavity.omega_c));
        let r_ref = c64::new(1.0, 0.0) - p.cavity.kappa_c1 / d;
        let t_ref = -(p.cavity.kappa_c1 * p.cavity.kappa_c2).sqrt() / d;
        assert!((r - r_ref).norm() < 1e-12);
        assert!((t - t_ref).norm() < 1e-12);
    }

    #[test]
    fn transmission_magnitude_is_invariant_under_port_swap() {
        let mut p = presets::flip_chip_bonded();
        p.cavity.kappa_c1 = TAU * 80e3;
        p.cavity.kappa_c2 = TAU * 160e3;
        let mut q = p.clone();
        std::mem::swap(&mut q.cavity.kappa_c1, &mut q.cavity.kappa_c2);
        for k in 0..50 {
            let omega = TAU * (2.45e9 + 5e6 * k as f64);
            let t1 = transmission(&p, omega).unwrap().norm();
            let t2 = transmission(&q, omega).unwrap().norm();
            assert!((t1 - t2).abs() <= 1e-15 * t1.max(1e-300));
        }
    }

    #[test]
    fn constant_tuning_gives_identical_sweep_rows() {
        let p = presets::flip_chip_bonded();
        let t = TuningModel::new(p.microwave.omega, 0.5, 1e30, 0.01).unwrap();
        let currents = [-100.0, 0.0, 55.0, 200.0];
        let freqs: Vec<f64> = (0..200).map(|k| 2.45e9 + 1e6 * k as f64).collect();
        let grid = sweep(&p, &t, &currents, &freqs).unwrap();
        for row in &grid.magnitude[1..] {
            assert_eq!(row, &grid.magnitude[0]);
        }
    }

    #[test]
    fn sweep_rows_equal_pointwise_s21() {
        let p = presets::flip_chip_bonded();
        let t = presets::flip_chip_tuning();
        let currents = [0.0, 130.0];
        let freqs: Vec<f64> = (0..100).map(|k| 2.45e9 + 2e6 * k as f64).collect();
        let grid = sweep(&p, &t, &currents, &freqs).unwrap();
        for (row, &i_ma) in grid.magnitude.iter().zip(&currents) {
            let mut q = p.clone();
            q.microwave.omega = frequency_at_current(&t, i_ma);
            for (m, &f) in row.iter().zip(&freqs) {
                assert_eq!(*m, s21(&q, TAU * f).unwrap().norm());
            }
        }
    }

    #[test]
    fn grid_serializers_have_expected_shape() {
        let grid = SweepGrid::new(
            vec![0.0, 1.0],
            vec![1e9, 2e9, 3e9],
            vec![vec![0.0, 0.5, 1.0], vec![1.0, 0.5, 0.0]],
        )
        .unwrap();
        let csv = grid.to_csv(&["seed: 1".into()]);
        assert!(csv.starts_with("# seed: 1\ncurrent_ma,1000000000,2000000000,3000000000\n"));
        assert!(csv.contains("\n0,0,0.5,1\n"));
        let pgm = grid.to_pgm(&[]);
        let mut lines = pgm.lines();
        assert_eq!(lines.next(), Some("P2"));
        assert_eq!(lines.next(), Some("3 2"));
        assert_eq!(lines.next(), Some("65535"));
        assert_eq!(lines.next(), Some("0 32768 65535"));
        assert_eq!(lines.next(), Some("65535 32768 0"));
    }

    #[test]
    fn local_maxima_finds_interior_peaks_only() {
        let v = [0.0, 1.0, 0.5, 2.0, 1.9, 3.0];
        assert_eq!(local_maxima(&v), vec![1, 3]);
    }
}
