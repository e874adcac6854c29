//! Kinetic-inductance nonlinearity and the coil-current to microwave-frequency
//! map used for sweep simulation and calibration.
//!
//! A current-carrying nanowire of kinetic inductance `L_k(0)` picks up a
//! quadratic correction `L_k(I) = L_k(0) [1 + (I/I*)^2]`. For an LC resonator
//! whose total inductance is `L_geo + L_k(I)`, the mode frequency follows
//!
//! ```text
//!   omega(I) = omega_a0 [1 + alpha_k (I/I*_eff)^2]^(-1/2)
//! ```
//!
//! with `alpha_k = L_k(0) / L_total(0)` the kinetic fraction of the total
//! inductance. The coil drives the wire wirelessly, so `I*_eff` is an
//! effective scale referred to coil current; only the combined curvature
//! `alpha_k / I*_eff^2` is observable from frequency-vs-current data.

use crate::error::{Error, Result};

/// Vacuum permeability (H/m).
pub const MU_0: f64 = 1.256_637_062_12e-6;

/// Field generated per unit coil current at the chip (mT/mA). Carried for
/// reporting only; it never enters the frequency law.
pub const DEFAULT_COIL_CAL_MT_PER_MA: f64 = 0.01;

/// Geometry and nonlinearity scale of a kinetic-inductance nanowire.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticInductanceParams {
    /// London penetration depth (m).
    pub lambda_l: f64,
    /// Wire length (m).
    pub length: f64,
    /// Wire width (m).
    pub width: f64,
    /// Film thickness (m).
    pub thickness: f64,
    /// Nonlinearity scale current (A).
    pub i_star: f64,
}

impl KineticInductanceParams {
    pub fn new(lambda_l: f64, length: f64, width: f64, thickness: f64, i_star: f64) -> Result<Self> {
        for (name, v) in [
            ("lambda_l", lambda_l),
            ("length", length),
            ("width", width),
            ("thickness", thickness),
            ("i_star", i_star),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(Self { lambda_l, length, width, thickness, i_star })
    }
}

/// Kinetic inductance of the wire at a given carried current (H).
///
/// `L_k(I) = mu_0 lambda_L^2 (l / (w t)) [1 + (I/I*)^2]`.
pub fn kinetic_inductance(p: &KineticInductanceParams, current_a: f64) -> f64 {
    let l_k0 = MU_0 * p.lambda_l * p.lambda_l * p.length / (p.width * p.thickness);
    let x = current_a / p.i_star;
    l_k0 * (1.0 + x * x)
}

/// Coil-current to microwave-frequency map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningModel {
    /// Zero-current microwave angular frequency (rad/s).
    pub omega_a0: f64,
    /// Kinetic fraction of the total inductance, 0 < alpha_k <= 1.
    pub alpha_k: f64,
    /// Effective nonlinearity scale referred to coil current (mA).
    pub i_star_eff: f64,
    /// Coil field-per-current calibration (mT/mA), reporting only.
    pub coil_cal: f64,
}

impl TuningModel {
    pub fn new(omega_a0: f64, alpha_k: f64, i_star_eff: f64, coil_cal: f64) -> Result<Self> {
        if !(omega_a0 > 0.0) {
            return Err(Error::InvalidParams(format!("omega_a0 must be > 0, got {omega_a0}")));
        }
        if !(alpha_k > 0.0 && alpha_k <= 1.0) {
            return Err(Error::InvalidParams(format!("alpha_k must be in (0, 1], got {alpha_k}")));
        }
        if !(i_star_eff > 0.0) {
            return Err(Error::InvalidParams(format!("i_star_eff must be > 0, got {i_star_eff}")));
        }
        if !(coil_cal > 0.0) {
            return Err(Error::InvalidParams(format!("coil_cal must be > 0, got {coil_cal}")));
        }
        Ok(Self { omega_a0, alpha_k, i_star_eff, coil_cal })
    }

    /// Combined curvature `alpha_k / I*_eff^2` (1/mA^2), the single parameter
    /// observable from frequency-vs-current data.
    pub fn curvature(&self) -> f64 {
        self.alpha_k / (self.i_star_eff * self.i_star_eff)
    }
}

/// Microwave angular frequency at a coil current (rad/s). Even in the
/// current and strictly decreasing in |I|.
pub fn frequency_at_current(m: &TuningModel, current_ma: f64) -> f64 {
    let x = current_ma / m.i_star_eff;
    m.omega_a0 / (1.0 + m.alpha_k * x * x).sqrt()
}

/// Least-squares calibration of the tuning model from measured
/// (coil current mA, angular frequency rad/s) points.
///
/// Fits `omega_a0` and the combined curvature `alpha_k / I*_eff^2`; the
/// returned model uses the convention `alpha_k = 1` since the two factors
/// are not separately observable. The fit minimizes the squared frequency
/// residual: a linear solve in `1/omega^2` seeds a Gauss-Newton refinement
/// on the frequency residuals.
pub fn calibrate(points: &[(f64, f64)], omega_a0_hint: f64) -> Result<TuningModel> {
    if points.len() < 2 {
        return Err(Error::DegenerateCalibration);
    }
    let i2: Vec<f64> = points.iter().map(|&(i, _)| i * i).collect();
    let spread = i2.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - i2.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = i2.iter().cloned().fold(0.0_f64, f64::max).max(1e-300);
    if spread <= 1e-12 * scale {
        return Err(Error::DegenerateCalibration);
    }
    for &(_, w) in points {
        if !(w > 0.0) {
            return Err(Error::Precondition(format!("calibration frequency must be > 0, got {w}")));
        }
    }

    // Linear seed: 1/omega^2 = p + q I^2 with p = 1/omega_a0^2, q = c/omega_a0^2.
    let n = points.len() as f64;
    let (mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (&(_, w), &x) in points.iter().zip(&i2) {
        let y = 1.0 / (w * w);
        sx += x;
        sxx += x * x;
        sy += y;
        sxy += x * y;
    }
    let det = n * sxx - sx * sx;
    let p = (sxx * sy - sx * sxy) / det;
    let q = (n * sxy - sx * sy) / det;
    let (mut omega0, mut curv) = if p > 0.0 {
        (1.0 / p.sqrt(), q / p)
    } else {
        (omega_a0_hint, 0.0)
    };
    if !(omega0 > 0.0) {
        omega0 = omega_a0_hint;
    }

    // Gauss-Newton on r_k = omega0 (1 + c I_k^2)^(-1/2) - omega_k.
    let ssr = |w0: f64, c: f64| -> f64 {
        points
            .iter()
            .zip(&i2)
            .map(|(&(_, w), &x)| {
                let m = w0 / (1.0 + c * x).sqrt();
                (m - w) * (m - w)
            })
            .sum()
    };
    let mut best = ssr(omega0, curv);
    for _ in 0..60 {
        let (mut jtj00, mut jtj01, mut jtj11, mut jtr0, mut jtr1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&(_, w), &x) in points.iter().zip(&i2) {
            let u = 1.0 + curv * x;
            if u <= 0.0 {
                return Err(Error::NonPhysicalCalibration);
            }
            let s = u.sqrt();
            let m = omega0 / s;
            let r = m - w;
            let j0 = 1.0 / s;
            let j1 = -0.5 * omega0 * x / (u * s);
            jtj00 += j0 * j0;
            jtj01 += j0 * j1;
            jtj11 += j1 * j1;
            jtr0 += j0 * r;
            jtr1 += j1 * r;
        }
        let det = jtj00 * jtj11 - jtj01 * jtj01;
        if det.abs() < 1e-300 {
            break;
        }
        let dw = -(jtj11 * jtr0 - jtj01 * jtr1) / det;
        let dc = -(jtj00 * jtr1 - jtj01 * jtr0) / det;

        // Backtracking step control.
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let w_try = omega0 + step * dw;
            let c_try = curv + step * dc;
            if w_try > 0.0 && points.iter().zip(&i2).all(|(_, &x)| 1.0 + c_try * x > 0.0) {
                let s = ssr(w_try, c_try);
                if s <= best {
                    let rel = (step * dw / omega0).abs().max((step * dc).abs() / curv.abs().max(1e-30));
                    omega0 = w_try;
                    curv = c_try;
                    improved = s < best || rel > 0.0;
                    best = s;
                    if rel < 1e-15 {
                        improved = false;
                    }
                    break;
                }
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }

    if !(curv > 0.0) {
        return Err(Error::NonPhysicalCalibration);
    }
    TuningModel::new(omega0, 1.0, 1.0 / curv.sqrt(), DEFAULT_COIL_CAL_MT_PER_MA)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn film() -> KineticInductanceParams {
        // 10 nm NbTiN film fixture: 100 um x 1 um wire, lambda_L = 400 nm.
        KineticInductanceParams::new(400e-9, 100e-6, 1e-6, 10e-9, 1e-3).unwrap()
    }

    #[test]
    fn zero_current_inductance_matches_hand_evaluation() {
        // mu0 * (400 nm)^2 * 100 um / (1 um * 10 nm) evaluated by hand.
        let expected = 2.010_619_299_392e-9;
        let got = kinetic_inductance(&film(), 0.0);
        assert!((got - expected).abs() / expected < 1e-12, "got {got}");
    }

    #[test]
    fn inductance_doubles_at_i_star() {
        let p = film();
        let l0 = kinetic_inductance(&p, 0.0);
        let l = kinetic_inductance(&p, p.i_star);
        assert!((l - 2.0 * l0).abs() / l0 < 1e-15);
    }

    #[test]
    fn invalid_geometry_is_rejected() {
        assert!(KineticInductanceParams::new(400e-9, 0.0, 1e-6, 10e-9, 1e-3).is_err());
        assert!(KineticInductanceParams::new(400e-9, 1e-6, 1e-6, 10e-9, -1.0).is_err());
    }

    fn model() -> TuningModel {
        TuningModel::new(TAU * 2.65e9, 0.8, 500.0, DEFAULT_COIL_CAL_MT_PER_MA).unwrap()
    }

    #[test]
    fn zero_current_returns_omega_a0() {
        let m = model();
        assert_eq!(frequency_at_current(&m, 0.0), m.omega_a0);
    }

    #[test]
    fn frequency_is_even_and_strictly_decreasing() {
        let m = model();
        let mut last = frequency_at_current(&m, 0.0);
        for k in 1..200 {
            let i = k as f64 * 2.0;
            let w = frequency_at_current(&m, i);
            assert_eq!(w, frequency_at_current(&m, -i));
            assert!(w < last, "not strictly decreasing at {i} mA");
            assert!(w < m.omega_a0);
            last = w;
        }
    }

    #[test]
    fn two_point_calibration_recovers_exactly() {
        let truth = model();
        let pts: Vec<(f64, f64)> =
            [30.0, 120.0].iter().map(|&i| (i, frequency_at_current(&truth, i))).collect();
        let fit = calibrate(&pts, TAU * 2.6e9).unwrap();
        assert!((fit.omega_a0 - truth.omega_a0).abs() / truth.omega_a0 < 1e-9);
        assert!((fit.curvature() - truth.curvature()).abs() / truth.curvature() < 1e-9);
        for &(i, w) in &pts {
            let m = frequency_at_current(&fit, i);
            assert!((m - w).abs() / w < 1e-12, "not passing through point at {i} mA");
        }
    }

    #[test]
    fn degenerate_points_are_rejected() {
        let truth = model();
        let w = frequency_at_current(&truth, 0.0);
        assert!(matches!(
            calibrate(&[(0.0, w), (0.0, w), (0.0, w)], w),
            Err(Error::DegenerateCalibration)
        ));
        // same |I| on both signs is degenerate too: the model is even
        let w1 = frequency_at_current(&truth, 50.0);
        assert!(matches!(
            calibrate(&[(50.0, w1), (-50.0, w1)], w1),
            Err(Error::DegenerateCalibration)
        ));
    }

    #[test]
    fn noisy_calibration_recovers_curvature_within_5_percent() {
        use rand::prelude::*;
        use rand_distr::Normal;
        let truth = model();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let noise = Normal::new(0.0, 1e-3).unwrap();
        for _ in 0..50 {
            let pts: Vec<(f64, f64)> = (0..15)
                .map(|k| {
                    let i = 20.0 * k as f64;
                    let w = frequency_at_current(&truth, i) * (1.0 + noise.sample(&mut rng));
                    (i, w)
                })
                .collect();
            let fit = calibrate(&pts, TAU * 2.6e9).unwrap();
            let rel = (fit.curvature() - truth.curvature()).abs() / truth.curvature();
            assert!(rel < 0.05, "curvature off by {:.2}%", rel * 100.0);
        }
    }

    #[test]
    fn preset_tuning_spans_more_than_100_mhz() {
        let m = crate::presets::flip_chip_tuning();
        let span = frequency_at_current(&m, 0.0) - frequency_at_current(&m, 200.0);
        assert!(span / TAU > 100e6, "tuning span {} MHz", span / TAU / 1e6);
    }
}
