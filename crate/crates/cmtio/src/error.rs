use thiserror::Error;

/// Errors produced by the simulation, fitting, and circuit-analysis routines.
///
/// Validation failures on input parameters are reported through
/// [`crate::model::ValidationReport`] instead; this type covers hard failures
/// of operations whose preconditions were otherwise met.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An operation received parameters that violate a documented invariant.
    /// Carries the first violated invariant by name.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A precondition on the call arguments (not the physical parameters)
    /// was violated, e.g. an empty grid or a reversed frequency range.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A response coefficient evaluated to a non-finite value. This happens
    /// only at exact lossless poles; no regularization is applied.
    #[error("non-finite response at omega = {omega} rad/s (exact lossless pole)")]
    NonFiniteResponse { omega: f64 },

    /// The linear system of the brute-force solve or the nodal analysis is
    /// singular at the requested frequency.
    #[error("singular linear system at omega = {omega} rad/s")]
    SingularSystem { omega: f64 },

    /// The dense eigensolver did not converge.
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    /// Tuning calibration received points that cannot constrain the model
    /// (fewer than two distinct current magnitudes).
    #[error("degenerate calibration input: need at least two points with distinct |current|")]
    DegenerateCalibration,

    /// Calibration points imply a non-decreasing frequency-vs-current curve,
    /// which the kinetic-inductance model cannot represent.
    #[error("calibration points imply non-positive tuning curvature")]
    NonPhysicalCalibration,

    /// No resolvable peak in a trace handed to the cavity pre-fit.
    #[error("no peak found in trace")]
    NoPeak,

    /// The dominant peak sits on the first or last grid point, so its
    /// position cannot be bracketed.
    #[error("peak not bracketed by the frequency grid")]
    PeakNotBracketed,

    /// The avoided-crossing search could not bracket a minimum of the mode
    /// splitting within the scanned trim range.
    #[error("avoided crossing not bracketed: {0}")]
    CrossingNotBracketed(String),

    /// Every candidate in the genetic-algorithm population evaluated to the
    /// infeasible sentinel.
    #[error("all {population} candidates infeasible at generation {generation}")]
    AllCandidatesInfeasible { generation: usize, population: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
