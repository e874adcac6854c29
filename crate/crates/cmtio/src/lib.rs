//! Coupled-mode input-output simulation and fitting for a three-tier hybrid
//! system: a 3D microwave cavity reading out a kinetic-inductance microwave
//! resonator that is piezoelectrically coupled to gigahertz nanomechanical
//! resonators.
//!
//! The crate covers five areas:
//!
//! * [`model`] — system parameters, validation, and the dynamical mode matrix;
//! * [`scattering`] — closed-form r/t/S21, hybridized eigenmodes, coil-sweep
//!   maps, and a brute-force linear-solve cross-check;
//! * [`tuning`] — kinetic-inductance nonlinearity and the coil-current to
//!   microwave-frequency map, with least-squares calibration;
//! * [`circuit`] — lumped-element nodal analysis of the cross-chip wirebond
//!   integration model, resonance finding, and avoided-crossing coupling
//!   extraction;
//! * [`fit`] — multi-cut genetic-algorithm parameter extraction with shared
//!   mechanical parameters, cavity pre-fit, and sweep reconstruction.
//!
//! All internal computation uses angular frequencies in rad/s; external
//! interfaces (CSV, config schemas) speak Hz and convert at the boundary.
//! Every type is an immutable value object after construction and every
//! operation is a pure function, so everything can be shared across threads
//! freely.

pub mod circuit;
pub mod error;
pub mod fit;
pub mod model;
pub mod presets;
pub mod scattering;
pub mod tuning;

pub use error::{Error, Result};

/// Complex double, the scalar type of every response coefficient.
#[allow(non_camel_case_types)]
pub type c64 = num_complex::Complex<f64>;

pub(crate) use faer::{Col, Mat};
