//! Continuum-limit oracles: dispersion scans, a spectral reference Dirac solver,
//! convergence studies and field-equation residuals.

pub mod algebra;
pub mod convergence;
pub mod dispersion;
pub mod reference;
pub mod residuals;

use thiserror::Error;

use crate::lattice::LatticeError;

pub use algebra::{algebra_checks, Check};
pub use convergence::{
    convergence_study, ConvergenceProblem, ConvergenceReport, DoubletWave, PacketSpec,
};
pub use dispersion::{dispersion_scan, Block, DispersionSample};
pub use reference::{reference_dirac_solve, reference_self_check, spectral_dirac_exact};
pub use residuals::{field_strength_check, proca_residual};

/// Minimum measured order before the reference solver is trusted.
pub const ORACLE_MIN_ORDER: f64 = 3.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerificationError {
    #[error("{0}")]
    Unsupported(String),
    #[error("need at least 3 time levels, got {got}")]
    InsufficientLevels { got: usize },
    #[error("reference solver refinement order {order:.3} is below {min}")]
    OracleRefinement { order: f64, min: f64 },
    #[error("invalid study: {0}")]
    InvalidStudy(String),
    #[error("field length {got} does not match grid size {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}
