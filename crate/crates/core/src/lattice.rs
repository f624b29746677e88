//! Stream–collide evolution of the 16-component multiplet Ψ = (𝒜, 𝒜̃, ψ, ψ̃).

pub mod config;
pub mod diagnostics;
pub mod engine;
pub mod field;

pub use config::{CouplingMode, LatticeConfig, Splitting};
pub use diagnostics::{DiagRow, Diagnostics};
pub use engine::{build_g, Engine, LatticeError};
pub use field::MultipletField;

/// Component offsets inside a multiplet.
pub const CAL_A: usize = 0;
pub const TILDE_A: usize = 4;
pub const PSI: usize = 8;
pub const TILDE_PSI: usize = 12;
