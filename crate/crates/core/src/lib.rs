//! Unitary stream–collide lattice simulation of a charged fermion field coupled
//! to a massive (London) gauge field.
//!
//! The crate is organised bottom-up:
//!
//! * [`clifford`]: the fixed γ, 𝒢 and Δ matrix representations, spin generators
//!   and hermitian matrix functions.
//! * [`spinor`]: the unitary map between 4-vectors and 4-spinors, the complex
//!   field 4-vector and the spinor-form Maxwell / Maxwell–London residuals.
//! * [`interaction`]: pointwise fermion–gauge coupling (metric, London relation,
//!   forward and back reactions, mass matrix, gauge transformations).
//! * [`lattice`]: the 16-component multiplet and its stream–collide evolution.
//! * [`verification`]: dispersion scans, a spectral reference Dirac solver,
//!   convergence studies and continuum residual checks.
//! * [`io`]: configuration parsing, initial conditions, snapshots and CSV output.
//!
//! Natural units (ħ = c = 1) are the default, but every formula carries ħ and c
//! through [`interaction::PhysicalParams`].

// NaN must fail range checks, and index loops follow the tensor notation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
pub mod clifford;
pub mod deriv;
pub mod error;
pub mod fit;
pub mod grid;
pub mod interaction;
pub mod io;
pub mod lattice;
pub mod spinor;
pub mod verification;

use nalgebra::{Matrix2, Matrix4, SMatrix, SVector, Vector4};
use num_complex::Complex;

pub use error::Error;

pub type C64 = Complex<f64>;

pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;
pub type Mat8 = SMatrix<C64, 8, 8>;
pub type Mat16 = SMatrix<C64, 16, 16>;

/// Dirac 4-spinor, component order (L↑, L↓, R↑, R↓).
pub type Spinor4 = Vector4<C64>;
/// Gauge doublet Φ = (𝒜, 𝒜̃).
pub type Doublet8 = SVector<C64, 8>;
/// Full multiplet Ψ = (𝒜, 𝒜̃, ψ, ψ̃).
pub type Multiplet16 = SVector<C64, 16>;
/// Real contravariant 4-vector (A⁰, A¹, A², A³).
pub type FourVector = Vector4<f64>;
/// Real 4×4 matrix acting on 4-vectors.
pub type Matrix4Real = Matrix4<f64>;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub(crate) fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
