use std::io::Write;

use rayon::prelude::*;

use super::field::MultipletField;
use crate::deriv::Deriv;
use crate::interaction::{
    back_reaction, divergence, mass_matrix, outgoing_current, vector_current, CurrentForm,
    PhysicalParams,
};
use crate::FourVector;

pub const CSV_HEADER: &str =
    "step,time,norm,norm_drift,continuity_residual,london_residual,equilibrium_residual,ml_antihermiticity";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagRow {
    pub step: u64,
    pub time: f64,
    pub norm: f64,
    pub norm_drift: f64,
    pub continuity_residual: f64,
    pub london_residual: f64,
    pub equilibrium_residual: f64,
    pub ml_antihermiticity: f64,
}

impl DiagRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.step,
            self.time,
            self.norm,
            self.norm_drift,
            self.continuity_residual,
            self.london_residual,
            self.equilibrium_residual,
            self.ml_antihermiticity
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub rows: Vec<DiagRow>,
}

impl Diagnostics {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(w, "{}", r.csv_line())?;
        }
        Ok(())
    }

    pub fn max_abs_norm_drift(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.norm_drift.abs())
            .fold(0.0, f64::max)
    }
}

/// Outgoing current J' at every site.
pub fn outgoing_field(
    state: &MultipletField,
    p: &PhysicalParams,
    form: CurrentForm,
) -> Vec<FourVector> {
    (0..state.grid.len())
        .into_par_iter()
        .map(|s| outgoing_current(&state.spinor(s), &state.a[s], p, form))
        .collect()
}

/// max |∂_νJ'^ν| with ∂₀J'⁰ as a backward difference against `prev_j0`.
pub fn continuity_residual(
    state: &MultipletField,
    prev_j0: &[f64],
    p: &PhysicalParams,
    form: CurrentForm,
    d: Deriv,
) -> f64 {
    let j = outgoing_field(state, p, form);
    let cdt = p.c * p.dt();
    let dj0: Vec<f64> = j
        .iter()
        .zip(prev_j0)
        .map(|(v, q)| (v[0] - q) / cdt)
        .collect();
    divergence(&state.grid, &j, &dj0, d)
        .into_iter()
        .map(f64::abs)
        .fold(0.0, f64::max)
}

/// max ‖A + λ_L²·eJ‖
pub fn london_residual(state: &MultipletField, p: &PhysicalParams) -> f64 {
    let l2 = p.lambda_l().powi(2);
    (0..state.grid.len())
        .into_par_iter()
        .map(|s| (state.a[s] + vector_current(&state.spinor(s)) * (l2 * p.e)).norm())
        .reduce(|| 0.0, f64::max)
}

/// max ‖A' − A‖ under the exact back reaction.
pub fn equilibrium_residual(state: &MultipletField, p: &PhysicalParams) -> f64 {
    (0..state.grid.len())
        .into_par_iter()
        .map(|s| (back_reaction(&state.spinor(s), &state.a[s], p) - state.a[s]).norm())
        .reduce(|| 0.0, f64::max)
}

/// max over sites of the anti-hermitian part of M_L.
pub fn ml_antihermiticity(state: &MultipletField, p: &PhysicalParams) -> f64 {
    (0..state.grid.len())
        .into_par_iter()
        .map(|s| mass_matrix(&state.spinor(s), p).antihermiticity())
        .reduce(|| 0.0, f64::max)
}
