use rayon::prelude::*;

use super::reference::{
    l2_distance, reference_dirac_solve, reference_self_check, spectral_dirac_exact,
};
use super::VerificationError;
use crate::clifford::rep;
use crate::fit::loglog_fit;
use crate::grid::Grid;
use crate::interaction::PhysicalParams;
use crate::lattice::engine::stream_generators;
use crate::lattice::{CouplingMode, Engine, LatticeConfig, MultipletField, Splitting};
use crate::{c64, Doublet8, FourVector, Mat8, Spinor4, C64};

/// Errors below this are treated as round-off; no order is fitted.
pub const ERROR_FLOOR: f64 = 1e-11;

/// Gaussian Dirac packet on a periodic line under a uniform, constant A.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketSpec {
    pub length: f64,
    pub width: f64,
    pub center: f64,
    pub k0: f64,
    pub spinor: Spinor4,
    pub a: FourVector,
    pub params: PhysicalParams,
    pub splitting: Splitting,
}

/// Gauge-doublet plane wave e^{ik·x} with uniform bare mass matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubletWave {
    pub length: f64,
    /// Fourier mode index; k = 2π·mode/length.
    pub mode: i64,
    pub amplitude: Doublet8,
    pub params: PhysicalParams,
    pub splitting: Splitting,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConvergenceProblem {
    DiracPacket(PacketSpec),
    DoubletPlaneWave(DoubletWave),
}

impl ConvergenceProblem {
    pub fn length(&self) -> f64 {
        match self {
            ConvergenceProblem::DiracPacket(s) => s.length,
            ConvergenceProblem::DoubletPlaneWave(w) => w.length,
        }
    }

    fn params(&self) -> PhysicalParams {
        match self {
            ConvergenceProblem::DiracPacket(s) => s.params,
            ConvergenceProblem::DoubletPlaneWave(w) => w.params,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub ell_values: Vec<f64>,
    pub errors: Vec<f64>,
    /// `None` when every error sits at the round-off floor.
    pub fitted_order: Option<f64>,
    pub r_squared: Option<f64>,
    /// Errors decrease strictly as ℓ decreases.
    pub monotone: bool,
    /// Measured refinement order of the reference solver, if one was used.
    pub oracle_order: Option<f64>,
    pub t_final: f64,
}

impl ConvergenceReport {
    pub fn floor_limited(&self) -> bool {
        self.errors.iter().all(|e| *e < ERROR_FLOOR)
    }
}

fn cells(length: f64, ell: f64) -> Result<usize, VerificationError> {
    let n = (length / ell).round();
    if (n * ell - length).abs() > 1e-9 * length || n < 4.0 || !(n as usize).is_multiple_of(2) {
        return Err(VerificationError::InvalidStudy(format!(
            "ell = {ell} does not give an even cell count on length {length}"
        )));
    }
    Ok(n as usize)
}

fn steps_for(t_final: f64, dt: f64) -> Result<u64, VerificationError> {
    let s = (t_final / dt).round();
    if (s * dt - t_final).abs() > 1e-9 * t_final.max(1.0) {
        return Err(VerificationError::InvalidStudy(format!(
            "T = {t_final} is not a whole number of steps dt = {dt}"
        )));
    }
    Ok(s as u64)
}

fn lattice_cfg(
    grid: Grid,
    params: PhysicalParams,
    a: &FourVector,
    splitting: Splitting,
) -> LatticeConfig {
    let coupling = if a.norm() == 0.0 {
        CouplingMode::Free
    } else {
        CouplingMode::ExternalA
    };
    LatticeConfig::new(
        grid,
        PhysicalParams {
            zeta: 1.0,
            ..params
        },
    )
    .with_coupling(coupling)
    .with_splitting(splitting)
}

fn packet_initial(grid: &Grid, s: &PacketSpec) -> Vec<Spinor4> {
    (0..grid.len())
        .map(|i| {
            let x = grid.position(i)[0];
            let r = x - s.center;
            s.spinor * C64::from_polar((-r * r / (2.0 * s.width * s.width)).exp(), s.k0 * x)
        })
        .collect()
}

fn run_lattice(
    cfg: LatticeConfig,
    state: &mut MultipletField,
    steps: u64,
) -> Result<(), VerificationError> {
    let mut eng = Engine::new(cfg, state)?;
    for _ in 0..steps {
        eng.step(state)?;
    }
    Ok(())
}

/// Lattice and reference ψ at T for one ℓ; also used by the CLI.
pub fn packet_pair(
    spec: &PacketSpec,
    ell: f64,
    t_final: f64,
) -> Result<(Grid, Vec<Spinor4>, Vec<Spinor4>), VerificationError> {
    let n = cells(spec.length, ell)?;
    let grid = Grid::line(n, ell);
    let cfg = lattice_cfg(grid, spec.params, &spec.a, spec.splitting);
    let p = cfg.params;
    let steps = steps_for(t_final, p.dt())?;
    let psi0 = packet_initial(&grid, spec);
    let mut st = MultipletField::zeros(grid);
    for (i, s) in psi0.iter().enumerate() {
        st.set_spinor(i, s);
        st.a[i] = spec.a;
    }
    run_lattice(cfg, &mut st, steps)?;
    let reference = if p.m == 0.0 && spec.a.norm() == 0.0 {
        spectral_dirac_exact(&grid, &psi0, &spec.a, t_final, &p)?
    } else {
        let a = spec.a;
        let af = move |_: f64, _: [f64; 3]| a;
        reference_dirac_solve(&grid, &psi0, &af, t_final, &p, p.dt() / 8.0)?
    };
    Ok((grid, st.spinors(), reference))
}

fn packet_error(spec: &PacketSpec, ell: f64, t_final: f64) -> Result<f64, VerificationError> {
    let (grid, lat, reference) = packet_pair(spec, ell, t_final)?;
    Ok(l2_distance(&grid, &lat, &reference))
}

/// Continuum doublet Hamiltonian at wavenumber k along x.
fn doublet_hamiltonian(k: f64, p: &PhysicalParams) -> Mat8 {
    let d = stream_generators()[0].to_matrix();
    let g0 = rep().cal_g[0];
    let dk: Mat8 = d.fixed_view::<8, 8>(0, 0).into_owned();
    dk * c64(p.hbar * p.c * k, 0.0) + g0 * c64(p.gauge_mass() * p.c * p.c, 0.0)
}

fn doublet_error(w: &DoubletWave, ell: f64, t_final: f64) -> Result<f64, VerificationError> {
    let n = cells(w.length, ell)?;
    let grid = Grid::line(n, ell);
    let cfg = lattice_cfg(grid, w.params, &FourVector::zeros(), w.splitting);
    let p = cfg.params;
    let steps = steps_for(t_final, p.dt())?;
    let k = 2.0 * std::f64::consts::PI * w.mode as f64 / w.length;
    let mut st = MultipletField::zeros(grid);
    for i in 0..n {
        let ph = C64::from_polar(1.0, k * grid.position(i)[0]);
        st.psi[i]
            .fixed_rows_mut::<8>(0)
            .copy_from(&(w.amplitude * ph));
    }
    run_lattice(cfg, &mut st, steps)?;
    let u = crate::clifford::herm_fn(&doublet_hamiltonian(k, &p), |l| {
        C64::from_polar(1.0, -l * t_final / p.hbar)
    });
    let evolved = u * w.amplitude;
    let mut s = 0.0;
    for i in 0..n {
        let want = evolved * C64::from_polar(1.0, k * grid.position(i)[0]);
        s += (st.doublet(i) - want).norm_squared();
    }
    Ok((s * ell).sqrt())
}

/// Lattice error against the problem's oracle at T = ½·L/c for each ℓ, and the
/// fitted log-log order.
pub fn convergence_study(
    problem: &ConvergenceProblem,
    ell_list: &[f64],
) -> Result<ConvergenceReport, VerificationError> {
    if ell_list.len() < 4 {
        return Err(VerificationError::InvalidStudy(format!(
            "need at least 4 ell values, got {}",
            ell_list.len()
        )));
    }
    let mut ells = ell_list.to_vec();
    ells.sort_by(|a, b| b.total_cmp(a));
    let (hi, lo) = (ells[0], ells[ells.len() - 1]);
    if !(lo > 0.0 && hi / lo >= 8.0 - 1e-12) {
        return Err(VerificationError::InvalidStudy(format!(
            "ell values must span at least 8x (got {hi}/{lo})"
        )));
    }
    let p = problem.params();
    let t_final = 0.5 * problem.length() / p.c;
    let mut oracle_order = None;
    if let ConvergenceProblem::DiracPacket(spec) = problem {
        if !(p.m == 0.0 && spec.a.norm() == 0.0) {
            let n = cells(spec.length, lo)?;
            let grid = Grid::line(n, lo);
            let psi0 = packet_initial(&grid, spec);
            let a = spec.a;
            let af = move |_: f64, _: [f64; 3]| a;
            let pp = PhysicalParams {
                ell: lo,
                zeta: 1.0,
                ..p
            };
            // Largest stable RK4 step for the grid's Nyquist mode is ≈ 0.9·δt.
            oracle_order = Some(reference_self_check(
                &grid,
                &psi0,
                &af,
                t_final,
                &pp,
                pp.dt() / 2.0,
            )?);
        }
    }
    let errors: Vec<f64> = ells
        .par_iter()
        .map(|&ell| match problem {
            ConvergenceProblem::DiracPacket(s) => packet_error(s, ell, t_final),
            ConvergenceProblem::DoubletPlaneWave(w) => doublet_error(w, ell, t_final),
        })
        .collect::<Result<_, _>>()?;
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    let floor = errors.iter().all(|e| *e < ERROR_FLOOR);
    let fit = if floor {
        None
    } else {
        loglog_fit(&ells, &errors)
    };
    Ok(ConvergenceReport {
        ell_values: ells,
        errors,
        fitted_order: fit.map(|f| f.slope),
        r_squared: fit.map(|f| f.r_squared),
        monotone,
        oracle_order,
        t_final,
    })
}
