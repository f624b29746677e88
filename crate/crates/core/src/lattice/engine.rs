use nalgebra::Matrix4;
use rayon::prelude::*;
use thiserror::Error;

use super::config::{CouplingMode, LatticeConfig, Splitting};
use super::diagnostics::{self, DiagRow, Diagnostics};
use super::field::MultipletField;
use super::{PSI, TILDE_A, TILDE_PSI};
use crate::clifford::rep;
use crate::interaction::{back_reaction, mass_matrix, InteractionError};
use crate::{c64, FourVector, Mat16, Mat4, Multiplet16, C64, I};

/// Slack allowed on |K| ≤ 1 before a site counts as infeasible.
const FEASIBILITY_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("collide infeasible at site {site}: mass eigenvalue fraction {value} exceeds 1")]
    MassTooLarge { site: usize, value: f64 },
    #[error("invalid lattice configuration: {0}")]
    InvalidConfig(String),
    #[error("state grid does not match the configured grid")]
    GridMismatch,
    #[error(
        "plane-wave operator needs a uniform mass matrix (self-consistent state is not uniform)"
    )]
    NonUniformMass,
    #[error("snapshot callback failed: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Interaction(#[from] InteractionError),
}

/// A matrix with exactly one nonzero per row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial16 {
    pub col: [usize; 16],
    pub coef: [C64; 16],
}

impl Monomial16 {
    pub fn from_matrix(m: &Mat16) -> Option<Self> {
        let mut col = [0usize; 16];
        let mut coef = [C64::new(0.0, 0.0); 16];
        for r in 0..16 {
            let nz: Vec<usize> = (0..16)
                .filter(|&c| m[(r, c)] != C64::new(0.0, 0.0))
                .collect();
            if nz.len() != 1 {
                return None;
            }
            col[r] = nz[0];
            coef[r] = m[(r, nz[0])];
        }
        Some(Monomial16 { col, coef })
    }

    #[inline]
    pub fn apply(&self, v: &Multiplet16) -> Multiplet16 {
        Multiplet16::from_fn(|r, _| self.coef[r] * v[self.col[r]])
    }

    pub fn to_matrix(&self) -> Mat16 {
        let mut m = Mat16::zeros();
        for r in 0..16 {
            m[(r, self.col[r])] = self.coef[r];
        }
        m
    }
}

/// Δ⁰Δ^i for i = 1, 2, 3.
pub fn stream_generators() -> [Monomial16; 3] {
    let r = rep();
    std::array::from_fn(|i| {
        Monomial16::from_matrix(&(r.delta[0] * r.delta[i + 1])).expect("Δ⁰Δ^i is monomial")
    })
}

/// G^μ = eA^μ per site. The kernels apply it through n⊗h⊗1₄, i.e. to the ψ block only.
pub fn build_g(a: &[FourVector], e: f64) -> Vec<FourVector> {
    a.iter().map(|v| v * e).collect()
}

/// n⊗h⊗1₄·g as a 16×16 matrix.
pub fn g_embedding(g: f64) -> Mat16 {
    let mut m = Mat16::zeros();
    for r in PSI..PSI + 4 {
        m[(r, r)] = c64(g, 0.0);
    }
    m
}

/// Gauge-doublet collide data at one site: B = U diag(λ) U†.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteMass {
    pub u: Mat4,
    pub lam: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
enum PhiMass {
    Uniform(f64),
    PerSite(Vec<SiteMass>),
}

pub struct Engine {
    cfg: LatticeConfig,
    gens: [Monomial16; 3],
    phi_mass: PhiMass,
    ml_antihermiticity: f64,
    step_index: u64,
    scratch: Vec<Multiplet16>,
}

/// Snapshot and diagnostic cadence; 0 disables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Schedule {
    pub snapshot_every: u64,
    pub diag_every: u64,
}

impl Engine {
    pub fn new(cfg: LatticeConfig, state: &MultipletField) -> Result<Self, LatticeError> {
        let v = cfg.violations();
        if !v.is_empty() {
            return Err(LatticeError::InvalidConfig(v.join("; ")));
        }
        if state.grid != cfg.grid {
            return Err(LatticeError::GridMismatch);
        }
        let n = cfg.grid.len();
        let b = cfg.gauge_mass_fraction();
        let mut eng = Engine {
            cfg,
            gens: stream_generators(),
            phi_mass: PhiMass::Uniform(b),
            ml_antihermiticity: 0.0,
            step_index: 0,
            scratch: vec![Multiplet16::zeros(); n],
        };
        if eng.cfg.coupling == CouplingMode::SelfConsistent {
            eng.rebuild_mass(state)?;
        }
        Ok(eng)
    }

    pub fn config(&self) -> &LatticeConfig {
        &self.cfg
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.cfg.params.dt()
    }

    /// Largest anti-hermitian part of M_L discarded at the last rebuild.
    pub fn ml_antihermiticity(&self) -> f64 {
        self.ml_antihermiticity
    }

    fn coupled(&self) -> bool {
        self.cfg.coupling != CouplingMode::Free
    }

    /// exp(iφΔ⁰Δ^i) restricted to the ψ block, φ = ℓ·G^i/(ħc).
    #[inline]
    fn phase_site(&self, v: &Multiplet16, a_axis: f64, axis: usize) -> Multiplet16 {
        let p = &self.cfg.params;
        let phi = p.ell * p.e * a_axis / (p.hbar * p.c);
        if phi == 0.0 {
            return *v;
        }
        let (s, c) = phi.sin_cos();
        let g = &self.gens[axis];
        let mut out = *v;
        for r in PSI..PSI + 4 {
            out[r] = v[r] * c + I * s * g.coef[r] * v[g.col[r]];
        }
        out
    }

    /// Shift Δ⁰Δ^i = +1 eigencomponents by +1 cell and −1 eigencomponents by −1
    /// cell, after the pointwise phase.
    pub fn stream_axis(&mut self, state: &mut MultipletField, axis: usize) {
        let grid = state.grid;
        let coupled = self.coupled();
        let mut out = std::mem::take(&mut self.scratch);
        let src = &state.psi;
        let a = &state.a;
        let this = &*self;
        let phased = |site: usize| {
            if coupled {
                this.phase_site(&src[site], a[site][axis + 1], axis)
            } else {
                src[site]
            }
        };
        let g = self.gens[axis];
        out.par_iter_mut().enumerate().for_each(|(x, o)| {
            let from_left = phased(grid.neighbor(x, axis, -1));
            let from_right = phased(grid.neighbor(x, axis, 1));
            for r in 0..16 {
                let sum = from_left[r] + from_right[r];
                let diff = from_left[g.col[r]] - from_right[g.col[r]];
                o[r] = (sum + g.coef[r] * diff) * 0.5;
            }
        });
        self.scratch = std::mem::replace(&mut state.psi, out);
    }

    #[inline]
    fn collide_site(&self, v: &mut Multiplet16, site: usize, fraction: f64) {
        let p = &self.cfg.params;
        let theta = p.mass_fraction().asin() * fraction;
        if theta != 0.0 {
            let ep = C64::from_polar(1.0, -theta);
            let em = ep.conj();
            for base in [PSI, TILDE_PSI] {
                v[base] *= ep;
                v[base + 1] *= ep;
                v[base + 2] *= em;
                v[base + 3] *= em;
            }
        }
        match &self.phi_mass {
            PhiMass::Uniform(b) => {
                let t = b.asin() * fraction;
                let (s, c) = t.sin_cos();
                for r in 0..4 {
                    let (x, y) = (v[r], v[TILDE_A + r]);
                    v[r] = x * c - I * s * y;
                    v[TILDE_A + r] = y * c - I * s * x;
                }
            }
            PhiMass::PerSite(m) => {
                let m = &m[site];
                let ud = m.u.adjoint();
                let x = ud * v.fixed_rows::<4>(0);
                let y = ud * v.fixed_rows::<4>(TILDE_A);
                let mut x2 = x;
                let mut y2 = y;
                for j in 0..4 {
                    let (s, c) = (m.lam[j].asin() * fraction).sin_cos();
                    x2[j] = x[j] * c - I * s * y[j];
                    y2[j] = y[j] * c - I * s * x[j];
                }
                v.fixed_rows_mut::<4>(0).copy_from(&(m.u * x2));
                v.fixed_rows_mut::<4>(TILDE_A).copy_from(&(m.u * y2));
            }
        }
    }

    /// 𝒞^f = exp(−i·f·arcsin(½{Δ⁰, m_HE}c²δt/ħ)) at every site.
    pub fn collide(&self, state: &mut MultipletField, fraction: f64) {
        state
            .psi
            .par_iter_mut()
            .enumerate()
            .for_each(|(s, v)| self.collide_site(v, s, fraction));
    }

    #[inline]
    fn g0_site(&self, v: &mut Multiplet16, a0: f64, fraction: f64) {
        let p = &self.cfg.params;
        let ph = C64::from_polar(1.0, -p.e * a0 * p.dt() * fraction / p.hbar);
        for r in PSI..PSI + 4 {
            v[r] *= ph;
        }
    }

    /// e^{−i·f·G₀δt/ħ} on the ψ block.
    pub fn g0_phase(&self, state: &mut MultipletField, fraction: f64) {
        if !self.coupled() {
            return;
        }
        let a = &state.a;
        state
            .psi
            .par_iter_mut()
            .enumerate()
            .for_each(|(s, v)| self.g0_site(v, a[s][0], fraction));
    }

    /// Rebuild the per-site gauge-doublet collide data from the current ψ block.
    pub fn rebuild_mass(&mut self, state: &MultipletField) -> Result<(), LatticeError> {
        let p = self.cfg.params;
        let mu = p.gauge_mass();
        let k = p.c * p.c * p.dt() / (2.0 * p.hbar);
        let per: Vec<(Result<SiteMass, f64>, f64)> = (0..state.grid.len())
            .into_par_iter()
            .map(|s| {
                let mm = mass_matrix(&state.spinor(s), &p);
                let anti = mm.antihermiticity();
                let upper: Mat4 = mm.ml.fixed_view::<4, 4>(0, 0).into_owned();
                let herm = (upper + upper.adjoint()) * c64(0.5, 0.0);
                let b = (herm + Mat4::identity() * c64(mu, 0.0)) * c64(k, 0.0);
                let eig = b.symmetric_eigen();
                let mut lam = [0.0; 4];
                for j in 0..4 {
                    let l = eig.eigenvalues[j];
                    if l.abs() > 1.0 + FEASIBILITY_SLACK {
                        return (Err(l.abs()), anti);
                    }
                    lam[j] = l.clamp(-1.0, 1.0);
                }
                (
                    Ok(SiteMass {
                        u: eig.eigenvectors,
                        lam,
                    }),
                    anti,
                )
            })
            .collect();
        let mut masses = Vec::with_capacity(per.len());
        let mut worst = 0.0f64;
        for (site, (m, anti)) in per.into_iter().enumerate() {
            worst = worst.max(anti);
            match m {
                Ok(m) => masses.push(m),
                Err(value) => return Err(LatticeError::MassTooLarge { site, value }),
            }
        }
        self.phi_mass = PhiMass::PerSite(masses);
        self.ml_antihermiticity = worst;
        Ok(())
    }

    /// A ← exact back reaction of the local ψ block.
    pub fn react(&self, state: &mut MultipletField) {
        let p = self.cfg.params;
        let spinors = state.spinors();
        state
            .a
            .par_iter_mut()
            .zip(spinors.par_iter())
            .for_each(|(a, s)| *a = back_reaction(s, a, &p));
    }

    /// Axes in application order for the current step.
    fn axis_order(&self) -> Vec<usize> {
        let dims = self.cfg.grid.dims;
        let reversed = match self.cfg.splitting {
            Splitting::LieXyz => true,
            Splitting::Strang => self.step_index.is_multiple_of(2),
        };
        if reversed {
            (0..dims).rev().collect()
        } else {
            (0..dims).collect()
        }
    }

    pub fn step(&mut self, state: &mut MultipletField) -> Result<(), LatticeError> {
        let axes = self.axis_order();
        match self.cfg.splitting {
            Splitting::LieXyz => {
                self.g0_phase(state, 1.0);
                for ax in axes {
                    self.stream_axis(state, ax);
                }
                self.collide(state, 1.0);
            }
            Splitting::Strang => {
                self.g0_phase(state, 0.5);
                self.collide(state, 0.5);
                for ax in axes {
                    self.stream_axis(state, ax);
                }
                self.collide(state, 0.5);
                self.g0_phase(state, 0.5);
            }
        }
        if self.cfg.coupling == CouplingMode::SelfConsistent {
            self.react(state);
            self.rebuild_mass(state)?;
        }
        self.step_index += 1;
        Ok(())
    }

    /// Run `n_steps`, calling `on_snapshot(step, time, state)` at the start and on
    /// every `snapshot_every`-th step.
    pub fn evolve<F>(
        &mut self,
        state: &mut MultipletField,
        n_steps: u64,
        schedule: Schedule,
        mut on_snapshot: F,
    ) -> Result<Diagnostics, LatticeError>
    where
        F: FnMut(u64, f64, &MultipletField) -> Result<(), String>,
    {
        if state.grid != self.cfg.grid {
            return Err(LatticeError::GridMismatch);
        }
        let mut diags = Diagnostics::default();
        if n_steps == 0 {
            return Ok(diags);
        }
        if schedule.snapshot_every > 0 {
            on_snapshot(self.step_index, self.time(), state).map_err(LatticeError::Snapshot)?;
        }
        let norm0 = state.norm();
        let p = self.cfg.params;
        let form = self.cfg.current_form;
        for _ in 0..n_steps {
            let next = self.step_index + 1;
            let want_diag = schedule.diag_every > 0 && next.is_multiple_of(schedule.diag_every);
            let prev_j0 = if want_diag {
                Some(
                    diagnostics::outgoing_field(state, &p, form)
                        .iter()
                        .map(|j| j[0])
                        .collect::<Vec<_>>(),
                )
            } else {
                None
            };
            self.step(state)?;
            if let Some(prev_j0) = prev_j0 {
                let norm = state.norm();
                let cont =
                    diagnostics::continuity_residual(state, &prev_j0, &p, form, self.cfg.deriv);
                diags.rows.push(DiagRow {
                    step: self.step_index,
                    time: self.time(),
                    norm,
                    norm_drift: norm - norm0,
                    continuity_residual: cont,
                    london_residual: diagnostics::london_residual(state, &p),
                    equilibrium_residual: diagnostics::equilibrium_residual(state, &p),
                    ml_antihermiticity: diagnostics::ml_antihermiticity(state, &p),
                });
            }
            if schedule.snapshot_every > 0
                && self.step_index.is_multiple_of(schedule.snapshot_every)
            {
                on_snapshot(self.step_index, self.time(), state).map_err(LatticeError::Snapshot)?;
            }
        }
        Ok(diags)
    }

    /// Matrix of a site kernel, assembled column by column.
    fn site_matrix(&self, f: impl Fn(&mut Multiplet16)) -> Mat16 {
        let mut m = Mat16::zeros();
        for j in 0..16 {
            let mut v = Multiplet16::zeros();
            v[j] = c64(1.0, 0.0);
            f(&mut v);
            m.set_column(j, &v);
        }
        m
    }

    /// One-step operator on plane waves Ψ(x) = v·e^{ik·x} with uniform A, for the
    /// step of the given parity.
    pub fn plane_wave_operator(
        &self,
        k: [f64; 3],
        a: &FourVector,
        parity: u64,
    ) -> Result<Mat16, LatticeError> {
        if matches!(self.phi_mass, PhiMass::PerSite(_)) {
            return Err(LatticeError::NonUniformMass);
        }
        let coupled = self.coupled();
        let ell = self.cfg.grid.ell;
        let stream = |axis: usize| -> Mat16 {
            let d = self.gens[axis].to_matrix();
            let id = Mat16::identity();
            let ph = C64::from_polar(1.0, -k[axis] * ell);
            let shift = (id + d) * (ph * 0.5) + (id - d) * (ph.conj() * 0.5);
            let phase = if coupled {
                self.site_matrix(|v| *v = self.phase_site(v, a[axis + 1], axis))
            } else {
                id
            };
            shift * phase
        };
        let collide = |f: f64| self.site_matrix(|v| self.collide_site(v, 0, f));
        let g0 = |f: f64| {
            if coupled {
                self.site_matrix(|v| self.g0_site(v, a[0], f))
            } else {
                Mat16::identity()
            }
        };
        let dims = self.cfg.grid.dims;
        let reversed = match self.cfg.splitting {
            Splitting::LieXyz => true,
            Splitting::Strang => parity.is_multiple_of(2),
        };
        let axes: Vec<usize> = if reversed {
            (0..dims).rev().collect()
        } else {
            (0..dims).collect()
        };
        let mut s = Mat16::identity();
        for ax in axes {
            s = stream(ax) * s;
        }
        Ok(match self.cfg.splitting {
            Splitting::LieXyz => collide(1.0) * s * g0(1.0),
            Splitting::Strang => g0(0.5) * collide(0.5) * s * collide(0.5) * g0(0.5),
        })
    }
}

/// exp(−i·arcsin(K)) for a hermitian K with ‖K‖ ≤ 1, by eigendecomposition. Used
/// as an independent check of the collide kernels.
pub fn arcsin_exp<const N: usize>(
    k: &nalgebra::SMatrix<C64, N, N>,
) -> nalgebra::SMatrix<C64, N, N> {
    crate::clifford::herm_fn(k, |l| C64::from_polar(1.0, -l.clamp(-1.0, 1.0).asin()))
}

/// ½{Δ⁰, M}·c²δt/ħ for a 16×16 mass matrix M.
pub fn collide_generator(m_he: &Mat16, dt: f64, hbar: f64, c: f64) -> Mat16 {
    let d0 = rep().delta[0];
    (d0 * m_he + m_he * d0) * c64(0.5 * c * c * dt / hbar, 0.0)
}

/// Hermitian part of an 4×4 matrix.
pub fn hermitian_part(m: &Matrix4<C64>) -> Matrix4<C64> {
    (m + m.adjoint()) * c64(0.5, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::interaction::PhysicalParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg1d(n: usize, ell: f64, m: f64) -> LatticeConfig {
        LatticeConfig::new(
            Grid::line(n, ell),
            PhysicalParams {
                m,
                ..Default::default()
            },
        )
    }

    fn random_state(grid: Grid, seed: u64) -> MultipletField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = MultipletField::zeros(grid);
        for v in &mut f.psi {
            *v = Multiplet16::from_fn(|_, _| {
                c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
        }
        let n = f.norm();
        f.scale(1.0 / n);
        f
    }

    fn full_mhe(ml: &crate::Mat8, m: f64) -> Mat16 {
        let mut out = Mat16::zeros();
        out.fixed_view_mut::<8, 8>(0, 0).copy_from(ml);
        for r in 8..16 {
            out[(r, r)] = c64(m, 0.0);
        }
        out
    }

    #[test]
    fn generators_are_involutions() {
        for g in stream_generators() {
            let d = g.to_matrix();
            assert_eq!(d * d, Mat16::identity());
        }
    }

    #[test]
    fn delta_site_splits_into_eigenprojections() {
        let grid = Grid::line(8, 1.0);
        let cfg = cfg1d(8, 1.0, 0.0);
        let mut st = MultipletField::zeros(grid);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = Multiplet16::from_fn(|_, _| {
            c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        st.psi[4] = v;
        let mut eng = Engine::new(cfg, &st).unwrap();
        eng.stream_axis(&mut st, 0);
        // 16×16 oracle: projectors from the explicit product Δ⁰Δ¹.
        let r = rep();
        let d = r.delta[0] * r.delta[1];
        let id = Mat16::identity();
        let vp = (id + d) * v * c64(0.5, 0.0);
        let vm = (id - d) * v * c64(0.5, 0.0);
        assert!((st.psi[5] - vp).norm() < 1e-15);
        assert!((st.psi[3] - vm).norm() < 1e-15);
        for s in [0, 1, 2, 4, 6, 7] {
            assert_eq!(st.psi[s].norm(), 0.0);
        }
    }

    #[test]
    fn plane_wave_eigencomponents_pick_up_phases() {
        let n = 16;
        let grid = Grid::line(n, 1.0);
        let cfg = cfg1d(n, 1.0, 0.0);
        let k = 2.0 * std::f64::consts::PI * 3.0 / n as f64;
        let d = rep().delta[0] * rep().delta[1];
        let mut v = Multiplet16::zeros();
        v[8] = c64(1.0, 0.0);
        let vp = (Mat16::identity() + d) * v * c64(0.5, 0.0);
        let mut st = MultipletField::zeros(grid);
        for s in 0..n {
            st.psi[s] = vp * C64::from_polar(1.0, k * s as f64);
        }
        let before = st.clone();
        let mut eng = Engine::new(cfg, &st).unwrap();
        eng.stream_axis(&mut st, 0);
        for s in 0..n {
            assert!((st.psi[s] - before.psi[s] * C64::from_polar(1.0, -k)).norm() < 1e-14);
        }
    }

    #[test]
    fn phase_touches_only_psi_block_with_unit_modulus() {
        let grid = Grid::line(8, 0.5);
        let cfg = cfg1d(8, 0.5, 0.0).with_coupling(CouplingMode::ExternalA);
        let mut st = random_state(grid, 5);
        st.a[2] = FourVector::new(0.0, 0.8, 0.0, 0.0);
        let eng = Engine::new(cfg, &st).unwrap();
        let v = st.psi[2];
        let out = eng.phase_site(&v, st.a[2][1], 0);
        for r in 0..16 {
            if !(PSI..PSI + 4).contains(&r) {
                assert_eq!(out[r], v[r]);
            }
        }
        assert!((out.norm() - v.norm()).abs() < 1e-15);
        let m = eng.site_matrix(|x| *x = eng.phase_site(x, 0.8, 0));
        assert!(crate::clifford::unitarity_defect(&m) < 1e-15);
    }

    #[test]
    fn build_g_examples() {
        let a = vec![FourVector::zeros(); 3];
        assert!(build_g(&a, 2.0).iter().all(|g| g.norm() == 0.0));
        let a = vec![FourVector::new(0.1, 0.2, 0.3, 0.4); 3];
        let g = build_g(&a, 2.0);
        assert!(g
            .iter()
            .all(|x| (x - FourVector::new(0.2, 0.4, 0.6, 0.8)).norm() < 1e-15));
        let emb = g_embedding(0.7);
        for r in 0..16 {
            let want = if (PSI..PSI + 4).contains(&r) {
                0.7
            } else {
                0.0
            };
            assert_eq!(emb[(r, r)], c64(want, 0.0));
        }
    }

    #[test]
    fn collide_massless_is_identity_on_psi() {
        let grid = Grid::line(4, 1.0);
        let p = PhysicalParams {
            m: 0.0,
            m0: 1e12,
            rho0: 1.0,
            ..Default::default()
        };
        let cfg = LatticeConfig::new(grid, p);
        let st = random_state(grid, 1);
        let eng = Engine::new(cfg, &st).unwrap();
        let m = eng.site_matrix(|v| eng.collide_site(v, 0, 1.0));
        let b = eng.cfg.gauge_mass_fraction();
        assert!(b < 1e-5);
        assert!((m - Mat16::identity()).norm() < 4.0 * b);
        for r in 8..16 {
            for c in 0..16 {
                let want = if r == c { 1.0 } else { 0.0 };
                assert_eq!(m[(r, c)], c64(want, 0.0));
            }
        }
    }

    #[test]
    fn collide_saturated_psi_block_is_minus_i_gamma0() {
        let grid = Grid::line(4, 1.0);
        let cfg = cfg1d(4, 1.0, 1.0);
        let st = random_state(grid, 1);
        let eng = Engine::new(cfg, &st).unwrap();
        let m = eng.site_matrix(|v| eng.collide_site(v, 0, 1.0));
        let d0 = rep().delta[0];
        for r in 8..16 {
            for c in 8..16 {
                assert!((m[(r, c)] + I * d0[(r, c)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn collide_matches_eigen_exponential_oracle() {
        let grid = Grid::line(4, 0.1);
        let p = PhysicalParams {
            m: 2.0,
            m0: 0.8,
            e: 1.0,
            rho0: 0.5,
            ..Default::default()
        };
        let cfg = LatticeConfig::new(grid, p).with_coupling(CouplingMode::SelfConsistent);
        let mut st = random_state(grid, 9);
        st.scale(3.0);
        let eng = Engine::new(cfg, &st).unwrap();
        let pp = eng.cfg.params;
        for site in 0..4 {
            let ml = mass_matrix(&st.spinor(site), &pp).ml;
            let mh = (ml + ml.adjoint()) * c64(0.5, 0.0);
            let k = collide_generator(&full_mhe(&mh, pp.m), pp.dt(), pp.hbar, pp.c);
            let oracle = arcsin_exp(&k);
            let m = eng.site_matrix(|v| eng.collide_site(v, site, 1.0));
            assert!((m - oracle).norm() < 1e-12, "{}", (m - oracle).norm());
            assert!(crate::clifford::unitarity_defect(&m) < 1e-12);
            let half = eng.site_matrix(|v| eng.collide_site(v, site, 0.5));
            assert!((half * half - m).norm() < 1e-12);
        }
        assert!(eng.ml_antihermiticity() > 0.0);
    }

    #[test]
    fn mass_too_large_is_reported() {
        let grid = Grid::line(4, 1.0);
        let p = PhysicalParams {
            m0: 1.0,
            e: 1.0,
            rho0: 1.0,
            ..Default::default()
        };
        let cfg = LatticeConfig::new(grid, p).with_coupling(CouplingMode::SelfConsistent);
        let mut st = random_state(grid, 2);
        st.scale(30.0);
        assert!(matches!(
            Engine::new(cfg, &st),
            Err(LatticeError::MassTooLarge { .. })
        ));
    }

    #[test]
    fn infeasible_config_rejected() {
        let cfg = cfg1d(8, 1.0, 1.5);
        let st = MultipletField::zeros(cfg.grid);
        assert!(matches!(
            Engine::new(cfg, &st),
            Err(LatticeError::InvalidConfig(_))
        ));
    }

    #[test]
    fn massless_free_step_is_bidirectional_shift() {
        let grid = Grid::line(8, 1.0);
        let p = PhysicalParams {
            m: 0.0,
            m0: 1e12,
            ..Default::default()
        };
        let cfg = LatticeConfig::new(grid, p).with_splitting(Splitting::LieXyz);
        let mut st = MultipletField::zeros(grid);
        let mut v = Multiplet16::zeros();
        v[8] = c64(1.0, 0.0);
        v[10] = c64(0.0, 1.0);
        st.psi[3] = v;
        let mut eng = Engine::new(cfg, &st).unwrap();
        eng.step(&mut st).unwrap();
        let d = rep().delta[0] * rep().delta[1];
        let id = Mat16::identity();
        assert!((st.psi[4] - (id + d) * v * c64(0.5, 0.0)).norm() < 1e-15);
        assert!((st.psi[2] - (id - d) * v * c64(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn uniform_g0_is_global_phase() {
        let grid = Grid::line(16, 0.25);
        let p = PhysicalParams {
            m: 0.7,
            ..Default::default()
        };
        let base = LatticeConfig::new(grid, p);
        let g0 = 0.9;
        for split in [Splitting::LieXyz, Splitting::Strang] {
            let mut free = random_state(grid, 4);
            for v in &mut free.psi {
                v.fixed_rows_mut::<8>(0).fill(c64(0.0, 0.0));
                v.fixed_rows_mut::<4>(12).fill(c64(0.0, 0.0));
            }
            let mut ext = free.clone();
            for a in &mut ext.a {
                *a = FourVector::new(g0, 0.0, 0.0, 0.0);
            }
            let mut e1 = Engine::new(base.clone().with_splitting(split), &free).unwrap();
            let mut e2 = Engine::new(
                base.clone()
                    .with_splitting(split)
                    .with_coupling(CouplingMode::ExternalA),
                &ext,
            )
            .unwrap();
            e1.step(&mut free).unwrap();
            e2.step(&mut ext).unwrap();
            let ph = C64::from_polar(1.0, -g0 * p.e * 0.25 / p.hbar);
            for s in 0..16 {
                assert!((ext.psi[s] - free.psi[s] * ph).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn plane_wave_operator_matches_engine() {
        let n = 16;
        let grid = Grid::new(2, &[n, n], 0.5).unwrap();
        let p = PhysicalParams {
            m: 0.9,
            ..Default::default()
        };
        let a = FourVector::new(0.3, 0.2, -0.4, 0.0);
        let cfg = LatticeConfig::new(grid, p).with_coupling(CouplingMode::ExternalA);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let v = Multiplet16::from_fn(|_, _| {
            c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let kk = [
            2.0 * std::f64::consts::PI * 2.0 / (n as f64 * 0.5),
            2.0 * std::f64::consts::PI * 5.0 / (n as f64 * 0.5),
            0.0,
        ];
        let mut st = MultipletField::zeros(grid);
        for s in 0..grid.len() {
            let x = grid.position(s);
            st.psi[s] = v * C64::from_polar(1.0, kk[0] * x[0] + kk[1] * x[1]);
            st.a[s] = a;
        }
        let mut eng = Engine::new(cfg, &st).unwrap();
        for parity in 0..2 {
            let u = eng.plane_wave_operator(kk, &a, parity).unwrap();
            let before = st.clone();
            eng.step(&mut st).unwrap();
            for s in 0..grid.len() {
                let x = grid.position(s);
                let want = u * before.psi[s];
                let _ = x;
                assert!((st.psi[s] - want).norm() < 1e-13, "parity {parity}");
            }
        }
    }

    #[test]
    fn translation_covariance_bitwise() {
        let grid = Grid::new(2, &[8, 4], 0.5).unwrap();
        let p = PhysicalParams {
            m: 0.8,
            ..Default::default()
        };
        let cfg = LatticeConfig::new(grid, p).with_coupling(CouplingMode::ExternalA);
        let mut st = random_state(grid, 11);
        for a in &mut st.a {
            *a = FourVector::new(0.1, 0.2, 0.3, 0.0);
        }
        let mut shifted = st.translated(0, 3).translated(1, 1);
        let mut e1 = Engine::new(cfg.clone(), &st).unwrap();
        let mut e2 = Engine::new(cfg, &shifted).unwrap();
        for _ in 0..5 {
            e1.step(&mut st).unwrap();
            e2.step(&mut shifted).unwrap();
        }
        assert_eq!(st.translated(0, 3).translated(1, 1).psi, shifted.psi);
    }

    #[test]
    fn light_cone_support() {
        let grid = Grid::new(2, &[16, 16], 1.0).unwrap();
        let p = PhysicalParams {
            m: 0.5,
            ..Default::default()
        };
        let cfg = LatticeConfig::new(grid, p);
        let mut st = MultipletField::zeros(grid);
        st.psi[grid.index(8, 8, 0)] = Multiplet16::from_element(c64(0.25, 0.0));
        let mut eng = Engine::new(cfg, &st).unwrap();
        for n in 1..=3i64 {
            eng.step(&mut st).unwrap();
            for s in 0..grid.len() {
                let c = grid.coords(s);
                let far = (c[0] as i64 - 8).abs() > n || (c[1] as i64 - 8).abs() > n;
                if far {
                    assert_eq!(st.psi[s].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn evolve_zero_steps_is_identity() {
        let grid = Grid::line(8, 0.5);
        let cfg = cfg1d(8, 0.5, 0.3);
        let mut st = random_state(grid, 12);
        let before = st.clone();
        let mut eng = Engine::new(cfg, &st).unwrap();
        let d = eng
            .evolve(
                &mut st,
                0,
                Schedule {
                    snapshot_every: 1,
                    diag_every: 1,
                },
                |_, _, _| Ok(()),
            )
            .unwrap();
        assert!(d.rows.is_empty());
        assert_eq!(st, before);
    }

    #[test]
    fn unitarity_all_modes() {
        let grid = Grid::line(32, 0.5);
        for mode in [
            CouplingMode::Free,
            CouplingMode::ExternalA,
            CouplingMode::SelfConsistent,
        ] {
            for split in [Splitting::LieXyz, Splitting::Strang] {
                let p = PhysicalParams {
                    m: 0.6,
                    m0: 0.5,
                    rho0: 0.5,
                    ..Default::default()
                };
                let cfg = LatticeConfig::new(grid, p)
                    .with_coupling(mode)
                    .with_splitting(split);
                let mut st = random_state(grid, 13);
                for (i, a) in st.a.iter_mut().enumerate() {
                    *a =
                        FourVector::new(0.2 * (i as f64).sin(), 0.3, -0.1 * (i as f64).cos(), 0.05);
                }
                let mut eng = Engine::new(cfg, &st).unwrap();
                let n0 = st.norm();
                for _ in 0..200 {
                    let before = st.norm();
                    eng.step(&mut st).unwrap();
                    assert!((st.norm() - before).abs() < 1e-12);
                }
                assert!((st.norm() - n0).abs() < 1e-11, "{mode:?} {split:?}");
            }
        }
    }
}
