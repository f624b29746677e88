use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use super::VerificationError;
use crate::lattice::{CouplingMode, Engine, LatticeConfig, MultipletField, Splitting};
use crate::{FourVector, C64};

/// Eigenvalues closer than this are treated as one degenerate cluster.
const DEGENERACY_TOL: f64 = 1e-9;
/// Minimum projected weight for a branch to be matched to a cluster.
const MATCH_MIN_WEIGHT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    /// Dirac block ψ.
    Psi,
    /// Gauge doublet Φ = (𝒜, 𝒜̃).
    Phi,
}

impl Block {
    pub fn range(&self) -> Range<usize> {
        match self {
            Block::Psi => 8..12,
            Block::Phi => 0..8,
        }
    }

    /// Rest mass that sets the continuum branch.
    pub fn mass(&self, cfg: &LatticeConfig) -> f64 {
        match self {
            Block::Psi => cfg.params.m,
            Block::Phi => cfg.params.gauge_mass(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionSample {
    pub k: [f64; 3],
    /// One entry per branch, labelled consistently along the scan.
    pub omega_measured: Vec<f64>,
    /// ±√(c²k² + (Mc²/ħ)²) with the sign of the measured branch.
    pub omega_continuum: Vec<f64>,
    /// Unit-circle defect max ||λ| − 1| of the sampled operator.
    pub unit_defect: f64,
    /// Branch labels could not be carried over from the previous k.
    pub ambiguous: bool,
}

impl DispersionSample {
    pub fn abs_error(&self) -> Vec<f64> {
        self.omega_measured
            .iter()
            .zip(&self.omega_continuum)
            .map(|(a, b)| (a - b).abs())
            .collect()
    }
}

/// Plane-wave operator of the block and the time it spans. Strang in more than
/// one dimension alternates the axis order, so two steps are combined.
pub fn block_operator(
    engine: &Engine,
    k: [f64; 3],
    a: &FourVector,
    block: Block,
) -> Result<(DMatrix<C64>, f64), VerificationError> {
    let cfg = engine.config();
    let dt = cfg.params.dt();
    let (u, span) = if cfg.splitting == Splitting::Strang && cfg.grid.dims > 1 {
        let u0 = engine.plane_wave_operator(k, a, 0)?;
        let u1 = engine.plane_wave_operator(k, a, 1)?;
        (u1 * u0, 2.0 * dt)
    } else {
        (engine.plane_wave_operator(k, a, 0)?, dt)
    };
    let r = block.range();
    let n = r.len();
    Ok((
        DMatrix::from_fn(n, n, |i, j| u[(r.start + i, r.start + j)]),
        span,
    ))
}

fn eigen(m: &DMatrix<C64>) -> (Vec<C64>, DMatrix<C64>) {
    // Unitary, hence normal: the Schur form is diagonal and Q holds eigenvectors.
    let (q, t) = m.clone().schur().unpack();
    ((0..m.nrows()).map(|i| t[(i, i)]).collect(), q)
}

fn clusters(ev: &[C64]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![];
    for i in 0..ev.len() {
        match out
            .iter_mut()
            .find(|g| g.iter().any(|&j| (ev[j] - ev[i]).norm() < DEGENERACY_TOL))
        {
            Some(g) => g.push(i),
            None => out.push(vec![i]),
        }
    }
    out
}

/// Diagonalize the one-step operator at each k and label branches by eigenvector
/// overlap with the previous k.
pub fn dispersion_scan(
    k_list: &[[f64; 3]],
    cfg: &LatticeConfig,
    a: &FourVector,
    block: Block,
) -> Result<Vec<DispersionSample>, VerificationError> {
    if cfg.coupling == CouplingMode::SelfConsistent {
        return Err(VerificationError::Unsupported(
            "dispersion scans need a free or uniform external-A configuration".into(),
        ));
    }
    let state = MultipletField::zeros(cfg.grid);
    let engine = Engine::new(cfg.clone(), &state)?;
    let p = cfg.params;
    let mc2 = block.mass(cfg) * p.c * p.c / p.hbar;
    let mut prev: Option<Vec<DVector<C64>>> = None;
    let mut out = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let (u, span) = block_operator(&engine, k, a, block)?;
        let (ev, q) = eigen(&u);
        let omega = |l: C64| -l.arg() / span;
        let unit_defect = ev
            .iter()
            .map(|l| (l.norm() - 1.0).abs())
            .fold(0.0, f64::max);
        let n = ev.len();
        let mut ambiguous = false;
        let (order, vecs): (Vec<usize>, Vec<DVector<C64>>) = match &prev {
            None => {
                let mut idx: Vec<usize> = (0..n).collect();
                idx.sort_by(|&i, &j| omega(ev[i]).total_cmp(&omega(ev[j])));
                let vecs = idx.iter().map(|&i| q.column(i).into_owned()).collect();
                (idx, vecs)
            }
            Some(pv) => {
                let groups = clusters(&ev);
                let mut taken = vec![0usize; groups.len()];
                let mut order = vec![usize::MAX; n];
                let mut vecs = vec![DVector::zeros(n); n];
                for (b, v) in pv.iter().enumerate() {
                    let w: Vec<f64> = groups
                        .iter()
                        .map(|g| {
                            g.iter()
                                .map(|&i| q.column(i).dotc(v).norm_sqr())
                                .sum::<f64>()
                        })
                        .collect();
                    let (gi, &best) = w
                        .iter()
                        .enumerate()
                        .max_by(|x, y| x.1.total_cmp(y.1))
                        .unwrap();
                    let g = &groups[gi];
                    if best < MATCH_MIN_WEIGHT || taken[gi] >= g.len() {
                        ambiguous = true;
                        break;
                    }
                    order[b] = g[taken[gi]];
                    taken[gi] += 1;
                    let mut proj = DVector::<C64>::zeros(n);
                    for &i in g {
                        let c = q.column(i);
                        proj += c * c.dotc(v);
                    }
                    vecs[b] = proj.normalize();
                }
                if ambiguous {
                    let mut idx: Vec<usize> = (0..n).collect();
                    idx.sort_by(|&i, &j| omega(ev[i]).total_cmp(&omega(ev[j])));
                    let vecs = idx.iter().map(|&i| q.column(i).into_owned()).collect();
                    (idx, vecs)
                } else {
                    (order, vecs)
                }
            }
        };
        let k2: f64 = k.iter().map(|x| x * x).sum();
        let wc = (p.c * p.c * k2 + mc2 * mc2).sqrt();
        let omega_measured: Vec<f64> = order.iter().map(|&i| omega(ev[i])).collect();
        let omega_continuum = omega_measured
            .iter()
            .map(|w| if *w < 0.0 { -wc } else { wc })
            .collect();
        out.push(DispersionSample {
            k,
            omega_measured,
            omega_continuum,
            unit_defect,
            ambiguous,
        });
        prev = Some(vecs);
    }
    Ok(out)
}
