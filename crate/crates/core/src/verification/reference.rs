use rayon::prelude::*;
use rustfft::FftPlanner;

use super::{VerificationError, ORACLE_MIN_ORDER};
use crate::clifford::rep;
use crate::deriv::{wavenumber, Deriv};
use crate::grid::Grid;
use crate::interaction::PhysicalParams;
use crate::{c64, FourVector, Mat4, Spinor4, C64, I};

/// Time-dependent external potential A^μ(t, x).
pub type Potential<'a> = &'a (dyn Fn(f64, [f64; 3]) -> FourVector + Sync);

fn alphas() -> [Mat4; 3] {
    let r = rep();
    std::array::from_fn(|i| r.gamma[0] * r.gamma[i + 1])
}

/// −iHψ/ħ with H = α·(−iħc∇ − e𝑨) + βmc² + eA⁰.
fn rhs(grid: &Grid, psi: &[Spinor4], t: f64, a: Potential, p: &PhysicalParams) -> Vec<Spinor4> {
    let al = alphas();
    let beta = rep().gamma[0];
    let n = psi.len();
    let mut grads: Vec<[Spinor4; 3]> = vec![[Spinor4::zeros(); 3]; n];
    for ax in 0..grid.dims {
        for comp in 0..4 {
            let f: Vec<C64> = psi.iter().map(|s| s[comp]).collect();
            for (g, d) in grads.iter_mut().zip(Deriv::Spectral.d(grid, &f, ax)) {
                g[ax][comp] = d;
            }
        }
    }
    let mc2 = p.m * p.c * p.c;
    (0..n)
        .into_par_iter()
        .map(|s| {
            let av = a(t, grid.position(s));
            let mut h = beta * psi[s] * c64(mc2, 0.0) + psi[s] * c64(p.e * av[0], 0.0);
            for ax in 0..grid.dims {
                let kin = grads[s][ax] * (-I * p.hbar * p.c) - psi[s] * c64(p.e * av[ax + 1], 0.0);
                h += al[ax] * kin;
            }
            h * (-I / p.hbar)
        })
        .collect()
}

fn axpy(y: &[Spinor4], k: &[Spinor4], h: f64) -> Vec<Spinor4> {
    y.iter().zip(k).map(|(a, b)| a + b * c64(h, 0.0)).collect()
}

/// Pseudo-spectral, classical RK4 solution of the Dirac equation at `t_final`,
/// with `ceil(t_final/dt_max)` uniform steps.
pub fn reference_dirac_solve(
    grid: &Grid,
    psi0: &[Spinor4],
    a: Potential,
    t_final: f64,
    p: &PhysicalParams,
    dt_max: f64,
) -> Result<Vec<Spinor4>, VerificationError> {
    if psi0.len() != grid.len() {
        return Err(VerificationError::ShapeMismatch {
            expected: grid.len(),
            got: psi0.len(),
        });
    }
    if !(dt_max > 0.0 && t_final >= 0.0) {
        return Err(VerificationError::Unsupported(format!(
            "bad time stepping: dt_max={dt_max}, t_final={t_final}"
        )));
    }
    let steps = (t_final / dt_max).ceil() as usize;
    let mut y = psi0.to_vec();
    if steps == 0 {
        return Ok(y);
    }
    let h = t_final / steps as f64;
    for n in 0..steps {
        let t = n as f64 * h;
        let k1 = rhs(grid, &y, t, a, p);
        let k2 = rhs(grid, &axpy(&y, &k1, h / 2.0), t + h / 2.0, a, p);
        let k3 = rhs(grid, &axpy(&y, &k2, h / 2.0), t + h / 2.0, a, p);
        let k4 = rhs(grid, &axpy(&y, &k3, h), t + h, a, p);
        for i in 0..y.len() {
            y[i] += (k1[i] + (k2[i] + k3[i]) * c64(2.0, 0.0) + k4[i]) * c64(h / 6.0, 0.0);
        }
    }
    Ok(y)
}

/// L2 distance √(Σ|a−b|²·ℓ^dims).
pub fn l2_distance(grid: &Grid, a: &[Spinor4], b: &[Spinor4]) -> f64 {
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_squared()).sum();
    (s * grid.cell_volume()).sqrt()
}

/// Relative size below which step-halving differences are round-off.
const ROUNDOFF: f64 = 1e-12;

/// Refinement order of the reference solver from successive differences at
/// `dt_base`, `dt_base/2`, `dt_base/4` against their halved steps. The order is
/// read from the finest pair whose coarser difference is above round-off, with
/// differences clamped to round-off; if all sit there the order is infinite.
/// Errors out below the trust threshold.
pub fn reference_self_check(
    grid: &Grid,
    psi0: &[Spinor4],
    a: Potential,
    t_final: f64,
    p: &PhysicalParams,
    dt_base: f64,
) -> Result<f64, VerificationError> {
    let dts: Vec<f64> = (0..4).map(|j| dt_base / 2f64.powi(j)).collect();
    let sols: Vec<Vec<Spinor4>> = dts
        .iter()
        .map(|&dt| reference_dirac_solve(grid, psi0, a, t_final, p, dt))
        .collect::<Result<_, _>>()?;
    let scale =
        l2_distance(grid, &sols[3], &vec![Spinor4::zeros(); psi0.len()]).max(f64::MIN_POSITIVE);
    let floor = ROUNDOFF * scale;
    let errs: Vec<f64> = (0..3)
        .map(|j| l2_distance(grid, &sols[j], &sols[j + 1]).max(floor))
        .collect();
    let order = match (1..3).rev().find(|&j| errs[j - 1] > floor) {
        Some(j) => (errs[j - 1] / errs[j]).log2(),
        None => f64::INFINITY,
    };
    if !(order >= ORACLE_MIN_ORDER) {
        return Err(VerificationError::OracleRefinement {
            order,
            min: ORACLE_MIN_ORDER,
        });
    }
    Ok(order)
}

/// Exact evolution under a uniform, constant A by diagonalizing H(k) per Fourier
/// mode (1D only).
pub fn spectral_dirac_exact(
    grid: &Grid,
    psi0: &[Spinor4],
    a: &FourVector,
    t: f64,
    p: &PhysicalParams,
) -> Result<Vec<Spinor4>, VerificationError> {
    if grid.dims != 1 {
        return Err(VerificationError::Unsupported(
            "exact spectral oracle is 1D only".into(),
        ));
    }
    if psi0.len() != grid.len() {
        return Err(VerificationError::ShapeMismatch {
            expected: grid.len(),
            got: psi0.len(),
        });
    }
    let n = grid.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut comps: Vec<Vec<C64>> = (0..4)
        .map(|c| psi0.iter().map(|s| s[c]).collect())
        .collect();
    for c in &mut comps {
        fwd.process(c);
    }
    let al = alphas()[0];
    let beta = rep().gamma[0];
    for j in 0..n {
        let k = wavenumber(j, n, grid.ell);
        let h = al * c64(p.hbar * p.c * k - p.e * a[1], 0.0)
            + beta * c64(p.m * p.c * p.c, 0.0)
            + Mat4::identity() * c64(p.e * a[0], 0.0);
        let u = crate::clifford::herm_fn(&h, |l| C64::from_polar(1.0, -l * t / p.hbar));
        let v = Spinor4::from_fn(|r, _| comps[r][j]);
        let w = u * v;
        for r in 0..4 {
            comps[r][j] = w[r];
        }
    }
    for c in &mut comps {
        inv.process(c);
    }
    let scale = 1.0 / n as f64;
    Ok((0..n)
        .map(|s| Spinor4::from_fn(|r, _| comps[r][s] * scale))
        .collect())
}
