//! Fixed matrix representations: γ^μ (4×4), 𝒢^μ (8×8), Δ^μ (16×16), spin
//! generators and hermitian matrix functions.

use std::sync::OnceLock;

use nalgebra::{DMatrix, Matrix2, Matrix4, SMatrix};
use thiserror::Error;

use crate::{c64, Mat16, Mat2, Mat4, Mat8, Spinor4, C64, I};

pub const ETA: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// Relative tolerance on ‖H − H†‖ accepted by [`herm_exp`].
pub const HERMITICITY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("generator is not hermitian: |H - H^dag| = {0:e}")]
    NonHermitian(f64),
    #[error("spacetime index ({mu}, {nu}) out of range 0..=3")]
    IndexOutOfRange { mu: usize, nu: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub eta: Matrix4<f64>,
}

impl Metric {
    pub fn minkowski() -> Self {
        Metric {
            eta: Matrix4::from_diagonal(&ETA.into()),
        }
    }

    pub fn lower(&self, v: &crate::FourVector) -> crate::FourVector {
        self.eta * v
    }

    pub fn dot(&self, a: &crate::FourVector, b: &crate::FourVector) -> f64 {
        (0..4).map(|m| ETA[m] * a[m] * b[m]).sum()
    }
}

#[derive(Debug, Clone)]
pub struct CliffordRep {
    pub metric: Metric,
    pub gamma: [Mat4; 4],
    pub cal_g: [Mat8; 4],
    pub delta: [Mat16; 4],
    pub spin: [[Mat4; 4]; 4],
    /// α_i = γ⁰γ^i
    pub alpha: [Mat4; 3],
    /// Number operator n = diag(0, 1).
    pub number_op: Matrix2<f64>,
    /// Hole operator h = 1 − n = diag(1, 0).
    pub hole_op: Matrix2<f64>,
}

/// Pauli matrices indexed as (1, σ_x, σ_y, σ_z).
pub fn pauli() -> [Mat2; 4] {
    let z = c64(0.0, 0.0);
    let o = c64(1.0, 0.0);
    [
        Mat2::new(o, z, z, o),
        Mat2::new(z, o, o, z),
        Mat2::new(z, -I, I, z),
        Mat2::new(o, z, z, -o),
    ]
}

/// Kronecker product of dynamically sized complex matrices.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

pub(crate) fn dyn_of<const R: usize, const C: usize>(m: &SMatrix<C64, R, C>) -> DMatrix<C64> {
    DMatrix::from_iterator(R, C, m.iter().copied())
}

pub(crate) fn fixed_of<const R: usize, const C: usize>(m: &DMatrix<C64>) -> SMatrix<C64, R, C> {
    assert_eq!(m.shape(), (R, C), "matrix shape mismatch");
    SMatrix::from_iterator(m.iter().copied())
}

fn kron_all(factors: &[DMatrix<C64>]) -> DMatrix<C64> {
    let mut out = factors[0].clone();
    for f in &factors[1..] {
        out = kron(&out, f);
    }
    out
}

fn real2(m: &Matrix2<f64>) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |r, c| c64(m[(r, c)], 0.0))
}

pub fn build_rep() -> CliffordRep {
    let s = pauli();
    let sd: Vec<DMatrix<C64>> = s.iter().map(dyn_of).collect();
    let one = &sd[0];
    let isy = dyn_of(&(s[2] * I));

    let mut gamma_d: Vec<DMatrix<C64>> = vec![kron(&sd[3], one)];
    for i in 1..4 {
        gamma_d.push(kron(&isy, &sd[i]));
    }
    let mut calg_d: Vec<DMatrix<C64>> = vec![kron_all(&[sd[1].clone(), one.clone(), one.clone()])];
    for i in 1..4 {
        calg_d.push(kron_all(&[isy.clone(), one.clone(), sd[i].clone()]));
    }

    let number_op = Matrix2::new(0.0, 0.0, 0.0, 1.0);
    let hole_op = Matrix2::new(1.0, 0.0, 0.0, 0.0);
    let (nd, hd) = (real2(&number_op), real2(&hole_op));
    let delta_d: Vec<DMatrix<C64>> = (0..4)
        .map(|mu| {
            kron_all(&[nd.clone(), one.clone(), gamma_d[mu].clone()]) + kron(&hd, &calg_d[mu])
        })
        .collect();

    let gamma: [Mat4; 4] = std::array::from_fn(|mu| fixed_of(&gamma_d[mu]));
    let cal_g: [Mat8; 4] = std::array::from_fn(|mu| fixed_of(&calg_d[mu]));
    let delta: [Mat16; 4] = std::array::from_fn(|mu| fixed_of(&delta_d[mu]));
    let spin = std::array::from_fn(|mu| {
        std::array::from_fn(|nu| commutator(&gamma[mu], &gamma[nu]) * c64(0.25, 0.0))
    });
    let alpha = std::array::from_fn(|i| gamma[0] * gamma[i + 1]);

    CliffordRep {
        metric: Metric::minkowski(),
        gamma,
        cal_g,
        delta,
        spin,
        alpha,
        number_op,
        hole_op,
    }
}

/// Shared, lazily built representation.
pub fn rep() -> &'static CliffordRep {
    static REP: OnceLock<CliffordRep> = OnceLock::new();
    REP.get_or_init(build_rep)
}

pub fn commutator<const N: usize>(
    a: &SMatrix<C64, N, N>,
    b: &SMatrix<C64, N, N>,
) -> SMatrix<C64, N, N> {
    a * b - b * a
}

pub fn anticommutator<const N: usize>(
    a: &SMatrix<C64, N, N>,
    b: &SMatrix<C64, N, N>,
) -> SMatrix<C64, N, N> {
    a * b + b * a
}

pub fn spin_generator(mu: usize, nu: usize) -> Result<Mat4, AlgebraError> {
    if mu > 3 || nu > 3 {
        return Err(AlgebraError::IndexOutOfRange { mu, nu });
    }
    Ok(rep().spin[mu][nu])
}

/// Residual of [Σ^{μν},Σ^{ρσ}] = i(η^{νρ}Σ^{μσ} − η^{ρμ}Σ^{νσ} − η^{νσ}Σ^{μρ} + η^{μσ}Σ^{νρ})
/// for one index tuple, with the hermitian-normalized generator Σ = iS.
pub fn spin_algebra_tuple_residual(mu: usize, nu: usize, rho: usize, sigma: usize) -> f64 {
    let r = rep();
    let g = |a: usize, b: usize| r.spin[a][b] * I;
    let eta = |a: usize, b: usize| if a == b { ETA[a] } else { 0.0 };
    let lhs = commutator(&g(mu, nu), &g(rho, sigma));
    let rhs = (g(mu, sigma) * c64(eta(nu, rho), 0.0)
        - g(nu, sigma) * c64(eta(rho, mu), 0.0)
        - g(mu, rho) * c64(eta(nu, sigma), 0.0)
        + g(nu, rho) * c64(eta(mu, sigma), 0.0))
        * I;
    (lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max-norm of the spin algebra residual over all 256 index tuples.
pub fn spin_algebra_residual() -> f64 {
    let mut worst = 0.0f64;
    for mu in 0..4 {
        for nu in 0..4 {
            for rho in 0..4 {
                for sigma in 0..4 {
                    worst = worst.max(spin_algebra_tuple_residual(mu, nu, rho, sigma));
                }
            }
        }
    }
    worst
}

/// ψ†γ⁰Oψ
pub fn bilinear(psi: &Spinor4, op: &Mat4) -> C64 {
    let g0 = &rep().gamma[0];
    (psi.adjoint() * g0 * op * psi)[(0, 0)]
}

/// Frobenius norm of the anti-hermitian part, relative to max(‖H‖, 1).
pub fn hermiticity_defect<const N: usize>(h: &SMatrix<C64, N, N>) -> (f64, f64) {
    let d = (h - h.adjoint()).norm();
    (d, d / h.norm().max(1.0))
}

/// f(H) for hermitian H via the eigendecomposition H = U diag(λ) U†. No hermiticity check.
pub fn herm_fn<const N: usize>(
    h: &SMatrix<C64, N, N>,
    f: impl Fn(f64) -> C64,
) -> SMatrix<C64, N, N> {
    let hd = dyn_of(&((h + h.adjoint()) * c64(0.5, 0.0)));
    let eig = hd.symmetric_eigen();
    let mut out = DMatrix::<C64>::zeros(N, N);
    for k in 0..N {
        let v = eig.eigenvectors.column(k);
        out += (v * v.adjoint()) * f(eig.eigenvalues[k]);
    }
    fixed_of(&out)
}

/// exp(iθH) for hermitian H.
pub fn herm_exp<const N: usize>(
    h: &SMatrix<C64, N, N>,
    theta: f64,
) -> Result<SMatrix<C64, N, N>, AlgebraError> {
    let (abs, rel) = hermiticity_defect(h);
    if rel > HERMITICITY_TOL {
        return Err(AlgebraError::NonHermitian(abs));
    }
    Ok(herm_fn(h, |l| C64::from_polar(1.0, theta * l)))
}

/// ‖U†U − I‖_max
pub fn unitarity_defect<const N: usize>(u: &SMatrix<C64, N, N>) -> f64 {
    (u.adjoint() * u - SMatrix::<C64, N, N>::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}
