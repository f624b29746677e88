//! Pointwise fermion–gauge coupling: expectation values, the torsional metric,
//! the London relation, outgoing currents, forward and back reactions, the mass
//! matrix and gauge transformations.

use nalgebra::{Matrix4, Vector4};
use thiserror::Error;

use crate::clifford::{herm_exp, hermiticity_defect, rep, unitarity_defect, AlgebraError, ETA};
use crate::deriv::Deriv;
use crate::grid::Grid;
use crate::spinor::t_matrix;
use crate::{c64, FourVector, Mat4, Mat8, Spinor4, C64, I};

/// Relative threshold below which ψ̄ψ counts as zero.
pub const NULL_NORM_TOL: f64 = 1e-14;
/// Tolerance on ‖U†U − I‖ for gauge transformations.
pub const UNITARY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InteractionError {
    #[error(
        "psi-bar psi = {value:e} vanishes relative to |psi|^2 = {norm2:e}; expectation undefined"
    )]
    NullNorm { value: f64, norm2: f64 },
    #[error("forward-reaction generator gamma_mu A^mu is not hermitian: |G - G^dag| = {0:e}")]
    NonHermitianGenerator(f64),
    #[error("gauge matrix at site {site} is not unitary: |U^dag U - I| = {defect:e}")]
    NonUnitaryU { site: usize, defect: f64 },
    #[error("shape mismatch: expected {expected} sites, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("invalid physical parameter: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Fermion mass.
    pub m: f64,
    /// Interaction mass scale m₀.
    pub m0: f64,
    /// Charge.
    pub e: f64,
    /// Background density ρ₀.
    pub rho0: f64,
    /// Cell size ℓ.
    pub ell: f64,
    /// Time-scale factor ζ, δt = ζτ.
    pub zeta: f64,
    pub hbar: f64,
    pub c: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            m: 0.0,
            m0: 1.0,
            e: 1.0,
            rho0: 1.0,
            ell: 1.0,
            zeta: 1.0,
            hbar: 1.0,
            c: 1.0,
        }
    }
}

impl PhysicalParams {
    /// τ = ℓ/c
    pub fn tau(&self) -> f64 {
        self.ell / self.c
    }

    /// δt = ζτ
    pub fn dt(&self) -> f64 {
        self.zeta * self.tau()
    }

    /// ε = m₀cℓ/ħ
    pub fn epsilon(&self) -> f64 {
        self.m0 * self.c * self.ell / self.hbar
    }

    /// λ_L = √(m₀c²/(e²ρ₀))
    pub fn lambda_l(&self) -> f64 {
        (self.m0 * self.c * self.c / (self.e * self.e * self.rho0)).sqrt()
    }

    /// Gauge-boson mass ħ/(λ_L c).
    pub fn gauge_mass(&self) -> f64 {
        self.hbar / (self.lambda_l() * self.c)
    }

    /// mc²δt/ħ
    pub fn mass_fraction(&self) -> f64 {
        self.m * self.c * self.c * self.dt() / self.hbar
    }

    pub fn validate(&self) -> Result<(), InteractionError> {
        let pos = [
            ("ell", self.ell),
            ("zeta", self.zeta),
            ("hbar", self.hbar),
            ("c", self.c),
            ("rho0", self.rho0),
        ];
        for (name, v) in pos {
            if !(v.is_finite() && v > 0.0) {
                return Err(InteractionError::InvalidParams(format!(
                    "{name} must be positive (got {v})"
                )));
            }
        }
        for (name, v) in [("m", self.m), ("m0", self.m0)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(InteractionError::InvalidParams(format!(
                    "{name} must be non-negative (got {v})"
                )));
            }
        }
        if !(self.e.is_finite() && self.e != 0.0) {
            return Err(InteractionError::InvalidParams(format!(
                "e must be nonzero (got {})",
                self.e
            )));
        }
        Ok(())
    }
}

/// g^{μν} as a complex 4×4 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricValue {
    pub g: Matrix4<C64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassMatrixL {
    /// M^ν_μ (row ν, column μ).
    pub m: Matrix4<f64>,
    pub ml: Mat8,
}

fn eta_c() -> Matrix4<C64> {
    Matrix4::from_diagonal(&Vector4::from(ETA).map(|x| c64(x, 0.0)))
}

fn eta_r() -> Matrix4<f64> {
    Matrix4::from_diagonal(&Vector4::from(ETA))
}

/// ψ̄ψ (always real).
pub fn scalar_density(psi: &Spinor4) -> f64 {
    let n = psi.map(|z| z.norm_sqr());
    n[0] + n[1] - n[2] - n[3]
}

/// J^μ = ψ̄γ^μψ (real).
pub fn vector_current(psi: &Spinor4) -> FourVector {
    let r = rep();
    FourVector::from_fn(|mu, _| crate::clifford::bilinear(psi, &r.gamma[mu]).re)
}

/// B^{μν} = ψ̄[γ^μ,γ^ν]ψ, both indices up. Purely imaginary and antisymmetric.
pub fn spin_tensor(psi: &Spinor4) -> Matrix4<C64> {
    let r = rep();
    Matrix4::from_fn(|mu, nu| {
        if mu == nu {
            c64(0.0, 0.0)
        } else {
            crate::clifford::bilinear(psi, &(r.spin[mu][nu] * c64(4.0, 0.0)))
        }
    })
}

/// ψ̄ψ, rejected when it vanishes relative to ‖ψ‖².
pub fn checked_density(psi: &Spinor4) -> Result<f64, InteractionError> {
    let norm2 = psi.norm_squared();
    let sd = scalar_density(psi);
    if sd.abs() <= NULL_NORM_TOL * norm2 || norm2 == 0.0 {
        return Err(InteractionError::NullNorm { value: sd, norm2 });
    }
    Ok(sd)
}

pub fn expectation(psi: &Spinor4, op: &Mat4) -> Result<C64, InteractionError> {
    Ok(crate::clifford::bilinear(psi, op) / checked_density(psi)?)
}

/// g^{μν} = η^{μν} + iε·ψ̄[γ^μ,γ^ν]ψ/ρ₀
pub fn metric(psi: &Spinor4, p: &PhysicalParams) -> MetricValue {
    let k = I * (p.epsilon() / p.rho0);
    MetricValue {
        g: eta_c() + spin_tensor(psi) * k,
    }
}

impl MetricValue {
    /// g^{μν}A_μ with A_μ = η A^μ.
    pub fn raise(&self, a: &FourVector) -> FourVector {
        let lower = eta_r() * a;
        let out = self.g.transpose() * lower.map(|x| c64(x, 0.0));
        out.map(|z| z.re)
    }

    /// Largest imaginary part of g (zero for any ψ, since B is imaginary).
    pub fn imaginary_defect(&self) -> f64 {
        self.g.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityReport {
    pub re: f64,
    pub im: f64,
    /// Set when |im| exceeds 1e-10.
    pub imaginary_flag: bool,
}

impl DensityReport {
    fn from_value(v: C64) -> Self {
        DensityReport {
            re: v.re,
            im: v.im,
            imaginary_flag: v.im.abs() > 1e-10,
        }
    }

    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

/// (4m₀cℓ/ħ)·i·s for a given value s of ψ̄ψ.
pub fn background_density_from_scalar(psibar_psi: C64, p: &PhysicalParams) -> DensityReport {
    DensityReport::from_value(psibar_psi * I * (4.0 * p.epsilon()))
}

/// Grid mean of (4m₀cℓ/ħ)·i·ψ̄ψ. ψ̄ψ is real, so the result lands on the
/// imaginary axis and is flagged whenever it is nonzero.
pub fn background_density(psi: &[Spinor4], p: &PhysicalParams) -> DensityReport {
    if psi.is_empty() {
        return DensityReport::from_value(c64(0.0, 0.0));
    }
    let mean = psi.iter().map(scalar_density).sum::<f64>() / psi.len() as f64;
    background_density_from_scalar(c64(mean, 0.0), p)
}

/// Contravariant A^μ from A_μ = −λ_L²e·ψ̄γ_μψ.
pub fn london_potential(psi: &Spinor4, p: &PhysicalParams) -> FourVector {
    let l2 = p.lambda_l().powi(2);
    vector_current(psi) * (-l2 * p.e)
}

/// γ_μA^μ
pub fn slashed(a: &FourVector) -> Mat4 {
    let r = rep();
    (0..4).fold(Mat4::zeros(), |acc, mu| {
        acc + r.gamma[mu] * c64(ETA[mu] * a[mu], 0.0)
    })
}

/// ψ' = exp(−iℓe·γ_μA^μ/(ħc))ψ
pub fn forward_reaction(
    psi: &Spinor4,
    a: &FourVector,
    p: &PhysicalParams,
) -> Result<Spinor4, InteractionError> {
    let g = slashed(a);
    let theta = -p.ell * p.e / (p.hbar * p.c);
    match herm_exp(&g, theta) {
        Ok(u) => Ok(u * psi),
        Err(AlgebraError::NonHermitian(d)) => Err(InteractionError::NonHermitianGenerator(d)),
        Err(e) => Err(InteractionError::InvalidParams(e.to_string())),
    }
}

/// Real generator L^ν_λ = iε·B^{μν}η_{μλ}/ρ₀ acting on contravariant A.
pub fn back_reaction_generator(psi: &Spinor4, p: &PhysicalParams) -> Matrix4<f64> {
    let b = spin_tensor(psi);
    let k = p.epsilon() / p.rho0;
    // (Bᵀη)[ν][λ], times i: B is imaginary, so i·B is real.
    Matrix4::from_fn(|nu, lam| -(b[(lam, nu)].im) * ETA[lam] * k)
}

/// A'^ν = A^ν + iε·B^{μν}A_μ/ρ₀
pub fn back_reaction_linearized(psi: &Spinor4, a: &FourVector, p: &PhysicalParams) -> FourVector {
    metric(psi, p).raise(a)
}

/// A' = exp(L)·A, the exact form; an η-isometry.
pub fn back_reaction(psi: &Spinor4, a: &FourVector, p: &PhysicalParams) -> FourVector {
    back_reaction_generator(psi, p).exp() * a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CurrentForm {
    /// J'^ν = eJ^ν − i(e²ℓ/ħc)B^{μν}A_μ
    #[default]
    Linearized,
    /// J'^ν = eJ^ν − (A'_exact − A)^ν/λ_L²
    Exact,
}

/// Correction term i(e²ℓ/ħc)·B^{μν}A_μ.
pub fn current_correction(psi: &Spinor4, a: &FourVector, p: &PhysicalParams) -> FourVector {
    let k = p.e * p.e * p.ell / (p.hbar * p.c);
    let lower = eta_r() * a;
    let b = spin_tensor(psi);
    FourVector::from_fn(|nu, _| (0..4).map(|mu| -(b[(mu, nu)].im) * lower[mu]).sum::<f64>() * k)
}

pub fn outgoing_current(
    psi: &Spinor4,
    a: &FourVector,
    p: &PhysicalParams,
    form: CurrentForm,
) -> FourVector {
    let ej = vector_current(psi) * p.e;
    match form {
        CurrentForm::Linearized => ej - current_correction(psi, a, p),
        CurrentForm::Exact => {
            let l2 = p.lambda_l().powi(2);
            ej - (back_reaction(psi, a, p) - a) / l2
        }
    }
}

/// M^ν_μ = i·m₀·ψ̄[γ^ν,γ_μ]ψ/ρ₀ and the block mass matrix M_L.
pub fn mass_matrix(psi: &Spinor4, p: &PhysicalParams) -> MassMatrixL {
    let b = spin_tensor(psi);
    let k = p.m0 / p.rho0;
    let m = Matrix4::from_fn(|nu, mu| -(b[(nu, mu)].im) * ETA[mu] * k);
    let t = t_matrix();
    let tmt = t * m.map(|x| c64(x, 0.0)) * t.adjoint();
    let mu_l = p.gauge_mass();
    let mut ml = Mat8::identity() * c64(mu_l, 0.0);
    let upper = (Mat4::identity() - tmt * c64(p.c * p.ell / p.hbar, 0.0)) * c64(mu_l, 0.0);
    ml.fixed_view_mut::<4, 4>(0, 0).copy_from(&upper);
    MassMatrixL { m, ml }
}

impl MassMatrixL {
    /// Frobenius norm of the anti-hermitian part of M_L.
    pub fn antihermiticity(&self) -> f64 {
        hermiticity_defect(&self.ml).0 * 0.5
    }
}

/// Σ_{μν}⟨S^{μν}⟩A_μA_ν
pub fn spin_contraction(psi: &Spinor4, a: &FourVector) -> Result<C64, InteractionError> {
    let r = rep();
    let lower = eta_r() * a;
    let sd = checked_density(psi)?;
    let mut acc = c64(0.0, 0.0);
    for mu in 0..4 {
        for nu in 0..4 {
            acc += crate::clifford::bilinear(psi, &r.spin[mu][nu]) * (lower[mu] * lower[nu]);
        }
    }
    Ok(acc / sd)
}

/// Contraction of the outgoing-current correction with A_ν.
pub fn correction_contraction(psi: &Spinor4, a: &FourVector, p: &PhysicalParams) -> f64 {
    let lower = eta_r() * a;
    current_correction(psi, a, p).dot(&lower)
}

fn check_len(grid: &Grid, n: usize) -> Result<(), InteractionError> {
    if n != grid.len() {
        return Err(InteractionError::ShapeMismatch {
            expected: grid.len(),
            got: n,
        });
    }
    Ok(())
}

/// A matrix-valued 4-potential per site, A'^ν as 4×4 matrices on spinor space.
pub type MatrixPotential = [Mat4; 4];

fn derivs_of_matrix_field(grid: &Grid, f: &[Mat4], d: Deriv, axis: usize) -> Vec<Mat4> {
    let mut out = vec![Mat4::zeros(); f.len()];
    for r in 0..4 {
        for c in 0..4 {
            let comp: Vec<C64> = f.iter().map(|m| m[(r, c)]).collect();
            for (o, x) in out.iter_mut().zip(d.d(grid, &comp, axis)) {
                o[(r, c)] = x;
            }
        }
    }
    out
}

/// ψ' = Uψ, A'^ν = U†A^νU − i(ħc/e)U†∂^νU.
///
/// `du0` is ∂₀U; spatial derivatives come from `d`.
#[allow(clippy::too_many_arguments)]
pub fn gauge_transform(
    grid: &Grid,
    psi: &[Spinor4],
    a: &[FourVector],
    u: &[Mat4],
    du0: Option<&[Mat4]>,
    p: &PhysicalParams,
    d: Deriv,
) -> Result<(Vec<Spinor4>, Vec<MatrixPotential>), InteractionError> {
    for n in [psi.len(), a.len(), u.len()] {
        check_len(grid, n)?;
    }
    if let Some(du0) = du0 {
        check_len(grid, du0.len())?;
    }
    for (site, m) in u.iter().enumerate() {
        let defect = unitarity_defect(m);
        if defect > UNITARY_TOL {
            return Err(InteractionError::NonUnitaryU { site, defect });
        }
    }
    let spatial: Vec<Vec<Mat4>> = (0..3)
        .map(|ax| derivs_of_matrix_field(grid, u, d, ax))
        .collect();
    let k = -I * (p.hbar * p.c / p.e);
    let psi_out = psi.iter().zip(u).map(|(s, m)| m * s).collect();
    let a_out = (0..grid.len())
        .map(|s| {
            let ud = u[s].adjoint();
            std::array::from_fn(|nu| {
                let lower_d = if nu == 0 {
                    du0.map(|x| x[s]).unwrap_or_else(Mat4::zeros)
                } else {
                    spatial[nu - 1][s]
                };
                let upper_d = lower_d * c64(ETA[nu], 0.0);
                ud * u[s] * c64(a[s][nu], 0.0) + ud * upper_d * k
            })
        })
        .collect();
    Ok((psi_out, a_out))
}

/// U = e^{−iχ} with χ = ℓγ_μeA^μ/(ħc), per site. Fails when χ is not hermitian.
pub fn fixed_gauge_matrix(a: &FourVector, p: &PhysicalParams) -> Result<Mat4, InteractionError> {
    let chi = slashed(a);
    herm_exp(&chi, -p.ell * p.e / (p.hbar * p.c)).map_err(|e| match e {
        AlgebraError::NonHermitian(d) => InteractionError::NonHermitianGenerator(d),
        other => InteractionError::InvalidParams(other.to_string()),
    })
}

/// A'^ν = A^ν − ℓγ_μ∂^νA^μ, the gauge-fixed first-order update.
pub fn gauge_fixed_update(
    grid: &Grid,
    a: &[FourVector],
    da0: &[FourVector],
    p: &PhysicalParams,
    d: Deriv,
) -> Result<Vec<MatrixPotential>, InteractionError> {
    check_len(grid, a.len())?;
    check_len(grid, da0.len())?;
    let grads: Vec<Vec<Vec<f64>>> = (0..3)
        .map(|ax| {
            (0..4)
                .map(|mu| d.d_real(grid, &a.iter().map(|v| v[mu]).collect::<Vec<_>>(), ax))
                .collect()
        })
        .collect();
    Ok((0..grid.len())
        .map(|s| {
            std::array::from_fn(|nu| {
                let dnu = |mu: usize| {
                    if nu == 0 {
                        da0[s][mu]
                    } else {
                        ETA[nu] * grads[nu - 1][mu][s]
                    }
                };
                let dslash = slashed(&FourVector::from_fn(|mu, _| dnu(mu)));
                Mat4::identity() * c64(a[s][nu], 0.0) - dslash * c64(p.ell, 0.0)
            })
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorsionReport {
    /// max_{μν} |ħ⟨S^{μν}⟩ + mcℓ⟨J^{μν}⟩|
    pub residual: f64,
    /// ⟨J^{μν}⟩⟨J_{μν}⟩ − 1
    pub normalization: C64,
}

/// `grads[μ]` holds ∂_μψ (lower index, ∂_0 = ∂/∂(ct)).
pub fn torsion_quantization_residual(
    psi: &Spinor4,
    grads: &[Spinor4; 4],
    p: &PhysicalParams,
) -> Result<TorsionReport, InteractionError> {
    let r = rep();
    let sd = checked_density(psi)?;
    let bar = psi.adjoint() * r.gamma[0];
    // w[μ][ν] = ψ̄γ^μ∂^νψ
    let w = |mu: usize, nu: usize| (bar * r.gamma[mu] * grads[nu])[(0, 0)] * ETA[nu];
    let mut residual = 0.0f64;
    let mut jj = c64(0.0, 0.0);
    for mu in 0..4 {
        for nu in 0..4 {
            let j = I * p.ell * (w(mu, nu) - w(nu, mu)) / sd;
            let s = expectation(psi, &r.spin[mu][nu])?;
            residual = residual.max((s * p.hbar + j * (p.m * p.c * p.ell)).norm());
            jj += j * j * (ETA[mu] * ETA[nu]);
        }
    }
    Ok(TorsionReport {
        residual,
        normalization: jj - c64(1.0, 0.0),
    })
}

/// ∂_νJ^ν per site given ∂₀J⁰.
pub fn divergence(grid: &Grid, j: &[FourVector], dj0: &[f64], d: Deriv) -> Vec<f64> {
    let mut out = dj0.to_vec();
    for ax in 0..grid.dims {
        let comp: Vec<f64> = j.iter().map(|v| v[ax + 1]).collect();
        for (o, x) in out.iter_mut().zip(d.d_real(grid, &comp, ax)) {
            *o += x;
        }
    }
    out
}
