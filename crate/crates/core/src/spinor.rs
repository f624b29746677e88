//! The unitary T map between 4-vectors and 4-spinors, the complex field
//! 4-vector F^μ and the spinor-form Maxwell and Maxwell–London residuals.

use std::sync::OnceLock;

use nalgebra::Vector4;
use thiserror::Error;

use crate::clifford::pauli;
use crate::deriv::Deriv;
use crate::grid::Grid;
use crate::{c64, FourVector, Mat4, Spinor4, C64, I};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinorError {
    #[error("time derivative data missing: {0}")]
    MissingTimeDerivative(&'static str),
    #[error("shape mismatch: expected {expected} sites, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("London depth must be positive (got {0})")]
    BadLondonDepth(f64),
}

pub type ComplexFour = Vector4<C64>;

#[derive(Debug, Clone, PartialEq)]
pub struct TMatrix {
    pub t: Mat4,
}

impl TMatrix {
    pub fn new() -> Self {
        let s = c64(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let (o, z) = (c64(1.0, 0.0), c64(0.0, 0.0));
        #[rustfmt::skip]
        let t = Mat4::new(
            z, -o, I, z,
            o, z, z, o,
            -o, z, z, o,
            z, o, I, z,
        ) * s;
        TMatrix { t }
    }
}

impl Default for TMatrix {
    fn default() -> Self {
        Self::new()
    }
}

pub fn t_matrix() -> &'static Mat4 {
    static T: OnceLock<Mat4> = OnceLock::new();
    T.get_or_init(|| TMatrix::new().t)
}

/// 𝒜 = T·v
pub fn to_spinor(v: &ComplexFour) -> Spinor4 {
    t_matrix() * v
}

pub fn to_spinor_real(v: &FourVector) -> Spinor4 {
    to_spinor(&v.map(|x| c64(x, 0.0)))
}

/// v = T†·s
pub fn from_spinor(s: &Spinor4) -> ComplexFour {
    t_matrix().adjoint() * s
}

/// 1₂⊗σ^μ with σ^μ = (1, σ).
pub fn sigma_block(mu: usize) -> Mat4 {
    block(&pauli()[mu])
}

/// 1₂⊗σ̄^μ with σ̄^μ = (1, −σ).
pub fn sigma_bar_block(mu: usize) -> Mat4 {
    let p = pauli()[mu];
    block(&if mu == 0 { p } else { -p })
}

fn block(p: &crate::Mat2) -> Mat4 {
    let mut m = Mat4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(p);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(p);
    m
}

fn check_len(grid: &Grid, n: usize) -> Result<(), SpinorError> {
    if n != grid.len() {
        return Err(SpinorError::ShapeMismatch {
            expected: grid.len(),
            got: n,
        });
    }
    Ok(())
}

fn component(field: &[FourVector], mu: usize) -> Vec<f64> {
    field.iter().map(|v| v[mu]).collect()
}

/// Spatial derivative of every component of a 4-component complex field.
pub fn d_field4(grid: &Grid, d: Deriv, field: &[Vector4<C64>], axis: usize) -> Vec<Vector4<C64>> {
    let mut out = vec![Vector4::<C64>::zeros(); field.len()];
    for c in 0..4 {
        let comp: Vec<C64> = field.iter().map(|v| v[c]).collect();
        for (o, x) in out.iter_mut().zip(d.d(grid, &comp, axis)) {
            o[c] = x;
        }
    }
    out
}

/// F^μ = (−∂·A, −∂₀𝑨 − ∇A₀ + i∇×𝑨).
///
/// `da0` is ∂₀A = ∂A/∂(ct) at the same time level.
pub fn field_4vector(
    grid: &Grid,
    a: &[FourVector],
    da0: Option<&[FourVector]>,
    d: Deriv,
) -> Result<Vec<ComplexFour>, SpinorError> {
    let da0 = da0.ok_or(SpinorError::MissingTimeDerivative("dA/dx0"))?;
    check_len(grid, a.len())?;
    check_len(grid, da0.len())?;
    // grad[i][mu] = ∂_i A^mu
    let grad: Vec<Vec<Vec<f64>>> = (1..4)
        .map(|i| {
            (0..4)
                .map(|mu| d.d_real(grid, &component(a, mu), i - 1))
                .collect()
        })
        .collect();
    Ok((0..a.len())
        .map(|s| {
            let g = |i: usize, mu: usize| grad[i - 1][mu][s];
            let div = da0[s][0] + g(1, 1) + g(2, 2) + g(3, 3);
            let curl = [g(2, 3) - g(3, 2), g(3, 1) - g(1, 3), g(1, 2) - g(2, 1)];
            let mut f = ComplexFour::zeros();
            f[0] = c64(-div, 0.0);
            for i in 1..4 {
                f[i] = c64(-da0[s][i] - g(i, 0), curl[i - 1]);
            }
            f
        })
        .collect())
}

/// A 4-potential with its spinor images at one time level.
#[derive(Debug, Clone)]
pub struct FieldBundle {
    pub grid: Grid,
    pub a: Vec<FourVector>,
    /// ∂₀A
    pub da0: Vec<FourVector>,
    pub f: Vec<ComplexFour>,
    /// ∂₀F, present when ∂₀²A was supplied.
    pub df0: Option<Vec<ComplexFour>>,
    pub cal_a: Vec<Spinor4>,
    pub tilde_f: Vec<Spinor4>,
    pub tilde_a: Vec<Spinor4>,
    /// London current spinor e𝒥 = −𝒜/λ_L².
    pub cal_j: Vec<Spinor4>,
    pub lambda_l: f64,
}

impl FieldBundle {
    pub fn new(
        grid: Grid,
        a: Vec<FourVector>,
        da0: Vec<FourVector>,
        dda0: Option<Vec<FourVector>>,
        lambda_l: f64,
        d: Deriv,
    ) -> Result<Self, SpinorError> {
        if !(lambda_l.is_finite() && lambda_l > 0.0) {
            return Err(SpinorError::BadLondonDepth(lambda_l));
        }
        let f = field_4vector(&grid, &a, Some(&da0), d)?;
        let df0 = match &dda0 {
            Some(dd) => Some(field_4vector(&grid, &da0, Some(dd), d)?),
            None => None,
        };
        let cal_a: Vec<Spinor4> = a.iter().map(to_spinor_real).collect();
        let tilde_f: Vec<Spinor4> = f.iter().map(to_spinor).collect();
        let tilde_a = tilde_f.iter().map(|s| s * (-I * lambda_l)).collect();
        let cal_j = cal_a
            .iter()
            .map(|s| s * c64(-1.0 / (lambda_l * lambda_l), 0.0))
            .collect();
        Ok(FieldBundle {
            grid,
            a,
            da0,
            f,
            df0,
            cal_a,
            tilde_f,
            tilde_a,
            cal_j,
            lambda_l,
        })
    }

    /// Bundle at the middle of three consecutive time levels spaced by `dx0` = c·δt.
    pub fn from_levels(
        grid: Grid,
        levels: [&[FourVector]; 3],
        dx0: f64,
        lambda_l: f64,
        d: Deriv,
    ) -> Result<Self, SpinorError> {
        for l in levels {
            check_len(&grid, l.len())?;
        }
        let [prev, cur, next] = levels;
        let da0 = (0..cur.len())
            .map(|s| (next[s] - prev[s]) / (2.0 * dx0))
            .collect();
        let dda0 = (0..cur.len())
            .map(|s| (next[s] - cur[s] * 2.0 + prev[s]) / (dx0 * dx0))
            .collect();
        Self::new(grid, cur.to_vec(), da0, Some(dda0), lambda_l, d)
    }
}

fn max_norm(v: &[Spinor4]) -> f64 {
    v.iter().map(|s| s.norm()).fold(0.0, f64::max)
}

/// Σ_μ (σ-type block)_μ ∂_μ s, with ∂_0 supplied.
fn slash(grid: &Grid, d: Deriv, s: &[Spinor4], ds0: &[Spinor4], bar: bool) -> Vec<Spinor4> {
    let mats: Vec<Mat4> = (0..4)
        .map(|mu| {
            if bar {
                sigma_bar_block(mu)
            } else {
                sigma_block(mu)
            }
        })
        .collect();
    let mut out: Vec<Spinor4> = ds0.iter().map(|x| mats[0] * x).collect();
    for axis in 0..grid.dims {
        let ds = d_field4(grid, d, s, axis);
        for (o, x) in out.iter_mut().zip(&ds) {
            *o += mats[axis + 1] * x;
        }
    }
    out
}

/// (r1, r2) of e𝒥 + 1⊗σ·∂ℱ̃ = 0 and ℱ̃ + 1⊗σ̄·∂𝒜 = 0, grid max of per-site 2-norms.
pub fn maxwell_spinor_residual(
    bundle: &FieldBundle,
    current: &[FourVector],
    e: f64,
    d: Deriv,
) -> Result<(f64, f64), SpinorError> {
    let grid = &bundle.grid;
    check_len(grid, current.len())?;
    let df0 = bundle
        .df0
        .as_ref()
        .ok_or(SpinorError::MissingTimeDerivative("dF/dx0"))?;
    let dtf0: Vec<Spinor4> = df0.iter().map(to_spinor).collect();
    let sf = slash(grid, d, &bundle.tilde_f, &dtf0, false);
    let r1: Vec<Spinor4> = sf
        .iter()
        .zip(current)
        .map(|(x, j)| to_spinor_real(j) * c64(e, 0.0) + x)
        .collect();
    Ok((max_norm(&r1), maxwell_r2(bundle, d)))
}

fn maxwell_r2(bundle: &FieldBundle, d: Deriv) -> f64 {
    let da0: Vec<Spinor4> = bundle.da0.iter().map(to_spinor_real).collect();
    let sa = slash(&bundle.grid, d, &bundle.cal_a, &da0, true);
    let r2: Vec<Spinor4> = sa.iter().zip(&bundle.tilde_f).map(|(x, f)| x + f).collect();
    max_norm(&r2)
}

/// (r1, r2) of −𝒜/λ_L + i1⊗σ·∂𝒜̃ = 0 and −𝒜̃/λ_L + i1⊗σ̄·∂𝒜 = 0.
pub fn london_spinor_residual(bundle: &FieldBundle, d: Deriv) -> Result<(f64, f64), SpinorError> {
    let grid = &bundle.grid;
    let lam = bundle.lambda_l;
    let df0 = bundle
        .df0
        .as_ref()
        .ok_or(SpinorError::MissingTimeDerivative("dF/dx0"))?;
    let dta0: Vec<Spinor4> = df0.iter().map(|f| to_spinor(f) * (-I * lam)).collect();
    let s1 = slash(grid, d, &bundle.tilde_a, &dta0, false);
    let r1: Vec<Spinor4> = s1
        .iter()
        .zip(&bundle.cal_a)
        .map(|(x, a)| x * I - a * c64(1.0 / lam, 0.0))
        .collect();
    let da0: Vec<Spinor4> = bundle.da0.iter().map(to_spinor_real).collect();
    let s2 = slash(grid, d, &bundle.cal_a, &da0, true);
    let r2: Vec<Spinor4> = s2
        .iter()
        .zip(&bundle.tilde_a)
        .map(|(x, ta)| x * I - ta * c64(1.0 / lam, 0.0))
        .collect();
    Ok((max_norm(&r1), max_norm(&r2)))
}

/// Component form of the same equations: eJ⁰ = ∇·𝑭 − ∂₀F⁰ and
/// e𝑱 = −∂₀𝑭 + ∇F⁰ − i∇×𝑭, with F^μ recomputed from A. Returns the grid max of the
/// per-site complex 2-norm of the 4-vector residual (r1) and of F − F[A] (r2).
pub fn maxwell_component_residual(
    bundle: &FieldBundle,
    current: &[FourVector],
    e: f64,
    d: Deriv,
) -> Result<(f64, f64), SpinorError> {
    let grid = &bundle.grid;
    check_len(grid, current.len())?;
    let df0 = bundle
        .df0
        .as_ref()
        .ok_or(SpinorError::MissingTimeDerivative("dF/dx0"))?;
    // gf[i][c] = ∂_i F^c
    let gf: Vec<Vec<ComplexFour>> = (0..3).map(|i| d_field4(grid, d, &bundle.f, i)).collect();
    let mut worst = 0.0f64;
    for s in 0..grid.len() {
        let g = |i: usize, c: usize| gf[i - 1][s][c];
        let div = g(1, 1) + g(2, 2) + g(3, 3);
        let curl = [g(2, 3) - g(3, 2), g(3, 1) - g(1, 3), g(1, 2) - g(2, 1)];
        let mut r = ComplexFour::zeros();
        r[0] = c64(e * current[s][0], 0.0) - (div - df0[s][0]);
        for i in 1..4 {
            r[i] = c64(e * current[s][i], 0.0) - (-df0[s][i] + g(i, 0) - I * curl[i - 1]);
        }
        worst = worst.max(r.norm());
    }
    let refield = field_4vector(grid, &bundle.a, Some(&bundle.da0), d)?;
    let r2 = refield
        .iter()
        .zip(&bundle.f)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok((worst, r2))
}
