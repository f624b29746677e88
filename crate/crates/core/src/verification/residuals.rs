use super::VerificationError;
use crate::clifford::ETA;
use crate::deriv::Deriv;
use crate::grid::Grid;
use crate::interaction::{back_reaction_generator, metric, PhysicalParams};
use crate::{c64, FourVector, Matrix4Real, Spinor4};

fn check(
    grid: &Grid,
    levels: &[Vec<FourVector>],
    psi: &[Spinor4],
) -> Result<(), VerificationError> {
    if levels.len() < 3 {
        return Err(VerificationError::InsufficientLevels { got: levels.len() });
    }
    for l in levels
        .iter()
        .map(|l| l.len())
        .chain(std::iter::once(psi.len()))
    {
        if l != grid.len() {
            return Err(VerificationError::ShapeMismatch {
                expected: grid.len(),
                got: l,
            });
        }
    }
    Ok(())
}

fn component(f: &[FourVector], mu: usize) -> Vec<f64> {
    f.iter().map(|v| v[mu]).collect()
}

/// ∂_axis A^μ for all μ, per site.
fn gradient(grid: &Grid, a: &[FourVector], axis: usize, d: Deriv) -> Vec<FourVector> {
    let mut out = vec![FourVector::zeros(); a.len()];
    for mu in 0..4 {
        for (o, x) in out.iter_mut().zip(d.d_real(grid, &component(a, mu), axis)) {
            o[mu] = x;
        }
    }
    out
}

/// max‖∂²A^μ + g^{μν}A_ν/λ_L²‖ at the middle of the last three time levels,
/// spaced `dx0` in x⁰ = ct.
pub fn proca_residual(
    grid: &Grid,
    levels: &[Vec<FourVector>],
    dx0: f64,
    psi: &[Spinor4],
    p: &PhysicalParams,
    d: Deriv,
) -> Result<f64, VerificationError> {
    check(grid, levels, psi)?;
    let n = levels.len();
    let (prev, cur, next) = (&levels[n - 3], &levels[n - 2], &levels[n - 1]);
    let mut lap = vec![FourVector::zeros(); grid.len()];
    for ax in 0..grid.dims {
        let g1 = gradient(grid, cur, ax, d);
        let g2 = gradient(grid, &g1, ax, d);
        for (l, x) in lap.iter_mut().zip(g2) {
            *l += x;
        }
    }
    let il2 = 1.0 / p.lambda_l().powi(2);
    let eta = FourVector::from(ETA);
    let mut worst: f64 = 0.0;
    for s in 0..grid.len() {
        let dd0 = (next[s] - cur[s] * 2.0 + prev[s]) / (dx0 * dx0);
        let lower = cur[s].component_mul(&eta).map(|x| c64(x, 0.0));
        let ga = (metric(&psi[s], p).g * lower).map(|z| z.re);
        let r = dd0 - lap[s] + ga * il2;
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

/// max over sites and index pairs of |F_direct^{μν} − F_bilinear^{μν}|.
///
/// F_direct = ∂^μA^ν − ∂^νA^μ, with ∂₀ a central difference over the last three
/// levels. F_bilinear = (u^μ(LA)^ν − u^ν(LA)^μ)/(4ℓ), where L is the
/// back-reaction generator iε·B^{λν}(·)_λ/ρ₀ and u = (1,0,0,0) the lattice time
/// direction.
pub fn field_strength_check(
    grid: &Grid,
    levels: &[Vec<FourVector>],
    dx0: f64,
    psi: &[Spinor4],
    p: &PhysicalParams,
    d: Deriv,
) -> Result<f64, VerificationError> {
    check(grid, levels, psi)?;
    let n = levels.len();
    let (prev, cur, next) = (&levels[n - 3], &levels[n - 2], &levels[n - 1]);
    let grads: Vec<Vec<FourVector>> = (0..3).map(|ax| gradient(grid, cur, ax, d)).collect();
    let mut worst: f64 = 0.0;
    for s in 0..grid.len() {
        // Row μ holds ∂^μ A^ν.
        let mut da = Matrix4Real::zeros();
        let d0 = (next[s] - prev[s]) / (2.0 * dx0);
        for nu in 0..4 {
            da[(0, nu)] = d0[nu];
            for ax in 0..3 {
                da[(ax + 1, nu)] = -grads[ax][s][nu];
            }
        }
        let direct = da - da.transpose();
        let la = back_reaction_generator(&psi[s], p) * cur[s] / (4.0 * p.ell);
        let mut bil = Matrix4Real::zeros();
        for nu in 1..4 {
            bil[(0, nu)] = la[nu];
            bil[(nu, 0)] = -la[nu];
        }
        worst = worst.max((direct - bil).amax());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interaction::london_potential;
    use crate::C64;

    fn uniform(n: usize, v: FourVector) -> Vec<FourVector> {
        vec![v; n]
    }

    #[test]
    fn zero_field_zero_residual() {
        let grid = Grid::line(16, 0.5);
        let z = uniform(16, FourVector::zeros());
        let psi = vec![Spinor4::zeros(); 16];
        let p = PhysicalParams::default();
        assert_eq!(
            proca_residual(
                &grid,
                &[z.clone(), z.clone(), z.clone()],
                0.5,
                &psi,
                &p,
                Deriv::Spectral
            )
            .unwrap(),
            0.0
        );
        assert_eq!(
            field_strength_check(
                &grid,
                &[z.clone(), z.clone(), z],
                0.5,
                &psi,
                &p,
                Deriv::Spectral
            )
            .unwrap(),
            0.0
        );
    }

    #[test]
    fn too_few_levels() {
        let grid = Grid::line(4, 1.0);
        let z = uniform(4, FourVector::zeros());
        let psi = vec![Spinor4::zeros(); 4];
        let p = PhysicalParams::default();
        assert_eq!(
            proca_residual(&grid, &[z.clone(), z], 1.0, &psi, &p, Deriv::Spectral),
            Err(VerificationError::InsufficientLevels { got: 2 })
        );
    }

    fn proca_wave(n: usize, detune: f64, dt: f64) -> f64 {
        let len = 16.0;
        let ell = len / n as f64;
        let grid = Grid::line(n, ell);
        let p = PhysicalParams {
            ell,
            m0: 0.5,
            ..Default::default()
        };
        let k = 2.0 * std::f64::consts::PI * 2.0 / len;
        let w = (k * k + 1.0 / p.lambda_l().powi(2)).sqrt() * (1.0 + detune);
        let amp = FourVector::new(0.3, 0.0, 0.5, -0.2);
        let level = |t: f64| -> Vec<FourVector> {
            (0..n)
                .map(|s| amp * (k * grid.position(s)[0] - w * t).cos())
                .collect()
        };
        let psi = vec![Spinor4::zeros(); n];
        proca_residual(
            &grid,
            &[level(-dt), level(0.0), level(dt)],
            dt,
            &psi,
            &p,
            Deriv::Spectral,
        )
        .unwrap()
    }

    #[test]
    fn on_shell_proca_wave_converges_at_stencil_order() {
        let r: Vec<f64> = [0.4, 0.2, 0.1, 0.05]
            .iter()
            .map(|&dt| proca_wave(64, 0.0, dt))
            .collect();
        let fit = crate::fit::loglog_fit(&[0.4, 0.2, 0.1, 0.05], &r).unwrap();
        assert!(fit.slope > 1.9, "{r:?}");
        assert!(proca_wave(64, 0.2, 0.05) > 100.0 * r[3]);
    }

    #[test]
    fn metric_enters_through_psi() {
        let n = 8;
        let grid = Grid::line(n, 1.0);
        let p = PhysicalParams {
            m0: 0.3,
            ..Default::default()
        };
        let s = Spinor4::new(
            C64::new(0.6, 0.0),
            C64::new(0.1, 0.2),
            C64::new(0.0, -0.3),
            C64::new(0.2, 0.0),
        );
        let psi = vec![s; n];
        let a = uniform(n, london_potential(&s, &p));
        let flat = proca_residual(
            &grid,
            &[a.clone(), a.clone(), a.clone()],
            1.0,
            &vec![Spinor4::zeros(); n],
            &p,
            Deriv::Spectral,
        )
        .unwrap();
        let curved = proca_residual(
            &grid,
            &[a.clone(), a.clone(), a],
            1.0,
            &psi,
            &p,
            Deriv::Spectral,
        )
        .unwrap();
        assert!(flat > 0.0 && (flat - curved).abs() > 0.0);
    }

    /// Uniform ψ with A(x⁰) = A₀ + x⁰·LA₀/(4ℓ): first-order agreement, so the
    /// residual at x⁰ = x₁ is the quadratic truncation.
    fn manufactured(eps_scale: f64) -> f64 {
        let n = 8;
        let ell = 0.5;
        let grid = Grid::line(n, ell);
        let p = PhysicalParams {
            ell,
            m0: 0.05 * eps_scale,
            ..Default::default()
        };
        let s = Spinor4::new(
            C64::new(0.6, 0.0),
            C64::new(0.1, 0.2),
            C64::new(0.0, -0.3),
            C64::new(0.2, 0.4),
        );
        let psi = vec![s; n];
        let a0 = FourVector::new(0.4, 0.1, -0.3, 0.2);
        let la0 = back_reaction_generator(&s, &p) * a0 / (4.0 * ell);
        let at = |x0: f64| uniform(n, a0 + la0 * x0);
        let (x1, h) = (2.0, 0.1);
        field_strength_check(
            &grid,
            &[at(x1 - h), at(x1), at(x1 + h)],
            h,
            &psi,
            &p,
            Deriv::Spectral,
        )
        .unwrap()
    }

    #[test]
    fn field_strength_residual_is_quadratic_in_epsilon() {
        let r1 = manufactured(1.0);
        let r2 = manufactured(0.5);
        let ratio = r2 / r1;
        assert!((ratio - 0.25).abs() < 0.02, "{r1} {r2} {ratio}");
    }

    #[test]
    fn pure_gauge_without_coupling_is_zero() {
        let n = 32;
        let ell = 0.25;
        let grid = Grid::line(n, ell);
        let p = PhysicalParams {
            ell,
            m0: 0.0,
            ..Default::default()
        };
        let k = 2.0 * std::f64::consts::PI / (n as f64 * ell);
        // A^μ = ∂^μχ for χ = sin(kx)·x⁰: A⁰ = sin(kx), A¹ = −k·cos(kx)·x⁰.
        let level = |x0: f64| -> Vec<FourVector> {
            (0..n)
                .map(|s| {
                    let x = grid.position(s)[0];
                    FourVector::new((k * x).sin(), -k * (k * x).cos() * x0, 0.0, 0.0)
                })
                .collect()
        };
        let psi = vec![Spinor4::zeros(); n];
        let r = field_strength_check(
            &grid,
            &[level(-0.1), level(0.0), level(0.1)],
            0.1,
            &psi,
            &p,
            Deriv::Spectral,
        )
        .unwrap();
        assert!(r < 1e-13, "{r}");
    }
}
