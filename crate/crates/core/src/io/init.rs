use super::config::{InitKind, InitSpec, LondonProfile, RunConfig};
use super::snapshot::read_snapshot;
use super::IoError;
use crate::grid::Grid;
use crate::interaction::{
    background_density, london_potential, scalar_density, InteractionError, NULL_NORM_TOL,
};
use crate::lattice::{LatticeConfig, MultipletField, CAL_A, TILDE_A};
use crate::spinor::{to_spinor_real, FieldBundle};
use crate::{c64, FourVector, C64};

fn center(grid: &Grid, spec: &InitSpec) -> [f64; 3] {
    spec.center.unwrap_or_else(|| {
        let mut c = [0.0; 3];
        for (ax, x) in c.iter_mut().enumerate().take(grid.dims) {
            *x = 0.5 * grid.length(ax);
        }
        c
    })
}

fn plane(spec: &InitSpec, x: [f64; 3]) -> C64 {
    C64::from_polar(1.0, spec.k.iter().zip(x).map(|(k, x)| k * x).sum())
}

fn gaussian(grid: &Grid, spec: &InitSpec, x: [f64; 3]) -> C64 {
    let c = center(grid, spec);
    let r2: f64 = (0..grid.dims).map(|ax| (x[ax] - c[ax]).powi(2)).sum();
    plane(spec, x) * (-r2 / (2.0 * spec.width * spec.width)).exp()
}

/// Site nearest to the configured center.
fn nearest_site(grid: &Grid, spec: &InitSpec) -> usize {
    let c = center(grid, spec);
    let mut idx = [0usize; 3];
    for ax in 0..grid.dims {
        let n = grid.n[ax] as f64;
        idx[ax] = ((c[ax] / grid.ell).round().rem_euclid(n)) as usize;
    }
    grid.index(idx[0], idx[1], idx[2])
}

fn profile(grid: &Grid, spec: &InitSpec, kind: InitKind) -> Vec<C64> {
    let n = grid.len();
    match kind {
        InitKind::PlaneWave => (0..n).map(|s| plane(spec, grid.position(s))).collect(),
        InitKind::Gaussian => (0..n)
            .map(|s| gaussian(grid, spec, grid.position(s)))
            .collect(),
        InitKind::Delta => {
            let mut v = vec![c64(0.0, 0.0); n];
            v[nearest_site(grid, spec)] = c64(1.0, 0.0);
            v
        }
        InitKind::LondonEquilibrium | InitKind::File => vec![c64(1.0, 0.0); n],
    }
}

/// Build the initial state. Returns it with the lattice configuration, whose ρ₀
/// is resolved when the config asks for `rho0 = auto`.
pub fn make_initial(cfg: &RunConfig) -> Result<(MultipletField, LatticeConfig), IoError> {
    let mut lattice = cfg.lattice.clone();
    let grid = lattice.grid;
    let spec = &cfg.init;
    if spec.kind == InitKind::File {
        let path = spec
            .file
            .as_ref()
            .ok_or_else(|| IoError::Init("init = file requires init_file".into()))?;
        let (_, mut state) = read_snapshot(path, Some(&grid))?;
        if spec.normalize {
            normalize(&mut state)?;
        }
        resolve_rho0(cfg, &mut lattice, &state)?;
        return Ok((state, lattice));
    }
    let mut state = MultipletField::zeros(grid);
    for a in &mut state.a {
        *a = cfg.a;
    }
    if spec.kind == InitKind::LondonEquilibrium {
        let kind = match spec.london_profile {
            LondonProfile::Uniform => InitKind::LondonEquilibrium,
            LondonProfile::PlaneWave => InitKind::PlaneWave,
            LondonProfile::Gaussian => InitKind::Gaussian,
        };
        let prof = profile(&grid, spec, kind);
        for (s, f) in prof.iter().enumerate() {
            state.set_spinor(s, &(spec.spinor * *f));
        }
        let psi = state.spinors();
        let dens: f64 = psi.iter().map(|s| scalar_density(s).abs()).sum();
        let norm2: f64 = psi.iter().map(|s| s.norm_squared()).sum();
        if !(dens > NULL_NORM_TOL * norm2) {
            return Err(InteractionError::NullNorm { value: dens, norm2 }.into());
        }
        if spec.normalize {
            let k = 1.0 / norm2.sqrt();
            for s in 0..grid.len() {
                let v = state.spinor(s) * c64(k, 0.0);
                state.set_spinor(s, &v);
            }
        }
        resolve_rho0(cfg, &mut lattice, &state)?;
        let p = lattice.params;
        let a: Vec<FourVector> = state
            .spinors()
            .iter()
            .map(|s| london_potential(s, &p))
            .collect();
        let bundle = FieldBundle::new(
            grid,
            a.clone(),
            vec![FourVector::zeros(); grid.len()],
            None,
            p.lambda_l(),
            lattice.deriv,
        )
        .map_err(|e| IoError::Init(e.to_string()))?;
        for s in 0..grid.len() {
            state.a[s] = a[s];
            state.psi[s]
                .fixed_rows_mut::<4>(CAL_A)
                .copy_from(&to_spinor_real(&a[s]));
            state.psi[s]
                .fixed_rows_mut::<4>(TILDE_A)
                .copy_from(&bundle.tilde_a[s]);
        }
        return Ok((state, lattice));
    }
    let prof = profile(&grid, spec, spec.kind);
    for (s, f) in prof.iter().enumerate() {
        for (b, w) in spec.weights.iter().enumerate() {
            if *w != 0.0 {
                let v = spec.spinor * (*f * *w);
                state.psi[s].fixed_rows_mut::<4>(4 * b).copy_from(&v);
            }
        }
    }
    if spec.normalize {
        normalize(&mut state)?;
    }
    resolve_rho0(cfg, &mut lattice, &state)?;
    Ok((state, lattice))
}

fn normalize(state: &mut MultipletField) -> Result<(), IoError> {
    let n = state.norm();
    if !(n > 0.0) {
        return Err(IoError::Init("initial state is identically zero".into()));
    }
    state.scale(1.0 / n);
    Ok(())
}

fn resolve_rho0(
    cfg: &RunConfig,
    lattice: &mut LatticeConfig,
    state: &MultipletField,
) -> Result<(), IoError> {
    if cfg.rho0_auto {
        let rho = background_density(&state.spinors(), &lattice.params).modulus();
        if !(rho > 0.0) {
            return Err(IoError::Init(
                "rho0 = auto but the initial psi block has zero mean psibar psi".into(),
            ));
        }
        lattice.params.rho0 = rho;
    }
    let v = lattice.violations();
    if !v.is_empty() {
        return Err(IoError::Init(v.join("; ")));
    }
    Ok(())
}
