use std::path::{Path, PathBuf};

use qgauge_core::interaction::correction_contraction;
use qgauge_core::io::config::{ConvergeKind, InitKind};
use qgauge_core::io::csv::{convergence_csv, dispersion_csv, write_diagnostics, write_text};
use qgauge_core::io::{
    make_initial, parse_config, snapshot_name, write_snapshot, IoError, RunConfig,
};
use qgauge_core::lattice::diagnostics::{equilibrium_residual, london_residual};
use qgauge_core::lattice::engine::Schedule;
use qgauge_core::lattice::{CouplingMode, Engine, LatticeConfig, MultipletField};
use qgauge_core::verification::{
    algebra_checks, convergence_study, dispersion_scan, ConvergenceProblem, DoubletWave, PacketSpec,
};
use qgauge_core::{Doublet8, FourVector};

/// Dispersion operators must stay on the unit circle to this accuracy.
pub const UNIT_DEFECT_TOL: f64 = 1e-12;
/// London initial data must make the current correction orthogonal to A to this accuracy.
pub const CONTRACTION_TOL: f64 = 1e-13;
/// Boundary amplitude of the initial packet above which `converge` warns.
const EDGE_WARN: f64 = 1e-8;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

pub enum Outcome {
    Pass,
    CheckFailed,
}

type CliResult = Result<Outcome, CliError>;

fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

fn load(path: &Path, overrides: &[(String, String)]) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    let cfg = parse_config(&text, overrides).map_err(|errs| {
        let lines: Vec<String> = errs.iter().map(|e| e.to_string()).collect();
        CliError::Validation(format!("{}:\n  {}", path.display(), lines.join("\n  ")))
    })?;
    if cfg.threads > 0 {
        // Fails only if a pool already exists, which is harmless here.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global();
    }
    Ok(cfg)
}

fn initial(cfg: &RunConfig) -> Result<(MultipletField, LatticeConfig), CliError> {
    make_initial(cfg).map_err(|e| match e {
        IoError::File { .. } => CliError::Runtime(e.to_string()),
        _ => CliError::Validation(e.to_string()),
    })
}

fn output_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| {
        CliError::Runtime(format!("cannot create {}: {e}", cfg.output_dir.display()))
    })?;
    Ok(cfg.output_dir.clone())
}

fn external_a(cfg: &RunConfig) -> FourVector {
    match cfg.lattice.coupling {
        CouplingMode::Free => FourVector::zeros(),
        _ => cfg.a,
    }
}

fn verdict(ok: bool) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::CheckFailed
    }
}

pub fn verify_algebra() -> CliResult {
    let mut ok = true;
    for c in algebra_checks() {
        let tag = if c.pass() { "PASS" } else { "FAIL" };
        ok &= c.pass();
        println!(
            "{tag} {} residual={:.3e} tol={:.0e}",
            c.name, c.value, c.tol
        );
    }
    Ok(verdict(ok))
}

pub fn dispersion(path: &Path, overrides: &[(String, String)]) -> CliResult {
    let cfg = load(path, overrides)?;
    if cfg.lattice.coupling == CouplingMode::SelfConsistent {
        return Err(CliError::Validation(
            "dispersion needs coupling_mode = free or external_A".into(),
        ));
    }
    let violations = cfg.lattice.violations();
    if !violations.is_empty() {
        return Err(CliError::Validation(violations.join("; ")));
    }
    let opts = &cfg.dispersion;
    if opts.k_count < 2 {
        return Err(CliError::Validation(
            "dispersion_k_count must be at least 2".into(),
        ));
    }
    let k_max = opts
        .k_max
        .unwrap_or(std::f64::consts::FRAC_PI_2 / cfg.lattice.grid.ell);
    let ks: Vec<[f64; 3]> = (0..opts.k_count)
        .map(|j| [j as f64 * k_max / (opts.k_count - 1) as f64, 0.0, 0.0])
        .collect();
    let samples =
        dispersion_scan(&ks, &cfg.lattice, &external_a(&cfg), opts.block).map_err(runtime)?;
    for s in samples.iter().filter(|s| s.ambiguous) {
        eprintln!("warning: branch labels ambiguous at k = {:e}", s.k[0]);
    }
    let dir = output_dir(&cfg)?;
    write_text(&dir.join("dispersion.csv"), &dispersion_csv(&samples)).map_err(runtime)?;
    let defect = samples.iter().map(|s| s.unit_defect).fold(0.0, f64::max);
    let err = samples
        .iter()
        .flat_map(|s| s.abs_error())
        .fold(0.0, f64::max);
    println!(
        "samples = {} max_abs_error = {err:.6e} unit_defect = {defect:.3e}",
        samples.len()
    );
    if defect > UNIT_DEFECT_TOL {
        eprintln!("check failed: unit-circle defect {defect:e} exceeds {UNIT_DEFECT_TOL:e}");
    }
    Ok(verdict(defect <= UNIT_DEFECT_TOL))
}

pub fn evolve(path: &Path, overrides: &[(String, String)]) -> CliResult {
    let cfg = load(path, overrides)?;
    let (mut state, lattice) = initial(&cfg)?;
    let dir = output_dir(&cfg)?;
    let mut engine = Engine::new(lattice, &state).map_err(runtime)?;
    let schedule = Schedule {
        snapshot_every: cfg.snapshot_every,
        diag_every: cfg.diag_every,
    };
    let diags = engine
        .evolve(&mut state, cfg.steps, schedule, |step, time, st| {
            write_snapshot(&dir.join(snapshot_name(step)), st, step, time)
                .map_err(|e| e.to_string())
        })
        .map_err(runtime)?;
    write_diagnostics(&dir.join("diag.csv"), &diags).map_err(runtime)?;
    println!(
        "steps = {} time = {:.6e} norm = {:.16e} max_norm_drift = {:.3e}",
        engine.step_index(),
        engine.time(),
        state.norm(),
        diags.max_abs_norm_drift()
    );
    Ok(Outcome::Pass)
}

fn convergence_problem(cfg: &RunConfig) -> Result<ConvergenceProblem, CliError> {
    let grid = cfg.lattice.grid;
    if grid.dims != 1 {
        return Err(CliError::Validation(
            "converge runs on a line; set dims = 1".into(),
        ));
    }
    let length = grid.length(0);
    let params = cfg.lattice.params;
    let splitting = cfg.lattice.splitting;
    let init = &cfg.init;
    Ok(match cfg.converge.problem {
        ConvergeKind::DiracPacket => {
            let center = init.center.map_or(0.5 * length, |c| c[0]);
            let gap = (center.rem_euclid(length)).min(length - center.rem_euclid(length));
            let edge = (-gap * gap / (2.0 * init.width * init.width)).exp();
            if edge > EDGE_WARN {
                eprintln!("warning: packet amplitude at the periodic boundary is {edge:.2e}; narrow `width` for a smooth initial state");
            }
            ConvergenceProblem::DiracPacket(PacketSpec {
                length,
                width: init.width,
                center,
                k0: init.k[0],
                spinor: init.spinor,
                a: external_a(cfg),
                params,
                splitting,
            })
        }
        ConvergeKind::DoubletWave => {
            let mut amplitude = Doublet8::zeros();
            let [w0, w1, ..] = init.weights;
            if w0 == 0.0 && w1 == 0.0 {
                amplitude.fixed_rows_mut::<4>(0).copy_from(&init.spinor);
            } else {
                amplitude
                    .fixed_rows_mut::<4>(0)
                    .copy_from(&init.spinor.map(|z| z * w0));
                amplitude
                    .fixed_rows_mut::<4>(4)
                    .copy_from(&init.spinor.map(|z| z * w1));
            }
            ConvergenceProblem::DoubletPlaneWave(DoubletWave {
                length,
                mode: cfg.converge.doublet_mode,
                amplitude,
                params,
                splitting,
            })
        }
    })
}

pub fn converge(path: &Path, overrides: &[(String, String)]) -> CliResult {
    let cfg = load(path, overrides)?;
    let problem = convergence_problem(&cfg)?;
    let ell = cfg.lattice.grid.ell;
    let ells = cfg
        .converge
        .ell_list
        .clone()
        .unwrap_or_else(|| vec![ell, ell / 2.0, ell / 4.0, ell / 8.0]);
    let report = convergence_study(&problem, &ells).map_err(|e| match e {
        qgauge_core::verification::VerificationError::InvalidStudy(_)
        | qgauge_core::verification::VerificationError::InsufficientLevels { .. } => {
            CliError::Validation(e.to_string())
        }
        _ => CliError::Runtime(e.to_string()),
    })?;
    let dir = output_dir(&cfg)?;
    write_text(&dir.join("converge.csv"), &convergence_csv(&report)).map_err(runtime)?;
    let opt = |x: Option<f64>| x.map_or("none".to_string(), |v| format!("{v:.4}"));
    println!(
        "fitted_order = {} r_squared = {} monotone = {} oracle_order = {}",
        opt(report.fitted_order),
        opt(report.r_squared),
        report.monotone,
        opt(report.oracle_order)
    );
    if report.floor_limited() {
        println!("all errors below round-off floor; no order fitted");
        return Ok(Outcome::Pass);
    }
    let ok = report
        .fitted_order
        .is_some_and(|o| o >= cfg.converge.min_order);
    if !ok {
        eprintln!(
            "check failed: fitted order below converge_min_order = {}",
            cfg.converge.min_order
        );
    }
    Ok(verdict(ok))
}

pub fn equilibrium(path: &Path, overrides: &[(String, String)]) -> CliResult {
    let mut cfg = load(path, overrides)?;
    cfg.init.kind = InitKind::LondonEquilibrium;
    let (state, lattice) = initial(&cfg)?;
    let p = lattice.params;
    let contraction = (0..state.grid.len())
        .map(|s| correction_contraction(&state.spinor(s), &state.a[s], &p).abs())
        .fold(0.0, f64::max);
    let eq = equilibrium_residual(&state, &p);
    let lon = london_residual(&state, &p);
    println!("correction_contraction = {contraction:.6e}");
    println!("equilibrium_residual = {eq:.6e}");
    println!("london_residual = {lon:.6e}");
    if contraction > CONTRACTION_TOL {
        eprintln!("check failed: correction contraction exceeds {CONTRACTION_TOL:e}");
    }
    Ok(verdict(contraction <= CONTRACTION_TOL))
}
