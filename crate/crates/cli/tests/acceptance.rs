//! Acceptance suite. One PASS/FAIL line per criterion; exits nonzero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use qgauge_core::deriv::Deriv;
use qgauge_core::fit::loglog_fit;
use qgauge_core::grid::Grid;
use qgauge_core::interaction::{
    back_reaction, back_reaction_linearized, correction_contraction, divergence, outgoing_current,
    scalar_density, spin_contraction, CurrentForm, PhysicalParams,
};
use qgauge_core::io::{make_initial, parse_config};
use qgauge_core::lattice::diagnostics::{equilibrium_residual, london_residual};
use qgauge_core::lattice::{Engine, LatticeConfig, Splitting};
use qgauge_core::verification::{
    algebra_checks, convergence_study, dispersion_scan, spectral_dirac_exact, Block,
    ConvergenceProblem, PacketSpec,
};
use qgauge_core::{FourVector, Spinor4, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Pinned tolerances.
const UNIT_STEP_TOL: f64 = 1e-12;
const UNIT_TOTAL_TOL: f64 = 1e-10;
const UNIT_STEPS: u64 = 10_000;
const CONTRACTION_TOL: f64 = 1e-14;
const ISOMETRY_TOL: f64 = 1e-12;
const SLOPE_TARGET: f64 = 2.0;
const SLOPE_BAND: f64 = 0.2;
const MASSLESS_TOL: f64 = 1e-12;
const MIN_ORDER: f64 = 1.8;
const ORACLE_ORDER: f64 = 3.5;
const CORRECTION_TOL: f64 = 1e-13;
/// C in ‖A'−A‖ ≤ C·ε².
const EQUILIBRIUM_C: f64 = 1.0;
const RANDOM_PAIRS: usize = 1000;
const SEED: u64 = 0x5eed;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_qgauge")
}

fn spinor(v: [f64; 8]) -> Spinor4 {
    Spinor4::new(
        C64::new(v[0], v[1]),
        C64::new(v[2], v[3]),
        C64::new(v[4], v[5]),
        C64::new(v[6], v[7]),
    )
}

fn random_spinor(rng: &mut ChaCha8Rng) -> Spinor4 {
    loop {
        let s = spinor(std::array::from_fn(|_| rng.random_range(-1.0..1.0)));
        let n2 = s.norm_squared();
        if scalar_density(&s).abs() >= 0.1 * n2 {
            return s / C64::new(n2.sqrt(), 0.0);
        }
    }
}

fn random_a(rng: &mut ChaCha8Rng) -> FourVector {
    FourVector::from_fn(|_, _| rng.random_range(-1.0..1.0))
}

fn criterion_1() -> Verdict {
    let checks = algebra_checks();
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.pass())
        .map(|c| c.name)
        .collect();
    let status = Command::new(bin())
        .arg("verify-algebra")
        .output()
        .map(|o| o.status.code());
    let ok = failed.is_empty() && matches!(status, Ok(Some(0)));
    verdict(
        ok,
        format!(
            "{} checks, failed {:?}, verify-algebra exit {:?}",
            checks.len(),
            failed,
            status.ok().flatten()
        ),
    )
}

fn criterion_2() -> Verdict {
    let base = "dims = 1\nnx = 256\nell = 1\nm = 0.4\nwidth = 12\nsteps = 0\n";
    let modes = [
        ("free", "coupling_mode = free\nweights = 1,1,1,1\n"),
        ("external_A", "coupling_mode = external_A\na = 0.2,0.1,0,0\nweights = 1,1,1,1\n"),
        ("self_consistent", "coupling_mode = self_consistent\ninit = london_equilibrium\nlondon_profile = gaussian\nm0 = 4\n"),
    ];
    let mut worst_step: f64 = 0.0;
    let mut worst_total: f64 = 0.0;
    let mut notes = vec![];
    for (name, extra) in modes {
        let cfg = match parse_config(&format!("{base}{extra}"), &[]) {
            Ok(c) => c,
            Err(e) => return verdict(false, format!("{name}: config {e:?}")),
        };
        let (mut st, lat) = match make_initial(&cfg) {
            Ok(v) => v,
            Err(e) => return verdict(false, format!("{name}: init {e}")),
        };
        let mut eng = match Engine::new(lat, &st) {
            Ok(e) => e,
            Err(e) => return verdict(false, format!("{name}: {e}")),
        };
        let n0 = st.norm();
        let mut prev = n0;
        let (mut step_max, mut total_max): (f64, f64) = (0.0, 0.0);
        for _ in 0..UNIT_STEPS {
            if let Err(e) = eng.step(&mut st) {
                return verdict(false, format!("{name}: {e}"));
            }
            let n = st.norm();
            step_max = step_max.max((n - prev).abs());
            total_max = total_max.max((n - n0).abs());
            prev = n;
        }
        notes.push(format!("{name} step {step_max:.1e} total {total_max:.1e}"));
        worst_step = worst_step.max(step_max);
        worst_total = worst_total.max(total_max);
    }
    verdict(
        worst_step <= UNIT_STEP_TOL && worst_total <= UNIT_TOTAL_TOL,
        notes.join("; "),
    )
}

fn criterion_3() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..RANDOM_PAIRS {
        let psi = random_spinor(&mut rng);
        let a = random_a(&mut rng);
        match spin_contraction(&psi, &a) {
            Ok(v) => worst = worst.max(v.norm()),
            Err(e) => return verdict(false, e.to_string()),
        }
    }
    verdict(
        worst <= CONTRACTION_TOL,
        format!("max |<S>AA| = {worst:.2e} over {RANDOM_PAIRS} pairs"),
    )
}

fn eta_norm(a: &FourVector) -> f64 {
    a[0] * a[0] - a[1] * a[1] - a[2] * a[2] - a[3] * a[3]
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let p = PhysicalParams {
        m0: 0.7,
        ell: 0.3,
        ..Default::default()
    };
    let mut worst: f64 = 0.0;
    let mut pairs = vec![];
    for _ in 0..RANDOM_PAIRS {
        let psi = random_spinor(&mut rng);
        let a = random_a(&mut rng);
        let a2 = back_reaction(&psi, &a, &p);
        worst = worst.max((eta_norm(&a2) - eta_norm(&a)).abs() / a.norm_squared());
        if pairs.len() < 16 {
            pairs.push((psi, a));
        }
    }
    let eps = [1e-1, 1e-2, 1e-3];
    let errs: Vec<f64> = eps
        .iter()
        .map(|&e| {
            // ε = m₀cℓ/ħ with c = ħ = ℓ = 1.
            let q = PhysicalParams {
                m0: e,
                ell: 1.0,
                ..Default::default()
            };
            pairs
                .iter()
                .map(|(psi, a)| {
                    (back_reaction(psi, a, &q) - back_reaction_linearized(psi, a, &q)).norm()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let slope = loglog_fit(&eps, &errs).map_or(f64::NAN, |f| f.slope);
    let ok = worst <= ISOMETRY_TOL && (slope - SLOPE_TARGET).abs() <= SLOPE_BAND;
    verdict(
        ok,
        format!("isometry {worst:.2e}, linearization slope {slope:.3}"),
    )
}

fn lattice(n: usize, ell: f64, p: PhysicalParams) -> LatticeConfig {
    LatticeConfig::new(Grid::line(n, ell), p).with_splitting(Splitting::Strang)
}

fn criterion_5() -> Verdict {
    let mut notes = vec![];
    // Massless ψ block.
    let cfg = lattice(64, 0.25, PhysicalParams::default());
    let ks: Vec<[f64; 3]> = (0..=16).map(|j| [j as f64 * 0.25, 0.0, 0.0]).collect();
    let massless = match dispersion_scan(&ks, &cfg, &FourVector::zeros(), Block::Psi) {
        Ok(s) => s.iter().flat_map(|x| x.abs_error()).fold(0.0, f64::max),
        Err(e) => return verdict(false, e.to_string()),
    };
    notes.push(format!("massless {massless:.1e}"));

    let ells = [0.2, 0.1, 0.05, 0.025];
    let m = 1.0;
    let k_phys = [0.0, 0.5, 1.0];
    let mut massive = vec![];
    let mut proca = vec![];
    for &ell in &ells {
        let p = PhysicalParams {
            m,
            m0: 1.0,
            ..Default::default()
        };
        let cfg = lattice(16, ell, p);
        let ks: Vec<[f64; 3]> = k_phys.iter().map(|&k| [k, 0.0, 0.0]).collect();
        let w2 = |k: f64, mass: f64| k * k + mass * mass;
        let err = |s: &[qgauge_core::verification::DispersionSample], mass: f64| {
            s.iter()
                .flat_map(|x| {
                    x.omega_measured
                        .iter()
                        .map(move |w| (w * w - w2(x.k[0], mass)).abs())
                })
                .fold(0.0, f64::max)
        };
        match dispersion_scan(&ks, &cfg, &FourVector::zeros(), Block::Psi) {
            Ok(s) => massive.push(err(&s, m)),
            Err(e) => return verdict(false, e.to_string()),
        }
        let mu = cfg.params.gauge_mass();
        match dispersion_scan(&[[0.0; 3]], &cfg, &FourVector::zeros(), Block::Phi) {
            Ok(s) => proca.push(
                s[0].omega_measured
                    .iter()
                    .map(|w| (w.abs() - mu).abs())
                    .fold(0.0, f64::max),
            ),
            Err(e) => return verdict(false, e.to_string()),
        }
    }
    let om = loglog_fit(&ells, &massive).map_or(f64::NAN, |f| f.slope);
    let op = loglog_fit(&ells, &proca).map_or(f64::NAN, |f| f.slope);
    notes.push(format!("massive order {om:.3}, gauge mass order {op:.3}"));
    verdict(
        massless <= MASSLESS_TOL && om >= MIN_ORDER && op >= MIN_ORDER,
        notes.join("; "),
    )
}

fn criterion_6() -> Verdict {
    let mut notes = vec![];
    let mut ok = true;
    for (name, a) in [
        ("A = 0", FourVector::zeros()),
        ("uniform A", FourVector::new(0.3, 0.2, 0.0, 0.0)),
    ] {
        let spec = PacketSpec {
            length: 16.0,
            width: 1.5,
            center: 8.0,
            k0: 0.5,
            spinor: Spinor4::new(
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.3),
                C64::new(0.0, 0.0),
            ),
            a,
            params: PhysicalParams {
                m: 1.0,
                ..Default::default()
            },
            splitting: Splitting::Strang,
        };
        match convergence_study(
            &ConvergenceProblem::DiracPacket(spec),
            &[0.5, 0.25, 0.125, 0.0625],
        ) {
            Ok(r) => {
                let order = r.fitted_order.unwrap_or(f64::NAN);
                let oracle = r.oracle_order.unwrap_or(f64::NAN);
                ok &= order >= MIN_ORDER && oracle >= ORACLE_ORDER;
                notes.push(format!("{name}: order {order:.3} (oracle {oracle:.2})"));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("{name}: {e}"));
            }
        }
    }
    verdict(ok, notes.join("; "))
}

/// max |∂_νJ^ν| of an exact free Dirac solution sampled on a grid, with a
/// central time difference.
fn continuity_on_exact(n: usize, length: f64, d: Deriv) -> Result<f64, String> {
    let ell = length / n as f64;
    let grid = Grid::line(n, ell);
    let p = PhysicalParams {
        m: 1.0,
        ell,
        ..Default::default()
    };
    let psi0: Vec<Spinor4> = (0..n)
        .map(|i| {
            let x = grid.position(i)[0] - 0.5 * length;
            let g = C64::from_polar((-x * x / 2.0).exp(), 0.7 * x);
            Spinor4::new(g, g * 0.5, C64::new(0.0, 0.0), g * C64::new(0.0, 0.4))
        })
        .collect();
    let zero = FourVector::zeros();
    let t = 1.0;
    let dt = p.dt();
    let at = |s: f64| spectral_dirac_exact(&grid, &psi0, &zero, s, &p).map_err(|e| e.to_string());
    let (before, now, after) = (at(t - dt)?, at(t)?, at(t + dt)?);
    let j = |v: &[Spinor4]| -> Vec<FourVector> {
        v.iter()
            .map(|s| outgoing_current(s, &zero, &p, CurrentForm::Linearized))
            .collect()
    };
    let (jb, jn, ja) = (j(&before), j(&now), j(&after));
    let dj0: Vec<f64> = ja
        .iter()
        .zip(&jb)
        .map(|(a, b)| (a[0] - b[0]) / (2.0 * p.c * dt))
        .collect();
    Ok(divergence(&grid, &jn, &dj0, d)
        .into_iter()
        .map(f64::abs)
        .fold(0.0, f64::max))
}

fn criterion_7() -> Verdict {
    let ns = [64usize, 128, 256, 512];
    let length = 16.0;
    let ells: Vec<f64> = ns.iter().map(|&n| length / n as f64).collect();
    let mut notes = vec![];
    let mut ok = true;
    for d in [Deriv::Central2, Deriv::Spectral] {
        let res: Result<Vec<f64>, String> = ns
            .iter()
            .map(|&n| continuity_on_exact(n, length, d))
            .collect();
        match res {
            Ok(r) => {
                let slope = loglog_fit(&ells, &r).map_or(f64::NAN, |f| f.slope);
                let floor = r.iter().all(|x| *x < 1e-11);
                ok &= floor || slope >= MIN_ORDER;
                notes.push(format!(
                    "{d:?} slope {slope:.3} (finest {:.1e})",
                    r[r.len() - 1]
                ));
            }
            Err(e) => {
                ok = false;
                notes.push(e);
            }
        }
    }
    verdict(ok, notes.join("; "))
}

fn criterion_8() -> Verdict {
    // Real spinors and spinors with a common phase have ψ̄γ⁵ψ = 0.
    let spinors = [
        "1,0,0,0",
        "0.8,0.3,0,0.2",
        "1,0.5,-0.25,0.1",
        "0.6,0,0,-0.3",
    ];
    let m0s = [4.0, 2.0, 1.0];
    let mut worst_c: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    let mut worst_london: f64 = 0.0;
    for sp in spinors {
        for m0 in m0s {
            let text = format!(
                "nx = 8\nell = 0.25\ninit = london_equilibrium\nspinor = {sp}\nm0 = {m0}\n"
            );
            let cfg = match parse_config(&text, &[]) {
                Ok(c) => c,
                Err(e) => return verdict(false, format!("{e:?}")),
            };
            let (st, lat) = match make_initial(&cfg) {
                Ok(v) => v,
                Err(e) => return verdict(false, format!("spinor {sp} m0 {m0}: {e}")),
            };
            let p = lat.params;
            for s in 0..st.grid.len() {
                worst_c = worst_c.max(correction_contraction(&st.spinor(s), &st.a[s], &p).abs());
            }
            let eps = p.epsilon();
            worst_ratio = worst_ratio.max(equilibrium_residual(&st, &p) / (eps * eps));
            worst_london = worst_london.max(london_residual(&st, &p));
        }
    }
    let ok = worst_c <= CORRECTION_TOL && worst_ratio <= EQUILIBRIUM_C;
    verdict(
        ok,
        format!("contraction {worst_c:.1e}, max ‖A'-A‖/ε² {worst_ratio:.2e}, London residual {worst_london:.1e}"),
    )
}

fn run_evolve(cfg: &Path, out: &Path, threads: usize) -> Result<(), String> {
    let o = Command::new(bin())
        .args(["evolve", "--config"])
        .arg(cfg)
        .arg(format!("--output_dir={}", out.display()))
        .arg(format!("--threads={threads}"))
        .output()
        .map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(String::from_utf8_lossy(&o.stderr).into_owned());
    }
    Ok(())
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .into_iter()
        .flatten()
        .flatten()
        .map(|e| {
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap_or_default(),
            )
        })
        .collect();
    v.sort();
    v
}

fn criterion_9() -> Verdict {
    let tmp = match tempfile::tempdir() {
        Ok(t) => t,
        Err(e) => return verdict(false, e.to_string()),
    };
    let configs = [
        ("free_1d", "dims = 1\nnx = 128\nm = 0.3\nweights = 1,1,1,1\nsteps = 40\nsnapshot_every = 10\n"),
        (
            "external_2d",
            "dims = 2\nnx = 16\nny = 12\nm = 0.3\ncoupling_mode = external_A\na = 0.1,0.2,-0.1,0\nsteps = 20\nsnapshot_every = 5\n",
        ),
        (
            "self_consistent_3d",
            "dims = 3\nnx = 8\nny = 8\nnz = 6\nm = 0.2\nm0 = 4\ncoupling_mode = self_consistent\ninit = london_equilibrium\nlondon_profile = gaussian\nwidth = 2\ncurrent_form = exact\nsteps = 12\nsnapshot_every = 4\n",
        ),
    ];
    let mut notes = vec![];
    let mut ok = true;
    for (name, text) in configs {
        let cfg = tmp.path().join(format!("{name}.cfg"));
        if let Err(e) = std::fs::write(&cfg, text) {
            return verdict(false, e.to_string());
        }
        let outs: Vec<_> = [1usize, 4]
            .iter()
            .map(|t| (t, tmp.path().join(format!("{name}_t{t}"))))
            .collect();
        let mut files = vec![];
        for (t, out) in &outs {
            if let Err(e) = run_evolve(&cfg, out, **t) {
                return verdict(false, format!("{name}: {e}"));
            }
            files.push(dir_bytes(out));
        }
        let same = files[0] == files[1] && !files[0].is_empty();
        ok &= same;
        notes.push(format!(
            "{name} {} files {}",
            files[0].len(),
            if same { "identical" } else { "DIFFER" }
        ));
    }
    verdict(ok, notes.join("; "))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("algebra", criterion_1),
        ("unitarity", criterion_2),
        ("antisymmetric contraction", criterion_3),
        ("back-reaction isometry", criterion_4),
        ("dispersion", criterion_5),
        ("continuum convergence", criterion_6),
        ("continuity", criterion_7),
        ("London equilibrium", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = f();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        if !v.pass {
            failed += 1;
        }
        println!(
            "{tag} {} {name}: {} [{:.1}s]",
            i + 1,
            v.detail,
            t.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
