use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use crate::deriv::Deriv;
use crate::grid::Grid;
use crate::interaction::{CurrentForm, PhysicalParams};
use crate::lattice::{CouplingMode, LatticeConfig, Splitting};
use crate::verification::Block;
use crate::{c64, FourVector, Spinor4};

/// One documented configuration key.
#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    pub kind: &'static str,
    pub default: &'static str,
    /// A valid non-default value, used by the schema tests.
    pub alt: &'static str,
    pub doc: &'static str,
}

const fn key(
    name: &'static str,
    kind: &'static str,
    default: &'static str,
    alt: &'static str,
    doc: &'static str,
) -> KeySpec {
    KeySpec {
        name,
        kind,
        default,
        alt,
        doc,
    }
}

pub const KEYS: &[KeySpec] = &[
    key("dims", "int 1-3", "1", "2", "number of active axes"),
    key("nx", "int", "64", "32", "sites along x"),
    key("ny", "int", "1", "4", "sites along y (1 unless dims >= 2)"),
    key("nz", "int", "1", "4", "sites along z (1 unless dims = 3)"),
    key("ell", "float", "1", "0.5", "cell size"),
    key(
        "zeta",
        "float",
        "1",
        "0.5",
        "time-scale factor, dt = zeta*ell/c",
    ),
    key("m", "float", "0", "0.5", "fermion mass"),
    key("m0", "float", "1", "2", "interaction mass scale"),
    key("e", "float", "1", "0.5", "charge"),
    key(
        "rho0",
        "float|auto",
        "1",
        "auto",
        "background density; auto = |4*eps*mean(psibar psi)| of the initial state",
    ),
    key("hbar", "float", "1", "2", "reduced Planck constant"),
    key("c", "float", "1", "2", "speed of light"),
    key(
        "coupling_mode",
        "free|external_A|self_consistent",
        "free",
        "external_A",
        "gauge coupling of the evolution",
    ),
    key(
        "splitting",
        "strang|lie_xyz",
        "strang",
        "lie_xyz",
        "operator splitting of the step",
    ),
    key(
        "current_form",
        "linearized|exact",
        "linearized",
        "exact",
        "outgoing-current form used by diagnostics",
    ),
    key(
        "deriv",
        "spectral|central2",
        "spectral",
        "central2",
        "spatial derivative used by diagnostics",
    ),
    key(
        "a",
        "4 floats",
        "0,0,0,0",
        "0.1,0,0,0",
        "uniform initial contravariant A^mu",
    ),
    key("steps", "int", "100", "7", "number of steps for evolve"),
    key(
        "snapshot_every",
        "int",
        "0",
        "5",
        "snapshot cadence in steps (0 = off)",
    ),
    key(
        "diag_every",
        "int",
        "1",
        "3",
        "diagnostics cadence in steps (0 = off)",
    ),
    key(
        "init",
        "plane_wave|gaussian|delta|london_equilibrium|file",
        "gaussian",
        "delta",
        "initial condition",
    ),
    key(
        "k",
        "3 floats",
        "0,0,0",
        "0.5,0,0",
        "wavevector of plane_wave / gaussian carrier",
    ),
    key("width", "float", "4", "2", "gaussian width"),
    key(
        "center",
        "3 floats|auto",
        "auto",
        "1,0,0",
        "gaussian / delta center; auto = domain center",
    ),
    key(
        "weights",
        "4 floats",
        "0,0,1,0",
        "1,0,1,0",
        "block weights for (A, A~, psi, psi~)",
    ),
    key(
        "spinor",
        "4 floats",
        "1,0,0,0",
        "0,1,0,0",
        "real part of the 4-spinor profile",
    ),
    key(
        "spinor_im",
        "4 floats",
        "0,0,0,0",
        "0,0,1,0",
        "imaginary part of the 4-spinor profile",
    ),
    key(
        "normalize",
        "bool",
        "true",
        "false",
        "scale the state to unit 2-norm",
    ),
    key(
        "london_profile",
        "uniform|plane_wave|gaussian",
        "uniform",
        "gaussian",
        "psi profile for london_equilibrium",
    ),
    key(
        "init_file",
        "path",
        "",
        "in.bin",
        "snapshot to load when init = file",
    ),
    key(
        "output_dir",
        "path",
        "out",
        "run1",
        "directory for diag.csv, snapshots and reports",
    ),
    key("threads", "int", "0", "2", "worker threads (0 = all cores)"),
    key(
        "dispersion_block",
        "psi|phi",
        "psi",
        "phi",
        "block scanned by dispersion",
    ),
    key(
        "dispersion_k_count",
        "int",
        "16",
        "8",
        "number of k samples along x",
    ),
    key(
        "dispersion_k_max",
        "float|auto",
        "auto",
        "1",
        "largest k; auto = pi/(2 ell)",
    ),
    key(
        "converge_problem",
        "dirac_packet|doublet_wave",
        "dirac_packet",
        "doublet_wave",
        "problem solved by converge",
    ),
    key(
        "ell_list",
        "floats|auto",
        "auto",
        "1,0.5,0.25,0.125",
        "cell sizes for converge; auto = ell, ell/2, ell/4, ell/8",
    ),
    key(
        "converge_min_order",
        "float",
        "1.8",
        "1.5",
        "order below which converge exits with status 3",
    ),
    key(
        "doublet_mode",
        "int",
        "2",
        "3",
        "Fourier mode of the doublet_wave problem",
    ),
];

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Syntax {
        line: usize,
        text: String,
    },
    UnknownKey {
        line: Option<usize>,
        key: String,
        suggestion: Option<String>,
    },
    DuplicateKey {
        line: usize,
        key: String,
        first: usize,
    },
    TypeError {
        line: Option<usize>,
        key: String,
        expected: &'static str,
        got: String,
    },
    InvariantViolation {
        line: Option<usize>,
        message: String,
    },
}

fn at(line: Option<usize>) -> String {
    match line {
        Some(n) => format!("line {n}"),
        None => "command line".into(),
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Syntax { line, text } => {
                write!(f, "line {line}: expected `key = value`, got `{text}`")
            }
            ConfigError::UnknownKey {
                line,
                key,
                suggestion,
            } => {
                write!(f, "{}: unknown key `{key}`", at(*line))?;
                if let Some(s) = suggestion {
                    write!(f, " (did you mean `{s}`?)")?;
                }
                Ok(())
            }
            ConfigError::DuplicateKey { line, key, first } => {
                write!(
                    f,
                    "line {line}: duplicate key `{key}` (first set on line {first})"
                )
            }
            ConfigError::TypeError {
                line,
                key,
                expected,
                got,
            } => {
                write!(f, "{}: `{key}` expects {expected}, got `{got}`", at(*line))
            }
            ConfigError::InvariantViolation { line, message } => match line {
                Some(n) => write!(f, "line {n}: {message}"),
                None => write!(f, "{message}"),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    PlaneWave,
    Gaussian,
    Delta,
    LondonEquilibrium,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LondonProfile {
    Uniform,
    PlaneWave,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitSpec {
    pub kind: InitKind,
    pub k: [f64; 3],
    pub width: f64,
    /// `None` = domain center.
    pub center: Option<[f64; 3]>,
    pub weights: [f64; 4],
    pub spinor: Spinor4,
    pub normalize: bool,
    pub london_profile: LondonProfile,
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionOpts {
    pub block: Block,
    pub k_count: usize,
    pub k_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergeKind {
    DiracPacket,
    DoubletWave,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeOpts {
    pub problem: ConvergeKind,
    pub ell_list: Option<Vec<f64>>,
    pub min_order: f64,
    pub doublet_mode: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub lattice: LatticeConfig,
    /// ρ₀ is taken from the initial state.
    pub rho0_auto: bool,
    pub a: FourVector,
    pub init: InitSpec,
    pub steps: u64,
    pub snapshot_every: u64,
    pub diag_every: u64,
    pub output_dir: PathBuf,
    pub threads: usize,
    pub dispersion: DispersionOpts,
    pub converge: ConvergeOpts,
}

impl RunConfig {
    /// Every key at its default, one per line.
    pub fn default_text() -> String {
        KEYS.iter()
            .map(|k| format!("{} = {}\n", k.name, k.default))
            .collect()
    }
}

fn suggest(key: &str) -> Option<String> {
    KEYS.iter()
        .map(|k| (strsim::levenshtein(key, k.name), k.name))
        .filter(|(d, _)| *d <= 2)
        .min()
        .map(|(_, n)| n.to_string())
}

struct Entry {
    value: String,
    line: Option<usize>,
}

struct Reader {
    entries: BTreeMap<&'static str, Entry>,
    errors: Vec<ConfigError>,
}

impl Reader {
    fn spec(name: &str) -> &'static KeySpec {
        KEYS.iter()
            .find(|k| k.name == name)
            .expect("key is documented")
    }

    fn raw(&self, name: &'static str) -> (String, Option<usize>) {
        match self.entries.get(name) {
            Some(e) => (e.value.clone(), e.line),
            None => (Self::spec(name).default.to_string(), None),
        }
    }

    fn line(&self, name: &str) -> Option<usize> {
        self.entries.get(name).and_then(|e| e.line)
    }

    fn type_error<T>(&mut self, name: &'static str, expected: &'static str, fallback: T) -> T {
        let (got, line) = self.raw(name);
        self.errors.push(ConfigError::TypeError {
            line,
            key: name.into(),
            expected,
            got,
        });
        fallback
    }

    fn float(&mut self, name: &'static str) -> f64 {
        let (v, _) = self.raw(name);
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => x,
            _ => self.type_error(name, "a finite number", 1.0),
        }
    }

    fn float_or_auto(&mut self, name: &'static str) -> Option<f64> {
        let (v, _) = self.raw(name);
        if v == "auto" {
            return None;
        }
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Some(x),
            _ => self.type_error(name, "a finite number or `auto`", None),
        }
    }

    fn uint(&mut self, name: &'static str) -> u64 {
        let (v, _) = self.raw(name);
        match v.parse::<u64>() {
            Ok(x) => x,
            Err(_) => self.type_error(name, "a non-negative integer", 1),
        }
    }

    fn int(&mut self, name: &'static str) -> i64 {
        let (v, _) = self.raw(name);
        match v.parse::<i64>() {
            Ok(x) => x,
            Err(_) => self.type_error(name, "an integer", 1),
        }
    }

    fn floats(&mut self, name: &'static str) -> Option<Vec<f64>> {
        let (v, _) = self.raw(name);
        let parts: Result<Vec<f64>, _> = v.split(',').map(|s| s.trim().parse::<f64>()).collect();
        match parts {
            Ok(xs) if xs.iter().all(|x| x.is_finite()) => Some(xs),
            _ => None,
        }
    }

    fn vector<const N: usize>(&mut self, name: &'static str, expected: &'static str) -> [f64; N] {
        match self.floats(name) {
            Some(xs) if xs.len() == N => std::array::from_fn(|i| xs[i]),
            _ => self.type_error(name, expected, [0.0; N]),
        }
    }

    fn choice<T: Copy>(
        &mut self,
        name: &'static str,
        options: &[(&str, T)],
        expected: &'static str,
    ) -> T {
        let (v, _) = self.raw(name);
        match options.iter().find(|(s, _)| *s == v) {
            Some((_, t)) => *t,
            None => self.type_error(name, expected, options[0].1),
        }
    }

    fn boolean(&mut self, name: &'static str) -> bool {
        let (v, _) = self.raw(name);
        match v.as_str() {
            "true" => true,
            "false" => false,
            _ => self.type_error(name, "`true` or `false`", true),
        }
    }

    fn violation(&mut self, name: Option<&str>, message: String) {
        let line = name.and_then(|n| self.line(n));
        self.errors
            .push(ConfigError::InvariantViolation { line, message });
    }
}

/// Parse `key = value` text, then apply `overrides` (key, value) on top. Every
/// problem found is returned, not just the first.
pub fn parse_config(
    text: &str,
    overrides: &[(String, String)],
) -> Result<RunConfig, Vec<ConfigError>> {
    let mut r = Reader {
        entries: BTreeMap::new(),
        errors: vec![],
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            r.errors.push(ConfigError::Syntax {
                line,
                text: body.into(),
            });
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            r.errors.push(ConfigError::Syntax {
                line,
                text: body.into(),
            });
            continue;
        }
        match KEYS.iter().find(|s| s.name == k) {
            None => r.errors.push(ConfigError::UnknownKey {
                line: Some(line),
                key: k.into(),
                suggestion: suggest(k),
            }),
            Some(spec) => {
                if let Some(prev) = r.entries.get(spec.name) {
                    r.errors.push(ConfigError::DuplicateKey {
                        line,
                        key: k.into(),
                        first: prev.line.unwrap_or(0),
                    });
                } else {
                    r.entries.insert(
                        spec.name,
                        Entry {
                            value: v.into(),
                            line: Some(line),
                        },
                    );
                }
            }
        }
    }
    for (k, v) in overrides {
        match KEYS.iter().find(|s| s.name == k) {
            None => r.errors.push(ConfigError::UnknownKey {
                line: None,
                key: k.clone(),
                suggestion: suggest(k),
            }),
            Some(spec) => {
                r.entries.insert(
                    spec.name,
                    Entry {
                        value: v.trim().into(),
                        line: None,
                    },
                );
            }
        }
    }
    let cfg = build(&mut r);
    if r.errors.is_empty() {
        Ok(cfg)
    } else {
        Err(r.errors)
    }
}

fn build(r: &mut Reader) -> RunConfig {
    let dims = r.uint("dims") as usize;
    let ext = [
        r.uint("nx") as usize,
        r.uint("ny") as usize,
        r.uint("nz") as usize,
    ];
    let ell = r.float("ell");
    let rho0 = r.float_or_auto("rho0");
    let params = PhysicalParams {
        m: r.float("m"),
        m0: r.float("m0"),
        e: r.float("e"),
        rho0: rho0.unwrap_or(1.0),
        ell,
        zeta: r.float("zeta"),
        hbar: r.float("hbar"),
        c: r.float("c"),
    };
    let coupling = r.choice(
        "coupling_mode",
        &[
            ("free", CouplingMode::Free),
            ("external_A", CouplingMode::ExternalA),
            ("self_consistent", CouplingMode::SelfConsistent),
        ],
        "one of free, external_A, self_consistent",
    );
    let splitting = r.choice(
        "splitting",
        &[
            ("strang", Splitting::Strang),
            ("lie_xyz", Splitting::LieXyz),
        ],
        "one of strang, lie_xyz",
    );
    let current_form = r.choice(
        "current_form",
        &[
            ("linearized", CurrentForm::Linearized),
            ("exact", CurrentForm::Exact),
        ],
        "one of linearized, exact",
    );
    let deriv = r.choice(
        "deriv",
        &[("spectral", Deriv::Spectral), ("central2", Deriv::Central2)],
        "one of spectral, central2",
    );
    let a = FourVector::from(r.vector::<4>("a", "4 comma-separated numbers"));
    let steps = r.uint("steps");
    let snapshot_every = r.uint("snapshot_every");
    let diag_every = r.uint("diag_every");
    let kind = r.choice(
        "init",
        &[
            ("plane_wave", InitKind::PlaneWave),
            ("gaussian", InitKind::Gaussian),
            ("delta", InitKind::Delta),
            ("london_equilibrium", InitKind::LondonEquilibrium),
            ("file", InitKind::File),
        ],
        "one of plane_wave, gaussian, delta, london_equilibrium, file",
    );
    let k = r.vector::<3>("k", "3 comma-separated numbers");
    let width = r.float("width");
    let center = if r.raw("center").0 == "auto" {
        None
    } else {
        Some(r.vector::<3>("center", "3 comma-separated numbers or `auto`"))
    };
    let weights = r.vector::<4>("weights", "4 comma-separated numbers");
    let re = r.vector::<4>("spinor", "4 comma-separated numbers");
    let im = r.vector::<4>("spinor_im", "4 comma-separated numbers");
    let spinor = Spinor4::from_fn(|i, _| c64(re[i], im[i]));
    let normalize = r.boolean("normalize");
    let london_profile = r.choice(
        "london_profile",
        &[
            ("uniform", LondonProfile::Uniform),
            ("plane_wave", LondonProfile::PlaneWave),
            ("gaussian", LondonProfile::Gaussian),
        ],
        "one of uniform, plane_wave, gaussian",
    );
    let init_file = r.raw("init_file").0;
    let output_dir = PathBuf::from(r.raw("output_dir").0);
    let threads = r.uint("threads") as usize;
    let block = r.choice(
        "dispersion_block",
        &[("psi", Block::Psi), ("phi", Block::Phi)],
        "one of psi, phi",
    );
    let k_count = r.uint("dispersion_k_count") as usize;
    let k_max = r.float_or_auto("dispersion_k_max");
    let problem = r.choice(
        "converge_problem",
        &[
            ("dirac_packet", ConvergeKind::DiracPacket),
            ("doublet_wave", ConvergeKind::DoubletWave),
        ],
        "one of dirac_packet, doublet_wave",
    );
    let ell_list = if r.raw("ell_list").0 == "auto" {
        None
    } else {
        match r.floats("ell_list") {
            Some(xs) => Some(xs),
            None => r.type_error("ell_list", "comma-separated numbers or `auto`", None),
        }
    };
    let min_order = r.float("converge_min_order");
    let doublet_mode = r.int("doublet_mode");

    // Invariants, checked only once the values themselves parsed.
    let typed_ok = r.errors.is_empty();
    let grid = if !(1..=3).contains(&dims) {
        r.violation(Some("dims"), format!("dims must be 1, 2 or 3 (got {dims})"));
        None
    } else {
        let names = ["nx", "ny", "nz"];
        let mut ok = true;
        for ax in dims..3 {
            if ext[ax] != 1 {
                r.violation(
                    Some(names[ax]),
                    format!(
                        "{} must be 1 when dims = {dims} (got {})",
                        names[ax], ext[ax]
                    ),
                );
                ok = false;
            }
        }
        for ax in 0..dims {
            if ext[ax] < 2 {
                r.violation(
                    Some(names[ax]),
                    format!("extent {} must be at least 2 (got {})", names[ax], ext[ax]),
                );
                ok = false;
            }
        }
        if !(ell > 0.0) {
            r.violation(Some("ell"), format!("ell must be positive (got {ell})"));
            ok = false;
        }
        if ok {
            Grid::new(dims, &ext[..dims], ell).ok()
        } else {
            None
        }
    };
    let grid = grid.unwrap_or_else(|| Grid::line(2, 1.0));
    let lattice = LatticeConfig {
        grid,
        params,
        coupling,
        splitting,
        current_form,
        deriv,
    };
    if typed_ok {
        for v in lattice.violations() {
            let key = if v.starts_with("fermion") {
                Some("m")
            } else if v.starts_with("gauge") {
                if rho0.is_none() {
                    continue;
                }
                Some("m0")
            } else {
                KEYS.iter()
                    .map(|k| k.name)
                    .find(|k| v.starts_with(&format!("{k} ")))
            };
            if v.contains("differs from grid") || key == Some("ell") {
                continue;
            }
            r.violation(key, v);
        }
    }
    if !(width > 0.0) {
        r.violation(
            Some("width"),
            format!("width must be positive (got {width})"),
        );
    }
    if kind == InitKind::File && init_file.is_empty() {
        r.violation(Some("init"), "init = file requires init_file".into());
    }
    if weights.iter().all(|w| *w == 0.0)
        && !matches!(kind, InitKind::File | InitKind::LondonEquilibrium)
    {
        r.violation(
            Some("weights"),
            "at least one block weight must be nonzero".into(),
        );
    }
    if let Some(km) = k_max {
        if !(km > 0.0) {
            r.violation(
                Some("dispersion_k_max"),
                format!("dispersion_k_max must be positive (got {km})"),
            );
        }
    }
    if k_count == 0 {
        r.violation(
            Some("dispersion_k_count"),
            "dispersion_k_count must be at least 1".into(),
        );
    }
    if let Some(l) = &ell_list {
        if l.iter().any(|x| !(*x > 0.0)) {
            r.violation(Some("ell_list"), "ell_list entries must be positive".into());
        }
    }
    RunConfig {
        lattice,
        rho0_auto: rho0.is_none(),
        a,
        init: InitSpec {
            kind,
            k,
            width,
            center,
            weights,
            spinor,
            normalize,
            london_profile,
            file: if init_file.is_empty() {
                None
            } else {
                Some(PathBuf::from(init_file))
            },
        },
        steps,
        snapshot_every,
        diag_every,
        output_dir,
        threads,
        dispersion: DispersionOpts {
            block,
            k_count,
            k_max,
        },
        converge: ConvergeOpts {
            problem,
            ell_list,
            min_order,
            doublet_mode,
        },
    }
}
