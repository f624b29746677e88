use crate::deriv::Deriv;
use crate::grid::Grid;
use crate::interaction::{CurrentForm, PhysicalParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CouplingMode {
    /// No gauge coupling; the gauge doublet has its bare mass ħ/(λ_L c).
    #[default]
    Free,
    /// Static A drives the ψ block; A is never updated.
    ExternalA,
    /// A follows the back reaction and M_L is rebuilt from ψ every step.
    SelfConsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Splitting {
    /// 𝒰 = 𝒞·𝒮_x𝒮_y𝒮_z·e^{−iG₀δt/ħ}
    LieXyz,
    /// Half collide, streams, half collide; axis order reversed on odd steps.
    #[default]
    Strang,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeConfig {
    pub grid: Grid,
    pub params: PhysicalParams,
    pub coupling: CouplingMode,
    pub splitting: Splitting,
    pub current_form: CurrentForm,
    pub deriv: Deriv,
}

impl LatticeConfig {
    /// Configuration with `params.ell` taken from the grid.
    pub fn new(grid: Grid, params: PhysicalParams) -> Self {
        LatticeConfig {
            grid,
            params: PhysicalParams {
                ell: grid.ell,
                ..params
            },
            coupling: CouplingMode::default(),
            splitting: Splitting::default(),
            current_form: CurrentForm::default(),
            deriv: Deriv::default(),
        }
    }

    pub fn with_coupling(mut self, c: CouplingMode) -> Self {
        self.coupling = c;
        self
    }

    pub fn with_splitting(mut self, s: Splitting) -> Self {
        self.splitting = s;
        self
    }

    /// c·δt/λ_L, the collide angle fraction of the bare gauge-doublet mass.
    pub fn gauge_mass_fraction(&self) -> f64 {
        let p = &self.params;
        p.gauge_mass() * p.c * p.c * p.dt() / p.hbar
    }

    /// Violated feasibility or consistency rules, as messages.
    pub fn violations(&self) -> Vec<String> {
        let mut out = vec![];
        if let Err(e) = self.params.validate() {
            out.push(e.to_string());
            return out;
        }
        if self.params.ell != self.grid.ell {
            out.push(format!(
                "params.ell = {} differs from grid ell = {}",
                self.params.ell, self.grid.ell
            ));
        }
        let s = self.params.mass_fraction();
        if s > 1.0 {
            out.push(format!(
                "fermion collide bound m*c^2*dt/hbar <= 1 violated ({s})"
            ));
        }
        let g = self.gauge_mass_fraction();
        if !(g <= 1.0) {
            out.push(format!(
                "gauge collide bound c*dt/lambda_L <= 1 violated ({g})"
            ));
        }
        out
    }
}
