use crate::clifford::{anticommutator, rep, spin_algebra_residual, unitarity_defect, ETA};
use crate::lattice::engine::stream_generators;
use crate::spinor::t_matrix;
use crate::{Mat16, Mat4, Mat8};

/// A named scalar check against a pinned tolerance (0 means exact).
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tol: f64,
}

impl Check {
    pub fn pass(&self) -> bool {
        self.value <= self.tol
    }
}

fn max_dev4(f: impl Fn(usize, usize) -> f64) -> f64 {
    let mut worst: f64 = 0.0;
    for mu in 0..4 {
        for nu in 0..4 {
            worst = worst.max(f(mu, nu));
        }
    }
    worst
}

/// The fixed-representation identities: Clifford relations, spin algebra, T
/// unitarity and involutive stream generators.
pub fn algebra_checks() -> Vec<Check> {
    let r = rep();
    let eta = |mu: usize, nu: usize| if mu == nu { ETA[mu] } else { 0.0 };
    let gamma = max_dev4(|mu, nu| {
        let d = anticommutator(&r.gamma[mu], &r.gamma[nu])
            - Mat4::identity() * crate::c64(2.0 * eta(mu, nu), 0.0);
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    });
    let cal_g = max_dev4(|mu, nu| {
        let d = anticommutator(&r.cal_g[mu], &r.cal_g[nu])
            - Mat8::identity() * crate::c64(2.0 * eta(mu, nu), 0.0);
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    });
    let delta = max_dev4(|mu, nu| {
        let d = anticommutator(&r.delta[mu], &r.delta[nu])
            - Mat16::identity() * crate::c64(2.0 * eta(mu, nu), 0.0);
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    });
    let stream = stream_generators()
        .iter()
        .map(|g| {
            let d = g.to_matrix();
            (d * d - Mat16::identity())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    vec![
        Check {
            name: "gamma anticommutator {g^mu,g^nu} = 2 eta^{mu nu}",
            value: gamma,
            tol: 0.0,
        },
        Check {
            name: "doublet gamma anticommutator",
            value: cal_g,
            tol: 0.0,
        },
        Check {
            name: "multiplet Delta anticommutator",
            value: delta,
            tol: 0.0,
        },
        Check {
            name: "spin generator algebra residual",
            value: spin_algebra_residual(),
            tol: 1e-14,
        },
        Check {
            name: "T^dagger T = I",
            value: unitarity_defect(t_matrix()),
            tol: 1e-15,
        },
        Check {
            name: "(Delta^0 Delta^i)^2 = I",
            value: stream,
            tol: 0.0,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_algebra_checks_pass() {
        for c in algebra_checks() {
            assert!(c.pass(), "{} = {:e} > {:e}", c.name, c.value, c.tol);
        }
    }
}
