use crate::grid::Grid;
use crate::lattice::{CAL_A, PSI, TILDE_A};
use crate::{Doublet8, FourVector, Multiplet16, Spinor4};

#[derive(Debug, Clone, PartialEq)]
pub struct MultipletField {
    pub grid: Grid,
    pub psi: Vec<Multiplet16>,
    /// Real contravariant A^μ per site.
    pub a: Vec<FourVector>,
}

impl MultipletField {
    pub fn zeros(grid: Grid) -> Self {
        MultipletField {
            grid,
            psi: vec![Multiplet16::zeros(); grid.len()],
            a: vec![FourVector::zeros(); grid.len()],
        }
    }

    /// Global 2-norm over all sites and components.
    pub fn norm(&self) -> f64 {
        self.psi
            .iter()
            .map(|v| v.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    pub fn spinor(&self, site: usize) -> Spinor4 {
        self.psi[site].fixed_rows::<4>(PSI).into_owned()
    }

    pub fn set_spinor(&mut self, site: usize, s: &Spinor4) {
        self.psi[site].fixed_rows_mut::<4>(PSI).copy_from(s);
    }

    pub fn cal_a(&self, site: usize) -> Spinor4 {
        self.psi[site].fixed_rows::<4>(CAL_A).into_owned()
    }

    pub fn tilde_a(&self, site: usize) -> Spinor4 {
        self.psi[site].fixed_rows::<4>(TILDE_A).into_owned()
    }

    pub fn doublet(&self, site: usize) -> Doublet8 {
        self.psi[site].fixed_rows::<8>(CAL_A).into_owned()
    }

    /// ψ block of every site.
    pub fn spinors(&self) -> Vec<Spinor4> {
        (0..self.psi.len()).map(|s| self.spinor(s)).collect()
    }

    /// Periodic translation by `shift` cells along `axis`.
    pub fn translated(&self, axis: usize, shift: isize) -> Self {
        let g = &self.grid;
        let mut out = self.clone();
        for s in 0..g.len() {
            let t = g.neighbor(s, axis, shift);
            out.psi[t] = self.psi[s];
            out.a[t] = self.a[s];
        }
        out
    }

    pub fn scale(&mut self, k: f64) {
        for v in &mut self.psi {
            *v *= crate::c64(k, 0.0);
        }
    }
}
