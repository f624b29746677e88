//! Periodic lattice geometry.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("dims must be 1, 2 or 3 (got {0})")]
    BadDims(usize),
    #[error("extent along axis {axis} must be at least 2 (got {n})")]
    BadExtent { axis: usize, n: usize },
    #[error("cell size must be positive and finite (got {0})")]
    BadCell(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub dims: usize,
    /// Extents; inactive axes have extent 1.
    pub n: [usize; 3],
    pub ell: f64,
}

impl Grid {
    pub fn new(dims: usize, extents: &[usize], ell: f64) -> Result<Self, GridError> {
        if !(1..=3).contains(&dims) {
            return Err(GridError::BadDims(dims));
        }
        if !(ell.is_finite() && ell > 0.0) {
            return Err(GridError::BadCell(ell));
        }
        let mut n = [1usize; 3];
        for axis in 0..dims {
            let e = extents.get(axis).copied().unwrap_or(0);
            if e < 2 {
                return Err(GridError::BadExtent { axis, n: e });
            }
            n[axis] = e;
        }
        Ok(Grid { dims, n, ell })
    }

    pub fn line(n: usize, ell: f64) -> Self {
        Grid::new(1, &[n], ell).expect("valid 1D grid")
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.n[0] * (y + self.n[1] * z)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let x = idx % self.n[0];
        let r = idx / self.n[0];
        [x, r % self.n[1], r / self.n[1]]
    }

    /// Site reached from `idx` by `shift` cells along `axis`, periodic.
    #[inline]
    pub fn neighbor(&self, idx: usize, axis: usize, shift: isize) -> usize {
        let mut c = self.coords(idx);
        let n = self.n[axis] as isize;
        c[axis] = (c[axis] as isize + shift).rem_euclid(n) as usize;
        self.index(c[0], c[1], c[2])
    }

    /// Physical position of a site, x_i = c_i·ℓ.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        [
            c[0] as f64 * self.ell,
            c[1] as f64 * self.ell,
            c[2] as f64 * self.ell,
        ]
    }

    /// Domain length along an axis.
    pub fn length(&self, axis: usize) -> f64 {
        self.n[axis] as f64 * self.ell
    }

    /// Cell volume ℓ^dims, used for discrete L2 norms.
    pub fn cell_volume(&self) -> f64 {
        self.ell.powi(self.dims as i32)
    }
}
