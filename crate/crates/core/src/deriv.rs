//! Spatial derivative providers on periodic grids.

use rustfft::FftPlanner;

use crate::grid::Grid;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Deriv {
    /// Fourier differentiation; the Nyquist mode is dropped.
    #[default]
    Spectral,
    /// Second-order central difference.
    Central2,
}

impl Deriv {
    /// Formal order of accuracy, `None` for spectral.
    pub fn order(&self) -> Option<usize> {
        match self {
            Deriv::Spectral => None,
            Deriv::Central2 => Some(2),
        }
    }

    /// ∂f/∂x^axis on the grid.
    pub fn d(&self, grid: &Grid, f: &[C64], axis: usize) -> Vec<C64> {
        assert_eq!(f.len(), grid.len(), "field length does not match grid");
        if axis >= grid.dims {
            return vec![C64::new(0.0, 0.0); f.len()];
        }
        match self {
            Deriv::Central2 => {
                let h = 0.5 / grid.ell;
                (0..f.len())
                    .map(|i| (f[grid.neighbor(i, axis, 1)] - f[grid.neighbor(i, axis, -1)]) * h)
                    .collect()
            }
            Deriv::Spectral => spectral(grid, f, axis),
        }
    }

    pub fn d_real(&self, grid: &Grid, f: &[f64], axis: usize) -> Vec<f64> {
        let fc: Vec<C64> = f.iter().map(|&x| C64::new(x, 0.0)).collect();
        self.d(grid, &fc, axis).into_iter().map(|z| z.re).collect()
    }
}

/// Angular wavenumber of FFT bin `j` on a line of `n` cells of size `ell`.
pub fn wavenumber(j: usize, n: usize, ell: f64) -> f64 {
    let jj = if j <= n / 2 {
        j as f64
    } else {
        j as f64 - n as f64
    };
    2.0 * std::f64::consts::PI * jj / (n as f64 * ell)
}

fn spectral(grid: &Grid, f: &[C64], axis: usize) -> Vec<C64> {
    let n = grid.n[axis];
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mult: Vec<C64> = (0..n)
        .map(|j| {
            if n.is_multiple_of(2) && j == n / 2 {
                C64::new(0.0, 0.0)
            } else {
                C64::new(0.0, wavenumber(j, n, grid.ell) / n as f64)
            }
        })
        .collect();

    let mut out = vec![C64::new(0.0, 0.0); f.len()];
    let mut line = vec![C64::new(0.0, 0.0); n];
    let stride = match axis {
        0 => 1,
        1 => grid.n[0],
        _ => grid.n[0] * grid.n[1],
    };
    for start in 0..f.len() {
        if grid.coords(start)[axis] != 0 {
            continue;
        }
        for (j, v) in line.iter_mut().enumerate() {
            *v = f[start + j * stride];
        }
        fwd.process(&mut line);
        for (v, m) in line.iter_mut().zip(&mult) {
            *v *= m;
        }
        inv.process(&mut line);
        for (j, v) in line.iter().enumerate() {
            out[start + j * stride] = *v;
        }
    }
    out
}
