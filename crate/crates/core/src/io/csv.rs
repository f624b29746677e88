use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::IoError;
use crate::lattice::Diagnostics;
use crate::verification::{ConvergenceReport, DispersionSample};

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>, IoError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| IoError::file(path, e))
}

fn finish(path: &Path, mut w: BufWriter<File>) -> Result<(), IoError> {
    w.flush().map_err(|e| IoError::file(path, e))
}

pub fn write_diagnostics(path: &Path, d: &Diagnostics) -> Result<(), IoError> {
    let mut w = create(path)?;
    d.write_csv(&mut w).map_err(|e| IoError::file(path, e))?;
    finish(path, w)
}

pub fn dispersion_csv(samples: &[DispersionSample]) -> String {
    let mut s = String::from("k,branch,omega_measured,omega_continuum,abs_error\n");
    for smp in samples {
        let kmag = smp
            .k
            .iter()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
            .copysign(smp.k[0]);
        for (b, ((w, wc), e)) in smp
            .omega_measured
            .iter()
            .zip(&smp.omega_continuum)
            .zip(smp.abs_error())
            .enumerate()
        {
            s.push_str(&format!(
                "{},{b},{},{},{}\n",
                fmt_f64(kmag),
                fmt_f64(*w),
                fmt_f64(*wc),
                fmt_f64(e)
            ));
        }
    }
    s
}

pub fn convergence_csv(r: &ConvergenceReport) -> String {
    let mut s = String::from("ell,error\n");
    for (l, e) in r.ell_values.iter().zip(&r.errors) {
        s.push_str(&format!("{},{}\n", fmt_f64(*l), fmt_f64(*e)));
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(|e| IoError::file(path, e))
}
