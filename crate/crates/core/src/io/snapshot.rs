use std::fs;
use std::path::Path;

use super::IoError;
use crate::grid::Grid;
use crate::lattice::MultipletField;
use crate::{FourVector, C64};

const MAGIC: &str = "qgauge-snapshot";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotHeader {
    pub step: u64,
    pub time: f64,
    pub dims: usize,
    pub extents: [usize; 3],
    pub ell: f64,
    pub little_endian: bool,
}

impl SnapshotHeader {
    fn line(&self) -> String {
        let [nx, ny, nz] = self.extents;
        let endian = if self.little_endian { "little" } else { "big" };
        format!(
            "{MAGIC}\tstep={}\ttime={:?}\tdims={}\textents={nx},{ny},{nz}\tell={:?}\tendian={endian}\n",
            self.step, self.time, self.dims, self.ell
        )
    }

    fn parse(line: &str) -> Result<Self, IoError> {
        let bad = |m: &str| IoError::BadHeader(m.to_string());
        let mut fields = line.split('\t');
        if fields.next() != Some(MAGIC) {
            return Err(bad("missing magic"));
        }
        let (mut step, mut time, mut dims, mut extents, mut ell, mut endian) =
            (None, None, None, None, None, None);
        for f in fields {
            let (k, v) = f.split_once('=').ok_or_else(|| bad(f))?;
            match k {
                "step" => step = v.parse().ok(),
                "time" => time = v.parse().ok(),
                "dims" => dims = v.parse().ok(),
                "extents" => {
                    let xs: Vec<usize> = v.split(',').filter_map(|x| x.parse().ok()).collect();
                    extents = (xs.len() == 3).then(|| [xs[0], xs[1], xs[2]]);
                }
                "ell" => ell = v.parse().ok(),
                "endian" => {
                    endian = match v {
                        "little" => Some(true),
                        "big" => Some(false),
                        _ => None,
                    }
                }
                _ => return Err(bad(&format!("unknown field `{k}`"))),
            }
        }
        Ok(SnapshotHeader {
            step: step.ok_or_else(|| bad("step"))?,
            time: time.ok_or_else(|| bad("time"))?,
            dims: dims.ok_or_else(|| bad("dims"))?,
            extents: extents.ok_or_else(|| bad("extents"))?,
            ell: ell.ok_or_else(|| bad("ell"))?,
            little_endian: endian.ok_or_else(|| bad("endian"))?,
        })
    }
}

pub fn snapshot_name(step: u64) -> String {
    format!("snap_{step}.bin")
}

/// Bytes of a snapshot: header line, then (re, im) of all 16 components per
/// site, then A^μ per site, as 64-bit floats in the header's byte order.
pub fn encode(state: &MultipletField, step: u64, time: f64, little_endian: bool) -> Vec<u8> {
    let g = &state.grid;
    let h = SnapshotHeader {
        step,
        time,
        dims: g.dims,
        extents: g.n,
        ell: g.ell,
        little_endian,
    };
    let mut out = h.line().into_bytes();
    out.reserve(g.len() * (16 * 16 + 32));
    let put = |out: &mut Vec<u8>, x: f64| {
        if little_endian {
            out.extend_from_slice(&x.to_le_bytes())
        } else {
            out.extend_from_slice(&x.to_be_bytes())
        }
    };
    for v in &state.psi {
        for z in v.iter() {
            put(&mut out, z.re);
            put(&mut out, z.im);
        }
    }
    for a in &state.a {
        for x in a.iter() {
            put(&mut out, *x);
        }
    }
    out
}

pub fn decode(
    bytes: &[u8],
    expect: Option<&Grid>,
) -> Result<(SnapshotHeader, MultipletField), IoError> {
    let nl = bytes
        .iter()
        .position(|b| *b == b'\n')
        .ok_or_else(|| IoError::BadHeader("no header line".into()))?;
    let text = std::str::from_utf8(&bytes[..nl])
        .map_err(|_| IoError::BadHeader("header is not UTF-8".into()))?;
    let h = SnapshotHeader::parse(text)?;
    let grid = Grid::new(h.dims, &h.extents[..h.dims.min(3)], h.ell)
        .map_err(|e| IoError::BadHeader(e.to_string()))?;
    if grid.n != h.extents {
        return Err(IoError::BadHeader(format!(
            "extents {:?} inconsistent with dims {}",
            h.extents, h.dims
        )));
    }
    if let Some(g) = expect {
        if g.n != grid.n || g.dims != grid.dims || g.ell != grid.ell {
            return Err(IoError::ExtentMismatch {
                expected: g.n,
                expected_dims: g.dims,
                expected_ell: g.ell,
                found: grid.n,
                found_dims: grid.dims,
                found_ell: grid.ell,
            });
        }
    }
    let data = &bytes[nl + 1..];
    let n = grid.len();
    let expected = n * (16 * 16 + 32);
    if data.len() != expected {
        if data.len() < expected {
            return Err(IoError::TruncatedSnapshot {
                expected,
                got: data.len(),
            });
        }
        return Err(IoError::BadHeader(format!(
            "{} trailing bytes",
            data.len() - expected
        )));
    }
    let get = |i: usize| {
        let b: [u8; 8] = data[8 * i..8 * i + 8].try_into().expect("8-byte chunk");
        if h.little_endian {
            f64::from_le_bytes(b)
        } else {
            f64::from_be_bytes(b)
        }
    };
    let mut state = MultipletField::zeros(grid);
    for s in 0..n {
        for c in 0..16 {
            let i = 2 * (16 * s + c);
            state.psi[s][c] = C64::new(get(i), get(i + 1));
        }
    }
    let base = n * 32;
    for s in 0..n {
        state.a[s] = FourVector::from_fn(|mu, _| get(base + 4 * s + mu));
    }
    Ok((h, state))
}

pub fn write_snapshot(
    path: &Path,
    state: &MultipletField,
    step: u64,
    time: f64,
) -> Result<(), IoError> {
    fs::write(path, encode(state, step, time, true)).map_err(|e| IoError::file(path, e))
}

/// Read a snapshot; with `expect`, its grid must match.
pub fn read_snapshot(
    path: &Path,
    expect: Option<&Grid>,
) -> Result<(SnapshotHeader, MultipletField), IoError> {
    let bytes = fs::read(path).map_err(|e| IoError::file(path, e))?;
    decode(&bytes, expect)
}
