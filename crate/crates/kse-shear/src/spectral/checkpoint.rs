//! Field checkpoint formats.
//!
//! Binary layout (all little-endian):
//!
//! ```text
//! magic   8 bytes  "KSE2DSP\0"
//! version u32      1
//! Nx      f64      mode count, exactly integral
//! Ny      f64      mode count, exactly integral
//! L1      f64      horizontal period
//! L2      f64      vertical period
//! coeffs  Nx*Ny * (re: f64, im: f64), row-major DFT storage order
//! ```
//!
//! The CSV export `(k, j, re, im)` is lossy in the sense that it drops the
//! grid header; it exists for eyeballing and external plotting.

use super::{Grid2D, SpectralField2D};
use crate::error::{KseError, Result};
use ndarray::Array2;
use num_complex::Complex64;
use std::io::{Read, Write};

pub const MAGIC: [u8; 8] = *b"KSE2DSP\0";
pub const VERSION: u32 = 1;

pub fn write_field<W: Write>(w: &mut W, field: &SpectralField2D) -> Result<()> {
    let g = field.grid();
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for v in [g.nx() as f64, g.ny() as f64, g.l1(), g.l2()] {
        w.write_all(&v.to_le_bytes())?;
    }
    for c in field.coeffs().iter() {
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_field<R: Read>(r: &mut R) -> Result<SpectralField2D> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(KseError::CheckpointFormat("bad magic".into()));
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != VERSION {
        return Err(KseError::CheckpointFormat(format!(
            "unsupported version {version}"
        )));
    }
    let mut header = [0f64; 4];
    for h in &mut header {
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf)?;
        *h = f64::from_le_bytes(buf);
    }
    let [nx, ny, l1, l2] = header;
    if nx.fract() != 0.0 || ny.fract() != 0.0 || nx <= 0.0 || ny <= 0.0 {
        return Err(KseError::CheckpointFormat(format!(
            "non-integral mode counts {nx} x {ny}"
        )));
    }
    let grid = Grid2D::new(nx as usize, ny as usize, l1, l2)?;
    let n = grid.nx() * grid.ny();
    let mut coeffs = Vec::with_capacity(n);
    let mut buf = [0u8; 16];
    for _ in 0..n {
        r.read_exact(&mut buf)?;
        let re = f64::from_le_bytes(buf[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(buf[8..16].try_into().unwrap());
        coeffs.push(Complex64::new(re, im));
    }
    let coeffs = Array2::from_shape_vec((grid.nx(), grid.ny()), coeffs)
        .map_err(|e| KseError::CheckpointFormat(e.to_string()))?;
    SpectralField2D::from_coeffs(grid, coeffs)
}

/// Lossy CSV export: one `(k, j, re, im)` row per mode.
pub fn write_csv<W: Write>(w: &mut W, field: &SpectralField2D) -> Result<()> {
    writeln!(w, "k,j,re,im")?;
    let g = field.grid();
    for ix in 0..g.nx() {
        for iy in 0..g.ny() {
            let c = field.coeffs()[[ix, iy]];
            writeln!(w, "{},{},{},{}", g.k_of_ix(ix), g.j_of_iy(iy), c.re, c.im)?;
        }
    }
    Ok(())
}
