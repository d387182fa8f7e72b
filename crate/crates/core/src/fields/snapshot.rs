//! Flat little-endian field snapshots.
//!
//! Layout: `n: u64`, `h: f64`, `L: f64`, `tag: u8` (0 scalar, 1 coordinate
//! form, 2 frame form), window center as four `f64`, then `(re, im)` pairs
//! in axis-major order. Forms store their two components as consecutive
//! blocks.

use std::io::{Read, Write};

use num_complex::Complex64 as C64;

use super::{Grid, OneForm, Representation, ScalarField};
use crate::error::{Error, Result};
use crate::geometry::Point;

#[derive(Debug, Clone, PartialEq)]
pub enum Snapshot {
    Scalar(ScalarField),
    Form(OneForm),
}

fn put_values<W: Write>(w: &mut W, vals: &[C64]) -> Result<()> {
    let mut buf = Vec::with_capacity(vals.len() * 16);
    for z in vals {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn put_header<W: Write>(w: &mut W, grid: &Grid, tag: u8) -> Result<()> {
    w.write_all(&(grid.n() as u64).to_le_bytes())?;
    w.write_all(&grid.h().to_le_bytes())?;
    w.write_all(&grid.half_width().to_le_bytes())?;
    w.write_all(&[tag])?;
    for c in grid.center() {
        w.write_all(&c.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_snapshot<W: Write>(w: &mut W, snap: &Snapshot) -> Result<()> {
    match snap {
        Snapshot::Scalar(f) => {
            put_header(w, f.grid(), 0)?;
            put_values(w, f.values())
        }
        Snapshot::Form(f) => {
            let tag = match f.representation() {
                Representation::Coordinate => 1,
                Representation::Frame => 2,
            };
            put_header(w, f.grid(), tag)?;
            put_values(w, f.component_values(0))?;
            put_values(w, f.component_values(1))
        }
    }
}

fn get_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn get_values<R: Read>(r: &mut R, count: usize) -> Result<Vec<C64>> {
    let mut buf = vec![0u8; count * 16];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect())
}

pub fn read_snapshot<R: Read>(r: &mut R) -> Result<Snapshot> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    let n = u64::from_le_bytes(b) as usize;
    let h = get_f64(r)?;
    let half = get_f64(r)?;
    let mut tag = [0u8; 1];
    r.read_exact(&mut tag)?;
    let center = [get_f64(r)?, get_f64(r)?, get_f64(r)?, get_f64(r)?];
    let grid = Grid::window(n, Point::from_real(center), half)?;
    if (grid.h() - h).abs() > 1e-15 * h.abs().max(1.0) {
        return Err(Error::InvalidInput(format!("snapshot spacing {h} does not match n and L")));
    }
    let len = grid.len();
    match tag[0] {
        0 => Ok(Snapshot::Scalar(ScalarField::from_values(&grid, get_values(r, len)?, None))),
        t @ (1 | 2) => {
            let repr = if t == 1 {
                Representation::Coordinate
            } else {
                Representation::Frame
            };
            let a = get_values(r, len)?;
            let b = get_values(r, len)?;
            Ok(Snapshot::Form(OneForm::from_raw(&grid, repr, a, b, None)))
        }
        t => Err(Error::InvalidInput(format!("unknown snapshot tag {t}"))),
    }
}
