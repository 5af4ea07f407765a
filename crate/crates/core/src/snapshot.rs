//! State snapshots.
//!
//! Binary layout: the 8-byte magic `GPLAB001`, then `u32` rank, `u32`
//! points per axis and `f64` box length, then the row-major amplitudes as
//! pairs of little-endian `f64` (real, imaginary). All header fields are
//! little-endian. Wave functions use their dimension as the rank; a
//! `k`-particle kernel on a `d`-dimensional grid is written as a tensor of
//! rank `2 k d`.
//!
//! CSV layout: header `index,x[,y,z],re,im`, one row per grid point.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gp::WaveFunction;
use crate::grid::{for_each_index, GridSpec};
use crate::manybody::Kernel;

pub const MAGIC: &[u8; 8] = b"GPLAB001";

/// Contents of a binary snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub rank: u32,
    pub points_per_axis: u32,
    pub box_length: f64,
    pub values: Vec<Complex64>,
}

impl Snapshot {
    pub fn from_wave_function(phi: &WaveFunction) -> Self {
        let g = phi.grid();
        Self {
            rank: g.dim as u32,
            points_per_axis: g.points_per_axis as u32,
            box_length: g.box_length,
            values: phi.values().to_vec(),
        }
    }

    pub fn from_kernel(kernel: &Kernel) -> Self {
        let g = kernel.grid();
        Self {
            rank: (2 * kernel.particles() * g.dim) as u32,
            points_per_axis: g.points_per_axis as u32,
            box_length: g.box_length,
            values: kernel.matrix().to_vec(),
        }
    }

    /// Interpret as a single-particle wave function (normalized on load).
    pub fn into_wave_function(self) -> Result<WaveFunction> {
        let grid = GridSpec::new(self.rank as usize, self.points_per_axis as usize, self.box_length)?;
        WaveFunction::from_values(grid, self.values)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&self.rank.to_le_bytes())?;
        w.write_all(&self.points_per_axis.to_le_bytes())?;
        w.write_all(&self.box_length.to_le_bytes())?;
        for z in &self.values {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let mut bytes = Vec::new();
        BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
        if bytes.len() < 24 || &bytes[..8] != MAGIC {
            return Err(Error::config("not a GPLAB001 snapshot"));
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let f64_at = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
        let rank = u32_at(8);
        let points_per_axis = u32_at(12);
        let box_length = f64_at(16);
        let expected = (points_per_axis as u128).checked_pow(rank).unwrap_or(u128::MAX);
        let body = &bytes[24..];
        if body.len() % 16 != 0 || (body.len() / 16) as u128 != expected {
            return Err(Error::config(format!(
                "snapshot body holds {} bytes, expected {expected} complex values",
                body.len()
            )));
        }
        let values = body
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        Ok(Self { rank, points_per_axis, box_length, values })
    }
}

/// Write `index,x[,y,z],re,im`.
pub fn write_csv(phi: &WaveFunction, path: impl AsRef<Path>) -> Result<()> {
    let grid = phi.grid();
    let mut w = csv::Writer::from_path(path)?;
    let axes = ["x", "y", "z"];
    let mut header = vec!["index".to_string()];
    header.extend(axes[..grid.dim].iter().map(|s| s.to_string()));
    header.extend(["re".to_string(), "im".to_string()]);
    w.write_record(&header)?;
    let coords = grid.coords();
    let vals = phi.values();
    let mut err = None;
    for_each_index(grid.dim, grid.points_per_axis, |flat, idx| {
        if err.is_some() {
            return;
        }
        let mut row = vec![flat.to_string()];
        row.extend(idx.iter().map(|&i| format!("{:.16e}", coords[i])));
        row.push(format!("{:.16e}", vals[flat].re));
        row.push(format!("{:.16e}", vals[flat].im));
        if let Err(e) = w.write_record(&row) {
            err = Some(e);
        }
    });
    if let Some(e) = err {
        return Err(e.into());
    }
    w.flush()?;
    Ok(())
}

/// Read a CSV snapshot onto `grid`; rows may come in any order.
pub fn read_csv(path: impl AsRef<Path>, grid: GridSpec) -> Result<WaveFunction> {
    let mut r = csv::Reader::from_path(path)?;
    let width = grid.dim + 3;
    if r.headers()?.len() != width {
        return Err(Error::config(format!("CSV snapshot for d = {} needs {width} columns", grid.dim)));
    }
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut seen = vec![false; grid.len()];
    for rec in r.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec[i].trim().parse::<f64>().map_err(|e| Error::config(format!("bad CSV number {:?}: {e}", &rec[i])))
        };
        let index: usize = rec[0].trim().parse().map_err(|e| Error::config(format!("bad CSV index: {e}")))?;
        if index >= grid.len() {
            return Err(Error::config(format!("CSV index {index} outside the grid")));
        }
        values[index] = Complex64::new(parse(grid.dim + 1)?, parse(grid.dim + 2)?);
        seen[index] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::config("CSV snapshot does not cover every grid point"));
    }
    WaveFunction::from_values(grid, values)
}
