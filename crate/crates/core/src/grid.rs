//! Periodic grids and multi-axis FFTs over flat row-major tensors.
//!
//! A field on a `d`-dimensional grid with `M` points per axis is stored as a
//! flat vector of length `M^d`, last axis fastest. Many-body states and
//! density-matrix kernels are tensors of higher rank over the same axis
//! length, so every transform here works on an arbitrary rank.
//!
//! Transform normalization: the forward transform is unnormalized and the
//! inverse carries `1/M` per axis.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid `[-L/2, L/2)^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub points_per_axis: usize,
    pub box_length: f64,
}

impl GridSpec {
    pub fn new(dim: usize, points_per_axis: usize, box_length: f64) -> Result<Self> {
        let g = Self { dim, points_per_axis, box_length };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::config(format!("grid dimension must be 1, 2 or 3, got {}", self.dim)));
        }
        if self.points_per_axis < 8 || !self.points_per_axis.is_power_of_two() {
            return Err(Error::config(format!(
                "points_per_axis must be a power of two >= 8, got {}",
                self.points_per_axis
            )));
        }
        if !(self.box_length > 0.0 && self.box_length.is_finite()) {
            return Err(Error::config(format!("box_length must be positive, got {}", self.box_length)));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.box_length / self.points_per_axis as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    /// Number of grid points, `M^d`.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of index `i` along one axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -0.5 * self.box_length + i as f64 * self.dx()
    }

    /// Axis coordinates.
    pub fn coords(&self) -> Vec<f64> {
        (0..self.points_per_axis).map(|i| self.coord(i)).collect()
    }

    /// FFT wavenumbers along one axis in standard order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        wavenumbers(self.points_per_axis, self.box_length)
    }

    /// Index of the grid point at the origin along each axis.
    pub fn origin_index(&self) -> usize {
        self.points_per_axis / 2
    }

    /// Multi-index of a flat position.
    pub fn unflatten(&self, mut flat: usize, out: &mut [usize]) {
        for a in (0..self.dim).rev() {
            out[a] = flat % self.points_per_axis;
            flat /= self.points_per_axis;
        }
    }

    /// Minimum-image separation between two axis indices.
    #[inline]
    pub fn periodic_separation(&self, i: usize, j: usize) -> f64 {
        let m = self.points_per_axis as isize;
        let mut d = i as isize - j as isize;
        if d > m / 2 {
            d -= m;
        } else if d < -m / 2 {
            d += m;
        }
        d as f64 * self.dx()
    }
}

pub fn wavenumbers(m: usize, box_length: f64) -> Vec<f64> {
    let dk = 2.0 * PI / box_length;
    (0..m)
        .map(|i| {
            let n = if i < m / 2 { i as isize } else { i as isize - m as isize };
            n as f64 * dk
        })
        .collect()
}

/// Visit every multi-index of a rank-`rank` tensor with axis length `m`, in
/// flat (row-major) order.
pub fn for_each_index(rank: usize, m: usize, mut f: impl FnMut(usize, &[usize])) {
    let len = m.pow(rank as u32);
    let mut idx = vec![0usize; rank];
    for flat in 0..len {
        f(flat, &idx);
        for a in (0..rank).rev() {
            idx[a] += 1;
            if idx[a] < m {
                break;
            }
            idx[a] = 0;
        }
    }
}

const BATCH: usize = 64;

/// FFT plans for tensors of a fixed axis length.
#[derive(Clone)]
pub struct TensorFft {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for TensorFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TensorFft").field("m", &self.m).finish()
    }
}

impl TensorFft {
    pub fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { m, forward: planner.plan_fft_forward(m), inverse: planner.plan_fft_inverse(m) }
    }

    pub fn axis_len(&self) -> usize {
        self.m
    }

    fn rank_of(&self, len: usize) -> usize {
        let mut rank = 0;
        let mut n = 1;
        while n < len {
            n *= self.m;
            rank += 1;
        }
        assert_eq!(n, len, "tensor length {len} is not a power of the axis length {}", self.m);
        rank
    }

    /// Forward transform along every axis.
    pub fn forward(&self, data: &mut [Complex64]) {
        let rank = self.rank_of(data.len());
        self.forward_axes(data, 0..rank);
    }

    /// Normalized inverse transform along every axis.
    pub fn inverse(&self, data: &mut [Complex64]) {
        let rank = self.rank_of(data.len());
        self.inverse_axes(data, 0..rank);
    }

    pub fn forward_axes(&self, data: &mut [Complex64], axes: std::ops::Range<usize>) {
        let rank = self.rank_of(data.len());
        for a in axes {
            self.transform_axis(data, rank, a, &self.forward);
        }
    }

    pub fn inverse_axes(&self, data: &mut [Complex64], axes: std::ops::Range<usize>) {
        let rank = self.rank_of(data.len());
        let n_axes = axes.len();
        for a in axes {
            self.transform_axis(data, rank, a, &self.inverse);
        }
        let scale = (self.m as f64).powi(-(n_axes as i32));
        for z in data.iter_mut() {
            *z *= scale;
        }
    }

    fn transform_axis(&self, data: &mut [Complex64], rank: usize, axis: usize, plan: &Arc<dyn Fft<f64>>) {
        let m = self.m;
        let stride = m.pow((rank - 1 - axis) as u32);
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        if stride == 1 {
            plan.process_with_scratch(data, &mut scratch);
            return;
        }
        let width = BATCH.min(stride);
        let mut buf = vec![Complex64::new(0.0, 0.0); width * m];
        for block in data.chunks_mut(m * stride) {
            for col0 in (0..stride).step_by(width) {
                for i in 0..m {
                    let row = &block[i * stride + col0..i * stride + col0 + width];
                    for (c, &z) in row.iter().enumerate() {
                        buf[c * m + i] = z;
                    }
                }
                plan.process_with_scratch(&mut buf, &mut scratch);
                for i in 0..m {
                    let row = &mut block[i * stride + col0..i * stride + col0 + width];
                    for (c, z) in row.iter_mut().enumerate() {
                        *z = buf[c * m + i];
                    }
                }
            }
        }
    }
}

/// Sum of squared wavenumbers over a group of axes, for every flat index
/// of a rank-`rank` tensor; `groups` maps each axis to an optional group.
pub fn squared_wavenumber_sums(
    rank: usize,
    m: usize,
    box_length: f64,
    groups: &[Option<usize>],
    n_groups: usize,
) -> Vec<Vec<f64>> {
    let k = wavenumbers(m, box_length);
    let len = m.pow(rank as u32);
    let mut out = vec![vec![0.0; len]; n_groups];
    for_each_index(rank, m, |flat, idx| {
        for (a, &i) in idx.iter().enumerate() {
            if let Some(g) = groups[a] {
                out[g][flat] += k[i] * k[i];
            }
        }
    });
    out
}
