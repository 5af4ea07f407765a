use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::check_budget;
use crate::error::{Error, Result};
use crate::gp::{check_same_grid, WaveFunction};
use crate::grid::{for_each_index, GridSpec};
use crate::scattering::Jastrow;

/// A normalized, exchange-symmetric `N`-boson wave function.
#[derive(Debug, Clone, PartialEq)]
pub struct ManyBodyState {
    n: usize,
    grid: GridSpec,
    values: Vec<Complex64>,
}

/// Initial data for [`build_initial`].
#[derive(Debug, Clone)]
pub enum InitialKind {
    /// `φ^{⊗N}`.
    Product(WaveFunction),
    /// `∏_{i<j} f_N(r_i - r_j) ∏_i φ(r_i)`, normalized.
    JastrowProduct(WaveFunction, Jastrow),
}

/// Build and normalize an initial state.
pub fn build_initial(kind: &InitialKind, n: usize, grid: GridSpec) -> Result<ManyBodyState> {
    let (values, norm) = build_initial_raw(kind, n, grid)?;
    let mut s = ManyBodyState { n, grid, values };
    s.scale(1.0 / norm);
    Ok(s)
}

/// Unnormalized amplitudes and their norm.
pub fn build_initial_raw(kind: &InitialKind, n: usize, grid: GridSpec) -> Result<(Vec<Complex64>, f64)> {
    let phi = match kind {
        InitialKind::Product(phi) | InitialKind::JastrowProduct(phi, _) => phi,
    };
    check_same_grid(phi.grid(), &grid)?;
    if n == 0 {
        return Err(Error::domain("particle number must be >= 1"));
    }
    let len = state_len(n, &grid)?;
    let pair = match kind {
        InitialKind::Product(_) => None,
        InitialKind::JastrowProduct(_, f) => Some(pair_table(&grid, |r| f.eval(r))),
    };
    let sep = SeparationIndex::new(&grid);
    let one = grid.len();
    let pv = phi.values();
    let mut values = Vec::with_capacity(len);
    for_each_index(n, one, |_, parts| {
        let mut z = Complex64::new(1.0, 0.0);
        for &p in parts {
            z *= pv[p];
        }
        if let Some(table) = &pair {
            for i in 0..n {
                for j in i + 1..n {
                    z *= table[sep.of(parts[i], parts[j])];
                }
            }
        }
        values.push(z);
    });
    let norm = (values.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.cell_volume().powi(n as i32)).sqrt();
    Ok((values, norm))
}

pub(crate) fn state_len(n: usize, grid: &GridSpec) -> Result<usize> {
    let requested = (grid.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    check_budget(&format!("{n}-particle state on {} points", grid.len()), requested)?;
    Ok(requested as usize)
}

/// Values of a radial function at every minimum-image separation vector.
pub(crate) fn pair_table(grid: &GridSpec, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    for_each_index(grid.dim, grid.points_per_axis, |_, idx| {
        let r2: f64 = idx.iter().map(|&i| grid.periodic_separation(i, 0).powi(2)).sum();
        out.push(f(r2.sqrt()));
    });
    out
}

/// Maps a pair of single-particle flat indices to the flat index of their
/// separation `(x_i - x_j) mod M` per axis.
pub(crate) struct SeparationIndex {
    m: usize,
    axes: Vec<usize>,
    dim: usize,
}

impl SeparationIndex {
    pub fn new(grid: &GridSpec) -> Self {
        let mut axes = Vec::with_capacity(grid.len() * grid.dim);
        for_each_index(grid.dim, grid.points_per_axis, |_, idx| axes.extend_from_slice(idx));
        Self { m: grid.points_per_axis, axes, dim: grid.dim }
    }

    #[inline]
    pub fn of(&self, a: usize, b: usize) -> usize {
        let mut flat = 0;
        for ax in 0..self.dim {
            let d = (self.axes[a * self.dim + ax] + self.m - self.axes[b * self.dim + ax]) % self.m;
            flat = flat * self.m + d;
        }
        flat
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

impl ManyBodyState {
    /// Wrap amplitudes; normalizes but does not symmetrize.
    pub fn from_values(n: usize, grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        let len = state_len(n, &grid)?;
        if values.len() != len {
            return Err(Error::GridMismatch(format!("{} amplitudes, expected {len}", values.len())));
        }
        let mut s = Self { n, grid, values };
        let norm = s.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::domain("state has zero or non-finite norm"));
        }
        s.scale(1.0 / norm);
        Ok(s)
    }

    /// Normalized symmetrization of `φ_1 ⊗ … ⊗ φ_N`.
    pub fn symmetrized_product(orbitals: &[WaveFunction]) -> Result<Self> {
        let n = orbitals.len();
        if n == 0 {
            return Err(Error::domain("need at least one orbital"));
        }
        let grid = *orbitals[0].grid();
        for o in orbitals {
            check_same_grid(o.grid(), &grid)?;
        }
        let len = state_len(n, &grid)?;
        let mut values = Vec::with_capacity(len);
        for_each_index(n, grid.len(), |_, parts| {
            let mut z = Complex64::new(1.0, 0.0);
            for (p, &x) in parts.iter().enumerate() {
                z *= orbitals[p].values()[x];
            }
            values.push(z);
        });
        let mut s = Self { n, grid, values };
        s.symmetrize();
        Self::from_values(n, grid, s.values)
    }

    /// Random symmetric state from a seeded generator.
    pub fn random_symmetric(n: usize, grid: GridSpec, seed: u64) -> Result<Self> {
        let len = state_len(n, &grid)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..len).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let mut s = Self { n, grid, values };
        s.symmetrize();
        Self::from_values(n, grid, s.values)
    }

    /// Average over all particle permutations.
    pub fn symmetrize(&mut self) {
        let perms = permutations(self.n);
        let one = self.grid.len();
        let src = self.values.clone();
        let w = 1.0 / perms.len() as f64;
        let strides: Vec<usize> = (0..self.n).map(|p| one.pow((self.n - 1 - p) as u32)).collect();
        for_each_index(self.n, one, |flat, parts| {
            let mut acc = Complex64::new(0.0, 0.0);
            for perm in &perms {
                let g: usize = perm.iter().enumerate().map(|(slot, &p)| parts[p] * strides[slot]).sum();
                acc += src[g];
            }
            self.values[flat] = acc * w;
        });
    }

    pub fn particles(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut Vec<Complex64> {
        &mut self.values
    }

    /// Volume element of the `N`-particle configuration space.
    pub fn cell_volume(&self) -> f64 {
        self.grid.cell_volume().powi(self.n as i32)
    }

    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell_volume()).sqrt()
    }

    pub(crate) fn scale(&mut self, s: f64) {
        for z in &mut self.values {
            *z *= s;
        }
    }

    pub fn inner(&self, other: &ManyBodyState) -> Result<Complex64> {
        self.check_compatible(other)?;
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.cell_volume())
    }

    pub fn distance(&self, other: &ManyBodyState) -> Result<f64> {
        self.check_compatible(other)?;
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()).sum();
        Ok((s * self.cell_volume()).sqrt())
    }

    pub(crate) fn check_compatible(&self, other: &ManyBodyState) -> Result<()> {
        check_same_grid(&self.grid, &other.grid)?;
        if self.n != other.n {
            return Err(Error::GridMismatch(format!("{} vs {} particles", self.n, other.n)));
        }
        Ok(())
    }

    /// Largest `‖ψ - P_ij ψ‖` over all transpositions.
    pub fn symmetry_defect(&self) -> f64 {
        let one = self.grid.len();
        let n = self.n;
        let strides: Vec<usize> = (0..n).map(|p| one.pow((n - 1 - p) as u32)).collect();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                let mut s = 0.0;
                for_each_index(n, one, |flat, parts| {
                    let swapped = flat + parts[j] * strides[i] + parts[i] * strides[j]
                        - parts[i] * strides[i]
                        - parts[j] * strides[j];
                    s += (self.values[flat] - self.values[swapped]).norm_sqr();
                });
                worst = worst.max((s * self.cell_volume()).sqrt());
            }
        }
        worst
    }

    pub(crate) fn has_non_finite(&self) -> bool {
        self.values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())
    }
}
