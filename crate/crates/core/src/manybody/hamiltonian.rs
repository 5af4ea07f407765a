use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::{pair_table, state_len, ManyBodyState, SeparationIndex};
use crate::error::{Error, Result};
use crate::gp::step_plan;
use crate::grid::{for_each_index, GridSpec, TensorFft};
use crate::potential::{PotentialModel, Scaling, TrapModel};

const I: Complex64 = Complex64::new(0.0, 1.0);
const DENSE_LIMIT: usize = 1024;

/// `H = Σ_j (-Δ_j + V_ext(r_j)) + c Σ_{i<j} V_N(r_i - r_j)`.
///
/// The pair prefactor `c` is 1 for three-dimensional scaling. The
/// one-dimensional analog mode uses `c = 1/N` with `V_N(x) = N V(N x)`, so
/// that the pair interaction integrates to `b0/N` as in three dimensions and
/// the mean-field limit has coupling `b0 = ∫ V dx`.
#[derive(Debug, Clone)]
pub struct ManyBodyHamiltonian {
    pub pair: PotentialModel,
    pub pair_coupling: f64,
    pub trap: TrapModel,
}

impl ManyBodyHamiltonian {
    /// Three-dimensional convention with an already scaled `V_N`.
    pub fn new(pair: PotentialModel, trap: TrapModel) -> Self {
        Self { pair, pair_coupling: 1.0, trap }
    }

    /// One-dimensional analog mode for `n` particles; `pair` must carry the
    /// analog scaling `N V(N x)`.
    pub fn analog_1d(pair: PotentialModel, n: usize, trap: TrapModel) -> Result<Self> {
        if pair.scale() != 1 && pair.scaling() != Scaling::Analog1d {
            return Err(Error::domain("analog mode needs a potential scaled with scale_potential_1d"));
        }
        Ok(Self { pair, pair_coupling: 1.0 / n as f64, trap })
    }

    pub fn free() -> Self {
        Self::new(PotentialModel::zero(), TrapModel::None)
    }

    /// Multiplicative part of `H` at every configuration.
    pub fn potential_diagonal(&self, n: usize, grid: &GridSpec) -> Result<Vec<f64>> {
        let len = state_len(n, grid)?;
        let pair = pair_table(grid, |r| self.pair.value(r));
        let coords = grid.coords();
        let mut trap = Vec::with_capacity(grid.len());
        for_each_index(grid.dim, grid.points_per_axis, |_, idx| {
            trap.push(self.trap.value(idx.iter().map(|&i| coords[i] * coords[i]).sum()));
        });
        let sep = SeparationIndex::new(grid);
        let mut out = Vec::with_capacity(len);
        let c = self.pair_coupling;
        for_each_index(n, grid.len(), |_, parts| {
            let mut v = 0.0;
            for &p in parts {
                v += trap[p];
            }
            for i in 0..n {
                for j in i + 1..n {
                    v += c * pair[sep.of(parts[i], parts[j])];
                }
            }
            out.push(v);
        });
        Ok(out)
    }

    /// `H ψ` on raw amplitudes.
    pub fn apply(&self, psi: &ManyBodyState) -> Result<Vec<Complex64>> {
        let ops = KineticTable::new(psi.particles(), psi.grid())?;
        let v = self.potential_diagonal(psi.particles(), psi.grid())?;
        Ok(apply_with(&ops, &v, psi.values()))
    }
}

pub(crate) struct KineticTable {
    pub fft: TensorFft,
    pub k2: Vec<f64>,
}

impl KineticTable {
    pub fn new(n: usize, grid: &GridSpec) -> Result<Self> {
        let len = state_len(n, grid)?;
        let k = grid.wavenumbers();
        let mut single = Vec::with_capacity(grid.len());
        for_each_index(grid.dim, grid.points_per_axis, |_, idx| {
            single.push(idx.iter().map(|&i| k[i] * k[i]).sum::<f64>());
        });
        let mut k2 = Vec::with_capacity(len);
        for_each_index(n, grid.len(), |_, parts| k2.push(parts.iter().map(|&p| single[p]).sum()));
        Ok(Self { fft: TensorFft::new(grid.points_per_axis), k2 })
    }
}

pub(crate) fn apply_with(ops: &KineticTable, v: &[f64], psi: &[Complex64]) -> Vec<Complex64> {
    let mut kin = psi.to_vec();
    ops.fft.forward(&mut kin);
    for (z, k2) in kin.iter_mut().zip(&ops.k2) {
        *z *= k2;
    }
    ops.fft.inverse(&mut kin);
    for ((z, p), vv) in kin.iter_mut().zip(psi).zip(v) {
        *z += p * vv;
    }
    kin
}

/// Reusable Strang propagator: half kinetic, full potential, half kinetic.
pub struct ManyBodyPropagator {
    n: usize,
    grid: GridSpec,
    fft: TensorFft,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
    potential: Vec<Complex64>,
}

impl ManyBodyPropagator {
    pub fn new(ham: &ManyBodyHamiltonian, n: usize, grid: GridSpec, step: f64) -> Result<Self> {
        if !(step != 0.0 && step.is_finite()) {
            return Err(Error::domain("time step must be nonzero and finite"));
        }
        let table = KineticTable::new(n, &grid)?;
        let half = table.k2.iter().map(|&k2| (-I * (0.5 * step * k2)).exp()).collect();
        let full = table.k2.iter().map(|&k2| (-I * (step * k2)).exp()).collect();
        let potential = ham
            .potential_diagonal(n, &grid)?
            .into_iter()
            .map(|v| Complex64::from_polar(1.0, -step * v))
            .collect();
        Ok(Self { n, grid, fft: table.fft, half, full, potential })
    }

    fn kinetic(&self, v: &mut [Complex64], mult: &[Complex64]) {
        self.fft.forward(v);
        for (z, m) in v.iter_mut().zip(mult) {
            *z *= m;
        }
        self.fft.inverse(v);
    }

    pub fn advance(&self, psi: &mut ManyBodyState, steps: usize) -> Result<()> {
        if psi.particles() != self.n || *psi.grid() != self.grid {
            return Err(Error::GridMismatch("propagator built for a different state shape".into()));
        }
        if steps == 0 {
            return Ok(());
        }
        let v = psi.values_mut();
        self.kinetic(v, &self.half);
        for s in 0..steps {
            for (z, p) in v.iter_mut().zip(&self.potential) {
                *z *= p;
            }
            let last = s + 1 == steps;
            self.kinetic(v, if last { &self.half } else { &self.full });
        }
        if psi.has_non_finite() {
            return Err(Error::Solver { message: "non-finite many-body state".into(), residual: f64::NAN });
        }
        Ok(())
    }
}

/// Unitary split-step evolution for time `t` (either sign).
pub fn evolve_manybody(psi0: &ManyBodyState, ham: &ManyBodyHamiltonian, t: f64, dt: f64) -> Result<ManyBodyState> {
    let (n, h) = step_plan(t, dt)?;
    let mut psi = psi0.clone();
    if n == 0 {
        return Ok(psi);
    }
    ManyBodyPropagator::new(ham, psi0.particles(), *psi0.grid(), h)?.advance(&mut psi, n)?;
    Ok(psi)
}

/// Lowest eigenpair of the discretized `H` by dense diagonalization.
///
/// Only for configuration spaces of at most 1024 points. The ground state
/// of an exchange-symmetric `H` is itself symmetric when nondegenerate.
pub fn ground_state_dense(ham: &ManyBodyHamiltonian, n: usize, grid: GridSpec) -> Result<(ManyBodyState, f64)> {
    let len = state_len(n, &grid)?;
    if len > DENSE_LIMIT {
        return Err(Error::config(format!("dense diagonalization limited to {DENSE_LIMIT} points, got {len}")));
    }
    let ops = KineticTable::new(n, &grid)?;
    let v = ham.potential_diagonal(n, &grid)?;
    let mut h = DMatrix::<f64>::zeros(len, len);
    let mut e = vec![Complex64::new(0.0, 0.0); len];
    for b in 0..len {
        e.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        e[b] = Complex64::new(1.0, 0.0);
        let col = apply_with(&ops, &v, &e);
        for a in 0..len {
            h[(a, b)] = col[a].re;
        }
    }
    let h = (&h + h.transpose()) * 0.5;
    let eig = h.symmetric_eigen();
    let (imin, emin) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &x)| if x < acc.1 { (i, x) } else { acc });
    let vec = eig.eigenvectors.column(imin);
    let values = vec.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    Ok((ManyBodyState::from_values(n, grid, values)?, emin))
}
