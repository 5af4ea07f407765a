//! BBGKY and infinite-hierarchy checks.
//!
//! Kernels use the cell-basis convention of [`crate::manybody`]. The
//! discrete δ is `Δx^{-d}` times the Kronecker symbol at coincident grid
//! points, the unique choice with `Σ_x δ(x) Δx^d = 1`. Dense kernels are
//! used where they fit (one-dimensional grids, small `k`); sums of Kronecker
//! products ([`KronSum`]) carry factorized families and Dyson terms.

mod dyson;
mod kron;
mod ops;
mod residual;

pub use dyson::{dyson_partial_sum, dyson_term, DysonTerm, HierarchyFamily, QuadratureSpec, MIN_QUAD_POINTS};
pub use kron::{KronSum, KronTerm};
pub use ops::{collision_apply, collision_sum, free_propagate, kinetic_commutator, sobolev_trace_norm};
pub use residual::{
    bbgky_residual, bbgky_residual_from_states, gp_frames, infinite_hierarchy_residual, manybody_frames,
};

use crate::error::{Error, Result};

/// Exponents of the power-counting estimate for a graph with `k` external
/// and `m` internal collision vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PowerCount {
    /// `4k + 15m`.
    pub volume_exp: u64,
    /// `5m + 2(2k + 3m) + 5(k + m) = 9k + 16m`.
    pub decay_exp: u64,
    /// `decay_exp - volume_exp = 5k + m`.
    pub margin: u64,
}

pub fn power_counting_margin(k: u64, m: u64) -> Result<PowerCount> {
    if k == 0 {
        return Err(Error::domain("power counting needs k >= 1"));
    }
    let volume_exp = 4 * k + 15 * m;
    let decay_exp = 5 * m + 2 * (2 * k + 3 * m) + 5 * (k + m);
    Ok(PowerCount { volume_exp, decay_exp, margin: decay_exp - volume_exp })
}
