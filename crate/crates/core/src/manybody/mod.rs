//! Exact few-boson dynamics on tensor-product grids.
//!
//! An `N`-particle state on a `d`-dimensional grid with `M` points per axis is
//! a rank-`N·d` tensor of `M^{N d}` amplitudes, particle-major and row-major
//! within each particle. States are capped at [`MAX_AMPLITUDES`]; in practice
//! that means `d = 1` with `N <= 4` at 64 points per axis, or `d = 3` with
//! `N = 2` at 16 points per axis.
//!
//! Density matrices are stored in the orthonormal cell basis: the matrix
//! element `G(X, X')` equals the kernel `γ(X, X')` times `Δx^{k d}`, so
//! `Tr G = 1` and the eigenvalues of `G` are those of the operator.

mod density;
mod diagnostics;
mod hamiltonian;
mod state;

pub use density::{marginal, DensityMatrix, Eigen, Kernel};
pub(crate) use density::kernel_dim;
pub(crate) use hamiltonian::KineticTable;
pub(crate) use state::{pair_table, SeparationIndex};
pub use diagnostics::{
    condensate_overlap, correlation_quotient, energy_moment, factorization_distance, hardy_check,
    pair_interaction_per_particle,
};
pub use hamiltonian::{evolve_manybody, ground_state_dense, ManyBodyHamiltonian, ManyBodyPropagator};
pub use state::{build_initial, build_initial_raw, InitialKind, ManyBodyState};

use crate::error::{Error, Result};

/// Largest number of complex amplitudes allowed in one state or kernel.
pub const MAX_AMPLITUDES: u128 = 1 << 28;

pub(crate) fn check_budget(what: &str, requested: u128) -> Result<()> {
    if requested > MAX_AMPLITUDES {
        return Err(Error::MemoryBudget { what: what.to_string(), requested, limit: MAX_AMPLITUDES });
    }
    Ok(())
}
