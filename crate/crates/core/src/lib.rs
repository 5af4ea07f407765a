//! A numerical laboratory for Bose gases with short-range repulsion.
//!
//! The crate covers four layers that cross-check each other:
//!
//! * [`potential`] and [`scattering`]: radial pair potentials, their `N`
//!   scaling, and the zero-energy scattering solution with its scattering
//!   length `a0` and the coupling identity `∫ V f = 8π a0`.
//! * [`gp`]: Gross-Pitaevskii dynamics and ground states on periodic grids.
//! * [`manybody`]: exact few-boson dynamics, reduced density matrices and
//!   correlation diagnostics.
//! * [`hierarchy`]: BBGKY and infinite-hierarchy residuals, the collision
//!   operator, truncated Dyson series and Sobolev trace norms.
//!
//! Units are ħ = 1 and particle mass 1/2 throughout, so the kinetic energy
//! operator is `-Δ`.
//!
//! The guide in `book/` walks through each layer; its code snippets are
//! compiled and run as doctests of this crate.

pub mod cli;
pub mod error;
pub mod gp;
pub mod grid;
pub mod hierarchy;
pub mod manybody;
pub mod potential;
pub mod quad;
pub mod scattering;
pub mod snapshot;

pub use error::{Error, Result};
pub use gp::{evolve_gp, gp_energy, minimize_gp, WaveFunction};
pub use grid::GridSpec;
pub use manybody::{DensityMatrix, ManyBodyState};
pub use potential::{alpha_strength, born_coupling, scale_potential, PotentialModel, TrapModel};
pub use scattering::{coupling_sigma, jastrow, solve_zero_energy, ScatteringSolution};

pub use num_complex::Complex64;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/scattering.md")]
    mod scattering {}
    #[doc = include_str!("../../../book/src/gross_pitaevskii.md")]
    mod gross_pitaevskii {}
    #[doc = include_str!("../../../book/src/many_body.md")]
    mod many_body {}
    #[doc = include_str!("../../../book/src/hierarchy.md")]
    mod hierarchy {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
