//! Simulator for the quantum sawtooth map under per-gate amplitude damping.
//!
//! The map acts on `N = 2^n_q` momentum levels and is implemented as the
//! standard circuit of `3 n_q² + n_q` elementary gates per iteration (forward
//! Fourier ladder, kick phases, inverse ladder, rotation phases). Dissipation
//! is modeled as an amplitude-damping channel with rate `Γ` acting on every
//! qubit after every elementary gate, and can be propagated two ways:
//!
//! * [`engines::run_exact`] — dense density-matrix evolution, exact Kraus
//!   channels between gates (practical up to `n_q = 8`);
//! * [`engines::run_trajectories`] — Monte Carlo wave-function unraveling
//!   with jump/no-jump steps, deterministically seeded and trajectory-parallel.
//!
//! The [`observables`] module computes momentum distributions, fidelity decay
//! and its fitted rate, inverse participation ratios and Husimi phase-space
//! distributions; [`classical`] provides the classical sawtooth map and
//! quantum-cell-smoothed densities for side-by-side comparison. Experiment
//! configuration, figure presets and file output live in [`config`],
//! [`presets`] and [`runner`] and back the `qsaw` command-line tool.

pub mod circuit;
pub mod classical;
pub mod config;
pub mod engines;
pub mod error;
pub mod noise;
pub mod observables;
pub mod params;
pub mod presets;
pub mod runner;
pub mod state;

pub use error::{Error, Result};
pub use params::MapParams;
pub use state::{basis_state, inner, DensityMatrix, StateVector};
