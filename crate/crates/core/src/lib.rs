//! Simulation of a Ramsey-interferometric, point-by-point measurement of the
//! Wigner function of an atom held in a state-dependent optical trap.
//!
//! The crate is organised bottom-up:
//!
//! - [`grid`], [`wavefunction`], [`operators`], [`eigen`]: 1D states, spectral
//!   transforms, parity and displacement, stationary states.
//! - [`potentials`]: harmonic, lattice and tweezer traps, their spectra, depth
//!   schedules and trap trajectories.
//! - [`propagator`]: Strang split-step time evolution.
//! - [`ramsey`]: the interferometric sequence and phase-space scans.
//! - [`wigner`]: independent Wigner-function oracles and comparison metrics.
//! - [`calibration`]: hold-time calibration from thermal contrast collapse.
//!
//! All internal quantities use ħ = m = 1 with lengths in units of 1/k_λ; see
//! [`units`].

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod eigen;
pub mod error;
pub mod grid;
pub mod operators;
pub mod parallel;
pub mod potentials;
pub mod propagator;
pub mod ramsey;
pub mod spectral;
pub mod units;
pub mod wavefunction;
pub mod wigner;

pub use error::{Error, Result};
pub use grid::Grid;
pub use potentials::{DepthSchedule, PotentialModel, Spin, TrapShape, TrapTrajectory};
pub use units::{GroundStateScales, UnitSystem};
pub use wavefunction::{Direction, Space, SpinorState, WaveFunction};
