//! Detection of harmonic oscillations observed in white Gaussian noise.
//!
//! The central procedure ("basic test") takes an observation window `y`,
//! computes
//!
//! ```text
//! Opt_Z(y) = min_{z ∈ Z} ‖F_N (y − z)‖_∞
//! ```
//!
//! over a nuisance set `Z` (zero, an exponential-polynomial subspace, or an
//! ε-neighbourhood of one) and compares it with a noise quantile of
//! `‖F_N ξ‖_∞`. The crate also provides the competing energy test, the
//! thresholds both tests need, executable checks of the supporting
//! polynomial constructions, and a Monte Carlo harness with a CLI.

pub mod detector;
pub mod error;
pub mod harness;
pub mod par;
pub mod quantiles;
pub mod rng;
pub mod signals;
pub mod solver;
pub mod spectrum;
pub mod verify;

pub use detector::{basic_test, energy_test, Decision, TestKind, TestOutcome};
pub use error::{Error, Result};
pub use signals::{FrequencyCollection, ModulatedSpec, SignalWindow};
pub use solver::{solve, solve_uniform, NuisanceSpec, SolverOptions, SolverReport};
