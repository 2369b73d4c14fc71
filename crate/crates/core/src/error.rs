use thiserror::Error;

use crate::solver::SolverReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("frequency collection is not symmetric mod 2π: {0}")]
    SymmetryViolation(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("Monte Carlo quantile needs at least {required} trials, got {actual}")]
    InsufficientTrials { required: usize, actual: usize },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("solver stopped after {} iterations with gap {:.3e}", .0.iterations, .0.gap)]
    NotConverged(Box<SolverReport>),

    #[error("energy test does not support ε-set nuisances")]
    UnsupportedNuisance,

    #[error("m = {m} is below the minimum {min} for d = {d}")]
    MTooSmall { m: usize, min: usize, d: usize },

    #[error("input is not in the ε-set: residual {residual:.3e} exceeds ε = {eps:.3e}")]
    NotFeasible { residual: f64, eps: f64 },

    #[error("signal is identically zero on the window")]
    ZeroSignal,

    #[error("no λ in [{lo}, {hi}] rejected in every trial")]
    BisectionFailed { lo: f64, hi: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
