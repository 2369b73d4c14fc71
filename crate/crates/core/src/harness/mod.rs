//! Monte Carlo protocols, persistence and the command-line front end.

pub mod config;
pub mod io;
pub mod table1;
pub mod table2;

#[cfg(feature = "cli")]
pub mod cli;

use crate::error::{Error, Result};
use crate::quantiles::{ThresholdKey, ThresholdMethod, ThresholdTable};
use crate::signals::{window_basis, FrequencyCollection, SignalWindow};

pub use config::{BisectionParams, ExperimentConfig, Problem, SignalMode};
pub use table1::{table1_experiment, Table1Record};
pub use table2::{table2_sweep, Table2Record, Table2Row};

/// The degree-`degree` polynomial window with the largest `‖z‖_∞/‖z‖₂`,
/// normalized to `‖z‖_∞ = 1`.
///
/// For an orthonormal polynomial basis `φ`, the maximum over `z` of
/// `|z_t|/‖z‖₂` is `√(φ(t)ᵀφ(t))`, attained by the kernel column
/// `z = K(·, t)`. The best grid point is chosen; ties break toward `N−1`.
pub fn bad_signal(n: usize, degree: usize) -> Result<SignalWindow> {
    if n <= degree {
        return Err(Error::Dimension(format!("window length {n} must exceed degree {degree}")));
    }
    let basis = window_basis(&FrequencyCollection::zeros(degree + 1), n)?;
    let scores: Vec<f64> = (0..n).map(|t| basis.iter().map(|b| b[t] * b[t]).sum()).collect();
    let best = scores.iter().copied().fold(0.0, f64::max);
    let t_star = (0..n).rev().find(|&t| scores[t] >= best * (1.0 - 1e-12)).expect("nonempty window");
    let z: Vec<f64> =
        (0..n).map(|t| basis.iter().map(|b| b[t_star] * b[t]).sum::<f64>() / scores[t_star]).collect();
    SignalWindow::new(z)
}

/// Basic-test threshold for `cfg`, consulting and updating `cache`.
pub fn basic_threshold(cfg: &ExperimentConfig, cache: Option<&mut ThresholdTable>) -> Result<f64> {
    if cfg.threshold_method == ThresholdMethod::UserSupplied {
        return cfg.threshold_value.ok_or_else(|| Error::Config("missing user-supplied threshold".into()));
    }
    let key = ThresholdKey {
        n: cfg.n,
        alpha: cfg.alpha,
        method: cfg.threshold_method,
        trials: if cfg.threshold_method == ThresholdMethod::MonteCarlo { cfg.threshold_trials } else { 0 },
        seed: if cfg.threshold_method == ThresholdMethod::MonteCarlo { cfg.seed } else { 0 },
    };
    match cache {
        Some(table) => table.basic_threshold(&key),
        None => ThresholdTable::default().basic_threshold(&key),
    }
}

/// Wall-clock timer for runtime bookkeeping; reads zero on `wasm32`, which
/// has no clock.
pub(crate) struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Self {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    pub(crate) fn secs(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.start.elapsed().as_secs_f64();
        #[cfg(target_arch = "wasm32")]
        0.0
    }
}

/// Smallest grid point whose rate reaches `target`.
pub fn first_reaching(grid: &[f64], rates: &[f64], target: f64) -> Option<f64> {
    grid.iter().zip(rates).find(|(_, p)| **p >= target).map(|(r, _)| *r)
}
