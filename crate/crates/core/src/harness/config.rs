use serde::{Deserialize, Serialize};

use crate::detector::EnergyDof;
use crate::error::{Error, Result};
use crate::quantiles::ThresholdMethod;

/// Detection problem. `P1`/`P2`: signal against an exact-subspace nuisance
/// (`P1` with the zero nuisance); `N1`/`N2`: ε-set nuisance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Problem {
    P1,
    P2,
    N1,
    N2,
}

/// Signal family for the power sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalMode {
    /// Fresh random frequencies and amplitudes per trial.
    #[default]
    Random,
    /// The fixed extremal polynomial of degree `d_s − 1`.
    Bad,
}

/// Bracketing and bisection of the signal scale `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BisectionParams {
    pub start: f64,
    pub steps: usize,
    pub cap: f64,
    /// Noise draws that must all lead to rejection.
    pub draws: usize,
}

impl Default for BisectionParams {
    fn default() -> Self {
        Self { start: 0.1, steps: 12, cap: 1e6, draws: 15 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub problem: Problem,
    #[serde(rename = "N")]
    pub n: usize,
    pub d_s: usize,
    pub d_n: usize,
    pub eps_n: f64,
    pub eps_s: f64,
    pub alpha: f64,
    /// Trials per grid point (power sweep) or experiments (resolution search).
    pub trials: usize,
    pub rho_grid: Vec<f64>,
    pub bisection: BisectionParams,
    pub seed: u64,
    pub threshold_method: ThresholdMethod,
    /// Monte Carlo trials for the basic-test threshold.
    pub threshold_trials: usize,
    /// Threshold used when `threshold_method` is `UserSupplied`.
    pub threshold_value: Option<f64>,
    pub signal_mode: SignalMode,
    pub energy_dof: EnergyDof,
    /// Worker threads (`0` = library default).
    pub threads: usize,
}

/// `0, step, 2·step, …` up to `max` inclusive, computed as `i/k` where
/// possible so grid points print without representation noise.
pub fn uniform_grid(step: f64, max: f64) -> Vec<f64> {
    let count = (max / step + 1e-9).floor() as usize;
    let inv = 1.0 / step;
    if (inv - inv.round()).abs() < 1e-12 {
        let k = inv.round();
        (0..=count).map(|i| i as f64 / k).collect()
    } else {
        (0..=count).map(|i| i as f64 * step).collect()
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: Problem::P1,
            n: 256,
            d_s: 4,
            d_n: 0,
            eps_n: 0.0,
            eps_s: 0.0,
            alpha: 0.01,
            trials: 2000,
            rho_grid: uniform_grid(0.05, 4.0),
            bisection: BisectionParams::default(),
            seed: 0,
            threshold_method: ThresholdMethod::MonteCarlo,
            threshold_trials: 100_000,
            threshold_value: None,
            signal_mode: SignalMode::Random,
            energy_dof: EnergyDof::Full,
            threads: 0,
        }
    }
}

impl ExperimentConfig {
    /// Power-sweep defaults (`P1`, random signals, ρ grid on `[0, 4]` step 0.05).
    pub fn table2(n: usize, trials: usize, seed: u64) -> Self {
        Self { n, trials, seed, ..Self::default() }
    }

    /// Resolution-search defaults (`N1`, `d_n = d_s = 4`, `ε_n = α = 0.01`, 10 experiments).
    pub fn table1(n: usize, experiments: usize, seed: u64) -> Self {
        Self { problem: Problem::N1, n, d_n: 4, eps_n: 0.01, trials: experiments, seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::Config(format!("alpha must lie in (0, 1/2), got {}", self.alpha)));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.n < 2 {
            return Err(Error::Config(format!("N must be at least 2, got {}", self.n)));
        }
        if self.rho_grid.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::Config("rho grid must be strictly increasing".into()));
        }
        if self.rho_grid.iter().any(|r| !r.is_finite()) {
            return Err(Error::Config("rho grid must be finite".into()));
        }
        if !(self.eps_n >= 0.0 && self.eps_s >= 0.0) {
            return Err(Error::Config("epsilons must be nonnegative".into()));
        }
        if self.threshold_method == ThresholdMethod::UserSupplied
            && !self.threshold_value.is_some_and(|v| v > 0.0 && v.is_finite())
        {
            return Err(Error::Config("user-supplied threshold requires a positive threshold_value".into()));
        }
        if self.bisection.draws == 0 || !(self.bisection.start > 0.0) || !(self.bisection.cap > self.bisection.start) {
            return Err(Error::Config("invalid bisection parameters".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_clean() {
        let g = uniform_grid(0.05, 4.0);
        assert_eq!(g.len(), 81);
        assert_eq!(g[3], 0.15);
        assert_eq!(*g.last().unwrap(), 4.0);
        assert_eq!(uniform_grid(0.1, 1.0).len(), 11);
    }

    #[test]
    fn validation() {
        assert!(ExperimentConfig::default().validate().is_ok());
        let bad = ExperimentConfig { rho_grid: vec![0.0, 0.2, 0.1], ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ExperimentConfig { alpha: 0.5, ..Default::default() };
        assert!(bad.validate().is_err());
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"N": 128, "trials": 10}"#).unwrap();
        assert_eq!(cfg.n, 128);
        assert_eq!(cfg.rho_grid.len(), 81);
    }
}
