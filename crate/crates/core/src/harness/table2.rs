//! Power sweep of the basic and energy tests against the zero nuisance.
//!
//! Each trial draws one normalized signal `ẑ` and one noise window `ξ`; every
//! grid value `ρ` reuses them (common random numbers). Both statistics are
//! affine in `ρ` before the norm, so `F(ρẑ + ξ) = ρFẑ + Fξ` and
//! `‖ρẑ + ξ‖² = ρ²‖ẑ‖² + 2ρ⟨ẑ, ξ⟩ + ‖ξ‖²` are evaluated from per-trial
//! precomputations instead of fresh transforms.

use serde::{Deserialize, Serialize};

use crate::detector::energy_threshold;
use crate::error::{Error, Result};
use crate::par;
use crate::quantiles::ThresholdTable;
use crate::rng::{domain, standard_normal_vec, Substreams};
use crate::signals::{inf_norm, random_spec};
use crate::solver::NuisanceSpec;
use crate::spectrum::dft;

use super::config::{ExperimentConfig, Problem, SignalMode};
use super::{bad_signal, basic_threshold, first_reaching};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table2Row {
    pub rho: f64,
    pub p_basic: f64,
    pub p_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Record {
    pub rows: Vec<Table2Row>,
    pub rho_star_basic: Option<f64>,
    pub rho_star_energy: Option<f64>,
    pub threshold_basic: f64,
    pub threshold_energy: f64,
    pub trials: usize,
    pub seed: u64,
    pub runtime_secs: f64,
}

/// Rejection indicators of one trial over the grid.
fn trial(cfg: &ExperimentConfig, index: u64, q_basic: f64, q_energy: f64, fixed: Option<&[f64]>) -> Vec<(bool, bool)> {
    let n = cfg.n;
    let z: Vec<f64> = match fixed {
        Some(z) => z.to_vec(),
        None => {
            let mut rng = Substreams::new(cfg.seed, domain::SIGNAL).child(n as u64).stream(index);
            loop {
                let z = random_spec(cfg.d_s, &mut rng).sample(0, n);
                if inf_norm(&z) > 0.0 {
                    break z;
                }
            }
        }
    };
    let sup = inf_norm(&z);
    let zhat: Vec<f64> = z.iter().map(|v| v / sup).collect();
    let mut noise_rng = Substreams::new(cfg.seed, domain::NOISE).child(n as u64).stream(index);
    let xi = standard_normal_vec(&mut noise_rng, n);

    let fz = dft(&zhat).bins;
    let fxi = dft(&xi).bins;
    let zz: f64 = zhat.iter().map(|v| v * v).sum();
    let zx: f64 = zhat.iter().zip(&xi).map(|(a, b)| a * b).sum();
    let xx: f64 = xi.iter().map(|v| v * v).sum();

    cfg.rho_grid
        .iter()
        .map(|&rho| {
            let basic = fz.iter().zip(&fxi).fold(0.0f64, |m, (a, b)| m.max((a * rho + b).norm()));
            let energy = rho * rho * zz + 2.0 * rho * zx + xx;
            (basic > q_basic, energy > q_energy)
        })
        .collect()
}

/// Empirical rejection rates of both tests over `cfg.rho_grid`.
pub fn table2_sweep(cfg: &ExperimentConfig, cache: Option<&mut ThresholdTable>) -> Result<Table2Record> {
    cfg.validate()?;
    if cfg.problem != Problem::P1 {
        return Err(Error::Config("the power sweep runs problem P1 (zero nuisance)".into()));
    }
    if cfg.d_s == 0 && cfg.signal_mode == SignalMode::Random {
        return Err(Error::Config("random signals need d_s ≥ 1".into()));
    }
    let start = super::Stopwatch::start();
    let q_basic = basic_threshold(cfg, cache)?;
    let q_energy = energy_threshold(cfg.n, &NuisanceSpec::Zero, cfg.alpha, cfg.energy_dof)?;
    let fixed = match cfg.signal_mode {
        SignalMode::Random => None,
        SignalMode::Bad => Some(bad_signal(cfg.n, cfg.d_s.saturating_sub(1))?.into_vec()),
    };

    let per_trial = par::with_threads(cfg.threads, || {
        par::map_range(cfg.trials, |i| trial(cfg, i as u64, q_basic, q_energy, fixed.as_deref()))
    });

    let g = cfg.rho_grid.len();
    let mut basic = vec![0usize; g];
    let mut energy = vec![0usize; g];
    for t in &per_trial {
        for (k, (b, e)) in t.iter().enumerate() {
            basic[k] += *b as usize;
            energy[k] += *e as usize;
        }
    }
    let total = cfg.trials as f64;
    let rows: Vec<Table2Row> = cfg
        .rho_grid
        .iter()
        .enumerate()
        .map(|(k, &rho)| Table2Row { rho, p_basic: basic[k] as f64 / total, p_energy: energy[k] as f64 / total })
        .collect();
    let target = 1.0 - cfg.alpha;
    let pb: Vec<f64> = rows.iter().map(|r| r.p_basic).collect();
    let pe: Vec<f64> = rows.iter().map(|r| r.p_energy).collect();
    Ok(Table2Record {
        rho_star_basic: first_reaching(&cfg.rho_grid, &pb, target),
        rho_star_energy: first_reaching(&cfg.rho_grid, &pe, target),
        rows,
        threshold_basic: q_basic,
        threshold_energy: q_energy,
        trials: cfg.trials,
        seed: cfg.seed,
        runtime_secs: start.secs(),
    })
}
