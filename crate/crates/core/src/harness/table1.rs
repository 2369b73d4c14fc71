//! Resolution search against an ε-set nuisance.
//!
//! Per experiment: draw a signal shift `s̄ ∈ S[w]` with `‖s̄‖_∞ = 1`, a
//! nuisance collection `w̄` and a nuisance `u` in its ε-set; find the
//! (nearly) smallest `λ` for which the basic test rejects on every one of a
//! fixed set of noise draws around `x_λ = λs̄ + u`; report the uniform
//! distance of `x_λ` to the nuisance set and the signal-to-noise ratio.

use serde::{Deserialize, Serialize};

use crate::detector::{basic_test_with, Decision};
use crate::error::{Error, Result};
use crate::par;
use crate::quantiles::ThresholdTable;
use crate::rng::{domain, standard_normal_vec, Substreams};
use crate::signals::{inf_norm, random_collection, random_spec, ModulatedSpec, ModulatedTerm};
use crate::solver::{solve_uniform_report, NuisanceSpec, SolverOptions};
use crate::verify::residual_response;

use super::basic_threshold;
use super::config::{ExperimentConfig, Problem};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Record {
    pub experiment: usize,
    /// `min_{u∈Z} ‖x_λ − u‖_∞`.
    pub resolution: f64,
    /// `‖x_λ − u_x‖₂/√N` for the uniform-norm-closest nuisance `u_x`.
    pub snr: f64,
    pub lambda: f64,
    /// Duality gap of the resolution value.
    pub resolution_gap: f64,
    /// Basic-test decisions taken from an uncertified statistic.
    pub uncertified: usize,
    pub threshold: f64,
    pub runtime_secs: f64,
}

/// Drawn ingredients of one experiment.
#[derive(Debug, Clone)]
pub struct Table1Instance {
    pub shift: Vec<f64>,
    pub nuisance: Vec<f64>,
    pub z: NuisanceSpec,
    pub noise: Vec<Vec<f64>>,
}

/// A nuisance in the ε-set of `w̄`: a subspace member with standard normal
/// amplitudes plus the causal response to a residual uniform on `[−ε, ε]`.
pub fn random_eps_nuisance<R: Rng + ?Sized>(
    w_bar: &crate::signals::FrequencyCollection,
    n: usize,
    eps: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let terms = w_bar
        .distinct()
        .into_iter()
        .map(|(freq, mult)| {
            let mut draw = || -> Vec<f64> { (0..mult).map(|_| StandardNormal.sample(&mut *rng)).collect() };
            let cos_poly = draw();
            let sin_poly = if freq == 0.0 || freq == std::f64::consts::PI { Vec::new() } else { draw() };
            ModulatedTerm { freq, cos_poly, sin_poly }
        })
        .collect::<Vec<_>>();
    let mut u = ModulatedSpec::new(terms).sample(0, n);
    if eps > 0.0 {
        let r: Vec<f64> = (0..n).map(|_| rng.random_range(-eps..=eps)).collect();
        let chi = residual_response(&r, w_bar)?;
        u.iter_mut().zip(&chi).for_each(|(a, b)| *a += b);
    }
    Ok(u)
}

pub fn draw_instance(cfg: &ExperimentConfig, experiment: usize) -> Result<Table1Instance> {
    let n = cfg.n;
    let mut sig_rng = Substreams::new(cfg.seed, domain::SIGNAL).child(n as u64).child(1).stream(experiment as u64);
    let shift = loop {
        let s = random_spec(cfg.d_s, &mut sig_rng).sample(0, n);
        let sup = inf_norm(&s);
        if sup > 0.0 {
            break s.iter().map(|v| v / sup).collect::<Vec<f64>>();
        }
    };
    let mut nu_rng = Substreams::new(cfg.seed, domain::NUISANCE).child(n as u64).stream(experiment as u64);
    let w_bar = random_collection(cfg.d_n, &mut nu_rng);
    let nuisance = random_eps_nuisance(&w_bar, n, cfg.eps_n, &mut nu_rng)?;
    let z = if cfg.eps_n > 0.0 {
        NuisanceSpec::EpsSet { w: w_bar, eps: cfg.eps_n }
    } else {
        NuisanceSpec::Subspace { w: w_bar }
    };
    let noise_streams = Substreams::new(cfg.seed, domain::NOISE).child(n as u64).child(experiment as u64);
    let noise = (0..cfg.bisection.draws)
        .map(|j| standard_normal_vec(&mut noise_streams.stream(j as u64), n))
        .collect();
    Ok(Table1Instance { shift, nuisance, z, noise })
}

/// `λs̄ + u`.
pub fn signal_at(inst: &Table1Instance, lambda: f64) -> Vec<f64> {
    inst.shift.iter().zip(&inst.nuisance).map(|(s, u)| lambda * s + u).collect()
}

/// Whether the basic test rejects on every noise draw (stops at the first acceptance).
fn rejects_all(inst: &Table1Instance, lambda: f64, threshold: f64, uncertified: &mut usize) -> Result<bool> {
    let x = signal_at(inst, lambda);
    let opts = SolverOptions::defaults(x.len());
    // Straddling decisions get a second, longer run before falling back on
    // the upper bound.
    let patient = SolverOptions { max_iter: 20 * opts.max_iter, ..opts };
    for xi in &inst.noise {
        let y: Vec<f64> = x.iter().zip(xi).map(|(a, b)| a + b).collect();
        let outcome = match basic_test_with(&y, &inst.z, threshold, &opts) {
            Err(Error::NotConverged(_)) => basic_test_with(&y, &inst.z, threshold, &patient),
            other => other,
        };
        let reject = match outcome {
            Ok(out) => out.decision == Decision::RejectH0,
            Err(Error::NotConverged(report)) => {
                *uncertified += 1;
                report.value > threshold
            }
            Err(e) => return Err(e),
        };
        if !reject {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Bracket by doubling from `start`, then bisect, keeping the upper endpoint.
fn search_lambda(cfg: &ExperimentConfig, inst: &Table1Instance, q: f64, uncertified: &mut usize) -> Result<f64> {
    let b = cfg.bisection;
    let mut lo = 0.0;
    let mut hi = b.start;
    while !rejects_all(inst, hi, q, uncertified)? {
        lo = hi;
        hi *= 2.0;
        if hi > b.cap {
            return Err(Error::BisectionFailed { lo, hi });
        }
    }
    for _ in 0..b.steps {
        let mid = 0.5 * (lo + hi);
        if rejects_all(inst, mid, q, uncertified)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn run_experiment(cfg: &ExperimentConfig, experiment: usize, q: f64) -> Result<Table1Record> {
    let start = super::Stopwatch::start();
    let inst = draw_instance(cfg, experiment)?;
    let mut uncertified = 0;
    let lambda = search_lambda(cfg, &inst, q, &mut uncertified)?;
    let x = signal_at(&inst, lambda);
    let n = x.len();
    let opts = SolverOptions { max_iter: 200 * n, ..SolverOptions::defaults(n) };
    let rep = solve_uniform_report(&x, &inst.z, &opts)?;
    let snr = x.iter().zip(rep.minimizer.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() / (n as f64).sqrt();
    Ok(Table1Record {
        experiment,
        resolution: rep.value,
        snr,
        lambda,
        resolution_gap: rep.gap,
        uncertified,
        threshold: q,
        runtime_secs: start.secs(),
    })
}

/// Run `cfg.trials` experiments (problem `N1`).
pub fn table1_experiment(cfg: &ExperimentConfig, cache: Option<&mut ThresholdTable>) -> Result<Vec<Table1Record>> {
    cfg.validate()?;
    if cfg.problem != Problem::N1 {
        return Err(Error::Config("the resolution search runs problem N1".into()));
    }
    if cfg.d_s == 0 {
        return Err(Error::Config("the signal shift needs d_s ≥ 1".into()));
    }
    let q = basic_threshold(cfg, cache)?;
    par::with_threads(cfg.threads, || par::map_range(cfg.trials, |e| run_experiment(cfg, e, q)))
        .into_iter()
        .collect()
}

/// Mean resolution and mean signal-to-noise ratio.
pub fn summarize(records: &[Table1Record]) -> (f64, f64) {
    let k = records.len().max(1) as f64;
    (records.iter().map(|r| r.resolution).sum::<f64>() / k, records.iter().map(|r| r.snr).sum::<f64>() / k)
}
