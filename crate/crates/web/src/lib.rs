//! Browser bindings for the demo page. Every entry point returns a JSON
//! string so the page needs no generated glue beyond `wasm-bindgen`.

use harmonic_detect::detector::{energy_statistic, energy_threshold, EnergyDof};
use harmonic_detect::harness::config::{uniform_grid, ExperimentConfig};
use harmonic_detect::harness::table1::random_eps_nuisance;
use harmonic_detect::harness::{bad_signal, table2_sweep};
use harmonic_detect::quantiles::q_mc;
use harmonic_detect::rng::{domain, standard_normal_vec, Substreams};
use harmonic_detect::signals::{random_collection, random_spec};
use harmonic_detect::solver::{solve_report, NuisanceSpec, SolverOptions};
use harmonic_detect::spectrum::dft;
use harmonic_detect::{Error, Result};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const ALPHA: f64 = 0.01;
// Enough for a stable threshold in the browser; the CLI defaults to far more.
const THRESHOLD_TRIALS: usize = 4000;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn to_js(r: Result<Value>) -> std::result::Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

/// Observe `ρ·s + u + ξ` with a random 4-frequency signal `s` (`‖s‖_∞ = 1`)
/// and a nuisance `u` from the ε-set of four random frequencies, then run
/// both tests against that nuisance set (the energy test against its
/// subspace core).
#[wasm_bindgen]
pub fn detect_demo(n: usize, rho: f64, eps: f64, seed: u32) -> std::result::Result<String, JsError> {
    to_js(detect_json(n, rho, eps, seed))
}

fn detect_json(n: usize, rho: f64, eps: f64, seed: u32) -> Result<Value> {
    if !(8..=2048).contains(&n) || !(rho >= 0.0) || !(eps >= 0.0) {
        return Err(Error::Config("need 8 ≤ N ≤ 2048, ρ ≥ 0 and ε ≥ 0".into()));
    }
    let seed = u64::from(seed);
    let mut rng = Substreams::new(seed, domain::SIGNAL).stream(0);
    let s = loop {
        let s = random_spec(4, &mut rng).sample(0, n);
        if inf_norm(&s) > 0.0 {
            break s;
        }
    };
    let sup = inf_norm(&s);
    let w = random_collection(4, &mut rng);
    let u = random_eps_nuisance(&w, n, eps, &mut Substreams::new(seed, domain::NUISANCE).stream(0))?;
    let xi = standard_normal_vec(&mut Substreams::new(seed, domain::NOISE).stream(0), n);
    let y: Vec<f64> = (0..n).map(|t| rho * s[t] / sup + u[t] + xi[t]).collect();

    let z = if eps > 0.0 { NuisanceSpec::EpsSet { w: w.clone(), eps } } else { NuisanceSpec::Subspace { w: w.clone() } };
    let q = q_mc(n, ALPHA, THRESHOLD_TRIALS, seed)?;
    let opts = SolverOptions { max_iter: 1000 * n, decision_threshold: Some(q), ..SolverOptions::defaults(n) };
    let rep = solve_report(&y, &z, &opts)?;
    let residual: Vec<f64> = y.iter().zip(rep.minimizer.iter()).map(|(a, b)| a - b).collect();
    // The energy test only knows exact subspaces; it sees the core of the ε-set.
    let core = NuisanceSpec::Subspace { w: w.clone() };
    let e_stat = energy_statistic(&y, &core)?;
    let e_q = energy_threshold(n, &core, ALPHA, EnergyDof::Full)?;

    Ok(json!({
        "freqs": w.freqs(),
        "y": y,
        "spectrum": dft(&y).moduli(),
        "residual_spectrum": dft(&residual).moduli(),
        "basic": {
            "statistic": rep.value,
            "lower_bound": rep.lower_bound,
            "threshold": q,
            "reject": rep.lower_bound > q,
            "certified": rep.lower_bound > q || rep.value <= q,
            "iterations": rep.iterations,
        },
        "energy": { "statistic": e_stat, "threshold": e_q, "reject": e_stat > e_q },
    }))
}

/// Rejection rates of both tests against the zero nuisance on `ρ ∈ [0, 3]`.
#[wasm_bindgen]
pub fn power_curve(n: usize, trials: usize, seed: u32) -> std::result::Result<String, JsError> {
    to_js(power_json(n, trials, seed))
}

fn power_json(n: usize, trials: usize, seed: u32) -> Result<Value> {
    let seed = u64::from(seed);
    let cfg = ExperimentConfig {
        rho_grid: uniform_grid(0.1, 3.0),
        threshold_trials: THRESHOLD_TRIALS,
        ..ExperimentConfig::table2(n, trials, seed)
    };
    let rec = table2_sweep(&cfg, None)?;
    Ok(json!({
        "rows": rec.rows,
        "rho_star_basic": rec.rho_star_basic,
        "rho_star_energy": rec.rho_star_energy,
        "threshold_basic": rec.threshold_basic,
        "threshold_energy": rec.threshold_energy,
    }))
}

/// The polynomial window that hides best from the energy test.
#[wasm_bindgen]
pub fn bad_signal_demo(n: usize, degree: usize) -> std::result::Result<String, JsError> {
    to_js(bad_signal_json(n, degree))
}

fn bad_signal_json(n: usize, degree: usize) -> Result<Value> {
    let z = bad_signal(n, degree)?;
    Ok(json!({
        "values": &*z,
        "l2": z.l2_norm(),
        "inf": z.inf_norm(),
        "spectral_inf": dft(&z).inf_norm(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(r: Result<Value>) -> Value {
        r.expect("demo call")
    }

    #[test]
    fn strong_signal_is_flagged() {
        let v = parse(detect_json(128, 4.0, 0.01, 3));
        assert_eq!(v["spectrum"].as_array().unwrap().len(), 128);
        assert_eq!(v["basic"]["reject"], true);
        assert_eq!(v["basic"]["certified"], true);
    }

    #[test]
    fn power_curve_starts_near_size() {
        let v = parse(power_json(64, 200, 1));
        let rows = v["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 31);
        assert!(rows[0]["p_basic"].as_f64().unwrap() < 0.05);
    }

    #[test]
    fn bad_signal_has_small_energy() {
        let v = parse(bad_signal_json(256, 3));
        assert!((v["inf"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert!(v["l2"].as_f64().unwrap() < 16.0);
    }
}
