//! Detection thresholds: the analytic bound on the noise quantile of
//! `‖F_N ξ‖_∞`, Monte Carlo estimates of that quantile, and χ² quantiles.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::rng::{domain, standard_normal_vec, Substreams};
use crate::spectrum::spectral_inf_norm;

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Upper-tail probability of the standard normal.
pub fn normal_tail(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Acklam's rational approximation of the lower-tail normal quantile.
fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] =
        [-5.447609879822406e1, 1.615858368580409e2, -1.556989798598866e2, 6.680131188771972e1, -1.328068155288572e1];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [7.784695709041462e-3, 3.224671290700398e-1, 2.445134137142996, 3.754408661907416];
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// `x` with `P(N(0,1) > x) = α`.
pub fn erfinv_tail(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("tail probability must lie in (0, 1), got {alpha}")));
    }
    if alpha == 0.5 {
        return Ok(0.0);
    }
    // Work on the smaller tail for accuracy, then reflect.
    let (a, sign) = if alpha < 0.5 { (alpha, 1.0) } else { (1.0 - alpha, -1.0) };
    let mut x = -acklam(a);
    for _ in 0..3 {
        let pdf = normal_pdf(x);
        if pdf == 0.0 {
            break;
        }
        let f = normal_tail(x) - a;
        // Halley step on the tail function.
        let step = f / pdf;
        x += step / (1.0 + 0.5 * x * step);
    }
    Ok(sign * x)
}

/// Literal evaluation of the analytic bound `inf_s max[ErfInv(sα/k), √((N−j)/(2(1−s)α))]`
/// with `(k, j) = (4, 2)` for even `N` and `(2, 1)` for odd `N`.
pub fn q_bound(n: usize, alpha: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("N must be at least 2, got {n}")));
    }
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1/2), got {alpha}")));
    }
    let (k, j) = if n % 2 == 0 { (4.0, 2.0) } else { (2.0, 1.0) };
    let f = |s: f64| q_bound_objective(s, n as f64, alpha, k, j);
    // The first term decreases and the second increases in s, so the max is unimodal.
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-10 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    Ok(f(0.5 * (a + b)).min(fc).min(fd))
}

/// The max-expression minimized by [`q_bound`]; `+∞` at the endpoints.
pub fn q_bound_objective(s: f64, n: f64, alpha: f64, k: f64, j: f64) -> f64 {
    if !(s > 0.0 && s < 1.0) {
        return f64::INFINITY;
    }
    let first = erfinv_tail(s * alpha / k).unwrap_or(f64::INFINITY);
    let second = ((n - j) / (2.0 * (1.0 - s) * alpha)).sqrt();
    first.max(second)
}

/// Statistic `‖F_N ξ‖_∞` for the noise draw of trial `index`.
pub fn noise_statistic(streams: &Substreams, n: usize, index: u64) -> f64 {
    let mut rng = streams.stream(index);
    spectral_inf_norm(&standard_normal_vec(&mut rng, n))
}

/// Sample `‖F_N ξ‖_∞` for trials `0..trials`, in trial order.
pub fn noise_statistics(n: usize, trials: usize, seed: u64) -> Vec<f64> {
    let streams = Substreams::new(seed, domain::THRESHOLD).child(n as u64);
    crate::par::map_range(trials, |i| noise_statistic(&streams, n, i as u64))
}

/// Index (1-based, ascending) of the order statistic that upper-bounds the
/// `(1−α)`-quantile with probability at least `confidence`.
pub fn safe_order_index(trials: usize, alpha: f64, confidence: f64) -> usize {
    let bin = Binomial::new(alpha, trials as u64).expect("valid binomial");
    // Largest m with P(E ≥ m) ≥ confidence, E ~ Bin(trials, α) counting exceedances.
    let mut m = (trials as f64 * alpha).floor() as u64;
    while m > 1 && bin.sf(m - 1) < confidence {
        m -= 1;
    }
    trials - m.max(1) as usize + 1
}

/// Monte Carlo upper confidence bound for the `(1−α)`-quantile of `‖F_N ξ‖_∞`.
pub fn q_mc(n: usize, alpha: f64, trials: usize, seed: u64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if n == 0 {
        return Err(Error::Domain("N must be positive".into()));
    }
    let required = (10.0 / alpha).ceil() as usize;
    if trials < required {
        return Err(Error::InsufficientTrials { required, actual: trials });
    }
    let mut stats = noise_statistics(n, trials, seed);
    stats.sort_by(f64::total_cmp);
    Ok(stats[safe_order_index(trials, alpha, 0.99) - 1])
}

/// `p` with `P(χ²_dof > p) = α`.
pub fn chi2_quantile(dof: usize, alpha: f64) -> Result<f64> {
    if dof == 0 {
        return Err(Error::Domain("degrees of freedom must be positive".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let k = dof as f64 / 2.0;
    let tail = |x: f64| gamma_ur(k, x / 2.0);
    let cdf = |x: f64| gamma_lr(k, x / 2.0);
    let pdf = |x: f64| ((k - 1.0) * (x / 2.0).ln() - x / 2.0 - ln_gamma(k)).exp() / 2.0;

    // Wilson–Hilferty start.
    let z = erfinv_tail(alpha)?;
    let nf = dof as f64;
    let h = 2.0 / (9.0 * nf);
    let mut x = (nf * (1.0 - h + z * h.sqrt()).powi(3)).max(1e-8);

    // Bracket, then safeguarded Newton.
    let (mut lo, mut hi) = (0.0f64, x.max(1.0));
    while tail(hi) > alpha {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        // Newton on whichever tail is smaller for relative precision.
        let f = if alpha < 0.5 { tail(x) - alpha } else { (1.0 - alpha) - cdf(x) };
        if f > 0.0 {
            lo = lo.max(x);
        } else {
            hi = hi.min(x);
        }
        let slope = pdf(x);
        let mut next = if slope > 0.0 && slope.is_finite() { x + f / slope } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-14 * x.max(1e-300) {
            x = next;
            break;
        }
        x = next;
    }
    Ok(x)
}

/// How a detection threshold is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMethod {
    FormulaBound,
    MonteCarlo,
    UserSupplied,
}

impl fmt::Display for ThresholdMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThresholdMethod::FormulaBound => "formula",
            ThresholdMethod::MonteCarlo => "mc",
            ThresholdMethod::UserSupplied => "user",
        })
    }
}

impl FromStr for ThresholdMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "formula" | "formula_bound" => Ok(ThresholdMethod::FormulaBound),
            "mc" | "monte_carlo" => Ok(ThresholdMethod::MonteCarlo),
            "user" | "user_supplied" => Ok(ThresholdMethod::UserSupplied),
            other => Err(Error::Config(format!("unknown threshold method '{other}'"))),
        }
    }
}

/// Key of a cached threshold: `"N:alpha:method:trials:seed"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdKey {
    pub n: usize,
    pub alpha: f64,
    pub method: ThresholdMethod,
    pub trials: usize,
    pub seed: u64,
}

impl fmt::Display for ThresholdKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}:{}:{}", self.n, self.alpha, self.method, self.trials, self.seed)
    }
}

/// Persistent map of thresholds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ThresholdTable {
    pub entries: BTreeMap<String, f64>,
}

impl ThresholdTable {
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Ok(Self::default());
        }
        let table: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if let Some((k, v)) = table.entries.iter().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Config(format!("cached threshold {k} = {v} is not positive")));
        }
        Ok(table)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn get(&self, key: &ThresholdKey) -> Option<f64> {
        self.entries.get(&key.to_string()).copied()
    }

    pub fn insert(&mut self, key: &ThresholdKey, value: f64) {
        self.entries.insert(key.to_string(), value);
    }

    /// Cached formula or Monte Carlo threshold, computing on a miss.
    pub fn basic_threshold(&mut self, key: &ThresholdKey) -> Result<f64> {
        if let Some(v) = self.get(key) {
            return Ok(v);
        }
        let v = match key.method {
            ThresholdMethod::FormulaBound => q_bound(key.n, key.alpha)?,
            ThresholdMethod::MonteCarlo => q_mc(key.n, key.alpha, key.trials, key.seed)?,
            ThresholdMethod::UserSupplied => {
                return Err(Error::Config(format!("no user-supplied threshold for {key}")));
            }
        };
        self.insert(key, v);
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfinv_examples() {
        assert_eq!(erfinv_tail(0.5).unwrap(), 0.0);
        assert!((erfinv_tail(0.01).unwrap() - 2.326_347_874_040_841).abs() < 1e-10);
        for i in -3..=3 {
            let x = i as f64;
            assert!((erfinv_tail(normal_tail(x)).unwrap() - x).abs() < 1e-9);
        }
        assert!(erfinv_tail(0.0).is_err());
        assert!(erfinv_tail(1.0).is_err());
        assert!((erfinv_tail(1e-300).unwrap() - 37.0471).abs() < 1e-3);
    }

    #[test]
    fn chi2_examples() {
        assert!((chi2_quantile(2, 0.01).unwrap() - (-2.0 * 0.01f64.ln())).abs() < 1e-9);
        for dof in [1usize, 10, 256, 4096] {
            let p = chi2_quantile(dof, 0.01).unwrap();
            assert!((gamma_ur(dof as f64 / 2.0, p / 2.0) - 0.01).abs() < 1e-8);
        }
        assert!((chi2_quantile(256, 0.01).unwrap() - 311.6).abs() < 0.2);
        assert!(chi2_quantile(10, 0.9).unwrap() < chi2_quantile(10, 0.1).unwrap());
    }

    #[test]
    fn q_bound_is_the_literal_formula() {
        let v = q_bound(128, 0.01).unwrap();
        // Dense-grid evaluation of the same expression.
        let grid = (1..1_000_000)
            .map(|i| q_bound_objective(i as f64 / 1e6, 128.0, 0.01, 4.0, 2.0))
            .fold(f64::INFINITY, f64::min);
        assert!(v <= grid + 1e-6, "{v} vs {grid}");
        assert!(v >= grid - 1e-3);
        assert!(q_bound(129, 0.01).unwrap() > 0.0);
        assert!(q_bound(128, 0.6).is_err());
    }

    #[test]
    fn q_bound_monotone_in_alpha() {
        for n in [64usize, 256, 1024, 4096] {
            assert!(q_bound(n, 0.001).unwrap() >= q_bound(n, 0.01).unwrap());
            assert!(q_bound(n, 0.01).unwrap() >= q_bound(n, 0.1).unwrap());
        }
    }

    #[test]
    fn order_index_margin() {
        let k = safe_order_index(100_000, 0.01, 0.99);
        // About 2.33 binomial standard deviations beyond the plain quantile.
        assert!(k > 99_000 && k < 99_100, "{k}");
    }

    #[test]
    fn q_mc_determinism_and_validation() {
        let a = q_mc(64, 0.05, 200, 9).unwrap();
        let b = q_mc(64, 0.05, 200, 9).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert!(matches!(q_mc(64, 0.01, 999, 9), Err(Error::InsufficientTrials { required: 1000, actual: 999 })));
    }

    #[test]
    fn cache_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.json");
        let mut t = ThresholdTable::default();
        let key = ThresholdKey { n: 512, alpha: 0.01, method: ThresholdMethod::MonteCarlo, trials: 1000, seed: 3 };
        assert_eq!(key.to_string(), "512:0.01:mc:1000:3");
        t.insert(&key, 0.1 + 0.2);
        t.save(&path).unwrap();
        let back = ThresholdTable::load(&path).unwrap();
        assert_eq!(back.get(&key).unwrap().to_bits(), (0.1f64 + 0.2).to_bits());
    }
}
