//! Executable checks of the polynomial and decomposition constructions
//! that underpin the basic test's guarantees.

use rand::Rng;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{domain, standard_normal_vec, Substreams};
use crate::signals::{apply_fd, char_poly, inf_norm, random_collection, random_spec, FrequencyCollection, SignalWindow};
use crate::spectrum::{autoconvolution, spectral_inf_norm, spectral_l1_norm};

fn theta_for(d: usize) -> f64 {
    2f64.max(0.5 * (2.0 * d as f64).ln())
}

/// Smallest admissible `m` for the annihilating-polynomial construction:
/// `d·⌈5d·max(2, ln(2d)/2)⌉`.
pub fn lemma_m_min(d: usize) -> usize {
    d * (5.0 * d as f64 * theta_for(d)).ceil() as usize
}

/// `3e·d^{3/2}·√(ln(2d)/m)`.
pub fn lemma_bound(d: usize, m: usize) -> f64 {
    let d = d as f64;
    3.0 * std::f64::consts::E * d.powf(1.5) * ((2.0 * d).ln() / m as f64).sqrt()
}

/// Polynomials with `1 − q = p_w · r`, `q(0) = 0`, `r(0) = 1` and small `|q|₂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaWitness {
    /// Coefficients of `q`, constant term first (`q[0] = 0`).
    pub q: Vec<f64>,
    /// Coefficients of `r`, constant term first (`r[0] = 1`).
    pub r: Vec<f64>,
    pub m: usize,
    pub d: usize,
    pub bound: f64,
    pub q_norm: f64,
    /// Largest imaginary part met while expanding `q` and `r`.
    pub imag_residue: f64,
    /// `max_k |(1 − q − p_w r)_k| / max(1, max_k |(1 − q)_k|)`.
    pub divisibility_residual: f64,
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Cofactor `Σ_{j<n} [(1−ε)λζ]^j (1 − j/n)`.
pub fn cofactor(lambda: Complex64, eps: f64, n: usize) -> Vec<Complex64> {
    let base = lambda * (1.0 - eps);
    let mut pw = Complex64::new(1.0, 0.0);
    (0..n)
        .map(|j| {
            let c = pw * (1.0 - j as f64 / n as f64);
            pw *= base;
            c
        })
        .collect()
}

/// `p_n(ζ; λ, ε) = (1 − λζ) · cofactor`.
pub fn damped_factor(lambda: Complex64, eps: f64, n: usize) -> Vec<Complex64> {
    poly_mul(&[Complex64::new(1.0, 0.0), -lambda], &cofactor(lambda, eps, n))
}

pub fn eval_complex(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

pub fn lemma_construct(w: &FrequencyCollection, m: usize) -> Result<LemmaWitness> {
    let d = w.len();
    if d == 0 {
        return Err(Error::Domain("the construction needs at least one frequency".into()));
    }
    let min = lemma_m_min(d);
    if m < min {
        return Err(Error::MTooSmall { m, min, d });
    }
    let n = m / d;
    let eps = theta_for(d) / n as f64;
    let mut prod = vec![Complex64::new(1.0, 0.0)];
    let mut r = vec![Complex64::new(1.0, 0.0)];
    for &omega in w.freqs() {
        let lambda = Complex64::from_polar(1.0, -omega);
        prod = poly_mul(&prod, &damped_factor(lambda, eps, n));
        r = poly_mul(&r, &cofactor(lambda, eps, n));
    }
    let imag_residue = prod.iter().chain(&r).map(|c| c.im.abs()).fold(0.0, f64::max);
    let one_minus_q: Vec<f64> = prod.iter().map(|c| c.re).collect();
    let mut q: Vec<f64> = one_minus_q.iter().map(|c| -c).collect();
    q[0] += 1.0;
    let r: Vec<f64> = r.iter().map(|c| c.re).collect();

    let p = char_poly(w);
    let mut pr = vec![0.0; p.coeffs().len() + r.len() - 1];
    for (i, a) in p.coeffs().iter().enumerate() {
        for (j, b) in r.iter().enumerate() {
            pr[i + j] += a * b;
        }
    }
    let scale = one_minus_q.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let len = pr.len().max(one_minus_q.len());
    let divisibility_residual = (0..len)
        .map(|k| (one_minus_q.get(k).copied().unwrap_or(0.0) - pr.get(k).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
        / scale;
    let q_norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(LemmaWitness { q, r, m, d, bound: lemma_bound(d, m), q_norm, imag_residue, divisibility_residual })
}

/// `‖F_N s‖_∞ / (√N ‖s‖_∞)`.
pub fn mainprop_ratio(s: &[f64]) -> Result<f64> {
    let sup = inf_norm(s);
    if sup == 0.0 {
        return Err(Error::ZeroSignal);
    }
    Ok(spectral_inf_norm(s) / ((s.len() as f64).sqrt() * sup))
}

/// `(‖F_N h‖₁, √N‖g‖₂²)` for the autoconvolution `h` of `g` zero-padded to `N`.
pub fn autoconvolution_identity(g: &[f64], n: usize) -> Result<(f64, f64)> {
    if g.is_empty() || 2 * (g.len() - 1) + 1 > n {
        return Err(Error::Dimension(format!("support {} too long for window {n}", g.len())));
    }
    let mut h = autoconvolution(g);
    h.resize(n, 0.0);
    let energy: f64 = g.iter().map(|v| v * v).sum();
    Ok((spectral_l1_norm(&h), (n as f64).sqrt() * energy))
}

/// The causal solution `χ` of `p_w(Δ)χ = r` on `t ≥ 0` (zero before the
/// window): `r` convolved with `e^{iωt}, t ≥ 0`, for every `ω ∈ w`.
///
/// Intermediate sequences are complex; the result must be real up to
/// `1e−9·max(1, ‖χ‖_∞)`.
pub fn residual_response(r: &[f64], w: &FrequencyCollection) -> Result<Vec<f64>> {
    let mut chi: Vec<Complex64> = r.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    for &omega in w.freqs() {
        let root = Complex64::from_polar(1.0, omega);
        for t in 1..chi.len() {
            let prev = chi[t - 1];
            chi[t] += root * prev;
        }
    }
    let chi_sup = chi.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let imag = chi.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
    if imag > 1e-9 * chi_sup.max(1.0) {
        return Err(Error::Domain(format!("remainder has imaginary residue {imag}")));
    }
    Ok(chi.iter().map(|c| c.re).collect())
}

/// `w = s + z` with `s ∈ S[w]` on the window and `‖z‖_∞ ≤ N^d ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsDecomposition {
    pub s: SignalWindow,
    pub z: SignalWindow,
    /// `s` extended to `t = −d, …, N−1` so that `p_w(Δ)s ≡ 0`.
    pub s_ext: Vec<f64>,
}

/// Split an ε-set member (given with its `d` pre-window values) into an
/// exact member of `S[w]` and a small remainder, by convolving the
/// causally truncated residual with the geometric sequences `e^{iωt}, t ≥ 0`.
pub fn eps_decompose(w_ext: &[f64], w: &FrequencyCollection, eps: f64) -> Result<EpsDecomposition> {
    let d = w.len();
    if w_ext.len() <= d {
        return Err(Error::LengthMismatch { expected: d + 1, actual: w_ext.len() });
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!("epsilon must be finite and nonnegative, got {eps}")));
    }
    let n = w_ext.len() - d;
    let p = char_poly(w);
    let resid = apply_fd(&p, w_ext, n)?;
    let worst = inf_norm(&resid);
    let scale = inf_norm(w_ext) * p.l1_norm();
    if worst > eps + 1e-12 * scale {
        return Err(Error::NotFeasible { residual: worst, eps });
    }

    let z = residual_response(&resid, w)?;
    let s: Vec<f64> = w_ext[d..].iter().zip(&z).map(|(a, b)| a - b).collect();

    // Extend s backwards through p_w(Δ)s = 0 (the leading coefficient c_d has modulus 1).
    let c = p.coeffs();
    let mut s_ext = vec![0.0; n + d];
    s_ext[d..].copy_from_slice(&s);
    for t in (0..d).rev() {
        // Row t (window index): Σ_k c_k s_{t−k} = 0 determines s_{t−d}.
        let i = t + d;
        let partial: f64 = (0..d).map(|k| c[k] * s_ext[i - k]).sum();
        s_ext[i - d] = -partial / c[d];
    }
    Ok(EpsDecomposition { s: SignalWindow::new(s)?, z: SignalWindow::new(z)?, s_ext })
}

/// Summary of one verification suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    /// Worst values of the monitored residuals, by name.
    pub worst: Vec<(String, f64)>,
    /// Recorded empirical constants (not asserted).
    pub recorded: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

/// Annihilating-polynomial construction for `d = 1..=6`, `samples` random
/// collections each, `m ∈ {m(d), 2m(d), 4m(d)}`.
pub fn suite_annihilator(seed: u64, samples: usize) -> SuiteResult {
    let streams = Substreams::new(seed, domain::VERIFY).child(1);
    let mut worst_ratio = 0.0f64;
    let mut worst_div = 0.0f64;
    let mut worst_imag = 0.0f64;
    let mut worst_shrink = 0.0f64;
    let mut cases = 0;
    let mut ok = true;
    for d in 1..=6usize {
        let mut rng = streams.stream(d as u64);
        for _ in 0..samples {
            let w = random_collection(d, &mut rng);
            let m0 = lemma_m_min(d);
            let mut norms = Vec::new();
            for m in [m0, 2 * m0, 4 * m0] {
                match lemma_construct(&w, m) {
                    Ok(wit) => {
                        cases += 1;
                        worst_ratio = worst_ratio.max(wit.q_norm / wit.bound);
                        worst_div = worst_div.max(wit.divisibility_residual);
                        worst_imag = worst_imag.max(wit.imag_residue);
                        ok &= wit.q_norm <= wit.bound && wit.divisibility_residual <= 1e-8;
                        norms.push(wit.q_norm);
                    }
                    Err(_) => ok = false,
                }
            }
            if norms.len() == 3 {
                worst_shrink = worst_shrink.max(norms[2] / norms[0]);
            }
        }
    }
    ok &= worst_shrink <= 0.6;
    SuiteResult {
        name: "annihilating_polynomial".into(),
        passed: ok,
        cases,
        worst: vec![
            ("q_norm_over_bound".into(), worst_ratio),
            ("divisibility_residual".into(), worst_div),
            ("imag_residue".into(), worst_imag),
            ("q_norm_4m_over_m".into(), worst_shrink),
        ],
        recorded: Vec::new(),
    }
}

/// Autoconvolution identity at `N ∈ {9, 16, 33}`.
pub fn suite_autoconvolution(seed: u64, samples: usize) -> SuiteResult {
    let streams = Substreams::new(seed, domain::VERIFY).child(2);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for (k, n) in [9usize, 16, 33].into_iter().enumerate() {
        let mut rng = streams.stream(k as u64);
        let m = (n - 1) / 2;
        for _ in 0..samples {
            let g = standard_normal_vec(&mut rng, m + 1);
            let (lhs, rhs) = autoconvolution_identity(&g, n).expect("support fits");
            worst = worst.max((lhs - rhs).abs() / rhs);
            cases += 1;
        }
    }
    SuiteResult {
        name: "autoconvolution".into(),
        passed: worst <= 1e-8,
        cases,
        worst: vec![("relative_error".into(), worst)],
        recorded: Vec::new(),
    }
}

/// A random member of the ε-set: random pre-window values followed by the
/// recursion driven by a residual uniform on `[−ε, ε]`.
pub fn random_eps_member<R: Rng + ?Sized>(w: &FrequencyCollection, n: usize, eps: f64, rng: &mut R) -> Vec<f64> {
    let c = char_poly(w);
    let c = c.coeffs();
    let d = w.len();
    let mut x = standard_normal_vec(rng, d);
    x.resize(n + d, 0.0);
    for i in d..n + d {
        let r = rng.random_range(-eps..=eps);
        x[i] = r - (1..=d).map(|k| c[k] * x[i - k]).sum::<f64>();
    }
    x
}

/// ε-decomposition on random feasible inputs, `d ≤ 3`, `N ≤ 64`.
pub fn suite_eps_decomposition(seed: u64, samples: usize) -> SuiteResult {
    let streams = Substreams::new(seed, domain::VERIFY).child(4);
    let mut worst_rec = 0.0f64;
    let mut worst_bound = 0.0f64;
    let mut worst_annih = 0.0f64;
    let mut ok = true;
    for i in 0..samples {
        let mut rng = streams.stream(i as u64);
        let d = rng.random_range(1..=3usize);
        let n = rng.random_range(8..=64usize);
        let eps = rng.random_range(0.001..1.0);
        let w = random_collection(d, &mut rng);
        let x = random_eps_member(&w, n, eps, &mut rng);
        match eps_decompose(&x, &w, eps) {
            Ok(dec) => {
                let scale = inf_norm(&x).max(1.0);
                let rec = x[d..]
                    .iter()
                    .zip(dec.s.iter().zip(dec.z.iter()))
                    .map(|(a, (s, z))| (a - s - z).abs())
                    .fold(0.0, f64::max)
                    / scale;
                let bound = dec.z.inf_norm() / ((n as f64).powi(d as i32) * eps);
                let annih = apply_fd(&char_poly(&w), &dec.s_ext, n).map(|r| inf_norm(&r)).unwrap_or(f64::INFINITY)
                    / dec.s.inf_norm().max(1.0);
                worst_rec = worst_rec.max(rec);
                worst_bound = worst_bound.max(bound);
                worst_annih = worst_annih.max(annih);
                ok &= rec <= 1e-8 && bound <= 1.0 && annih <= 1e-8;
            }
            Err(_) => ok = false,
        }
    }
    SuiteResult {
        name: "eps_decomposition".into(),
        passed: ok,
        cases: samples,
        worst: vec![
            ("reconstruction_error".into(), worst_rec),
            ("remainder_over_bound".into(), worst_bound),
            ("annihilation_residual".into(), worst_annih),
        ],
        recorded: Vec::new(),
    }
}

/// Unconditional floor `ratio ≥ 1/N` on arbitrary windows, plus recorded
/// minima of the ratio over random members of `S_d` at `N = 256`.
pub fn suite_concentration(seed: u64, arbitrary: usize, structured: usize) -> SuiteResult {
    let streams = Substreams::new(seed, domain::VERIFY).child(5);
    let mut worst_floor = f64::INFINITY;
    for i in 0..arbitrary {
        let mut rng = streams.stream(i as u64);
        let n = rng.random_range(2..=512usize);
        let s = standard_normal_vec(&mut rng, n);
        let ratio = mainprop_ratio(&s).expect("nonzero window");
        worst_floor = worst_floor.min(ratio * n as f64);
    }
    let structured_streams = streams.child(1);
    let mut recorded = Vec::new();
    let mut ok = worst_floor >= 1.0;
    for d in 1..=4usize {
        let mins = crate::par::map_range(structured, |i| {
            let mut rng = structured_streams.child(d as u64).stream(i as u64);
            let x = random_spec(d, &mut rng).sample(0, 256);
            mainprop_ratio(&x).unwrap_or(f64::INFINITY)
        });
        let min = mins.into_iter().fold(f64::INFINITY, f64::min);
        ok &= min > 0.0 && min.is_finite();
        recorded.push((format!("min_ratio_d{d}_n256"), min));
    }
    SuiteResult {
        name: "spectral_concentration".into(),
        passed: ok,
        cases: arbitrary + 4 * structured,
        worst: vec![("min_ratio_times_n".into(), worst_floor)],
        recorded,
    }
}

/// Every suite at its documented size.
pub fn run_all(seed: u64) -> VerifyReport {
    let suites = vec![suite_annihilator(seed, 20), suite_autoconvolution(seed, 100), suite_eps_decomposition(seed, 100), suite_concentration(seed, 1000, 10_000)];
    let passed = suites.iter().all(|s| s.passed);
    VerifyReport { seed, suites, passed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    #[test]
    fn m_min_examples() {
        assert_eq!(lemma_m_min(1), 10);
        assert_eq!(lemma_m_min(4), 160);
        let th = 2f64.max(16f64.ln() / 2.0);
        assert_eq!(lemma_m_min(8), 8 * (40.0 * th).ceil() as usize);
    }

    #[test]
    fn factor_roots() {
        for omega in [0.0, 0.4, PI, 2.0] {
            let lambda = Complex64::from_polar(1.0, -omega);
            let p = damped_factor(lambda, 0.1, 20);
            assert!((eval_complex(&p, Complex64::new(0.0, 0.0)) - 1.0).norm() < 1e-10);
            assert!(eval_complex(&p, 1.0 / lambda).norm() < 1e-10);
        }
    }

    #[test]
    fn witness_examples() {
        let wit = lemma_construct(&FrequencyCollection::zeros(1), 10).unwrap();
        assert!(wit.q_norm <= 3.0 * E * 2f64.ln().sqrt() / 10f64.sqrt());
        assert_eq!(wit.q[0], 0.0);
        assert!((wit.r[0] - 1.0).abs() < 1e-15);
        assert!(wit.r.len() - 1 <= wit.m - wit.d);

        let w = FrequencyCollection::new(&[PI; 4]).unwrap();
        let wit = lemma_construct(&w, 160).unwrap();
        assert!(wit.imag_residue <= 1e-10);
        assert!(wit.divisibility_residual <= 1e-8);
        assert!(matches!(lemma_construct(&w, 159), Err(Error::MTooSmall { min: 160, .. })));
    }

    #[test]
    fn ratio_examples() {
        assert!((mainprop_ratio(&[1.0; 32]).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(mainprop_ratio(&[0.0; 4]), Err(Error::ZeroSignal)));
    }

    #[test]
    fn decomposition_of_first_difference_ramp() {
        // w_t = tε has constant residual ε; the chain gives z_t = (t+1)ε, s ≡ −ε.
        let eps = 0.25;
        let n = 10;
        let x: Vec<f64> = (-1..n as i64).map(|t| t as f64 * eps).collect();
        let dec = eps_decompose(&x, &FrequencyCollection::zeros(1), eps).unwrap();
        for t in 0..n {
            assert!((dec.z[t] - (t + 1) as f64 * eps).abs() < 1e-12);
            assert!((dec.s[t] + eps).abs() < 1e-12);
        }
        assert!((dec.z.inf_norm() - n as f64 * eps).abs() < 1e-12);
    }

    #[test]
    fn decomposition_of_exact_member() {
        let w = FrequencyCollection::from_pairs(&[0.9]).unwrap();
        let x: Vec<f64> = (-2..20).map(|t| (0.9 * t as f64).cos()).collect();
        let dec = eps_decompose(&x, &w, 0.0).unwrap();
        assert!(dec.z.inf_norm() < 1e-12);
        assert!(matches!(eps_decompose(&[0.0, 1.0, 5.0], &FrequencyCollection::zeros(1), 0.5), Err(Error::NotFeasible { .. })));
    }

    #[test]
    fn small_suites_pass() {
        assert!(suite_annihilator(1, 2).passed);
        assert!(suite_autoconvolution(1, 5).passed);
        assert!(suite_eps_decomposition(1, 20).passed);
        assert!(suite_concentration(1, 50, 50).passed);
    }
}
