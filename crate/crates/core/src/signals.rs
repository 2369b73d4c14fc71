//! Frequency collections, characteristic polynomials and exponential-polynomial
//! sequences.
//!
//! A collection `w = {ω_1, …, ω_d}` symmetric mod 2π defines the real
//! polynomial `p_w(ζ) = ∏ (1 − e^{iω_ℓ} ζ)` and the space `S[w]` of sequences
//! annihilated by `p_w(Δ)`, where `Δ` is the unit delay.

use std::f64::consts::{PI, TAU};
use std::ops::Deref;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{domain, Substreams};
use crate::solver::{self, NuisanceSpec, SolverOptions};

/// Angular tolerance used for every equality-mod-2π decision.
pub const ANGLE_TOL: f64 = 1e-9;

fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Fold an angle to `[0, π]` (the "actual frequency" of a ±ω pair).
fn fold(omega: f64) -> f64 {
    let c = omega.rem_euclid(TAU);
    if c > PI {
        TAU - c
    } else {
        c
    }
}

/// A multiset of frequencies (radians/sample), symmetric mod 2π.
///
/// Entries are stored reduced to `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FrequencyCollection {
    freqs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for FrequencyCollection {
    type Error = Error;
    fn try_from(raw: Vec<f64>) -> Result<Self> {
        Self::new(&raw)
    }
}

impl From<FrequencyCollection> for Vec<f64> {
    fn from(w: FrequencyCollection) -> Self {
        w.freqs
    }
}

impl FrequencyCollection {
    /// Canonicalize `raw` and check the mod-2π symmetry.
    pub fn new(raw: &[f64]) -> Result<Self> {
        if let Some(i) = raw.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let freqs: Vec<f64> = raw.iter().map(|v| v.rem_euclid(TAU)).collect();
        for &a in &freqs {
            let same = freqs.iter().filter(|&&b| angular_distance(a, b) <= ANGLE_TOL).count();
            let mirrored = freqs.iter().filter(|&&b| angular_distance(-a, b) <= ANGLE_TOL).count();
            if same != mirrored {
                return Err(Error::SymmetryViolation(format!(
                    "{a} occurs {same} times but its mirror {} occurs {mirrored} times",
                    (-a).rem_euclid(TAU)
                )));
            }
        }
        Ok(Self { freqs })
    }

    pub fn empty() -> Self {
        Self { freqs: Vec::new() }
    }

    /// `d` copies of frequency zero: polynomials of degree `< d`.
    pub fn zeros(d: usize) -> Self {
        Self { freqs: vec![0.0; d] }
    }

    /// The collection `{±ω_1, …, ±ω_k}` built from actual frequencies.
    pub fn from_pairs(omegas: &[f64]) -> Result<Self> {
        let raw: Vec<f64> = omegas.iter().flat_map(|&w| [w, -w]).collect();
        Self::new(&raw)
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Multiset union; the result is symmetric whenever both inputs are.
    pub fn union(&self, other: &Self) -> Self {
        let mut freqs = self.freqs.clone();
        freqs.extend_from_slice(&other.freqs);
        Self { freqs }
    }

    /// Negated collection `{−ω_ℓ}`, the root set of a time-reversed sequence.
    /// Equal to `self` as a multiset.
    pub fn negated(&self) -> Self {
        Self { freqs: self.freqs.iter().map(|w| (-w).rem_euclid(TAU)).collect() }
    }

    /// Multiset equality up to [`ANGLE_TOL`].
    pub fn same_multiset(&self, other: &Self) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let mut used = vec![false; other.len()];
        self.freqs.iter().all(|&a| {
            match (0..other.len()).find(|&j| !used[j] && angular_distance(a, other.freqs[j]) <= ANGLE_TOL) {
                Some(j) => {
                    used[j] = true;
                    true
                }
                None => false,
            }
        })
    }

    /// Distinct actual frequencies in `[0, π]` with their multiplicities.
    ///
    /// For `ω ∉ {0, π}` the multiplicity counts copies of `ω` (equal to the
    /// copies of `−ω`), so the entry accounts for `2·m` elements of the
    /// collection.
    pub fn distinct(&self) -> Vec<(f64, usize)> {
        let mut folded: Vec<f64> = self.freqs.iter().map(|&w| fold(w)).collect();
        folded.sort_by(f64::total_cmp);
        let mut groups: Vec<(f64, usize)> = Vec::new();
        for f in folded {
            match groups.last_mut() {
                Some((g, c)) if (f - *g).abs() <= ANGLE_TOL => *c += 1,
                _ => groups.push((f, 1)),
            }
        }
        groups
            .into_iter()
            .map(|(f, c)| {
                if f <= ANGLE_TOL {
                    (0.0, c)
                } else if PI - f <= ANGLE_TOL {
                    (PI, c)
                } else {
                    (f, c / 2)
                }
            })
            .collect()
    }
}

/// Coefficients of `p_w(ζ)`, constant term first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharPoly {
    coeffs: Vec<f64>,
}

impl CharPoly {
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `Σ|c_k|`, an upper bound on the operator norm of `p(Δ)`.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }
}

/// Expand `∏ (1 − e^{iω} ζ)` in complex arithmetic and return the real part
/// together with the largest imaginary residue.
pub fn char_poly_with_residue(w: &FrequencyCollection) -> (CharPoly, f64) {
    let mut acc = vec![Complex64::new(1.0, 0.0)];
    for &omega in w.freqs() {
        let root = root_of(omega);
        let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
        for (k, &a) in acc.iter().enumerate() {
            next[k] += a;
            next[k + 1] -= root * a;
        }
        acc = next;
    }
    let residue = acc.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    let mut coeffs: Vec<f64> = acc.iter().map(|c| c.re).collect();
    coeffs[0] = 1.0;
    (CharPoly { coeffs }, residue)
}

/// `e^{iω}`, exact for ω ∈ {0, π}.
fn root_of(omega: f64) -> Complex64 {
    if angular_distance(omega, 0.0) <= ANGLE_TOL {
        Complex64::new(1.0, 0.0)
    } else if angular_distance(omega, PI) <= ANGLE_TOL {
        Complex64::new(-1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, omega)
    }
}

pub fn char_poly(w: &FrequencyCollection) -> CharPoly {
    char_poly_with_residue(w).0
}

/// `[p(Δ)x]_0^{N−1}` from `x_{−d}, …, x_{N−1}`.
pub fn apply_fd(p: &CharPoly, x_ext: &[f64], n: usize) -> Result<Vec<f64>> {
    let d = p.degree();
    if x_ext.len() != n + d {
        return Err(Error::LengthMismatch { expected: n + d, actual: x_ext.len() });
    }
    let c = p.coeffs();
    Ok((0..n)
        .map(|t| {
            let i = t + d;
            c.iter().enumerate().map(|(k, ck)| ck * x_ext[i - k]).sum()
        })
        .collect())
}

/// A finite real window `x_0, …, x_{N−1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SignalWindow {
    values: Vec<f64>,
}

impl TryFrom<Vec<f64>> for SignalWindow {
    type Error = Error;
    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<SignalWindow> for Vec<f64> {
    fn from(w: SignalWindow) -> Self {
        w.values
    }
}

impl SignalWindow {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { values })
    }

    pub fn zeros(n: usize) -> Self {
        Self { values: vec![0.0; n] }
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn inf_norm(&self) -> f64 {
        inf_norm(&self.values)
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl Deref for SignalWindow {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.values
    }
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// One frequency of an exponential-polynomial sequence:
/// `p(t) cos(ωt) + q(t) sin(ωt)` with polynomial coefficients in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulatedTerm {
    pub freq: f64,
    #[serde(default)]
    pub cos_poly: Vec<f64>,
    #[serde(default)]
    pub sin_poly: Vec<f64>,
}

/// A member of `S[w]` in closed form.
///
/// Terms are normalized to frequencies in `[0, π]`; frequencies closer than
/// [`ANGLE_TOL`] are merged and their envelopes added.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<ModulatedTerm>", into = "Vec<ModulatedTerm>")]
pub struct ModulatedSpec {
    terms: Vec<ModulatedTerm>,
}

impl From<Vec<ModulatedTerm>> for ModulatedSpec {
    fn from(terms: Vec<ModulatedTerm>) -> Self {
        Self::new(terms)
    }
}

impl From<ModulatedSpec> for Vec<ModulatedTerm> {
    fn from(s: ModulatedSpec) -> Self {
        s.terms
    }
}

fn add_poly(acc: &mut Vec<f64>, p: &[f64]) {
    if acc.len() < p.len() {
        acc.resize(p.len(), 0.0);
    }
    for (a, b) in acc.iter_mut().zip(p) {
        *a += b;
    }
}

fn trim(p: &mut Vec<f64>) {
    while p.last() == Some(&0.0) {
        p.pop();
    }
}

fn eval_poly(p: &[f64], t: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

impl ModulatedSpec {
    pub fn new(raw: Vec<ModulatedTerm>) -> Self {
        let mut terms: Vec<ModulatedTerm> = Vec::new();
        for term in raw {
            let c = term.freq.rem_euclid(TAU);
            let (freq, sin_sign) = if c > PI { (TAU - c, -1.0) } else { (c, 1.0) };
            let freq = if freq <= ANGLE_TOL {
                0.0
            } else if PI - freq <= ANGLE_TOL {
                PI
            } else {
                freq
            };
            let sin_poly: Vec<f64> = if freq == 0.0 || freq == PI {
                Vec::new()
            } else {
                term.sin_poly.iter().map(|v| sin_sign * v).collect()
            };
            match terms.iter_mut().find(|t| (t.freq - freq).abs() <= ANGLE_TOL) {
                Some(t) => {
                    add_poly(&mut t.cos_poly, &term.cos_poly);
                    add_poly(&mut t.sin_poly, &sin_poly);
                }
                None => terms.push(ModulatedTerm { freq, cos_poly: term.cos_poly.clone(), sin_poly }),
            }
        }
        for t in &mut terms {
            trim(&mut t.cos_poly);
            trim(&mut t.sin_poly);
        }
        terms.retain(|t| !t.cos_poly.is_empty() || !t.sin_poly.is_empty());
        terms.sort_by(|a, b| a.freq.total_cmp(&b.freq));
        Self { terms }
    }

    pub fn terms(&self) -> &[ModulatedTerm] {
        &self.terms
    }

    /// Envelope multiplicity of each term.
    fn multiplicity(term: &ModulatedTerm) -> usize {
        term.cos_poly.len().max(term.sin_poly.len())
    }

    /// The smallest collection `w` with `self ∈ S[w]`.
    pub fn collection(&self) -> FrequencyCollection {
        let mut freqs = Vec::new();
        for t in &self.terms {
            let m = Self::multiplicity(t);
            if t.freq == 0.0 || t.freq == PI {
                freqs.extend(std::iter::repeat_n(t.freq, m));
            } else {
                freqs.extend(std::iter::repeat_n(t.freq, m));
                freqs.extend(std::iter::repeat_n(TAU - t.freq, m));
            }
        }
        FrequencyCollection { freqs }
    }

    /// Whether every term's multiplicity is covered by `w`.
    pub fn fits(&self, w: &FrequencyCollection) -> bool {
        let avail = w.distinct();
        self.terms.iter().all(|t| {
            avail
                .iter()
                .any(|&(f, m)| (f - t.freq).abs() <= ANGLE_TOL && m >= Self::multiplicity(t))
        })
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|term| {
                let (s, c) = (term.freq * t).sin_cos();
                let mut v = eval_poly(&term.cos_poly, t) * c;
                if !term.sin_poly.is_empty() {
                    v += eval_poly(&term.sin_poly, t) * s;
                }
                v
            })
            .sum()
    }

    /// Values at `t = start, …, start + len − 1`.
    pub fn sample(&self, start: i64, len: usize) -> Vec<f64> {
        (0..len).map(|i| self.value_at((start + i as i64) as f64)).collect()
    }
}

/// The closed form evaluated on `t = 0, …, N−1`.
pub fn sample_signal(spec: &ModulatedSpec, n: usize) -> SignalWindow {
    SignalWindow { values: spec.sample(0, n) }
}

/// A random member of `S_d`: `⌊d/2⌋` frequencies `ω ~ U(0, π)` with standard
/// normal cosine and sine amplitudes, plus a constant term when `d` is odd.
pub fn random_spec<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ModulatedSpec {
    let uniform = Uniform::new(0.0, PI).expect("valid range");
    let mut terms = Vec::with_capacity(d / 2 + 1);
    for _ in 0..d / 2 {
        let freq = loop {
            let f: f64 = uniform.sample(rng);
            if f > 0.0 {
                break f;
            }
        };
        let a: f64 = StandardNormal.sample(rng);
        let b: f64 = StandardNormal.sample(rng);
        terms.push(ModulatedTerm { freq, cos_poly: vec![a], sin_poly: vec![b] });
    }
    if d % 2 == 1 {
        let a: f64 = StandardNormal.sample(rng);
        terms.push(ModulatedTerm { freq: 0.0, cos_poly: vec![a], sin_poly: Vec::new() });
    }
    ModulatedSpec::new(terms)
}

/// Deterministic random signal in `S_d` together with its collection.
pub fn random_signal(d: usize, n: usize, seed: u64) -> (FrequencyCollection, SignalWindow) {
    let mut rng = Substreams::new(seed, domain::SIGNAL).stream(0);
    let spec = random_spec(d, &mut rng);
    // The sampled collection always has exactly d entries unless two
    // frequencies coincide to within the merge tolerance.
    let w = spec.collection();
    (w, sample_signal(&spec, n))
}

/// Random collection in `Ω_d` with the same law as [`random_spec`].
pub fn random_collection<R: Rng + ?Sized>(d: usize, rng: &mut R) -> FrequencyCollection {
    let uniform = Uniform::new(0.0, PI).expect("valid range");
    let mut freqs = Vec::with_capacity(d);
    for _ in 0..d / 2 {
        let f: f64 = uniform.sample(rng);
        freqs.push(f);
        freqs.push(TAU - f);
    }
    if d % 2 == 1 {
        freqs.push(0.0);
    }
    FrequencyCollection { freqs }
}

/// Orthonormal basis (over the window `0..n`) of `S[w]` restricted to the
/// window, built from `x^j cos(ωt)`, `x^j sin(ωt)` in the centred variable
/// `x = (2t − (n−1)) / (n−1)`.
pub fn window_basis(w: &FrequencyCollection, n: usize) -> Result<Vec<Vec<f64>>> {
    let d = w.len();
    if d > n {
        return Err(Error::Dimension(format!("collection of size {d} exceeds window length {n}")));
    }
    let scale = if n > 1 { (n - 1) as f64 } else { 1.0 };
    let x: Vec<f64> = (0..n).map(|t| (2.0 * t as f64 - (n as f64 - 1.0)) / scale).collect();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(d);
    for (freq, m) in w.distinct() {
        for j in 0..m {
            let env: Vec<f64> = x.iter().map(|v| v.powi(j as i32)).collect();
            columns.push((0..n).map(|t| env[t] * (freq * t as f64).cos()).collect());
            if freq != 0.0 && freq != PI {
                columns.push((0..n).map(|t| env[t] * (freq * t as f64).sin()).collect());
            }
        }
    }
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(columns.len());
    for mut col in columns {
        let original = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        for _ in 0..2 {
            for q in &basis {
                let dot: f64 = q.iter().zip(&col).map(|(a, b)| a * b).sum();
                col.iter_mut().zip(q).for_each(|(c, qv)| *c -= dot * qv);
            }
        }
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 1e-12 * original) {
            return Err(Error::Dimension(
                "window basis is numerically rank deficient (frequencies too close for this N)".into(),
            ));
        }
        col.iter_mut().for_each(|v| *v /= norm);
        basis.push(col);
    }
    Ok(basis)
}

/// `min_{z ∈ Z} ‖x − z‖_∞` over the window.
pub fn inf_dist_to_nuisance(x: &[f64], z: &NuisanceSpec) -> Result<f64> {
    let opts = SolverOptions::defaults(x.len());
    Ok(solver::solve_uniform(x, z, &opts)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collection_examples() {
        let w = FrequencyCollection::new(&[0.7, -0.7]).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w.freqs()[0], 0.7);
        assert!((w.freqs()[1] - (TAU - 0.7)).abs() < 1e-15);

        let w = FrequencyCollection::new(&[PI, PI, PI, PI]).unwrap();
        assert_eq!(w.len(), 4);
        assert_eq!(w.distinct(), vec![(PI, 4)]);

        assert!(matches!(FrequencyCollection::new(&[0.3, 0.5]), Err(Error::SymmetryViolation(_))));
        assert!(matches!(FrequencyCollection::new(&[0.3]), Err(Error::SymmetryViolation(_))));
        assert!(FrequencyCollection::new(&[]).unwrap().is_empty());
        assert!(FrequencyCollection::new(&[-PI, PI, 3.0 * PI, TAU]).is_ok());
    }

    #[test]
    fn char_poly_examples() {
        assert_eq!(char_poly(&FrequencyCollection::empty()).coeffs(), &[1.0]);
        let p = char_poly(&FrequencyCollection::new(&[PI, PI]).unwrap());
        for (a, b) in p.coeffs().iter().zip([1.0, 2.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(char_poly(&FrequencyCollection::zeros(4)).coeffs(), &[1.0, -4.0, 6.0, -4.0, 1.0]);
        let (p, res) = char_poly_with_residue(&FrequencyCollection::from_pairs(&[0.4, 1.3, 2.9]).unwrap());
        assert!(res < 1e-12);
        assert_eq!(p.degree(), 6);
    }

    #[test]
    fn apply_fd_examples() {
        let n = 10;
        let p = char_poly(&FrequencyCollection::zeros(1));
        let r = apply_fd(&p, &vec![1.0; n + 1], n).unwrap();
        assert!(r.iter().all(|v| *v == 0.0));

        let p = char_poly(&FrequencyCollection::empty());
        let x: Vec<f64> = (0..n).map(|t| (t as f64).sin()).collect();
        assert_eq!(apply_fd(&p, &x, n).unwrap(), x);

        let p = char_poly(&FrequencyCollection::new(&[PI, PI]).unwrap());
        let x: Vec<f64> = (-2..n as i64).map(|t| if t.rem_euclid(2) == 0 { 1.0 } else { -1.0 }).collect();
        assert!(apply_fd(&p, &x, n).unwrap().iter().all(|v| v.abs() < 1e-12));

        assert!(matches!(apply_fd(&p, &x[1..], n), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn sample_signal_examples() {
        let spec = ModulatedSpec::new(vec![ModulatedTerm { freq: 0.0, cos_poly: vec![2.5], sin_poly: vec![] }]);
        assert!(sample_signal(&spec, 7).iter().all(|v| *v == 2.5));

        let spec = ModulatedSpec::new(vec![ModulatedTerm { freq: PI / 2.0, cos_poly: vec![1.0], sin_poly: vec![] }]);
        let x = sample_signal(&spec, 4);
        for (a, b) in x.iter().zip([1.0, 0.0, -1.0, 0.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn spec_normalization_merges_and_folds() {
        let spec = ModulatedSpec::new(vec![
            ModulatedTerm { freq: TAU - 0.5, cos_poly: vec![1.0], sin_poly: vec![2.0] },
            ModulatedTerm { freq: 0.5 + 1e-12, cos_poly: vec![0.0, 1.0], sin_poly: vec![] },
        ]);
        assert_eq!(spec.terms().len(), 1);
        assert_eq!(spec.terms()[0].cos_poly, vec![1.0, 1.0]);
        assert_eq!(spec.terms()[0].sin_poly, vec![-2.0]);
        let w = spec.collection();
        assert_eq!(w.len(), 4);
        assert!(spec.fits(&w));
        assert!(!spec.fits(&FrequencyCollection::from_pairs(&[0.5]).unwrap()));
    }

    #[test]
    fn random_signal_is_deterministic_and_annihilated() {
        let (w1, x1) = random_signal(4, 128, 11);
        let (w2, x2) = random_signal(4, 128, 11);
        assert_eq!(x1, x2);
        assert_eq!(w1, w2);
        let (_, x3) = random_signal(4, 128, 12);
        assert_ne!(x1, x3);

        let mut rng = Substreams::new(11, domain::SIGNAL).stream(0);
        let spec = random_spec(4, &mut rng);
        let p = char_poly(&w1);
        let ext = spec.sample(-(p.degree() as i64), 128 + p.degree());
        let r = apply_fd(&p, &ext, 128).unwrap();
        assert!(inf_norm(&r) <= 1e-8 * x1.inf_norm());
    }

    #[test]
    fn basis_is_orthonormal_and_annihilated() {
        let w = FrequencyCollection::new(&[0.0, 0.0, 1.1, TAU - 1.1, PI]).unwrap();
        let n = 40;
        let b = window_basis(&w, n).unwrap();
        assert_eq!(b.len(), 5);
        for i in 0..b.len() {
            for j in 0..b.len() {
                let dot: f64 = b[i].iter().zip(&b[j]).map(|(x, y)| x * y).sum();
                assert!((dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        let c = char_poly(&w);
        let d = c.degree();
        for col in &b {
            let r: f64 = (d..n)
                .map(|t| c.coeffs().iter().enumerate().map(|(k, ck)| ck * col[t - k]).sum::<f64>().abs())
                .fold(0.0, f64::max);
            assert!(r < 1e-12);
        }
        assert!(window_basis(&w, 3).is_err());
    }

    #[test]
    fn symmetry_check_uses_angular_tolerance() {
        assert!(FrequencyCollection::new(&[1.0, -1.0 + 5e-10]).is_ok());
        assert!(FrequencyCollection::new(&[1.0, -1.0 + 1e-6]).is_err());
    }
}
