//! Reference solutions by linear programming.
//!
//! The spectral objective `max_τ |[F(y−z)]_τ|` is approximated from below by
//! replacing each disc with a circumscribed regular polygon of `SIDES` sides,
//! so the LP value `v_lp` satisfies `v_lp ≤ v ≤ v_lp / cos(π/SIDES)`.
//! The uniform-norm objective is linear and solved exactly.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use harmonic_detect::solver::NuisanceSpec;
use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rustfft::num_complex::Complex64;

pub const SIDES: usize = 720;

/// Relative slack of the polygonal relaxation.
pub fn polygon_slack() -> f64 {
    1.0 / (PI / SIDES as f64).cos() - 1.0
}

/// `c_k` of `∏(1 − e^{iω}ζ)`, expanded independently of the library.
pub fn stencil(freqs: &[f64]) -> Vec<f64> {
    let mut acc = vec![Complex64::new(1.0, 0.0)];
    for &w in freqs {
        let r = Complex64::from_polar(1.0, w);
        let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
        for (k, a) in acc.iter().enumerate() {
            next[k] += a;
            next[k + 1] -= r * a;
        }
        acc = next;
    }
    acc.iter().map(|c| c.re).collect()
}

/// Decision variables for `z`, with the nuisance constraints attached.
fn nuisance_vars(lp: &mut Problem, n: usize, z: &NuisanceSpec) -> Vec<microlp::Variable> {
    let (freqs, eps) = match z {
        NuisanceSpec::Zero => return Vec::new(),
        NuisanceSpec::Subspace { w } => (w.freqs().to_vec(), 0.0),
        NuisanceSpec::EpsSet { w, eps } => (w.freqs().to_vec(), *eps),
    };
    let vars: Vec<_> = (0..n).map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
    let c = stencil(&freqs);
    let d = c.len() - 1;
    for i in d..n {
        let row: Vec<_> = c.iter().enumerate().map(|(k, &ck)| (vars[i - k], ck)).collect();
        if eps == 0.0 {
            lp.add_constraint(row.as_slice(), ComparisonOp::Eq, 0.0);
        } else {
            lp.add_constraint(row.as_slice(), ComparisonOp::Le, eps);
            lp.add_constraint(row.as_slice(), ComparisonOp::Ge, -eps);
        }
    }
    vars
}

/// Polygonal LP value of `min_{z∈Z} max_τ |[F_N(y − z)]_τ|`.
pub fn spectral_lp(y: &[f64], z: &NuisanceSpec) -> f64 {
    let n = y.len();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    let zv = nuisance_vars(&mut lp, n, z);
    let scale = 1.0 / (n as f64).sqrt();
    // Real signals have conjugate-symmetric spectra: bins 0..=N/2 suffice.
    for tau in 0..=n / 2 {
        let kernel: Vec<Complex64> =
            (0..n).map(|s| Complex64::from_polar(scale, TAU * ((tau * s) % n) as f64 / n as f64)).collect();
        let fy: Complex64 = kernel.iter().zip(y).map(|(k, v)| k * v).sum();
        for j in 0..SIDES {
            let rot = Complex64::from_polar(1.0, -TAU * j as f64 / SIDES as f64);
            // Re(rot · F(y − z)) ≤ t  ⇔  t + Σ Re(rot·k_s) z_s ≥ Re(rot·Fy)
            let mut row = vec![(t, 1.0)];
            row.extend(zv.iter().zip(&kernel).map(|(&v, k)| (v, (rot * k).re)));
            lp.add_constraint(row.as_slice(), ComparisonOp::Ge, (rot * fy).re);
        }
    }
    lp.solve().expect("LP solve").into_solution().ok().expect("LP solution").objective()
}

/// Exact LP value of `min_{z∈Z} ‖x − z‖_∞`.
pub fn uniform_lp(x: &[f64], z: &NuisanceSpec) -> f64 {
    let n = x.len();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    let zv = nuisance_vars(&mut lp, n, z);
    for s in 0..n {
        let mut row = vec![(t, 1.0)];
        if let Some(&v) = zv.get(s) {
            row.push((v, 1.0));
        }
        lp.add_constraint(row.as_slice(), ComparisonOp::Ge, x[s]);
        let mut row = vec![(t, 1.0)];
        if let Some(&v) = zv.get(s) {
            row.push((v, -1.0));
        }
        lp.add_constraint(row.as_slice(), ComparisonOp::Ge, -x[s]);
    }
    lp.solve().expect("LP solve").into_solution().ok().expect("LP solution").objective()
}

/// Random oracle instances cycling through `N ∈ {8, 12, 16}` and the three
/// nuisance kinds. Observations mix a nuisance-like component with noise.
pub fn oracle_instances(count: usize, seed: u64) -> Vec<(Vec<f64>, NuisanceSpec)> {
    use harmonic_detect::signals::{random_collection, random_spec};
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, StandardNormal};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = [8, 12, 16][i % 3];
            let d = rng.random_range(1..=4usize);
            let w = random_collection(d, &mut rng);
            let z = match (i / 3) % 3 {
                0 => NuisanceSpec::Zero,
                1 => NuisanceSpec::Subspace { w },
                _ => NuisanceSpec::EpsSet { w, eps: rng.random_range(0.02..0.5) },
            };
            let gain: f64 = rng.random_range(0.0..3.0);
            let base = random_spec(d, &mut rng).sample(0, n);
            let y = base
                .iter()
                .map(|b| {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    gain * b + e
                })
                .collect();
            (y, z)
        })
        .collect()
}
