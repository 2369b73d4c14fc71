//! The basic test and the energy test as decision procedures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantiles::chi2_quantile;
use crate::signals::window_basis;
use crate::solver::{solve_report, NuisanceSpec, SolverOptions, StopReason};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    AcceptH0,
    RejectH0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestKind {
    Basic,
    Energy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub threshold: f64,
    pub decision: Decision,
    pub test_kind: TestKind,
    /// Duality gap of the statistic (basic test only).
    pub solver_gap: Option<f64>,
    /// False when the solver bounds straddle the threshold.
    pub certified: bool,
}

fn decide(statistic: f64, threshold: f64) -> Decision {
    if statistic > threshold {
        Decision::RejectH0
    } else {
        Decision::AcceptH0
    }
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("threshold must be positive and finite, got {threshold}")))
    }
}

/// Reject `H_0` iff `Opt_Z(y) > threshold`, with default solver options.
pub fn basic_test(y: &[f64], z: &NuisanceSpec, threshold: f64) -> Result<TestOutcome> {
    basic_test_with(y, z, threshold, &SolverOptions::defaults(y.len()))
}

/// [`basic_test`] with explicit solver options. The solver stops as soon as
/// the decision is certified, so `statistic` is then only an upper bound
/// accurate enough to place the optimum on one side of the threshold.
pub fn basic_test_with(y: &[f64], z: &NuisanceSpec, threshold: f64, opts: &SolverOptions) -> Result<TestOutcome> {
    check_threshold(threshold)?;
    let opts = SolverOptions { decision_threshold: Some(threshold), ..*opts };
    let report = solve_report(y, z, &opts)?;
    let certified = report.value <= threshold || report.lower_bound > threshold;
    if report.stop == StopReason::IterationLimit && !certified {
        return Err(Error::NotConverged(Box::new(report)));
    }
    Ok(TestOutcome {
        statistic: report.value,
        threshold,
        decision: decide(report.value, threshold),
        test_kind: TestKind::Basic,
        solver_gap: Some(report.gap),
        certified,
    })
}

/// `min_{u∈Z} ‖y − u‖₂²` for `Z` the zero set or a subspace.
pub fn energy_statistic(y: &[f64], z: &NuisanceSpec) -> Result<f64> {
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let mut r = y.to_vec();
    match z {
        NuisanceSpec::Zero => {}
        NuisanceSpec::Subspace { w } => {
            if w.len() >= y.len() {
                return Ok(0.0);
            }
            for b in window_basis(w, y.len())? {
                let a: f64 = b.iter().zip(&r).map(|(p, q)| p * q).sum();
                r.iter_mut().zip(&b).for_each(|(v, bv)| *v -= a * bv);
            }
        }
        NuisanceSpec::EpsSet { .. } => return Err(Error::UnsupportedNuisance),
    }
    Ok(r.iter().map(|v| v * v).sum())
}

pub fn energy_test(y: &[f64], z: &NuisanceSpec, threshold: f64) -> Result<TestOutcome> {
    check_threshold(threshold)?;
    let statistic = energy_statistic(y, z)?;
    Ok(TestOutcome {
        statistic,
        threshold,
        decision: decide(statistic, threshold),
        test_kind: TestKind::Energy,
        solver_gap: None,
        certified: true,
    })
}

/// Degrees of freedom used for the energy-test χ² threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyDof {
    /// `N`, conservative for every nuisance set.
    #[default]
    Full,
    /// `N − d_n`, the exact null distribution of the projection residual.
    Residual,
}

pub fn energy_threshold(n: usize, z: &NuisanceSpec, alpha: f64, dof: EnergyDof) -> Result<f64> {
    let k = match dof {
        EnergyDof::Full => n,
        EnergyDof::Residual => n.saturating_sub(z.dim()),
    };
    chi2_quantile(k, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{random_signal, FrequencyCollection};

    #[test]
    fn strict_inequality() {
        assert_eq!(decide(1.0, 1.0), Decision::AcceptH0);
        assert_eq!(decide(1.0 + 1e-15, 1.0), Decision::RejectH0);
    }

    #[test]
    fn nuisance_only_is_accepted() {
        let (w, x) = random_signal(4, 128, 5);
        let out = basic_test(&x, &NuisanceSpec::Subspace { w: w.clone() }, 3.0).unwrap();
        assert_eq!(out.decision, Decision::AcceptH0);
        assert!(out.certified);
        assert!(out.statistic < 1e-6);
        let e = energy_test(&x, &NuisanceSpec::Subspace { w }, 1.0).unwrap();
        assert!(e.statistic < 1e-18 * 128.0 * 1e6);
    }

    #[test]
    fn energy_examples() {
        let out = energy_test(&[0.0; 8], &NuisanceSpec::Zero, 1.0).unwrap();
        assert_eq!(out.statistic, 0.0);
        assert_eq!(out.decision, Decision::AcceptH0);
        let eps = NuisanceSpec::EpsSet { w: FrequencyCollection::zeros(1), eps: 0.1 };
        assert!(matches!(energy_test(&[1.0; 8], &eps, 1.0), Err(Error::UnsupportedNuisance)));
        assert!(energy_threshold(100, &eps, 0.01, EnergyDof::Residual).unwrap()
            < energy_threshold(100, &eps, 0.01, EnergyDof::Full).unwrap());
    }

    #[test]
    fn deterministic_outcome() {
        let y: Vec<f64> = (0..64).map(|t| (t as f64 * 0.9).sin() * 2.0).collect();
        let z = NuisanceSpec::EpsSet { w: FrequencyCollection::from_pairs(&[0.2]).unwrap(), eps: 0.01 };
        assert_eq!(basic_test(&y, &z, 3.0).unwrap(), basic_test(&y, &z, 3.0).unwrap());
        assert!(basic_test(&y, &z, 0.0).is_err());
    }
}
