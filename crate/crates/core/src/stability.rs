//! Stability of the uniform equilibrium from the signs of `f'(r)`, `γ` and
//! the Laplacian spectral abscissa `ρ`, plus a direct spectral oracle.
//!
//! The Jacobian spectrum is `{f'(r) − γλ_i}` and every Laplacian eigenvalue
//! has `Re λ ≥ 0` with `λ = 0` always present. The convention throughout is
//! the usual one: asymptotically stable iff every Jacobian eigenvalue has
//! negative real part.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{eigenvalues, spectral_abscissa};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Stable,
    Unstable,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    /// `f'(r) < 0`, `γ ≥ 0`.
    DefaultLoadBalancing,
    /// `f'(r) < 0`, `γ < 0`, `|f'(r)| > |γ|ρ`.
    NegativeGammaStable,
    /// `f'(r) < 0`, `γ < 0`, `|f'(r)| < |γ|ρ`.
    NegativeGammaUnstable,
    /// `f'(r) < 0`, `γ < 0`, `|f'(r)| = |γ|ρ` up to relative tolerance.
    NegativeGammaBoundary,
    /// `f'(r) = 0`, `γ < 0`.
    ZeroSelfNegativeGamma,
    /// `f'(r) = 0`, `γ ≥ 0`; linearization is inconclusive.
    ZeroSelfNonnegativeGamma,
    /// `f'(r) > 0`.
    PositiveSelf,
}

impl Scenario {
    pub fn outcome(self) -> Outcome {
        match self {
            Scenario::DefaultLoadBalancing | Scenario::NegativeGammaStable => Outcome::Stable,
            Scenario::NegativeGammaUnstable | Scenario::ZeroSelfNegativeGamma | Scenario::PositiveSelf => {
                Outcome::Unstable
            }
            Scenario::NegativeGammaBoundary | Scenario::ZeroSelfNonnegativeGamma => Outcome::Indeterminate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub fprime_r: f64,
    pub gamma: f64,
    pub rho: f64,
    /// `|f'(r)|`, present when compared against `|γ|ρ`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub self_rate: Option<f64>,
    /// `|γ|ρ`, present when compared against `|f'(r)|`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling_rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub outcome: Outcome,
    pub scenario: Scenario,
    pub evidence: Evidence,
}

/// Classifies the equilibrium `r·1` given `f'(r)`, `γ = g'(0)` and the
/// Laplacian spectral abscissa `ρ ≥ 0`.
///
/// `f'(r)` is compared against zero exactly. At `|f'(r)| = |γ|ρ` (relative
/// tolerance [`tol::BOUNDARY_REL`]) the linearization has an eigenvalue on
/// the imaginary axis and the verdict is `Indeterminate`.
pub fn classify(fprime_r: f64, gamma: f64, rho: f64) -> Result<StabilityVerdict> {
    if !fprime_r.is_finite() || !gamma.is_finite() || !rho.is_finite() {
        return Err(Error::Data(format!(
            "non-finite classifier input (f'(r) = {fprime_r}, γ = {gamma}, ρ = {rho})"
        )));
    }
    if rho < 0.0 {
        return Err(Error::Domain(format!(
            "Laplacian spectral abscissa must be non-negative, got {rho}"
        )));
    }
    let mut evidence = Evidence {
        fprime_r,
        gamma,
        rho,
        self_rate: None,
        coupling_rate: None,
    };
    let scenario = if fprime_r > 0.0 {
        Scenario::PositiveSelf
    } else if fprime_r == 0.0 {
        if gamma < 0.0 {
            Scenario::ZeroSelfNegativeGamma
        } else {
            Scenario::ZeroSelfNonnegativeGamma
        }
    } else if gamma >= 0.0 {
        Scenario::DefaultLoadBalancing
    } else {
        let self_rate = fprime_r.abs();
        let coupling_rate = gamma.abs() * rho;
        evidence.self_rate = Some(self_rate);
        evidence.coupling_rate = Some(coupling_rate);
        if (self_rate - coupling_rate).abs() <= tol::BOUNDARY_REL * self_rate.max(coupling_rate) {
            Scenario::NegativeGammaBoundary
        } else if self_rate > coupling_rate {
            Scenario::NegativeGammaStable
        } else {
            Scenario::NegativeGammaUnstable
        }
    };
    Ok(StabilityVerdict {
        outcome: scenario.outcome(),
        scenario,
        evidence,
    })
}

/// Spectral oracle: `max Re(eig(J)) < −1e−9`.
pub fn verify_by_spectrum(jacobian: &DMatrix<f64>) -> Result<bool> {
    let spectrum = eigenvalues(jacobian)?;
    Ok(spectral_abscissa(&spectrum)? < -tol::CONTAINMENT)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let v = classify(-1.0, 0.5, 3.0).unwrap();
        assert_eq!(
            (v.outcome, v.scenario),
            (Outcome::Stable, Scenario::DefaultLoadBalancing)
        );

        let v = classify(-1.0, -0.5, 3.0).unwrap();
        assert_eq!(
            (v.outcome, v.scenario),
            (Outcome::Unstable, Scenario::NegativeGammaUnstable)
        );
        assert_eq!(v.evidence.self_rate, Some(1.0));
        assert_eq!(v.evidence.coupling_rate, Some(1.5));

        for rho in [0.0, 1.0, 17.5] {
            let v = classify(0.0, 1.0, rho).unwrap();
            assert_eq!(v.outcome, Outcome::Indeterminate);
            assert_eq!(v.scenario, Scenario::ZeroSelfNonnegativeGamma);
        }
    }

    #[test]
    fn remaining_scenarios() {
        assert_eq!(
            classify(-1.0, -0.2, 3.0).unwrap().scenario,
            Scenario::NegativeGammaStable
        );
        assert_eq!(
            classify(0.0, -0.2, 3.0).unwrap().scenario,
            Scenario::ZeroSelfNegativeGamma
        );
        assert_eq!(classify(0.0, -0.2, 3.0).unwrap().outcome, Outcome::Unstable);
        assert_eq!(classify(0.3, 5.0, 3.0).unwrap().scenario, Scenario::PositiveSelf);
        assert_eq!(
            classify(-1.0, 0.0, 0.0).unwrap().scenario,
            Scenario::DefaultLoadBalancing
        );
        // Negative γ on an edgeless network: ρ = 0 leaves f'(r) in charge.
        assert_eq!(classify(-1.0, -4.0, 0.0).unwrap().outcome, Outcome::Stable);
    }

    #[test]
    fn boundary_is_indeterminate() {
        let v = classify(-1.0, -1.0 / 3.0, 3.0).unwrap();
        assert_eq!(v.scenario, Scenario::NegativeGammaBoundary);
        assert_eq!(v.outcome, Outcome::Indeterminate);
        let v = classify(-1.0, -1.0 / 3.0 * (1.0 + 1e-6), 3.0).unwrap();
        assert_eq!(v.outcome, Outcome::Unstable);
    }

    #[test]
    fn errors() {
        assert!(matches!(classify(-1.0, 1.0, -0.1), Err(Error::Domain(_))));
        assert!(matches!(classify(f64::NAN, 1.0, 1.0), Err(Error::Data(_))));
        assert!(matches!(classify(-1.0, f64::INFINITY, 1.0), Err(Error::Data(_))));
    }

    #[test]
    fn oracle_examples() {
        let d = |v: &[f64]| DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(v));
        assert!(verify_by_spectrum(&d(&[-1.0, -2.0])).unwrap());
        assert!(!verify_by_spectrum(&d(&[-1.0, 0.1])).unwrap());
        assert!(!verify_by_spectrum(&d(&[-1.0, -1e-12])).unwrap());
    }

    #[test]
    fn verdict_json_carries_evidence() {
        let v = classify(-1.0, -0.5, 3.0).unwrap();
        let json = serde_json::to_value(v).unwrap();
        assert_eq!(json["outcome"], "Unstable");
        assert_eq!(json["scenario"], "NegativeGammaUnstable");
        assert_eq!(json["evidence"]["coupling_rate"], 1.5);
        let back: StabilityVerdict = serde_json::from_value(json).unwrap();
        assert_eq!(back, v);
    }
}
