//! The counterfactual master sequence: four per-setting collectives that are
//! each perfectly fine, and no single sequence of six-value configurations
//! that has all four as its marginal statistics.

use serde::Serialize;

use super::{
    correlation, joint_feasibility, lhv_enumerate, mean_product, sample_setting_collective,
    Constraint, InfeasibilityProof, OutcomeTriple, Setting, TripleState, NORM_EPSILON,
};
use crate::error::Result;

/// Seed used for setting `i` (0-based) under master seed `seed`.
pub fn setting_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(4).wrapping_add(i as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SettingAudit {
    pub setting: Setting,
    pub correlation: f64,
    /// `±1` when the correlation is `±1` within `1e-12`.
    pub certified_sign: Option<i8>,
    pub empirical: Option<EmpiricalSetting>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalSetting {
    pub n: u64,
    pub seed: u64,
    pub mean_product: f64,
    /// Fraction of draws whose product equals the certified sign.
    pub certified_fraction: Option<f64>,
    pub matches_certified: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonCombinabilityReport {
    pub n: u64,
    pub seed: u64,
    pub settings: Vec<SettingAudit>,
    pub certified_constraints: Vec<Constraint>,
    pub certificate: InfeasibilityProof,
    /// Same question answered by plain enumeration.
    pub lhv_satisfying_count: usize,
    /// At least one probability-one constraint exists to conjoin.
    pub certificate_triggered: bool,
    /// Triggered and infeasible.
    pub non_combinable: bool,
    /// Every sampled setting shows its certified sign in every draw.
    pub empirical_consistent: bool,
}

/// Samples the four canonical settings (skipped when `n = 0`), certifies
/// their probability-one signs and asks whether one distribution over
/// strategies could produce all of them.
pub fn gedanken_audit(state: &TripleState, n: u64, seed: u64) -> Result<NonCombinabilityReport> {
    let mut settings = Vec::new();
    let mut certified = Vec::new();
    for (i, s) in Setting::CANONICAL.iter().enumerate() {
        let corr = correlation(state, s)?;
        let certified_sign = if (corr - 1.0).abs() <= NORM_EPSILON {
            Some(1)
        } else if (corr + 1.0).abs() <= NORM_EPSILON {
            Some(-1)
        } else {
            None
        };
        if let Some(sign) = certified_sign {
            certified.push(s.constraint(sign)?);
        }
        let empirical = if n == 0 {
            None
        } else {
            let sub_seed = setting_seed(seed, i);
            let c = sample_setting_collective(state, s, n, sub_seed)?;
            let certified_fraction = certified_sign.map(|sign| {
                let hits = c
                    .labels()
                    .iter()
                    .filter(|l| OutcomeTriple::from_index(l.index()).product() == sign)
                    .count();
                hits as f64 / n as f64
            });
            Some(EmpiricalSetting {
                n,
                seed: sub_seed,
                mean_product: mean_product(&c),
                matches_certified: certified_fraction.map(|f| f == 1.0),
                certified_fraction,
            })
        };
        settings.push(SettingAudit {
            setting: *s,
            correlation: corr,
            certified_sign,
            empirical,
        });
    }
    let certificate = joint_feasibility(&certified);
    let lhv = lhv_enumerate(&certified);
    let triggered = !certified.is_empty();
    Ok(NonCombinabilityReport {
        n,
        seed,
        empirical_consistent: settings.iter().all(|s| {
            s.empirical
                .as_ref()
                .is_none_or(|e| e.matches_certified != Some(false))
        }),
        settings,
        certified_constraints: certified,
        non_combinable: triggered && !certificate.feasible,
        certificate_triggered: triggered,
        certificate,
        lhv_satisfying_count: lhv.satisfying_count,
    })
}
