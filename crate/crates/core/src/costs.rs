//! Objective and reward functions: per-agent discomfort, system inefficiency
//! (RMSE against a target, or variance of the total demand), the combined
//! per-candidate selection objective, and the shared reward.
//!
//! Everything here is a pure function; reward and combined cost share one
//! code path so `reward == -combined` holds exactly, not approximately.

use crate::domain::{Behavior, DomainError, GlobalPlan, Plan, Target};

/// How system-level mismatch is scored for a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InefficiencyMeasure {
    /// Root mean square error between target and global plan.
    Rmse,
    /// Population variance of the global plan entries; ignores the target.
    Variance,
}

impl InefficiencyMeasure {
    pub fn cost(&self, target: &Target, global: &GlobalPlan) -> Result<f64, DomainError> {
        match self {
            InefficiencyMeasure::Rmse => inefficiency_rmse(target, global),
            InefficiencyMeasure::Variance => inefficiency_variance(global),
        }
    }

    /// Same measure evaluated on a raw vector, avoiding a GlobalPlan clone in
    /// inner selection loops.
    pub(crate) fn cost_raw(&self, target: &[f64], global: &[f64]) -> f64 {
        match self {
            InefficiencyMeasure::Rmse => rmse_raw(target, global),
            InefficiencyMeasure::Variance => variance_raw(global),
        }
    }
}

/// Reward weighting and the normalization scales that make both cost terms
/// order-unity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardWeights {
    pub sigma1: f64,
    pub sigma2: f64,
    pub discomfort_scale: f64,
    pub inefficiency_scale: f64,
}

impl RewardWeights {
    pub fn new(
        sigma1: f64,
        sigma2: f64,
        discomfort_scale: f64,
        inefficiency_scale: f64,
    ) -> Result<Self, DomainError> {
        for (name, v) in [("sigma1", sigma1), ("sigma2", sigma2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(DomainError::InvalidConfig(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        if !(discomfort_scale > 0.0) || !(inefficiency_scale > 0.0) {
            return Err(DomainError::InvalidConfig(format!(
                "normalization scales must be positive, got {discomfort_scale} and {inefficiency_scale}"
            )));
        }
        Ok(RewardWeights {
            sigma1,
            sigma2,
            discomfort_scale,
            inefficiency_scale,
        })
    }

    /// Scales for one period: discomfort is normalized by the largest plan
    /// discomfort in play, inefficiency by the cost of selecting nothing.
    /// Degenerate zero scales fall back to 1.
    pub fn for_period(
        sigma1: f64,
        sigma2: f64,
        max_discomfort: f64,
        measure: InefficiencyMeasure,
        target: &Target,
    ) -> Result<Self, DomainError> {
        let empty = GlobalPlan::zero(target.len());
        let idle_cost = measure.cost(target, &empty)?;
        let discomfort_scale = if max_discomfort > 0.0 {
            max_discomfort
        } else {
            1.0
        };
        let inefficiency_scale = if idle_cost > 0.0 { idle_cost } else { 1.0 };
        RewardWeights::new(sigma1, sigma2, discomfort_scale, inefficiency_scale)
    }
}

/// Normalized per-period cost figures plus the raw metrics they came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostReport {
    /// Raw mean discomfort of the selected plans.
    pub mean_discomfort: f64,
    /// Raw inefficiency of the global plan.
    pub inefficiency: f64,
    /// sigma1 * normalized mean discomfort + sigma2 * normalized inefficiency.
    pub combined: f64,
    pub period: usize,
}

impl CostReport {
    /// Single computation path for metrics and reward: the shared reward for
    /// the period is exactly `-combined`.
    pub fn compute(
        selections: &[&Plan],
        target: &Target,
        global: &GlobalPlan,
        measure: InefficiencyMeasure,
        weights: &RewardWeights,
        period: usize,
    ) -> Result<Self, DomainError> {
        let mean_discomfort = mean_discomfort(selections)?;
        let inefficiency = measure.cost(target, global)?;
        let combined = weights.sigma1 * (mean_discomfort / weights.discomfort_scale)
            + weights.sigma2 * (inefficiency / weights.inefficiency_scale);
        Ok(CostReport {
            mean_discomfort,
            inefficiency,
            combined,
            period,
        })
    }

    pub fn reward(&self) -> f64 {
        -self.combined
    }
}

/// Average discomfort cost over the selected plans for one period.
pub fn mean_discomfort(selections: &[&Plan]) -> Result<f64, DomainError> {
    if selections.is_empty() {
        return Err(DomainError::Empty("selections"));
    }
    let total: f64 = selections.iter().map(|p| p.discomfort).sum();
    Ok(total / selections.len() as f64)
}

/// Root mean square error between target and global plan.
pub fn inefficiency_rmse(target: &Target, global: &GlobalPlan) -> Result<f64, DomainError> {
    if target.len() != global.len() {
        return Err(DomainError::DimensionMismatch {
            expected: target.len(),
            got: global.len(),
        });
    }
    Ok(rmse_raw(&target.values, &global.values))
}

fn rmse_raw(target: &[f64], global: &[f64]) -> f64 {
    debug_assert_eq!(target.len(), global.len());
    let sum_sq: f64 = target
        .iter()
        .zip(global)
        .map(|(t, g)| (t - g) * (t - g))
        .sum();
    (sum_sq / target.len() as f64).sqrt()
}

/// Population variance (divide by D) of the global plan entries.
pub fn inefficiency_variance(global: &GlobalPlan) -> Result<f64, DomainError> {
    if global.is_empty() {
        return Err(DomainError::Empty("global plan"));
    }
    Ok(variance_raw(&global.values))
}

fn variance_raw(global: &[f64]) -> f64 {
    let n = global.len() as f64;
    let mean = global.iter().sum::<f64>() / n;
    global.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Per-candidate selection objective: beta-weighted blend of the normalized
/// discomfort of `plan` and the normalized inefficiency of the global plan
/// that selecting it would produce.
pub fn combined_objective(
    plan: &Plan,
    candidate_global: &GlobalPlan,
    target: &Target,
    behavior: Behavior,
    measure: InefficiencyMeasure,
    weights: &RewardWeights,
) -> Result<f64, DomainError> {
    let beta = behavior.beta();
    let discomfort = plan.discomfort / weights.discomfort_scale;
    let inefficiency = measure.cost(target, candidate_global)? / weights.inefficiency_scale;
    let value = beta * discomfort + (1.0 - beta) * inefficiency;
    if !value.is_finite() {
        return Err(DomainError::NonFinite("combined objective"));
    }
    Ok(value)
}

/// Internal hot-loop variant over raw slices; same arithmetic as
/// [`combined_objective`].
pub(crate) fn combined_objective_raw(
    plan_discomfort: f64,
    candidate_global: &[f64],
    target: &[f64],
    beta: f64,
    measure: InefficiencyMeasure,
    weights: &RewardWeights,
) -> f64 {
    beta * (plan_discomfort / weights.discomfort_scale)
        + (1.0 - beta) * (measure.cost_raw(target, candidate_global) / weights.inefficiency_scale)
}

/// Shared reward delivered to every agent for the period: the negated
/// combined cost of the committed selections.
pub fn compute_reward(
    selections: &[&Plan],
    target: &Target,
    global: &GlobalPlan,
    measure: InefficiencyMeasure,
    weights: &RewardWeights,
) -> Result<f64, DomainError> {
    Ok(CostReport::compute(selections, target, global, measure, weights, target.period)?.reward())
}
