//! Core value types: plans, plan sets, targets, global plans, behaviors and
//! the experiment configuration.
//!
//! All plan values and costs are `f64`; aggregation sums in fixed agent-id
//! order so repeated runs are bit-identical. Every type here is an immutable
//! value object after construction and safe to share across threads.

use std::fmt::Write as _;
use std::ops::Range;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DomainError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("discomfort must be non-negative, got {0}")]
    NegativeDiscomfort(f64),
    #[error("behavior must lie in [0, 1], got {0}")]
    BehaviorOutOfRange(f64),
    #[error("group count {groups} exceeds plan count {plans}")]
    TooManyGroups { groups: usize, plans: usize },
    #[error("invalid plan line {line}: {reason}")]
    InvalidPlanLine { line: usize, reason: String },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for DomainError {
    fn from(e: std::io::Error) -> Self {
        DomainError::Io(e.to_string())
    }
}

/// One candidate course of action: a vector of D scheduled values plus the
/// individual discomfort cost of executing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub values: Vec<f64>,
    pub discomfort: f64,
}

impl Plan {
    pub fn new(values: Vec<f64>, discomfort: f64) -> Result<Self, DomainError> {
        if values.is_empty() {
            return Err(DomainError::Empty("plan values"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DomainError::NonFinite("plan values"));
        }
        if !discomfort.is_finite() {
            return Err(DomainError::NonFinite("discomfort"));
        }
        if discomfort < 0.0 {
            return Err(DomainError::NegativeDiscomfort(discomfort));
        }
        Ok(Plan { values, discomfort })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// An agent's candidate plans, sorted ascending by discomfort, partitioned
/// into contiguous groups for the plan-constraint strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanSet {
    pub agent_id: usize,
    plans: Vec<Plan>,
    group_boundaries: Vec<Range<usize>>,
}

impl PlanSet {
    /// Sorts `plans` ascending by discomfort (stable, so equal costs keep
    /// their given order) and splits them into `groups` contiguous quantile
    /// groups; when the count does not divide evenly the earlier groups take
    /// the remainder.
    pub fn new(agent_id: usize, mut plans: Vec<Plan>, groups: usize) -> Result<Self, DomainError> {
        if plans.is_empty() {
            return Err(DomainError::Empty("plans"));
        }
        let dim = plans[0].len();
        for p in &plans {
            if p.len() != dim {
                return Err(DomainError::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
        }
        if groups == 0 || groups > plans.len() {
            return Err(DomainError::TooManyGroups {
                groups,
                plans: plans.len(),
            });
        }
        plans.sort_by(|a, b| a.discomfort.total_cmp(&b.discomfort));
        let group_boundaries = quantile_boundaries(plans.len(), groups);
        Ok(PlanSet {
            agent_id,
            plans,
            group_boundaries,
        })
    }

    pub fn plans(&self) -> &[Plan] {
        &self.plans
    }

    pub fn plan(&self, index: usize) -> &Plan {
        &self.plans[index]
    }

    pub fn len(&self) -> usize {
        self.plans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plans.is_empty()
    }

    pub fn plan_dim(&self) -> usize {
        self.plans[0].len()
    }

    pub fn group_count(&self) -> usize {
        self.group_boundaries.len()
    }

    pub fn group_boundaries(&self) -> &[Range<usize>] {
        &self.group_boundaries
    }

    /// Largest discomfort in the set; the per-agent normalization scale.
    pub fn max_discomfort(&self) -> f64 {
        self.plans
            .iter()
            .map(|p| p.discomfort)
            .fold(0.0_f64, f64::max)
    }

    /// Rebuilds the set keeping only the plans at `indices`, regrouped into
    /// `groups` groups. Used by the train/eval split.
    pub fn subset(&self, indices: &[usize], groups: usize) -> Result<Self, DomainError> {
        let plans: Vec<Plan> = indices.iter().map(|&i| self.plans[i].clone()).collect();
        PlanSet::new(self.agent_id, plans, groups)
    }
}

/// Splits `count` sorted items into `groups` contiguous ranges; the first
/// `count % groups` ranges get one extra item.
fn quantile_boundaries(count: usize, groups: usize) -> Vec<Range<usize>> {
    let base = count / groups;
    let extra = count % groups;
    let mut out = Vec::with_capacity(groups);
    let mut start = 0;
    for g in 0..groups {
        let size = base + usize::from(g < extra);
        out.push(start..start + size);
        start += size;
    }
    out
}

/// The evolving system goal for one period.
#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    pub values: Vec<f64>,
    pub period: usize,
}

impl Target {
    pub fn new(values: Vec<f64>, period: usize) -> Result<Self, DomainError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DomainError::NonFinite("target values"));
        }
        Ok(Target { values, period })
    }

    pub fn zero(dim: usize, period: usize) -> Self {
        Target {
            values: vec![0.0; dim],
            period,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Element-wise sum of all agents' selected plans.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalPlan {
    pub values: Vec<f64>,
}

impl GlobalPlan {
    pub fn zero(dim: usize) -> Self {
        GlobalPlan {
            values: vec![0.0; dim],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Selfishness weight in [0, 1]: 1 minimizes own discomfort, 0 minimizes
/// system inefficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Behavior {
    beta: f64,
}

impl Behavior {
    pub fn new(beta: f64) -> Result<Self, DomainError> {
        if !beta.is_finite() || !(0.0..=1.0).contains(&beta) {
            return Err(DomainError::BehaviorOutOfRange(beta));
        }
        Ok(Behavior { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// One agent's committed plan choice for a period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub agent_id: usize,
    pub plan_index: usize,
    pub period: usize,
}

/// Core experiment knobs shared by every method.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Number of agents.
    pub agents: usize,
    /// Plans per agent.
    pub plans_per_agent: usize,
    /// Values per plan.
    pub plan_dim: usize,
    /// Periods per episode.
    pub periods: usize,
    /// Plan-constraint groups.
    pub plan_groups: usize,
    /// Behavior ranges.
    pub behavior_ranges: usize,
    /// Bottom-up/top-down iterations per plan selection.
    pub epos_iterations: usize,
    /// Training episodes.
    pub episodes: usize,
    /// PPO batch size (time slots per update).
    pub batch: usize,
    /// Discount factor.
    pub gamma: f64,
    /// PPO clip interval.
    pub clip: f64,
    /// Discomfort weight in the reward.
    pub sigma1: f64,
    /// Inefficiency weight in the reward.
    pub sigma2: f64,
    pub seed: u64,
    pub scenario: String,
    pub method: String,
}

impl Default for ExperimentConfig {
    /// Desk-scale defaults; small enough that the full pipeline runs in
    /// seconds while every code path stays exercised.
    fn default() -> Self {
        ExperimentConfig {
            agents: 8,
            plans_per_agent: 8,
            plan_dim: 16,
            periods: 8,
            plan_groups: 4,
            behavior_ranges: 4,
            epos_iterations: 20,
            episodes: 500,
            batch: 64,
            gamma: 0.95,
            clip: 0.2,
            sigma1: 0.5,
            sigma2: 0.5,
            seed: 1,
            scenario: "synthetic".to_string(),
            method: "hrcl".to_string(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), DomainError> {
        let err = |msg: String| Err(DomainError::InvalidConfig(msg));
        if self.agents < 1 {
            return err("agents must be >= 1".into());
        }
        if self.plans_per_agent < self.plan_groups || self.plan_groups < 1 {
            return err(format!(
                "need plans_per_agent >= plan_groups >= 1, got {} and {}",
                self.plans_per_agent, self.plan_groups
            ));
        }
        if self.behavior_ranges < 1 {
            return err("behavior_ranges must be >= 1".into());
        }
        if self.epos_iterations < 1 {
            return err("epos_iterations must be >= 1".into());
        }
        if self.batch < 1 {
            return err("batch must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return err(format!("gamma must lie in [0, 1], got {}", self.gamma));
        }
        for (name, v) in [("sigma1", self.sigma1), ("sigma2", self.sigma2)] {
            if !(0.0..=1.0).contains(&v) {
                return err(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        if !(self.clip > 0.0) {
            return err(format!("clip must be > 0, got {}", self.clip));
        }
        Ok(())
    }
}

/// Element-wise sum of one selected plan per agent, in the given (agent-id)
/// order so the result is bit-identical across calls.
pub fn aggregate_global_plan(selections: &[&Plan]) -> Result<GlobalPlan, DomainError> {
    let first = selections.first().ok_or(DomainError::Empty("selections"))?;
    let dim = first.len();
    let mut values = vec![0.0; dim];
    for plan in selections {
        if plan.len() != dim {
            return Err(DomainError::DimensionMismatch {
                expected: dim,
                got: plan.len(),
            });
        }
        for (acc, v) in values.iter_mut().zip(&plan.values) {
            *acc += v;
        }
    }
    Ok(GlobalPlan { values })
}

/// Serializes a plan set in the dataset file format: one line per plan,
/// `cost:v1,v2,...,vD`.
pub fn format_planset(planset: &PlanSet) -> String {
    let mut out = String::new();
    for plan in planset.plans() {
        let _ = write!(out, "{}:", plan.discomfort);
        for (i, v) in plan.values.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

/// Parses the `cost:v1,...,vD` plan file format. Lines may arrive in any
/// order; the resulting set is sorted by cost and grouped into `groups`.
pub fn parse_planset(agent_id: usize, text: &str, groups: usize) -> Result<PlanSet, DomainError> {
    let mut plans = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (cost_str, values_str) =
            line.split_once(':')
                .ok_or_else(|| DomainError::InvalidPlanLine {
                    line: idx + 1,
                    reason: "missing ':' separator".to_string(),
                })?;
        let cost: f64 = cost_str
            .trim()
            .parse()
            .map_err(|e| DomainError::InvalidPlanLine {
                line: idx + 1,
                reason: format!("bad cost: {e}"),
            })?;
        let values: Vec<f64> = values_str
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| DomainError::InvalidPlanLine {
                line: idx + 1,
                reason: format!("bad value: {e}"),
            })?;
        plans.push(
            Plan::new(values, cost).map_err(|e| DomainError::InvalidPlanLine {
                line: idx + 1,
                reason: e.to_string(),
            })?,
        );
    }
    PlanSet::new(agent_id, plans, groups)
}

/// Writes `agent_<id>.plans` into `dir`.
pub fn write_planset(dir: &Path, planset: &PlanSet) -> Result<(), DomainError> {
    let path = dir.join(format!("agent_{}.plans", planset.agent_id));
    std::fs::write(path, format_planset(planset))?;
    Ok(())
}

/// Loads `agent_<id>.plans` from `dir`.
pub fn read_planset(dir: &Path, agent_id: usize, groups: usize) -> Result<PlanSet, DomainError> {
    let path = dir.join(format!("agent_{agent_id}.plans"));
    let text = std::fs::read_to_string(path)?;
    parse_planset(agent_id, &text, groups)
}
