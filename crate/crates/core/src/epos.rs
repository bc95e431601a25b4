//! Low-level decentralized plan selection over a balanced binary tree.
//!
//! Each call runs L learning iterations. In the bottom-up phase agents are
//! processed leaves-to-root: an agent aggregates its children's fresh subtree
//! plans, substitutes its own candidates into last iteration's global plan
//! (with its previous subtree contribution removed), and keeps the candidate
//! minimizing the combined objective. The root's aggregate is the tentative
//! global plan. In the top-down phase each parent approves a child's change
//! only if swapping that child's plan alone into the previous global plan
//! does not raise inefficiency; rejected children revert. A global guard
//! (default on) additionally reverts a whole iteration whose recomputed
//! inefficiency exceeds the previous iteration's, which makes the recorded
//! inefficiency trace non-increasing.
//!
//! The first iteration bootstraps from an empty global plan: no contribution
//! is committed yet, so candidates are scored against the fresh subtree
//! content alone and the guard does not apply until a first iteration has
//! been recorded.

use std::ops::Range;

use crate::costs::{combined_objective_raw, CostReport, InefficiencyMeasure, RewardWeights};
use crate::domain::{Behavior, DomainError, GlobalPlan, Plan, PlanSet, Selection, Target};

/// Balanced binary tree in heap layout: children of v are 2v+1 and 2v+2,
/// rooted at agent 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeTopology {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl TreeTopology {
    pub fn agent_count(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, agent: usize) -> Option<usize> {
        self.parent[agent]
    }

    pub fn children(&self, agent: usize) -> &[usize] {
        &self.children[agent]
    }

    pub fn root(&self) -> usize {
        0
    }
}

/// Builds the balanced binary communication tree for `agent_count` agents.
pub fn build_tree(agent_count: usize) -> TreeTopology {
    let mut parent = vec![None; agent_count];
    let mut children = vec![Vec::new(); agent_count];
    for v in 0..agent_count {
        for c in [2 * v + 1, 2 * v + 2] {
            if c < agent_count {
                parent[c] = Some(v);
                children[v].push(c);
            }
        }
    }
    TreeTopology { parent, children }
}

/// Per-agent protocol state for one plan-selection run.
#[derive(Debug, Clone)]
pub struct NodeState {
    /// Selection index for the iteration in progress.
    pub(crate) current: usize,
    /// Committed selection index from the previous iteration.
    pub(crate) previous: usize,
    /// Fresh subtree aggregate (own plan plus children's aggregates).
    pub(crate) subtree: Vec<f64>,
    /// Committed subtree aggregate from the previous iteration; zero before
    /// anything is committed.
    pub(crate) prev_subtree: Vec<f64>,
    /// This agent's own plan vector inside the committed global plan; zero
    /// before anything is committed.
    pub(crate) prev_contribution: Vec<f64>,
    pub(crate) behavior: Behavior,
    pub(crate) range: Range<usize>,
}

impl NodeState {
    pub fn selection(&self) -> usize {
        self.current
    }

    pub fn behavior(&self) -> Behavior {
        self.behavior
    }

    pub fn allowed_range(&self) -> Range<usize> {
        self.range.clone()
    }
}

/// One parent's approve/reject verdicts, in child order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApprovalDecision {
    pub delta: Vec<bool>,
}

/// Outcome of one bottom-up/top-down iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub inefficiency: f64,
    pub combined: f64,
    /// Whether the global guard rolled the whole iteration back.
    pub guard_reverted: bool,
    /// Approval decisions indexed by parent agent id.
    pub approvals: Vec<ApprovalDecision>,
}

/// Final selections, global plan and per-iteration traces of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct EposResult {
    pub selections: Vec<Selection>,
    pub global: GlobalPlan,
    pub inefficiency_trace: Vec<f64>,
    pub combined_trace: Vec<f64>,
    /// Largest per-element gap observed between the root's tentative
    /// aggregate and a flat sum over candidate selections.
    pub max_aggregation_error: f64,
}

impl EposResult {
    pub fn final_inefficiency(&self) -> f64 {
        *self
            .inefficiency_trace
            .last()
            .expect("at least one iteration")
    }

    pub fn final_combined(&self) -> f64 {
        *self.combined_trace.last().expect("at least one iteration")
    }
}

/// Run parameters independent of the instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EposParams {
    pub iterations: usize,
    pub guard: bool,
    pub measure: InefficiencyMeasure,
}

impl EposParams {
    pub fn new(iterations: usize, measure: InefficiencyMeasure) -> Self {
        EposParams {
            iterations,
            guard: true,
            measure,
        }
    }
}

/// Candidate scan for one agent: argmin of the combined objective over the
/// allowed range, scoring each candidate in the context `base + plan`.
/// `base` is the agent's view of the global plan with its own contribution
/// removed. Ties break toward the lowest plan index.
pub fn local_select(
    planset: &PlanSet,
    state: &NodeState,
    base: &[f64],
    target: &Target,
    measure: InefficiencyMeasure,
    weights: &RewardWeights,
) -> usize {
    debug_assert!(!state.range.is_empty());
    let mut candidate = vec![0.0; base.len()];
    let mut best_index = state.range.start;
    let mut best_value = f64::INFINITY;
    for k in state.range.clone() {
        let plan = planset.plan(k);
        for ((c, b), v) in candidate.iter_mut().zip(base).zip(&plan.values) {
            *c = b + v;
        }
        let value = combined_objective_raw(
            plan.discomfort,
            &candidate,
            &target.values,
            state.behavior.beta(),
            measure,
            weights,
        );
        if value < best_value {
            best_value = value;
            best_index = k;
        }
    }
    best_index
}

/// Driver for one plan-selection run; owns the tree, node states and the
/// committed global plan between iterations.
pub struct EposEngine<'a> {
    topology: TreeTopology,
    plansets: &'a [PlanSet],
    target: &'a Target,
    weights: RewardWeights,
    measure: InefficiencyMeasure,
    guard: bool,
    states: Vec<NodeState>,
    prev_global: Vec<f64>,
    prev_inefficiency: Option<f64>,
    max_aggregation_error: f64,
}

impl<'a> EposEngine<'a> {
    pub fn new(
        plansets: &'a [PlanSet],
        target: &'a Target,
        behaviors: &[Behavior],
        ranges: &[Range<usize>],
        params: &EposParams,
        weights: &RewardWeights,
    ) -> Result<Self, DomainError> {
        let agent_count = plansets.len();
        if agent_count == 0 {
            return Err(DomainError::Empty("plansets"));
        }
        if behaviors.len() != agent_count || ranges.len() != agent_count {
            return Err(DomainError::DimensionMismatch {
                expected: agent_count,
                got: behaviors.len().min(ranges.len()),
            });
        }
        let dim = target.len();
        let mut states = Vec::with_capacity(agent_count);
        for (agent, ps) in plansets.iter().enumerate() {
            if ps.plan_dim() != dim {
                return Err(DomainError::DimensionMismatch {
                    expected: dim,
                    got: ps.plan_dim(),
                });
            }
            let range = ranges[agent].clone();
            if range.is_empty() || range.end > ps.len() {
                return Err(DomainError::InvalidConfig(format!(
                    "allowed range {range:?} invalid for agent {agent} with {} plans",
                    ps.len()
                )));
            }
            states.push(NodeState {
                current: range.start,
                previous: range.start,
                subtree: vec![0.0; dim],
                prev_subtree: vec![0.0; dim],
                prev_contribution: vec![0.0; dim],
                behavior: behaviors[agent],
                range,
            });
        }
        Ok(EposEngine {
            topology: build_tree(agent_count),
            plansets,
            target,
            weights: *weights,
            measure: params.measure,
            guard: params.guard,
            states,
            prev_global: vec![0.0; dim],
            prev_inefficiency: None,
            max_aggregation_error: 0.0,
        })
    }

    pub fn topology(&self) -> &TreeTopology {
        &self.topology
    }

    pub fn states(&self) -> &[NodeState] {
        &self.states
    }

    fn plan_values(&self, agent: usize, index: usize) -> &[f64] {
        &self.plansets[agent].plan(index).values
    }

    /// Leaves-to-root pass: every agent picks a candidate and hands its
    /// subtree aggregate upward. Returns the root's tentative global plan.
    pub fn bottom_up_phase(&mut self) -> Vec<f64> {
        let dim = self.target.len();
        let agent_count = self.states.len();
        // Heap layout puts children at larger indices, so descending order
        // visits every child before its parent.
        for agent in (0..agent_count).rev() {
            let mut children_sum = vec![0.0; dim];
            for &c in self.topology.children(agent) {
                for (acc, v) in children_sum.iter_mut().zip(&self.states[c].subtree) {
                    *acc += v;
                }
            }
            let mut base = children_sum.clone();
            {
                let st = &self.states[agent];
                for ((b, g), p) in base
                    .iter_mut()
                    .zip(&self.prev_global)
                    .zip(&st.prev_subtree)
                {
                    *b += g - p;
                }
            }
            let choice = local_select(
                &self.plansets[agent],
                &self.states[agent],
                &base,
                self.target,
                self.measure,
                &self.weights,
            );
            let plan = self.plansets[agent].plan(choice).values.clone();
            let st = &mut self.states[agent];
            st.current = choice;
            for ((s, c), p) in st.subtree.iter_mut().zip(&children_sum).zip(&plan) {
                *s = c + p;
            }
        }
        let tentative = self.states[self.topology.root()].subtree.clone();
        let flat = self.flat_sum_current();
        let err = tentative
            .iter()
            .zip(&flat)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        self.max_aggregation_error = self.max_aggregation_error.max(err);
        tentative
    }

    /// Root-to-leaves pass: parents approve or reject their children's
    /// changes, the global plan is recomputed, the guard may roll the whole
    /// iteration back, and the surviving state is committed.
    pub fn top_down_phase(&mut self, _tentative_global: &[f64]) -> IterationRecord {
        let agent_count = self.states.len();
        let prev_inefficiency_of_global = self
            .measure
            .cost_raw(&self.target.values, &self.prev_global);
        let mut approvals: Vec<ApprovalDecision> = (0..agent_count)
            .map(|a| ApprovalDecision {
                delta: Vec::with_capacity(self.topology.children(a).len()),
            })
            .collect();
        let mut solo = vec![0.0; self.target.len()];
        for parent in 0..agent_count {
            for &child in self.topology.children(parent) {
                let st = &self.states[child];
                let child_plan = self.plan_values(child, st.current);
                for (((s, g), p), n) in solo
                    .iter_mut()
                    .zip(&self.prev_global)
                    .zip(&st.prev_contribution)
                    .zip(child_plan)
                {
                    *s = g - p + n;
                }
                let approved = self.measure.cost_raw(&self.target.values, &solo)
                    <= prev_inefficiency_of_global;
                approvals[parent].delta.push(approved);
                if !approved {
                    let st = &mut self.states[child];
                    st.current = st.previous;
                }
            }
        }

        let mut new_global = self.flat_sum_current();
        let mut new_inefficiency = self.measure.cost_raw(&self.target.values, &new_global);
        let mut guard_reverted = false;
        if self.guard {
            if let Some(prev) = self.prev_inefficiency {
                if new_inefficiency > prev {
                    for st in &mut self.states {
                        st.current = st.previous;
                    }
                    new_global = self.prev_global.clone();
                    new_inefficiency = prev;
                    guard_reverted = true;
                }
            }
        }

        if !guard_reverted {
            self.commit(new_global.clone(), new_inefficiency);
        } else {
            // Nothing to commit; the previous state stands.
        }

        let selections: Vec<&Plan> = (0..agent_count)
            .map(|a| self.plansets[a].plan(self.states[a].current))
            .collect();
        let report = CostReport::compute(
            &selections,
            self.target,
            &GlobalPlan {
                values: new_global,
            },
            self.measure,
            &self.weights,
            self.target.period,
        )
        .expect("iteration cost report");
        IterationRecord {
            inefficiency: new_inefficiency,
            combined: report.combined,
            guard_reverted,
            approvals,
        }
    }

    fn commit(&mut self, new_global: Vec<f64>, new_inefficiency: f64) {
        let agent_count = self.states.len();
        for agent in (0..agent_count).rev() {
            let mut subtree = self.plan_values(agent, self.states[agent].current).to_vec();
            for &c in self.topology.children(agent) {
                for (acc, v) in subtree.iter_mut().zip(&self.states[c].prev_subtree) {
                    *acc += v;
                }
            }
            let st = &mut self.states[agent];
            st.previous = st.current;
            st.prev_contribution = self.plansets[agent].plan(st.current).values.clone();
            st.prev_subtree = subtree.clone();
            st.subtree = subtree;
        }
        self.prev_global = new_global;
        self.prev_inefficiency = Some(new_inefficiency);
    }

    fn flat_sum_current(&self) -> Vec<f64> {
        let mut sum = vec![0.0; self.target.len()];
        for (agent, st) in self.states.iter().enumerate() {
            for (acc, v) in sum.iter_mut().zip(self.plan_values(agent, st.current)) {
                *acc += v;
            }
        }
        sum
    }

    /// Runs `iterations` full bottom-up/top-down iterations and collects the
    /// result.
    pub fn run(&mut self, iterations: usize) -> EposResult {
        assert!(iterations >= 1, "need at least one iteration");
        let mut inefficiency_trace = Vec::with_capacity(iterations);
        let mut combined_trace = Vec::with_capacity(iterations);
        for _ in 0..iterations {
            let tentative = self.bottom_up_phase();
            let record = self.top_down_phase(&tentative);
            inefficiency_trace.push(record.inefficiency);
            combined_trace.push(record.combined);
        }
        let selections = self
            .states
            .iter()
            .enumerate()
            .map(|(agent_id, st)| Selection {
                agent_id,
                plan_index: st.current,
                period: self.target.period,
            })
            .collect();
        EposResult {
            selections,
            global: GlobalPlan {
                values: self.prev_global.clone(),
            },
            inefficiency_trace,
            combined_trace,
            max_aggregation_error: self.max_aggregation_error,
        }
    }
}

/// Convenience wrapper: build the engine and run L iterations.
pub fn epos_run(
    plansets: &[PlanSet],
    target: &Target,
    behaviors: &[Behavior],
    ranges: &[Range<usize>],
    params: &EposParams,
    weights: &RewardWeights,
) -> Result<EposResult, DomainError> {
    let mut engine = EposEngine::new(plansets, target, behaviors, ranges, params, weights)?;
    Ok(engine.run(params.iterations))
}

/// Runs EPOS with every agent allowed its full plan set.
pub fn epos_run_full_range(
    plansets: &[PlanSet],
    target: &Target,
    behaviors: &[Behavior],
    params: &EposParams,
    weights: &RewardWeights,
) -> Result<EposResult, DomainError> {
    let ranges: Vec<Range<usize>> = plansets.iter().map(|ps| 0..ps.len()).collect();
    epos_run(plansets, target, behaviors, &ranges, params, weights)
}

/// Exhaustive-search optimum over all selection combinations.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Lexicographically smallest minimizer.
    pub selections: Vec<usize>,
    /// Minimum sum over agents of the combined objective at the joint global
    /// plan.
    pub combined: f64,
    /// Inefficiency of the optimal global plan.
    pub inefficiency: f64,
}

/// Largest instance (product of plan counts) the oracle accepts.
pub const ORACLE_MAX_COMBINATIONS: u128 = 1_000_000;

/// Enumerates every selection combination and returns the minimum of
/// `sum_u combined_objective(plan_u, global, ...)`, breaking ties toward the
/// lexicographically smallest selection vector.
pub fn brute_force_oracle(
    plansets: &[PlanSet],
    target: &Target,
    behaviors: &[Behavior],
    measure: InefficiencyMeasure,
    weights: &RewardWeights,
) -> Result<OracleResult, DomainError> {
    if plansets.is_empty() {
        return Err(DomainError::Empty("plansets"));
    }
    if behaviors.len() != plansets.len() {
        return Err(DomainError::DimensionMismatch {
            expected: plansets.len(),
            got: behaviors.len(),
        });
    }
    let mut combinations: u128 = 1;
    for ps in plansets {
        combinations = combinations.saturating_mul(ps.len() as u128);
        if combinations > ORACLE_MAX_COMBINATIONS {
            return Err(DomainError::InvalidConfig(format!(
                "oracle instance too large: more than {ORACLE_MAX_COMBINATIONS} combinations"
            )));
        }
    }

    let dim = target.len();
    let agent_count = plansets.len();
    let mut indices = vec![0usize; agent_count];
    let mut best: Option<OracleResult> = None;
    let mut global = vec![0.0; dim];
    loop {
        global.iter_mut().for_each(|v| *v = 0.0);
        for (agent, &k) in indices.iter().enumerate() {
            for (acc, v) in global.iter_mut().zip(&plansets[agent].plan(k).values) {
                *acc += v;
            }
        }
        let inefficiency = measure.cost_raw(&target.values, &global);
        let normalized_inefficiency = inefficiency / weights.inefficiency_scale;
        let mut total = 0.0;
        for (agent, &k) in indices.iter().enumerate() {
            let beta = behaviors[agent].beta();
            total += beta * (plansets[agent].plan(k).discomfort / weights.discomfort_scale)
                + (1.0 - beta) * normalized_inefficiency;
        }
        // Strict improvement keeps the first (lexicographically smallest)
        // minimizer because enumeration is lexicographic.
        if best.as_ref().is_none_or(|b| total < b.combined) {
            best = Some(OracleResult {
                selections: indices.clone(),
                combined: total,
                inefficiency,
            });
        }

        // Lexicographic odometer over per-agent plan counts.
        let mut pos = agent_count;
        while pos > 0 {
            pos -= 1;
            indices[pos] += 1;
            if indices[pos] < plansets[pos].len() {
                break;
            }
            indices[pos] = 0;
            if pos == 0 {
                return Ok(best.expect("at least one combination"));
            }
        }
        if agent_count == 1 && indices[0] == 0 {
            return Ok(best.expect("at least one combination"));
        }
    }
}
