//! High-level action semantics: a joint discrete action picks one of I plan
//! groups and one of M behavior ranges. The joint action is one categorical
//! choice over I*M outcomes, flattened as `group * M + (range - 1)`.

use std::ops::Range;

use crate::domain::{Behavior, DomainError, PlanSet};

/// A decoded high-level action: plan-constraint group `i` in [0, I) and
/// behavior range `m` in [1, M].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgentAction {
    pub group_index: usize,
    pub behavior_range: usize,
}

impl AgentAction {
    pub fn new(group_index: usize, behavior_range: usize) -> Self {
        AgentAction {
            group_index,
            behavior_range,
        }
    }

    /// Decodes a flat categorical index over I*M outcomes.
    pub fn from_flat(flat: usize, behavior_range_count: usize) -> Self {
        AgentAction {
            group_index: flat / behavior_range_count,
            behavior_range: flat % behavior_range_count + 1,
        }
    }

    pub fn flat_index(&self, behavior_range_count: usize) -> usize {
        self.group_index * behavior_range_count + (self.behavior_range - 1)
    }
}

/// Returns the contiguous plan-index range of the chosen group; low-level
/// selection then draws only from this range.
pub fn restrict_planset(
    planset: &PlanSet,
    action: AgentAction,
) -> Result<Range<usize>, DomainError> {
    planset
        .group_boundaries()
        .get(action.group_index)
        .cloned()
        .ok_or_else(|| {
            DomainError::InvalidConfig(format!(
                "group index {} out of range for {} groups",
                action.group_index,
                planset.group_count()
            ))
        })
}

/// Midpoint of the m-th of M equal sub-ranges of [0, 1]:
/// beta = m/M - 1/(2M).
pub fn behavior_from_range(m: usize, range_count: usize) -> Result<Behavior, DomainError> {
    if m < 1 || m > range_count {
        return Err(DomainError::InvalidConfig(format!(
            "behavior range index {m} out of [1, {range_count}]"
        )));
    }
    let m_f = m as f64;
    let count = range_count as f64;
    Behavior::new(m_f / count - 1.0 / (2.0 * count))
}
