//! Decentralized multi-agent plan selection and coordination.
//!
//! Agents each hold a set of candidate plans (vectors of scheduled values with
//! an attached discomfort cost) and must jointly pick one plan each so that the
//! element-wise sum of the selections tracks a system-wide target. The low
//! level runs an iterative collective-learning protocol over a balanced binary
//! tree (`epos`); the high level learns plan-group and behavior-range
//! strategies with a PPO actor-critic trained from scratch (`marl`). Baseline
//! method variants, scenario generators, a brute-force oracle and a batch
//! experiment harness round out the crate.

pub mod baselines;
pub mod costs;
pub mod domain;
pub mod epos;
pub mod harness;
pub mod marl;
pub mod neural;
pub mod plangen;
pub mod strategy;
