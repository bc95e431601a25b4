//! Scenario-specific plan generation and target construction.
//!
//! Synthetic plans are standard-normal vectors with discomforts ramping
//! linearly over [0, 1]; energy plans circularly shift a measured demand
//! profile and charge the minutes shifted as discomfort. Generation is pure
//! given (spec, seed, agent id): per-agent substreams use a PCG-family
//! generator (`Pcg64Mcg`) seeded with `seed ^ agent_id`, so datasets are
//! reproducible bit-exactly.

use rand::Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;
use rand_pcg::Pcg64Mcg;

use crate::domain::{DomainError, GlobalPlan, Plan, PlanSet, Target};

/// Name recorded in dataset headers so emitted data stays attributable to an
/// exact generator.
pub const GENERATOR_NAME: &str = "pcg64mcg(seed_from_u64; substream = seed ^ agent_id)";

/// Synthetic scenario: plans sampled from a standard Normal distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub plans_per_agent: usize,
    pub plan_dim: usize,
    pub seed: u64,
    /// Discomfort costs ramp linearly over this closed interval, ascending
    /// with plan index.
    pub discomfort_ramp: (f64, f64),
}

impl SyntheticSpec {
    pub fn new(plans_per_agent: usize, plan_dim: usize, seed: u64) -> Self {
        SyntheticSpec {
            plans_per_agent,
            plan_dim,
            seed,
            discomfort_ramp: (0.0, 1.0),
        }
    }
}

/// Cosine-waveform target: `amplitude * cos(omega * d)` per position d.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineTargetSpec {
    pub amplitude: f64,
    /// Frequency multiplier in radians per position index.
    pub omega: f64,
    pub plan_dim: usize,
    pub periods: usize,
}

/// Energy scenario: a measured demand profile plus the minute offsets its
/// shifted variants use.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadShiftSpec {
    /// Measured demand in kW, one value per sampling interval.
    pub base_profile: Vec<f64>,
    /// Signed shift offsets in minutes; each must be a multiple of the
    /// sampling resolution.
    pub shift_offsets_min: Vec<i64>,
    /// Sampling resolution in minutes.
    pub resolution_min: i64,
}

impl LoadShiftSpec {
    /// Offsets used when none are configured: the full set of shifted
    /// variants is 9, for 10 plans per agent in total.
    pub fn default_offsets() -> Vec<i64> {
        vec![75, -75, 150, -150, 720, -720, 225, -225, 300]
    }
}

/// K plans of D independent standard-normal samples; discomforts linearly
/// spaced over the ramp, ascending with plan index. Deterministic given
/// (seed, agent_id).
pub fn generate_synthetic_planset(
    spec: &SyntheticSpec,
    agent_id: usize,
    groups: usize,
) -> Result<PlanSet, DomainError> {
    if spec.plans_per_agent == 0 || spec.plan_dim == 0 {
        return Err(DomainError::Empty("synthetic spec dimensions"));
    }
    let mut rng = Pcg64Mcg::seed_from_u64(spec.seed ^ agent_id as u64);
    let (lo, hi) = spec.discomfort_ramp;
    let k = spec.plans_per_agent;
    let mut plans = Vec::with_capacity(k);
    for idx in 0..k {
        let values: Vec<f64> = (0..spec.plan_dim)
            .map(|_| rng.sample(StandardNormal))
            .collect();
        let frac = if k > 1 { idx as f64 / (k - 1) as f64 } else { 0.0 };
        plans.push(Plan::new(values, lo + frac * (hi - lo))?);
    }
    PlanSet::new(agent_id, plans, groups)
}

/// First plan is the measured demand at zero discomfort; each offset adds a
/// circularly shifted copy whose discomfort is the absolute minutes shifted.
pub fn generate_loadshift_planset(
    spec: &LoadShiftSpec,
    agent_id: usize,
    groups: usize,
) -> Result<PlanSet, DomainError> {
    if spec.base_profile.is_empty() {
        return Err(DomainError::Empty("base profile"));
    }
    let mut plans = vec![Plan::new(spec.base_profile.clone(), 0.0)?];
    for &offset in &spec.shift_offsets_min {
        if spec.resolution_min <= 0 || offset % spec.resolution_min != 0 {
            return Err(DomainError::InvalidConfig(format!(
                "shift offset {offset} min is not a multiple of the {} min resolution",
                spec.resolution_min
            )));
        }
        let positions = offset / spec.resolution_min;
        plans.push(Plan::new(
            rotate(&spec.base_profile, positions),
            offset.unsigned_abs() as f64,
        )?);
    }
    PlanSet::new(agent_id, plans, groups)
}

/// Circular shift: positive `positions` move values later in time.
fn rotate(values: &[f64], positions: i64) -> Vec<f64> {
    let n = values.len() as i64;
    let shift = positions.rem_euclid(n) as usize;
    let mut out = Vec::with_capacity(values.len());
    out.extend_from_slice(&values[values.len() - shift..]);
    out.extend_from_slice(&values[..values.len() - shift]);
    out
}

/// Initial cosine target for period 0.
pub fn cosine_target(spec: &CosineTargetSpec) -> Result<Target, DomainError> {
    let values = (0..spec.plan_dim)
        .map(|d| spec.amplitude * (spec.omega * d as f64).cos())
        .collect();
    Target::new(values, 0)
}

/// Remaining goal after executing the period: `target - global`, with the
/// period advanced.
pub fn update_target(previous: &Target, global: &GlobalPlan) -> Result<Target, DomainError> {
    if previous.len() != global.len() {
        return Err(DomainError::DimensionMismatch {
            expected: previous.len(),
            got: global.len(),
        });
    }
    let values = previous
        .values
        .iter()
        .zip(&global.values)
        .map(|(t, g)| t - g)
        .collect();
    Target::new(values, previous.period + 1)
}

/// Default target amplitude making the cosine goal reachable: half of what U
/// agents contribute on average in absolute value.
pub fn default_amplitude(plansets: &[PlanSet]) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for ps in plansets {
        for plan in ps.plans() {
            total += plan.values.iter().map(|v| v.abs()).sum::<f64>();
            count += plan.len();
        }
    }
    if count == 0 {
        return 0.0;
    }
    0.5 * plansets.len() as f64 * (total / count as f64)
}

/// Synthesized measured-demand profile for the energy scenario: base load
/// plus morning and evening peaks with per-agent variation. Stands in for
/// metered data; real profiles can be supplied through plan files instead.
pub fn synth_demand_profile(dim: usize, seed: u64, agent_id: usize) -> Vec<f64> {
    let mut rng = Pcg64Mcg::seed_from_u64(seed ^ agent_id as u64 ^ 0x4c4f4144);
    let base: f64 = 0.2 + 0.3 * rng.random::<f64>();
    let morning_peak: f64 = 0.5 + rng.random::<f64>();
    let evening_peak: f64 = 0.8 + 1.2 * rng.random::<f64>();
    let morning_pos = 0.2 + 0.1 * rng.random::<f64>();
    let evening_pos = 0.75 + 0.1 * rng.random::<f64>();
    (0..dim)
        .map(|d| {
            let x = d as f64 / dim as f64;
            let bump = |pos: f64, peak: f64, width: f64| {
                peak * (-((x - pos) * (x - pos)) / (2.0 * width * width)).exp()
            };
            let noise = 0.05 * rng.random::<f64>();
            base + bump(morning_pos, morning_peak, 0.06) + bump(evening_pos, evening_peak, 0.09)
                + noise
        })
        .collect()
}

/// Plan-index split for cross-validation: every fifth plan (by sorted index)
/// goes to the evaluation set, the rest to training. Both halves are
/// regrouped into `groups`; the eval share is topped up to at least one plan.
pub fn split_train_eval(
    planset: &PlanSet,
    groups: usize,
) -> Result<(PlanSet, PlanSet), DomainError> {
    let k = planset.len();
    if k < 2 {
        return Err(DomainError::InvalidConfig(
            "cannot split a single-plan set".to_string(),
        ));
    }
    let mut eval: Vec<usize> = (0..k).filter(|i| i % 5 == 4).collect();
    if eval.is_empty() {
        eval.push(k - 1);
    }
    let train: Vec<usize> = (0..k).filter(|i| !eval.contains(i)).collect();
    let train_groups = groups.min(train.len());
    let eval_groups = groups.min(eval.len());
    Ok((
        planset.subset(&train, train_groups)?,
        planset.subset(&eval, eval_groups)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_shapes_and_ramp() {
        let spec = SyntheticSpec::new(16, 100, 7);
        let ps = generate_synthetic_planset(&spec, 0, 4).unwrap();
        assert_eq!(ps.len(), 16);
        assert!(ps.plans().iter().all(|p| p.len() == 100));
        for (idx, plan) in ps.plans().iter().enumerate() {
            let expected = idx as f64 / 15.0;
            assert!((plan.discomfort - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn synthetic_single_plan_has_zero_discomfort() {
        let spec = SyntheticSpec::new(1, 4, 7);
        let ps = generate_synthetic_planset(&spec, 3, 1).unwrap();
        assert_eq!(ps.len(), 1);
        assert_eq!(ps.plan(0).discomfort, 0.0);
    }

    #[test]
    fn synthetic_is_deterministic() {
        let spec = SyntheticSpec::new(8, 12, 42);
        let a = generate_synthetic_planset(&spec, 5, 2).unwrap();
        let b = generate_synthetic_planset(&spec, 5, 2).unwrap();
        assert_eq!(a, b);
        let other_agent = generate_synthetic_planset(&spec, 6, 2).unwrap();
        assert_ne!(a.plans()[0].values, other_agent.plans()[0].values);
    }

    fn loadshift_spec(offsets: Vec<i64>) -> LoadShiftSpec {
        LoadShiftSpec {
            base_profile: (0..144).map(|d| (d as f64 * 0.37).sin() + 2.0).collect(),
            shift_offsets_min: offsets,
            resolution_min: 5,
        }
    }

    #[test]
    fn loadshift_zero_offset_is_identity() {
        let spec = loadshift_spec(vec![0]);
        let ps = generate_loadshift_planset(&spec, 0, 1).unwrap();
        assert_eq!(ps.plan(0).values, spec.base_profile);
        assert_eq!(ps.plan(0).discomfort, 0.0);
        assert_eq!(ps.plan(1).values, spec.base_profile);
    }

    #[test]
    fn loadshift_75_minutes_rotates_15_positions() {
        let spec = loadshift_spec(vec![75]);
        let ps = generate_loadshift_planset(&spec, 0, 1).unwrap();
        let shifted = ps
            .plans()
            .iter()
            .find(|p| p.discomfort == 75.0)
            .expect("75-minute plan present");
        for d in 0..144 {
            assert_eq!(shifted.values[(d + 15) % 144], spec.base_profile[d]);
        }
    }

    #[test]
    fn loadshift_default_offsets_give_ten_plans() {
        let spec = loadshift_spec(LoadShiftSpec::default_offsets());
        let ps = generate_loadshift_planset(&spec, 0, 1).unwrap();
        assert_eq!(ps.len(), 10);
        assert_eq!(ps.max_discomfort(), 720.0);
    }

    #[test]
    fn loadshift_preserves_total_energy() {
        let spec = loadshift_spec(LoadShiftSpec::default_offsets());
        let ps = generate_loadshift_planset(&spec, 0, 1).unwrap();
        let total: f64 = spec.base_profile.iter().sum();
        for plan in ps.plans() {
            let sum: f64 = plan.values.iter().sum();
            assert!((sum - total).abs() < 1e-9);
        }
    }

    #[test]
    fn loadshift_rejects_misaligned_offset() {
        let spec = loadshift_spec(vec![77]);
        assert!(generate_loadshift_planset(&spec, 0, 1).is_err());
    }

    #[test]
    fn cosine_target_values() {
        let spec = CosineTargetSpec {
            amplitude: 2.5,
            omega: std::f64::consts::PI / 24.0,
            plan_dim: 100,
            periods: 16,
        };
        let t = cosine_target(&spec).unwrap();
        assert_eq!(t.values[0], 2.5);
        // omega = pi/24 completes about 2.08 full cycles over 100 indices.
        let cycles = spec.omega * 99.0 / (2.0 * std::f64::consts::PI);
        assert!((cycles - 2.0625).abs() < 1e-12);
        let zero = cosine_target(&CosineTargetSpec {
            amplitude: 0.0,
            ..spec
        })
        .unwrap();
        assert!(zero.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn target_update_subtracts_global() {
        let t = Target::new(vec![5.0, 5.0], 0).unwrap();
        let g = GlobalPlan {
            values: vec![2.0, 3.0],
        };
        let next = update_target(&t, &g).unwrap();
        assert_eq!(next.values, vec![3.0, 2.0]);
        assert_eq!(next.period, 1);

        let met = update_target(&t, &GlobalPlan { values: t.values.clone() }).unwrap();
        assert!(met.values.iter().all(|&v| v == 0.0));

        let idle = update_target(&t, &GlobalPlan::zero(2)).unwrap();
        assert_eq!(idle.values, t.values);
    }

    #[test]
    fn target_updates_telescope() {
        let t0 = Target::new(vec![10.0, -4.0, 2.0], 0).unwrap();
        let globals: Vec<GlobalPlan> = (0..5)
            .map(|i| GlobalPlan {
                values: vec![i as f64, 0.5 * i as f64, -1.0],
            })
            .collect();
        let mut t = t0.clone();
        for g in &globals {
            t = update_target(&t, g).unwrap();
        }
        for d in 0..3 {
            let summed: f64 = globals.iter().map(|g| g.values[d]).sum();
            assert!((t.values[d] - (t0.values[d] - summed)).abs() < 1e-12);
        }
        assert_eq!(t.period, 5);
    }

    #[test]
    fn split_train_eval_strides() {
        let spec = SyntheticSpec::new(16, 4, 3);
        let ps = generate_synthetic_planset(&spec, 0, 4).unwrap();
        let (train, eval) = split_train_eval(&ps, 4).unwrap();
        assert_eq!(train.len(), 13);
        assert_eq!(eval.len(), 3);
        // Eval picked every fifth sorted plan: original indices 4, 9, 14.
        let eval_costs: Vec<f64> = eval.plans().iter().map(|p| p.discomfort).collect();
        assert_eq!(eval_costs, vec![4.0 / 15.0, 9.0 / 15.0, 14.0 / 15.0]);
    }

    #[test]
    fn split_small_set_keeps_both_sides_nonempty() {
        let spec = SyntheticSpec::new(3, 4, 3);
        let ps = generate_synthetic_planset(&spec, 0, 1).unwrap();
        let (train, eval) = split_train_eval(&ps, 1).unwrap();
        assert_eq!(train.len(), 2);
        assert_eq!(eval.len(), 1);
    }

    #[test]
    fn demand_profile_deterministic_and_positive() {
        let a = synth_demand_profile(144, 9, 2);
        let b = synth_demand_profile(144, 9, 2);
        assert_eq!(a, b);
        assert!(a.iter().all(|&v| v > 0.0));
        assert_ne!(a, synth_demand_profile(144, 9, 3));
    }
}
