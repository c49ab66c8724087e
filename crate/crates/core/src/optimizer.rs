//! Simulation-based (s,S) optimization by sample average approximation.
//!
//! One call to [`optimize`]:
//!
//! 1. draws `M` parameter pairs `(λ, α)` from the posterior (or repeats the
//!    posterior means in point-estimate mode),
//! 2. generates one demand / lead-time / disruption path of
//!    `planning_horizon` periods per pair, each from its own sub-stream,
//! 3. simulates every candidate (s,S) on every path from the live state, and
//! 4. returns the candidate with the lowest mean cumulative cost.
//!
//! Candidates share the same paths (common random numbers), so cost
//! differences between candidates carry no sampling noise from the paths
//! themselves. Ties go to the smallest `S`, then the smallest `s`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::inventory::{CostParams, SystemState};
use crate::learning::PosteriorState;
use crate::policies::PolicyParams;
use crate::stochastic::{
    sample_bernoulli, sample_beta, sample_gamma, sample_poisson, LeadTimeLaw, RngStream,
};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplingMode {
    /// Each scenario gets its own `(λ, α)` drawn from the posterior.
    PosteriorSampling,
    /// Every scenario uses the posterior means.
    PointEstimate,
}

impl SamplingMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SamplingMode::PosteriorSampling => "posterior",
            SamplingMode::PointEstimate => "point",
        }
    }
}

impl std::str::FromStr for SamplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "posterior" => Ok(SamplingMode::PosteriorSampling),
            "point" => Ok(SamplingMode::PointEstimate),
            other => Err(Error::Configuration(format!(
                "unknown optimizer mode `{other}` (expected posterior|point)"
            ))),
        }
    }
}

/// Rectangular candidate grid: `s` from `reorder_min` to `reorder_max` and
/// `S` from `s + step` to `order_up_to_max`, both in steps of `step`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub reorder_min: u32,
    pub reorder_max: u32,
    pub step: u32,
    pub order_up_to_max: u32,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            reorder_min: 0,
            reorder_max: 60,
            step: 5,
            order_up_to_max: 120,
        }
    }
}

impl GridSpec {
    pub fn candidates(&self) -> Result<Vec<PolicyParams>> {
        if self.step == 0 {
            return Err(Error::Configuration("grid step must be at least 1".into()));
        }
        if self.reorder_min > self.reorder_max {
            return Err(Error::Configuration(
                "grid reorder_min exceeds reorder_max".into(),
            ));
        }
        let mut grid = Vec::new();
        let mut s = self.reorder_min;
        while s <= self.reorder_max {
            let mut big_s = s + self.step;
            while big_s <= self.order_up_to_max {
                grid.push(PolicyParams {
                    reorder_point: s,
                    order_up_to: big_s,
                });
                big_s += self.step;
            }
            s += self.step;
        }
        if grid.is_empty() {
            return Err(Error::Configuration("candidate grid is empty".into()));
        }
        Ok(grid)
    }
}

/// `{(s, S) : s ∈ {0, 5, …, 60}, S ∈ {s+5, …, 120}}`, 234 pairs.
pub fn default_grid() -> Vec<PolicyParams> {
    GridSpec::default()
        .candidates()
        .expect("default grid is non-empty")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// `M`, scenarios per candidate.
    pub num_samples: u32,
    pub planning_horizon: u32,
    pub grid: Vec<PolicyParams>,
    pub mode: SamplingMode,
    /// After the grid search, also try every integer pair within
    /// `refine_radius` of the grid argmin.
    pub refine: bool,
    pub refine_radius: u32,
    /// Lead-time law assumed by the inner simulations.
    pub lead_time: LeadTimeLaw,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            num_samples: 1000,
            planning_horizon: 50,
            grid: default_grid(),
            mode: SamplingMode::PosteriorSampling,
            refine: false,
            refine_radius: 4,
            lead_time: LeadTimeLaw::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_samples == 0 {
            return Err(Error::Configuration("optimizer needs at least one sample".into()));
        }
        if self.planning_horizon == 0 {
            return Err(Error::Configuration("planning horizon must be at least 1".into()));
        }
        if self.grid.is_empty() {
            return Err(Error::Configuration("candidate grid is empty".into()));
        }
        if let Some(bad) = self.grid.iter().find(|p| p.reorder_point >= p.order_up_to) {
            return Err(Error::Configuration(format!(
                "grid candidate {bad} violates s < S"
            )));
        }
        self.lead_time.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyEvaluation {
    pub params: PolicyParams,
    /// Sample mean of cumulative planning-horizon cost.
    pub estimated_cost: f64,
    pub cost_std_error: f64,
}

/// True parameters of one inner simulation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InnerModel {
    pub lambda: f64,
    pub alpha: f64,
    pub lead_time: LeadTimeLaw,
}

/// Pre-drawn exogenous inputs for one inner simulation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioPath {
    pub demand: Vec<u32>,
    pub lead_time: Vec<u32>,
    pub disrupted: Vec<bool>,
}

impl ScenarioPath {
    /// Draws demand, lead time and disruption for each period, in that order,
    /// from `rng`.
    pub fn generate(model: &InnerModel, horizon: u32, rng: &mut RngStream) -> Result<Self> {
        let n = horizon as usize;
        let mut path = ScenarioPath {
            demand: Vec::with_capacity(n),
            lead_time: Vec::with_capacity(n),
            disrupted: Vec::with_capacity(n),
        };
        for _ in 0..n {
            path.demand.push(sample_poisson(model.lambda, rng)?);
            path.lead_time.push(model.lead_time.sample(rng)?);
            path.disrupted.push(sample_bernoulli(model.alpha, rng)?);
        }
        Ok(path)
    }

    pub fn horizon(&self) -> usize {
        self.demand.len()
    }
}

/// Lean re-implementation of the period loop for inner simulations.
/// Arrivals are bucketed by relative period so each step is O(1).
struct PathKernel {
    on_hand: u32,
    outstanding: u64,
    initial_arrivals: Vec<u32>,
    arrivals: Vec<u32>,
}

impl PathKernel {
    fn new(initial: &SystemState, horizon: usize) -> Self {
        let mut initial_arrivals = vec![0u32; horizon + 1];
        let mut outstanding = 0u64;
        for order in &initial.pipeline {
            outstanding += order.quantity as u64;
            // relative period 1 is `initial.period`
            let rel = order.arrival_period.saturating_sub(initial.period) as usize + 1;
            if rel <= horizon {
                initial_arrivals[rel] += order.quantity;
            }
        }
        Self {
            on_hand: initial.on_hand,
            outstanding,
            arrivals: initial_arrivals.clone(),
            initial_arrivals,
        }
    }

    fn total_cost(&mut self, params: &PolicyParams, path: &ScenarioPath, costs: &CostParams) -> f64 {
        let horizon = path.horizon();
        debug_assert!(self.arrivals.len() > horizon);
        self.arrivals.copy_from_slice(&self.initial_arrivals);
        let s = params.reorder_point as u64;
        let big_s = params.order_up_to as u64;
        let mut on_hand = self.on_hand as u64;
        let mut outstanding = self.outstanding;
        let mut held = 0u64;
        let mut lost = 0u64;
        let mut orders = 0u64;
        for i in 0..horizon {
            let t = i + 1;
            let arriving = self.arrivals[t] as u64;
            on_hand += arriving;
            outstanding -= arriving;
            let demand = path.demand[i] as u64;
            let sales = on_hand.min(demand);
            lost += demand - sales;
            on_hand -= sales;
            let position = on_hand + outstanding;
            if position <= s {
                let qty = big_s - position;
                orders += 1;
                outstanding += qty;
                let lead = path.lead_time[i] as usize * if path.disrupted[i] { 2 } else { 1 };
                let due = t + lead;
                if due <= horizon {
                    self.arrivals[due] += qty as u32;
                }
            }
            held += on_hand;
        }
        costs.holding * held as f64 + costs.stockout * lost as f64 + costs.fixed_order * orders as f64
    }
}

/// Cumulative cost of `params` over one path starting from `initial`.
pub fn simulate_path(
    params: &PolicyParams,
    path: &ScenarioPath,
    costs: &CostParams,
    initial: &SystemState,
) -> f64 {
    PathKernel::new(initial, path.horizon()).total_cost(params, path, costs)
}

/// One realization of the planning-horizon cost of `params` under fixed true
/// parameters, drawing every input from `rng`.
pub fn evaluate_policy(
    params: &PolicyParams,
    model: &InnerModel,
    horizon: u32,
    costs: &CostParams,
    initial: &SystemState,
    rng: &mut RngStream,
) -> Result<f64> {
    let path = ScenarioPath::generate(model, horizon, rng)?;
    Ok(simulate_path(params, &path, costs, initial))
}

/// The `(λ, α)` pairs the optimizer uses for its `M` scenarios, drawn from
/// `rng` in scenario order (λ then α).
pub fn draw_scenario_parameters(
    posterior: &PosteriorState,
    config: &OptimizerConfig,
    rng: &mut RngStream,
) -> Result<Vec<InnerModel>> {
    (0..config.num_samples)
        .map(|_| {
            let (lambda, alpha) = match config.mode {
                SamplingMode::PosteriorSampling => (
                    sample_gamma(posterior.demand_shape, posterior.demand_rate, rng)?,
                    sample_beta(posterior.disruption_alpha, posterior.disruption_beta, rng)?,
                ),
                SamplingMode::PointEstimate => {
                    (posterior.demand_mean(), posterior.disruption_mean())
                }
            };
            Ok(InnerModel {
                lambda,
                alpha,
                lead_time: config.lead_time,
            })
        })
        .collect()
}

fn evaluate_candidates(
    candidates: &[PolicyParams],
    paths: &[ScenarioPath],
    costs: &CostParams,
    kernel: &mut PathKernel,
) -> Vec<PolicyEvaluation> {
    let mut sum = vec![0.0f64; candidates.len()];
    let mut sum_sq = vec![0.0f64; candidates.len()];
    for path in paths {
        for (i, params) in candidates.iter().enumerate() {
            let cost = kernel.total_cost(params, path, costs);
            sum[i] += cost;
            sum_sq[i] += cost * cost;
        }
    }
    let m = paths.len() as f64;
    candidates
        .iter()
        .zip(sum.iter().zip(&sum_sq))
        .map(|(params, (&total, &total_sq))| {
            let mean = total / m;
            let std_error = if paths.len() > 1 {
                let var = ((total_sq - total * total / m) / (m - 1.0)).max(0.0);
                (var / m).sqrt()
            } else {
                0.0
            };
            PolicyEvaluation {
                params: *params,
                estimated_cost: mean,
                cost_std_error: std_error,
            }
        })
        .collect()
}

/// Lowest estimated cost; ties to smallest `S`, then smallest `s`.
pub fn select_best(evaluations: &[PolicyEvaluation]) -> Option<&PolicyEvaluation> {
    evaluations.iter().min_by(|a, b| {
        a.estimated_cost
            .total_cmp(&b.estimated_cost)
            .then(a.params.order_up_to.cmp(&b.params.order_up_to))
            .then(a.params.reorder_point.cmp(&b.params.reorder_point))
    })
}

/// Solves for the (s,S) pair minimizing expected planning-horizon cost under
/// the posterior, starting from `current`.
///
/// Parameter pairs are drawn from `rng`; scenario `m`'s path comes from
/// `rng.substream(m)`. Returns the winner and every evaluation, grid first.
pub fn optimize(
    posterior: &PosteriorState,
    config: &OptimizerConfig,
    costs: &CostParams,
    current: &SystemState,
    rng: &mut RngStream,
) -> Result<(PolicyParams, Vec<PolicyEvaluation>)> {
    config.validate()?;
    let models = draw_scenario_parameters(posterior, config, rng)?;
    let paths = models
        .iter()
        .enumerate()
        .map(|(m, model)| {
            ScenarioPath::generate(model, config.planning_horizon, &mut rng.substream(m as u64))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut kernel = PathKernel::new(current, config.planning_horizon as usize);
    let mut evaluations = evaluate_candidates(&config.grid, &paths, costs, &mut kernel);
    let mut best = select_best(&evaluations).expect("grid validated non-empty").params;

    if config.refine && config.refine_radius > 0 {
        let seen: HashSet<PolicyParams> = config.grid.iter().copied().collect();
        let r = config.refine_radius;
        let mut extra = Vec::new();
        for s in best.reorder_point.saturating_sub(r)..=best.reorder_point + r {
            for big_s in best.order_up_to.saturating_sub(r)..=best.order_up_to + r {
                let candidate = PolicyParams {
                    reorder_point: s,
                    order_up_to: big_s,
                };
                if s < big_s && !seen.contains(&candidate) {
                    extra.push(candidate);
                }
            }
        }
        evaluations.extend(evaluate_candidates(&extra, &paths, costs, &mut kernel));
        best = select_best(&evaluations).expect("non-empty").params;
    }
    Ok((best, evaluations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inventory::{advance_period, PeriodDraws, PipelineOrder};
    use crate::stochastic::StreamId;
    use proptest::prelude::*;

    fn rng(seed: u64) -> RngStream {
        RngStream::new(seed, StreamId::Optimizer, 0)
    }

    #[test]
    fn default_grid_shape() {
        let grid = default_grid();
        assert!(grid.contains(&PolicyParams::default()));
        assert!(grid.iter().all(|p| p.reorder_point < p.order_up_to));
        // independent count: for s = 5k there are (120 - s) / 5 choices of S
        let count: u32 = (0..=12).map(|k| (120 - 5 * k) / 5).sum();
        assert_eq!(grid.len() as u32, count);
        assert_eq!(count, 234);
    }

    #[test]
    fn zero_demand_hand_trace() {
        // λ = 0, α = 0, empty start, (0, 10): the first period's position 0
        // triggers one order of 10; it arrives after the sampled lead time
        // and then sits in stock for the rest of the horizon.
        let model = InnerModel { lambda: 0.0, alpha: 0.0, lead_time: LeadTimeLaw { p: 1.0, ..LeadTimeLaw::default() } };
        let costs = CostParams::default();
        let params = PolicyParams::new(0, 10).unwrap();
        let cost = evaluate_policy(&params, &model, 5, &costs, &SystemState::initial(0), &mut rng(1)).unwrap();
        // order in period 1 (K = 5), arrives in period 2, held periods 2..=5
        assert_eq!(cost, 5.0 + 4.0 * 10.0);
    }

    #[test]
    fn single_candidate_single_sample_matches_evaluate_policy() {
        let config = OptimizerConfig {
            num_samples: 1,
            grid: vec![PolicyParams::default()],
            ..OptimizerConfig::default()
        };
        let posterior = PosteriorState::default();
        let costs = CostParams::default();
        let start = SystemState::initial(50);
        let mut r = rng(8);
        let (best, evals) = optimize(&posterior, &config, &costs, &start, &mut r.clone()).unwrap();
        assert_eq!(best, PolicyParams::default());
        assert_eq!(evals.len(), 1);
        assert_eq!(evals[0].cost_std_error, 0.0);

        let model = draw_scenario_parameters(&posterior, &config, &mut r).unwrap()[0];
        let direct = evaluate_policy(&best, &model, 50, &costs, &start, &mut r.substream(0)).unwrap();
        assert_eq!(evals[0].estimated_cost, direct);
    }

    #[test]
    fn dominated_candidate_never_selected() {
        // with no demand, (0, 10) and (0, 20) both order once from an empty
        // start; the larger order just adds holding cost
        let config = OptimizerConfig {
            num_samples: 20,
            planning_horizon: 10,
            grid: vec![PolicyParams::new(0, 20).unwrap(), PolicyParams::new(0, 10).unwrap()],
            mode: SamplingMode::PointEstimate,
            ..OptimizerConfig::default()
        };
        let posterior = PosteriorState::new(1e-9, 1.0, 1e-9, 1.0).unwrap();
        let (best, _) = optimize(&posterior, &config, &CostParams::default(), &SystemState::initial(0), &mut rng(2)).unwrap();
        assert_eq!(best, PolicyParams::new(0, 10).unwrap());
    }

    #[test]
    fn no_stockout_penalty_prefers_smallest_policy() {
        // without a fixed charge nothing rewards batching, so holding alone decides
        let costs = CostParams { holding: 1.0, stockout: 0.0, fixed_order: 0.0 };
        let config = OptimizerConfig {
            num_samples: 30,
            planning_horizon: 20,
            ..OptimizerConfig::default()
        };
        let (best, evals) = optimize(&PosteriorState::default(), &config, &costs, &SystemState::initial(0), &mut rng(4)).unwrap();
        // exhaustive oracle over the reported costs
        let min = evals.iter().map(|e| e.estimated_cost).fold(f64::INFINITY, f64::min);
        assert_eq!(best, PolicyParams::new(0, 5).unwrap());
        assert_eq!(evals.iter().find(|e| e.params == best).unwrap().estimated_cost, min);
    }

    #[test]
    fn empty_grid_is_a_configuration_error() {
        let config = OptimizerConfig { grid: vec![], ..OptimizerConfig::default() };
        let err = optimize(&PosteriorState::default(), &config, &CostParams::default(), &SystemState::initial(0), &mut rng(1));
        assert!(matches!(err, Err(Error::Configuration(_))));
    }

    #[test]
    fn refinement_never_worsens_the_estimate() {
        let base = OptimizerConfig {
            num_samples: 40,
            planning_horizon: 30,
            ..OptimizerConfig::default()
        };
        let refined = OptimizerConfig { refine: true, ..base.clone() };
        let post = PosteriorState::default();
        let start = SystemState::initial(50);
        let (_, coarse) = optimize(&post, &base, &CostParams::default(), &start, &mut rng(6)).unwrap();
        let (best, fine) = optimize(&post, &refined, &CostParams::default(), &start, &mut rng(6)).unwrap();
        let coarse_min = select_best(&coarse).unwrap().estimated_cost;
        let fine_best = fine.iter().find(|e| e.params == best).unwrap().estimated_cost;
        assert!(fine_best <= coarse_min);
        assert!(fine.len() > coarse.len());
    }

    #[test]
    fn tie_break_prefers_small_order_up_to_then_small_reorder_point() {
        let e = |s, big_s, c| PolicyEvaluation {
            params: PolicyParams::new(s, big_s).unwrap(),
            estimated_cost: c,
            cost_std_error: 0.0,
        };
        let evals = [e(10, 40, 1.0), e(5, 40, 1.0), e(0, 45, 1.0), e(20, 30, 2.0)];
        assert_eq!(select_best(&evals).unwrap().params, PolicyParams::new(5, 40).unwrap());
    }

    proptest! {
        // the kernel and the reference period loop agree on every path
        #[test]
        fn kernel_matches_advance_period(
            s in 0u32..40,
            gap in 1u32..40,
            on_hand in 0u32..80,
            in_transit in prop::collection::vec((1u32..30, 0u32..6), 0..3),
            seed in any::<u64>(),
            lambda in 0.0f64..25.0,
            alpha in 0.0f64..0.5,
        ) {
            let params = PolicyParams::new(s, s + gap).unwrap();
            let costs = CostParams::default();
            let start = SystemState {
                period: 9,
                on_hand,
                pipeline: in_transit
                    .iter()
                    .map(|&(q, d)| PipelineOrder { quantity: q, arrival_period: 9 + d, disrupted: false })
                    .collect(),
            };
            let model = InnerModel { lambda, alpha, lead_time: LeadTimeLaw { p: 0.6, ..LeadTimeLaw::default() } };
            let path = ScenarioPath::generate(&model, 25, &mut rng(seed)).unwrap();
            let fast = simulate_path(&params, &path, &costs, &start);

            let mut state = start;
            let mut slow = 0.0;
            for i in 0..path.horizon() {
                let draws = PeriodDraws {
                    demand: path.demand[i],
                    lead_time: path.lead_time[i],
                    disrupted: path.disrupted[i],
                };
                let (next, rec) = advance_period(state, draws, &params, &costs);
                slow += rec.total_cost;
                state = next;
            }
            prop_assert_eq!(fast, slow);
        }
    }
}
