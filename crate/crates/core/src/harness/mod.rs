//! Replications under common random numbers, metric aggregation, paired
//! t-tests and the experiment sweeps.
//!
//! Replication `r` of an experiment seeded with `seed` runs both controllers
//! on the streams derived from `(seed, r)`. The two runs therefore see the
//! same demand, lead-time and disruption realizations; the adaptive
//! controller's optimizer draws from its own stream. Replications may run in
//! parallel and are folded in replication order.

mod ttest;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::inventory::{run_simulation, CostParams, PeriodRecord, SimulationRun, SystemState};
use crate::learning::PosteriorState;
use crate::policies::{AdaptiveSettings, PolicyController, PolicyParams};
use crate::scenarios::{shock_magnitude_variant, ScenarioSchedule};
use crate::stochastic::LeadTimeLaw;
use crate::{Error, Result};

pub use ttest::{paired_t_test, TTest};

/// Aggregates of one simulated run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub horizon: u32,
    pub total_cost: f64,
    pub cost_per_period: f64,
    /// Share of periods with no lost sales.
    pub period_service_level: f64,
    /// Units sold over units demanded (1 when nothing was demanded).
    pub fill_rate: f64,
    /// Mean end-of-period on-hand stock.
    pub avg_inventory: f64,
    pub stockout_events: u32,
    pub holding_total: f64,
    pub stockout_total: f64,
    pub ordering_total: f64,
    pub disruptions_experienced: u32,
}

impl RunMetrics {
    pub fn from_trace(trace: &[PeriodRecord]) -> Self {
        let horizon = trace.len() as u32;
        let n = trace.len().max(1) as f64;
        let mut holding = 0.0;
        let mut stockout = 0.0;
        let mut ordering = 0.0;
        let mut stockout_events = 0u32;
        let mut disruptions = 0u32;
        let mut demand = 0u64;
        let mut sales = 0u64;
        let mut on_hand = 0u64;
        for r in trace {
            holding += r.holding_cost;
            stockout += r.stockout_cost;
            ordering += r.ordering_cost;
            stockout_events += (r.lost_units > 0) as u32;
            disruptions += r.disrupted as u32;
            demand += r.demand as u64;
            sales += r.sales as u64;
            on_hand += r.on_hand_end as u64;
        }
        let total = holding + stockout + ordering;
        Self {
            horizon,
            total_cost: total,
            cost_per_period: total / n,
            period_service_level: 1.0 - stockout_events as f64 / n,
            fill_rate: if demand == 0 {
                1.0
            } else {
                sales as f64 / demand as f64
            },
            avg_inventory: on_hand as f64 / n,
            stockout_events,
            holding_total: holding,
            stockout_total: stockout,
            ordering_total: ordering,
            disruptions_experienced: disruptions,
        }
    }
}

/// Per-metric means over replications.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub total_cost: f64,
    pub cost_per_period: f64,
    pub period_service_level: f64,
    pub fill_rate: f64,
    pub avg_inventory: f64,
    pub stockout_events: f64,
    pub holding_total: f64,
    pub stockout_total: f64,
    pub ordering_total: f64,
    pub disruptions_experienced: f64,
}

impl MeanMetrics {
    pub fn from_runs<'a>(runs: impl IntoIterator<Item = &'a RunMetrics>) -> Self {
        let mut acc = MeanMetrics::default();
        let mut n = 0usize;
        for m in runs {
            n += 1;
            acc.total_cost += m.total_cost;
            acc.cost_per_period += m.cost_per_period;
            acc.period_service_level += m.period_service_level;
            acc.fill_rate += m.fill_rate;
            acc.avg_inventory += m.avg_inventory;
            acc.stockout_events += m.stockout_events as f64;
            acc.holding_total += m.holding_total;
            acc.stockout_total += m.stockout_total;
            acc.ordering_total += m.ordering_total;
            acc.disruptions_experienced += m.disruptions_experienced as f64;
        }
        if n == 0 {
            return acc;
        }
        let n = n as f64;
        MeanMetrics {
            total_cost: acc.total_cost / n,
            cost_per_period: acc.cost_per_period / n,
            period_service_level: acc.period_service_level / n,
            fill_rate: acc.fill_rate / n,
            avg_inventory: acc.avg_inventory / n,
            stockout_events: acc.stockout_events / n,
            holding_total: acc.holding_total / n,
            stockout_total: acc.stockout_total / n,
            ordering_total: acc.ordering_total / n,
            disruptions_experienced: acc.disruptions_experienced / n,
        }
    }
}

/// Everything an experiment needs besides the scenario, seed and
/// replication count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub horizon: u32,
    pub costs: CostParams,
    /// Static policy, also the adaptive controller's starting point. Both
    /// runs start with `order_up_to` units on hand.
    pub baseline: PolicyParams,
    /// Lead-time law of the simulated system. Experiments also hand it to
    /// the adaptive controller's optimizer, replacing whatever law its
    /// settings carry.
    pub lead_time: LeadTimeLaw,
    pub adaptive: AdaptiveSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            horizon: 365,
            costs: CostParams::default(),
            baseline: PolicyParams::default(),
            lead_time: LeadTimeLaw::default(),
            adaptive: AdaptiveSettings::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Configuration("horizon must be at least 1".into()));
        }
        self.costs.validate()?;
        self.lead_time.validate()?;
        PolicyParams::new(self.baseline.reorder_point, self.baseline.order_up_to)?;
        if self.adaptive.update_period == 0 {
            return Err(Error::Configuration("update period must be at least 1".into()));
        }
        let p = &self.adaptive.prior;
        PosteriorState::new(
            p.demand_shape,
            p.demand_rate,
            p.disruption_alpha,
            p.disruption_beta,
        )?;
        self.adaptive.optimizer.validate()
    }

    pub fn initial_state(&self) -> SystemState {
        SystemState::initial(self.baseline.order_up_to)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolicyKind {
    Static,
    Adaptive,
}

impl PolicyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::Static => "static",
            PolicyKind::Adaptive => "adaptive",
        }
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" | "baseline" => Ok(PolicyKind::Static),
            "adaptive" => Ok(PolicyKind::Adaptive),
            other => Err(Error::Configuration(format!(
                "unknown policy `{other}` (expected static|adaptive)"
            ))),
        }
    }
}

/// One run of one controller for replication `replication`.
pub fn run_policy(
    policy: PolicyKind,
    scenario: &ScenarioSchedule,
    config: &ExperimentConfig,
    seed: u64,
    replication: u64,
) -> Result<SimulationRun> {
    let controller = match policy {
        PolicyKind::Static => PolicyController::fixed(config.baseline),
        PolicyKind::Adaptive => {
            let mut settings = config.adaptive.clone();
            settings.optimizer.lead_time = config.lead_time;
            PolicyController::adaptive(config.baseline, settings)?
        }
    };
    run_simulation(
        config.horizon,
        config.initial_state(),
        scenario,
        &config.lead_time,
        controller,
        &config.costs,
        seed,
        replication,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationOutcome {
    pub replication: u64,
    pub baseline: RunMetrics,
    pub adaptive: RunMetrics,
    pub final_posterior: PosteriorState,
    pub final_adaptive_params: PolicyParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub scenario: String,
    pub n: usize,
    pub baseline: MeanMetrics,
    pub adaptive: MeanMetrics,
    /// Mean of `baseline − adaptive` total cost; positive favours adaptive.
    pub mean_cost_difference: f64,
    /// `(baseline − adaptive) / baseline` on mean total cost, in percent.
    pub percent_change: f64,
    pub t_statistic: f64,
    pub p_value: f64,
    pub replications: Vec<ReplicationOutcome>,
}

impl ComparisonResult {
    /// Change in mean period service level, adaptive minus baseline, in
    /// percentage points.
    pub fn service_level_change(&self) -> f64 {
        100.0 * (self.adaptive.period_service_level - self.baseline.period_service_level)
    }
}

/// Runs both controllers on `n_reps` common-random-number replications and
/// compares total costs with a paired t-test.
pub fn run_experiment(
    scenario: &ScenarioSchedule,
    n_reps: usize,
    seed: u64,
    config: &ExperimentConfig,
) -> Result<ComparisonResult> {
    if n_reps < 2 {
        return Err(Error::Configuration(
            "an experiment needs at least two replications".into(),
        ));
    }
    config.validate()?;
    scenario.validate(config.horizon)?;

    let outcomes = (0..n_reps as u64)
        .into_par_iter()
        .map(|r| {
            let baseline = run_policy(PolicyKind::Static, scenario, config, seed, r)?;
            let adaptive = run_policy(PolicyKind::Adaptive, scenario, config, seed, r)?;
            Ok(ReplicationOutcome {
                replication: r,
                baseline: baseline.metrics,
                adaptive: adaptive.metrics,
                final_posterior: *adaptive
                    .controller
                    .posterior()
                    .expect("adaptive controller has a posterior"),
                final_adaptive_params: *adaptive.controller.params(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let differences: Vec<f64> = outcomes
        .iter()
        .map(|o| o.baseline.total_cost - o.adaptive.total_cost)
        .collect();
    let test = paired_t_test(&differences)?;
    let baseline = MeanMetrics::from_runs(outcomes.iter().map(|o| &o.baseline));
    let adaptive = MeanMetrics::from_runs(outcomes.iter().map(|o| &o.adaptive));
    Ok(ComparisonResult {
        scenario: scenario.name().to_string(),
        n: n_reps,
        percent_change: 100.0 * (baseline.total_cost - adaptive.total_cost) / baseline.total_cost,
        mean_cost_difference: test.mean,
        t_statistic: test.t_statistic,
        p_value: test.p_value,
        baseline,
        adaptive,
        replications: outcomes,
    })
}

/// Mean metrics of the static policy under the stationary scenario, on the
/// same replication streams an experiment with `seed` uses.
pub fn stationary_baseline_reference(
    n_reps: usize,
    seed: u64,
    config: &ExperimentConfig,
) -> Result<MeanMetrics> {
    config.validate()?;
    let scenario = ScenarioSchedule::stationary();
    let runs = (0..n_reps as u64)
        .into_par_iter()
        .map(|r| Ok(run_policy(PolicyKind::Static, &scenario, config, seed, r)?.metrics))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeanMetrics::from_runs(&runs))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessRow {
    pub magnitude: f64,
    pub result: ComparisonResult,
}

/// Demand-shock experiments for each target rate, ordered by magnitude.
pub fn robustness_sweep(
    magnitudes: &[f64],
    n_reps: usize,
    seed: u64,
    config: &ExperimentConfig,
) -> Result<Vec<RobustnessRow>> {
    if magnitudes.is_empty() {
        return Err(Error::Configuration("robustness sweep needs at least one magnitude".into()));
    }
    let mut sorted = magnitudes.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .into_iter()
        .map(|magnitude| {
            let scenario = shock_magnitude_variant(magnitude)?;
            Ok(RobustnessRow {
                magnitude,
                result: run_experiment(&scenario, n_reps, seed, config)?,
            })
        })
        .collect()
}

/// One-at-a-time departure from the base configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Variation {
    HoldingCost(f64),
    StockoutCost(f64),
    UpdatePeriod(u32),
    Priors(PosteriorState),
}

impl Variation {
    pub fn label(&self) -> String {
        match self {
            Variation::HoldingCost(v) => format!("c_h={v}"),
            Variation::StockoutCost(v) => format!("c_s={v}"),
            Variation::UpdatePeriod(n) => format!("N={n}"),
            Variation::Priors(p) => format!(
                "prior=({},{},{},{})",
                p.demand_shape, p.demand_rate, p.disruption_alpha, p.disruption_beta
            ),
        }
    }

    pub fn apply(&self, base: &ExperimentConfig) -> Result<ExperimentConfig> {
        let mut cfg = base.clone();
        match *self {
            Variation::HoldingCost(v) => cfg.costs.holding = v,
            Variation::StockoutCost(v) => cfg.costs.stockout = v,
            Variation::UpdatePeriod(n) => cfg.adaptive.update_period = n,
            Variation::Priors(p) => cfg.adaptive.prior = p,
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `c_h ∈ {0.5, 2}`, `c_s ∈ {5, 20}`, `N ∈ {5, 10, 14}`.
pub fn default_variations() -> Vec<Variation> {
    vec![
        Variation::HoldingCost(0.5),
        Variation::HoldingCost(2.0),
        Variation::StockoutCost(5.0),
        Variation::StockoutCost(20.0),
        Variation::UpdatePeriod(5),
        Variation::UpdatePeriod(10),
        Variation::UpdatePeriod(14),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub variation: String,
    pub result: ComparisonResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectedVariation {
    pub variation: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub rows: Vec<SensitivityRow>,
    pub rejected: Vec<RejectedVariation>,
}

/// Runs every valid variation against every scenario. Variations that
/// produce an invalid configuration are reported and skipped.
pub fn sensitivity_sweep(
    base: &ExperimentConfig,
    variations: &[Variation],
    scenarios: &[ScenarioSchedule],
    n_reps: usize,
    seed: u64,
) -> Result<SensitivityReport> {
    let mut report = SensitivityReport::default();
    for variation in variations {
        let cfg = match variation.apply(base) {
            Ok(cfg) => cfg,
            Err(e) => {
                report.rejected.push(RejectedVariation {
                    variation: variation.label(),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        for scenario in scenarios {
            report.rows.push(SensitivityRow {
                variation: variation.label(),
                result: run_experiment(scenario, n_reps, seed, &cfg)?,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::OptimizerConfig;

    fn quick_config() -> ExperimentConfig {
        ExperimentConfig {
            horizon: 60,
            adaptive: AdaptiveSettings {
                optimizer: OptimizerConfig {
                    num_samples: 20,
                    planning_horizon: 20,
                    ..OptimizerConfig::default()
                },
                ..AdaptiveSettings::default()
            },
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn metric_identities() {
        let run = run_policy(PolicyKind::Static, &ScenarioSchedule::stationary(), &quick_config(), 3, 0).unwrap();
        let m = run.metrics;
        assert_eq!(m.total_cost, m.holding_total + m.stockout_total + m.ordering_total);
        assert!((m.cost_per_period * m.horizon as f64 - m.total_cost).abs() < 1e-9 * m.total_cost);
        let events_share = m.stockout_events as f64 / m.horizon as f64;
        assert!((events_share - (1.0 - m.period_service_level)).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&m.fill_rate));
        assert!(m.stockout_events <= m.horizon);
    }

    #[test]
    fn fill_rate_without_demand_is_one() {
        let trace = vec![PeriodRecord {
            period: 1,
            lambda_true: 0.0,
            alpha_true: 0.0,
            demand: 0,
            sales: 0,
            lost_units: 0,
            on_hand_end: 4,
            order_qty: 0,
            order_placed: false,
            sampled_lead_time: 1,
            disrupted: false,
            active_s: 1,
            active_order_up_to: 5,
            lambda_hat: None,
            alpha_hat: None,
            holding_cost: 4.0,
            stockout_cost: 0.0,
            ordering_cost: 0.0,
            total_cost: 4.0,
        }];
        assert_eq!(RunMetrics::from_trace(&trace).fill_rate, 1.0);
    }

    #[test]
    fn experiment_requires_two_replications() {
        let err = run_experiment(&ScenarioSchedule::stationary(), 1, 0, &quick_config());
        assert!(matches!(err, Err(Error::Configuration(_))));
    }

    #[test]
    fn crn_pairs_see_identical_exogenous_draws() {
        let cfg = quick_config();
        let scenario = ScenarioSchedule::supply_disruption();
        let a = run_policy(PolicyKind::Static, &scenario, &cfg, 11, 4).unwrap();
        let b = run_policy(PolicyKind::Adaptive, &scenario, &cfg, 11, 4).unwrap();
        let cols = |r: &SimulationRun| -> Vec<(u32, u32, bool)> {
            r.trace.iter().map(|p| (p.demand, p.sampled_lead_time, p.disrupted)).collect()
        };
        assert_eq!(cols(&a), cols(&b));
    }

    #[test]
    fn experiment_is_deterministic() {
        let cfg = quick_config();
        let a = run_experiment(&ScenarioSchedule::stationary(), 3, 5, &cfg).unwrap();
        let b = run_experiment(&ScenarioSchedule::stationary(), 3, 5, &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn empty_robustness_sweep_rejected() {
        assert!(robustness_sweep(&[], 2, 0, &quick_config()).is_err());
    }

    #[test]
    fn invalid_variation_is_reported_not_fatal() {
        let report = sensitivity_sweep(
            &quick_config(),
            &[Variation::StockoutCost(0.5), Variation::UpdatePeriod(0)],
            &[ScenarioSchedule::stationary()],
            2,
            0,
        )
        .unwrap();
        assert!(report.rows.is_empty());
        assert_eq!(report.rejected.len(), 2);
    }
}
