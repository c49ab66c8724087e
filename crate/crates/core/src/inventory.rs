//! System state, the per-period event sequence and cost accounting.
//!
//! Each period runs, in order:
//!
//! 1. orders due this period arrive,
//! 2. demand is realized,
//! 3. sales are `min(on_hand, demand)`; the rest is lost,
//! 4. holding, stockout and ordering costs are booked,
//! 5. the (s,S) rule is applied to the inventory position and any order
//!    joins the pipeline.
//!
//! The ordering cost of step 5 is booked in the same period (step 4 reads the
//! order decision). A disruption drawn in period `t` doubles the lead time of
//! the order placed in `t` only; orders already in transit are unaffected.

use serde::{Deserialize, Serialize};

use crate::harness::RunMetrics;
use crate::policies::{decide_order, PolicyController, PolicyParams};
use crate::scenarios::ScenarioSchedule;
use crate::stochastic::{sample_bernoulli, sample_poisson, LeadTimeLaw, RngStream, StreamId};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    /// Per unit of end-of-period on-hand stock.
    pub holding: f64,
    /// Per unit of lost demand.
    pub stockout: f64,
    /// Per order placed.
    pub fixed_order: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            holding: 1.0,
            stockout: 10.0,
            fixed_order: 5.0,
        }
    }
}

impl CostParams {
    pub fn new(holding: f64, stockout: f64, fixed_order: f64) -> Result<Self> {
        let costs = Self {
            holding,
            stockout,
            fixed_order,
        };
        costs.validate()?;
        Ok(costs)
    }

    /// All rates finite and non-negative, and shortage strictly dearer than
    /// holding (otherwise carrying no stock is optimal).
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("holding_cost", self.holding),
            ("stockout_cost", self.stockout),
            ("fixed_order_cost", self.fixed_order),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, v, "cost rates must be finite and >= 0"));
            }
        }
        if self.stockout <= self.holding {
            return Err(Error::invalid(
                "stockout_cost",
                self.stockout,
                "must exceed holding_cost",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineOrder {
    pub quantity: u32,
    pub arrival_period: u32,
    pub disrupted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemState {
    pub period: u32,
    pub on_hand: u32,
    pub pipeline: Vec<PipelineOrder>,
}

impl SystemState {
    /// Period 1 with `on_hand` units and nothing in transit.
    pub fn initial(on_hand: u32) -> Self {
        Self {
            period: 1,
            on_hand,
            pipeline: Vec::new(),
        }
    }

    pub fn on_order(&self) -> u64 {
        self.pipeline.iter().map(|o| o.quantity as u64).sum()
    }

    /// State at the start of the next period had no order been placed this
    /// period: arrivals received and `demand` served. The optimizer plans from
    /// here.
    pub fn after_sales(&self, demand: u32) -> SystemState {
        let t = self.period;
        let mut on_hand = self.on_hand;
        let mut pipeline = Vec::with_capacity(self.pipeline.len());
        for order in &self.pipeline {
            if order.arrival_period <= t {
                on_hand += order.quantity;
            } else {
                pipeline.push(*order);
            }
        }
        SystemState {
            period: t + 1,
            on_hand: on_hand - on_hand.min(demand),
            pipeline,
        }
    }
}

/// On-hand stock plus everything in transit.
pub fn inventory_position(state: &SystemState) -> u64 {
    state.on_hand as u64 + state.on_order()
}

/// Random inputs consumed by one period.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PeriodDraws {
    pub demand: u32,
    /// Undisrupted lead time, `>= 1`.
    pub lead_time: u32,
    pub disrupted: bool,
}

/// One row of a simulation trace. Field order is the trace CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodRecord {
    pub period: u32,
    pub lambda_true: f64,
    pub alpha_true: f64,
    pub demand: u32,
    pub sales: u32,
    pub lost_units: u32,
    pub on_hand_end: u32,
    pub order_qty: u32,
    pub order_placed: bool,
    pub sampled_lead_time: u32,
    pub disrupted: bool,
    pub active_s: u32,
    #[serde(rename = "active_S")]
    pub active_order_up_to: u32,
    pub lambda_hat: Option<f64>,
    pub alpha_hat: Option<f64>,
    pub holding_cost: f64,
    pub stockout_cost: f64,
    pub ordering_cost: f64,
    pub total_cost: f64,
}

/// Runs one period. `lambda_true`, `alpha_true` and the estimate columns of
/// the returned record are left for the caller to fill.
pub fn advance_period(
    state: SystemState,
    draws: PeriodDraws,
    policy: &PolicyParams,
    costs: &CostParams,
) -> (SystemState, PeriodRecord) {
    assert!(draws.lead_time >= 1, "lead time must be at least one period");
    let t = state.period;
    let mut on_hand = state.on_hand;
    let mut pipeline = Vec::with_capacity(state.pipeline.len() + 1);

    // 1. arrivals
    for order in state.pipeline {
        assert!(order.arrival_period >= t, "order due in a past period");
        if order.arrival_period == t {
            on_hand += order.quantity;
        } else {
            pipeline.push(order);
        }
    }

    // 2-3. demand and sales
    let sales = on_hand.min(draws.demand);
    let lost_units = draws.demand - sales;
    on_hand -= sales;

    // 5. reorder on the post-sales position
    let position = on_hand as u64 + pipeline.iter().map(|o| o.quantity as u64).sum::<u64>();
    let order_qty = decide_order(position, policy);
    let order_placed = order_qty > 0;
    if order_placed {
        let effective = if draws.disrupted {
            2 * draws.lead_time
        } else {
            draws.lead_time
        };
        pipeline.push(PipelineOrder {
            quantity: order_qty,
            arrival_period: t + effective,
            disrupted: draws.disrupted,
        });
    }

    // 4. costs
    let holding_cost = costs.holding * on_hand as f64;
    let stockout_cost = costs.stockout * lost_units as f64;
    let ordering_cost = if order_placed { costs.fixed_order } else { 0.0 };

    let record = PeriodRecord {
        period: t,
        lambda_true: 0.0,
        alpha_true: 0.0,
        demand: draws.demand,
        sales,
        lost_units,
        on_hand_end: on_hand,
        order_qty,
        order_placed,
        sampled_lead_time: draws.lead_time,
        disrupted: draws.disrupted,
        active_s: policy.reorder_point,
        active_order_up_to: policy.order_up_to,
        lambda_hat: None,
        alpha_hat: None,
        holding_cost,
        stockout_cost,
        ordering_cost,
        total_cost: holding_cost + stockout_cost + ordering_cost,
    };
    let next = SystemState {
        period: t + 1,
        on_hand,
        pipeline,
    };
    (next, record)
}

/// The three exogenous streams of one replication.
#[derive(Clone, Debug)]
pub struct ExogenousStreams {
    pub demand: RngStream,
    pub lead_time: RngStream,
    pub disruption: RngStream,
    pub optimizer: RngStream,
}

impl ExogenousStreams {
    pub fn new(seed: u64, replication: u64) -> Self {
        Self {
            demand: RngStream::new(seed, StreamId::Demand, replication),
            lead_time: RngStream::new(seed, StreamId::LeadTime, replication),
            disruption: RngStream::new(seed, StreamId::Disruption, replication),
            optimizer: RngStream::new(seed, StreamId::Optimizer, replication),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimulationRun {
    pub metrics: RunMetrics,
    pub trace: Vec<PeriodRecord>,
    pub controller: PolicyController,
}

/// Simulates periods `1..=horizon` from `initial` under `scenario`, with lead
/// times drawn from `lead_time`.
///
/// Demand, lead time and disruption are drawn every period from their own
/// streams whether or not they are used, so two controllers run with the same
/// `(seed, replication)` see identical realizations.
pub fn run_simulation(
    horizon: u32,
    initial: SystemState,
    scenario: &ScenarioSchedule,
    lead_time: &LeadTimeLaw,
    mut controller: PolicyController,
    costs: &CostParams,
    seed: u64,
    replication: u64,
) -> Result<SimulationRun> {
    if horizon == 0 {
        return Err(Error::Configuration("horizon must be at least 1".into()));
    }
    let mut streams = ExogenousStreams::new(seed, replication);
    let mut state = initial;
    let mut trace = Vec::with_capacity(horizon as usize);
    for _ in 0..horizon {
        let t = state.period;
        let (lambda_t, alpha_t) = scenario.params_at(t)?;
        let draws = PeriodDraws {
            demand: sample_poisson(lambda_t, &mut streams.demand)?,
            lead_time: lead_time.sample(&mut streams.lead_time)?,
            disrupted: sample_bernoulli(alpha_t, &mut streams.disruption)?,
        };
        controller.observe(
            t,
            draws.demand,
            draws.disrupted,
            &state,
            costs,
            &streams.optimizer,
        )?;
        let (next, mut record) = advance_period(state, draws, controller.params(), costs);
        record.lambda_true = lambda_t;
        record.alpha_true = alpha_t;
        if let Some(post) = controller.posterior() {
            record.lambda_hat = Some(post.demand_mean());
            record.alpha_hat = Some(post.disruption_mean());
        }
        trace.push(record);
        state = next;
    }
    Ok(SimulationRun {
        metrics: RunMetrics::from_trace(&trace),
        trace,
        controller,
    })
}
