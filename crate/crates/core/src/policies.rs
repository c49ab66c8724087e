//! The (s,S) reorder rule and the controllers that choose its parameters.

use serde::{Deserialize, Serialize};

use crate::inventory::{CostParams, SystemState};
use crate::learning::PosteriorState;
use crate::optimizer::{optimize, OptimizerConfig};
use crate::stochastic::RngStream;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolicyParams {
    /// `s`: order when the inventory position is at or below this.
    pub reorder_point: u32,
    /// `S`: order enough to bring the position back to this.
    pub order_up_to: u32,
}

impl PolicyParams {
    pub fn new(reorder_point: u32, order_up_to: u32) -> Result<Self> {
        if reorder_point >= order_up_to {
            return Err(Error::Configuration(format!(
                "policy requires s < S, got s = {reorder_point}, S = {order_up_to}"
            )));
        }
        Ok(Self {
            reorder_point,
            order_up_to,
        })
    }
}

impl Default for PolicyParams {
    fn default() -> Self {
        Self {
            reorder_point: 25,
            order_up_to: 50,
        }
    }
}

impl std::fmt::Display for PolicyParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.reorder_point, self.order_up_to)
    }
}

/// `S - position` when `position <= s`, else zero.
pub fn decide_order(position: u64, params: &PolicyParams) -> u32 {
    if position <= params.reorder_point as u64 {
        (params.order_up_to as u64 - position) as u32
    } else {
        0
    }
}

/// Learning and re-optimization settings of the adaptive controller.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveSettings {
    pub prior: PosteriorState,
    /// Re-optimize when `t % update_period == 0`.
    pub update_period: u32,
    pub optimizer: OptimizerConfig,
}

impl Default for AdaptiveSettings {
    fn default() -> Self {
        Self {
            prior: PosteriorState::default(),
            update_period: 7,
            optimizer: OptimizerConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Mode {
    Static,
    Adaptive {
        posterior: PosteriorState,
        update_period: u32,
        optimizer: OptimizerConfig,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyController {
    params: PolicyParams,
    mode: Mode,
    reoptimizations: u32,
}

impl PolicyController {
    pub fn fixed(params: PolicyParams) -> Self {
        Self {
            params,
            mode: Mode::Static,
            reoptimizations: 0,
        }
    }

    /// Starts from `initial` and the prior in `settings`.
    pub fn adaptive(initial: PolicyParams, settings: AdaptiveSettings) -> Result<Self> {
        if settings.update_period == 0 {
            return Err(Error::Configuration("update period must be at least 1".into()));
        }
        settings.optimizer.validate()?;
        Ok(Self {
            params: initial,
            mode: Mode::Adaptive {
                posterior: settings.prior,
                update_period: settings.update_period,
                optimizer: settings.optimizer,
            },
            reoptimizations: 0,
        })
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self.mode, Mode::Adaptive { .. })
    }

    pub fn posterior(&self) -> Option<&PosteriorState> {
        match &self.mode {
            Mode::Static => None,
            Mode::Adaptive { posterior, .. } => Some(posterior),
        }
    }

    /// Number of times the optimizer has been run.
    pub fn reoptimizations(&self) -> u32 {
        self.reoptimizations
    }

    /// Feeds period `t`'s realized demand and disruption to the controller
    /// before that period's order is placed.
    ///
    /// A static controller ignores it. An adaptive controller updates its
    /// posterior and, on periods divisible by the update period, re-solves
    /// for (s,S) starting from `state` after this period's arrivals and
    /// sales. Optimizer randomness comes from `optimizer_stream.substream(t)`,
    /// so the result depends only on the inputs. Returns whether the policy
    /// was re-optimized.
    pub fn observe(
        &mut self,
        t: u32,
        demand: u32,
        disrupted: bool,
        state: &SystemState,
        costs: &CostParams,
        optimizer_stream: &RngStream,
    ) -> Result<bool> {
        assert!(t >= 1, "periods are numbered from 1");
        let Mode::Adaptive {
            posterior,
            update_period,
            optimizer,
        } = &mut self.mode
        else {
            return Ok(false);
        };
        *posterior = posterior.observe(demand, disrupted);
        if t % *update_period != 0 {
            return Ok(false);
        }
        let current = state.after_sales(demand);
        let mut rng = optimizer_stream.substream(t as u64);
        let (best, _) = optimize(posterior, optimizer, costs, &current, &mut rng)?;
        self.params = best;
        self.reoptimizations += 1;
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::StreamId;
    use proptest::prelude::*;

    #[test]
    fn decide_order_examples() {
        let p = PolicyParams::default();
        assert_eq!(decide_order(24, &p), 26);
        assert_eq!(decide_order(25, &p), 25);
        assert_eq!(decide_order(26, &p), 0);
        assert_eq!(decide_order(0, &p), 50);
    }

    #[test]
    fn params_require_s_below_big_s() {
        assert!(PolicyParams::new(25, 50).is_ok());
        assert!(PolicyParams::new(50, 50).is_err());
        assert!(PolicyParams::new(60, 50).is_err());
    }

    fn small_adaptive() -> PolicyController {
        let settings = AdaptiveSettings {
            optimizer: OptimizerConfig {
                num_samples: 10,
                planning_horizon: 10,
                ..OptimizerConfig::default()
            },
            ..AdaptiveSettings::default()
        };
        PolicyController::adaptive(PolicyParams::default(), settings).unwrap()
    }

    #[test]
    fn static_controller_ignores_observations() {
        let rng = RngStream::new(1, StreamId::Optimizer, 0);
        let mut c = PolicyController::fixed(PolicyParams::default());
        let state = SystemState::initial(50);
        for t in 1..=30 {
            assert!(!c.observe(t, 40, true, &state, &CostParams::default(), &rng).unwrap());
        }
        assert_eq!(*c.params(), PolicyParams::default());
        assert!(c.posterior().is_none());
    }

    #[test]
    fn adaptive_reoptimizes_only_on_multiples_of_n() {
        let rng = RngStream::new(1, StreamId::Optimizer, 0);
        let state = SystemState::initial(50);
        let mut c = small_adaptive();
        for t in 1..=6 {
            assert!(!c.observe(t, 10, false, &state, &CostParams::default(), &rng).unwrap());
        }
        assert!(c.observe(7, 10, false, &state, &CostParams::default(), &rng).unwrap());
        let after_seven = *c.params();
        assert!(!c.observe(8, 10, false, &state, &CostParams::default(), &rng).unwrap());
        assert_eq!(*c.params(), after_seven);
        assert_eq!(c.posterior().unwrap().demand_rate, 1.0 + 8.0);
        assert_eq!(c.reoptimizations(), 1);
    }

    #[test]
    fn adaptive_observe_is_pure() {
        let rng = RngStream::new(5, StreamId::Optimizer, 3);
        let state = SystemState::initial(30);
        let mut a = small_adaptive();
        let mut b = small_adaptive();
        for t in 1..=14 {
            a.observe(t, 12, t % 5 == 0, &state, &CostParams::default(), &rng).unwrap();
            b.observe(t, 12, t % 5 == 0, &state, &CostParams::default(), &rng).unwrap();
        }
        assert_eq!(a, b);
    }

    #[test]
    fn zero_update_period_rejected() {
        let settings = AdaptiveSettings {
            update_period: 0,
            ..AdaptiveSettings::default()
        };
        assert!(PolicyController::adaptive(PolicyParams::default(), settings).is_err());
    }

    proptest! {
        #[test]
        fn decide_order_monotone_and_order_up_to(s in 0u32..100, gap in 1u32..100, pos in 0u64..300) {
            let p = PolicyParams::new(s, s + gap).unwrap();
            let q = decide_order(pos, &p);
            if pos > 0 {
                prop_assert!(decide_order(pos - 1, &p) >= q);
            }
            if q > 0 {
                prop_assert_eq!(pos + q as u64, p.order_up_to as u64);
            }
        }
    }
}
