//! Conjugate posteriors for the demand rate (Gamma–Poisson) and the
//! disruption probability (Beta–Bernoulli).

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `Gamma(demand_shape, demand_rate)` over λ and
/// `Beta(disruption_alpha, disruption_beta)` over α.
///
/// Updates add integer sufficient statistics to the parameters, which is exact
/// in `f64` for any realistic horizon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorState {
    pub demand_shape: f64,
    pub demand_rate: f64,
    pub disruption_alpha: f64,
    pub disruption_beta: f64,
}

impl Default for PosteriorState {
    /// Prior mean λ = 10 with the weight of one observation; prior mean
    /// α = 0.02 with the weight of fifty.
    fn default() -> Self {
        Self {
            demand_shape: 10.0,
            demand_rate: 1.0,
            disruption_alpha: 1.0,
            disruption_beta: 49.0,
        }
    }
}

impl PosteriorState {
    pub fn new(
        demand_shape: f64,
        demand_rate: f64,
        disruption_alpha: f64,
        disruption_beta: f64,
    ) -> Result<Self> {
        let check = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, v, "posterior parameters must be finite and > 0"))
            }
        };
        check("demand_shape", demand_shape)?;
        check("demand_rate", demand_rate)?;
        check("disruption_alpha", disruption_alpha)?;
        check("disruption_beta", disruption_beta)?;
        Ok(Self {
            demand_shape,
            demand_rate,
            disruption_alpha,
            disruption_beta,
        })
    }

    #[must_use]
    pub fn update_demand(self, demand: u32) -> Self {
        Self {
            demand_shape: self.demand_shape + demand as f64,
            demand_rate: self.demand_rate + 1.0,
            ..self
        }
    }

    /// `disrupted` must be 0 or 1.
    pub fn update_disruption(self, disrupted: u8) -> Result<Self> {
        if disrupted > 1 {
            return Err(Error::invalid(
                "disrupted",
                disrupted as f64,
                "disruption indicator must be 0 or 1",
            ));
        }
        let s = disrupted as f64;
        Ok(Self {
            disruption_alpha: self.disruption_alpha + s,
            disruption_beta: self.disruption_beta + (1.0 - s),
            ..self
        })
    }

    /// Both updates for one period.
    #[must_use]
    pub fn observe(self, demand: u32, disrupted: bool) -> Self {
        self.update_demand(demand)
            .update_disruption(disrupted as u8)
            .expect("bool indicator is always 0 or 1")
    }

    /// Posterior mean `a / b` of the demand rate.
    pub fn demand_mean(&self) -> f64 {
        self.demand_shape / self.demand_rate
    }

    /// Posterior mean `c / (c + d)` of the disruption probability.
    pub fn disruption_mean(&self) -> f64 {
        self.disruption_alpha / (self.disruption_alpha + self.disruption_beta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn post(a: f64, b: f64, c: f64, d: f64) -> PosteriorState {
        PosteriorState::new(a, b, c, d).unwrap()
    }

    #[test]
    fn demand_update_examples() {
        let p = post(1.0, 1.0, 1.0, 1.0).update_demand(10);
        assert_eq!((p.demand_shape, p.demand_rate), (11.0, 2.0));
        assert_eq!(p.demand_mean(), 5.5);
        assert_eq!((p.disruption_alpha, p.disruption_beta), (1.0, 1.0));

        let p = post(10.0, 1.0, 1.0, 1.0).update_demand(0);
        assert_eq!((p.demand_shape, p.demand_rate), (10.0, 2.0));

        let p = [8, 12, 10]
            .iter()
            .fold(post(10.0, 1.0, 1.0, 49.0), |p, &d| p.update_demand(d));
        assert_eq!((p.demand_shape, p.demand_rate), (40.0, 4.0));
        assert_eq!(p.demand_mean(), 10.0);
    }

    #[test]
    fn disruption_update_examples() {
        let p = post(1.0, 1.0, 1.0, 1.0).update_disruption(1).unwrap();
        assert_eq!((p.disruption_alpha, p.disruption_beta), (2.0, 1.0));
        assert_eq!(p.disruption_mean(), 2.0 / 3.0);

        let p = post(1.0, 1.0, 1.0, 1.0).update_disruption(0).unwrap();
        assert_eq!((p.disruption_alpha, p.disruption_beta), (1.0, 2.0));

        let p = [1, 0, 0, 0].iter().fold(post(1.0, 1.0, 1.0, 1.0), |p, &s| {
            p.update_disruption(s).unwrap()
        });
        assert_eq!((p.disruption_alpha, p.disruption_beta), (2.0, 4.0));
        assert_eq!(p.disruption_mean(), 1.0 / 3.0);

        assert!(post(1.0, 1.0, 1.0, 1.0).update_disruption(2).is_err());
    }

    #[test]
    fn default_prior_means() {
        let p = PosteriorState::default();
        assert_eq!(p.demand_mean(), 10.0);
        assert_eq!(p.disruption_mean(), 0.02);
        assert_eq!(post(1.0, 1.0, 1.0, 49.0).disruption_mean(), 0.02);
    }

    #[test]
    fn rejects_non_positive_parameters() {
        assert!(PosteriorState::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(PosteriorState::new(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(PosteriorState::new(1.0, 1.0, f64::NAN, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn order_invariance(obs in prop::collection::vec((0u32..60, any::<bool>()), 0..200), seed in any::<u64>()) {
            let prior = PosteriorState::default();
            let forward = obs.iter().fold(prior, |p, &(d, s)| p.observe(d, s));
            let mut shuffled = obs.clone();
            // deterministic Fisher–Yates driven by the proptest seed
            let mut state = seed;
            for i in (1..shuffled.len()).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (state >> 33) as usize % (i + 1);
                shuffled.swap(i, j);
            }
            let permuted = shuffled.iter().fold(prior, |p, &(d, s)| p.observe(d, s));
            prop_assert_eq!(forward, permuted);
        }
    }
}
