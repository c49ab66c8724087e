//! Sample-average-approximation search for the best (s, S) under a few
//! posteriors, from the default starting state.

use adaptive_inventory::inventory::{CostParams, SystemState};
use adaptive_inventory::learning::PosteriorState;
use adaptive_inventory::optimizer::{optimize, OptimizerConfig};
use adaptive_inventory::stochastic::{RngStream, StreamId};

fn main() -> adaptive_inventory::Result<()> {
    let config = OptimizerConfig {
        num_samples: 200,
        ..OptimizerConfig::default()
    };
    let costs = CostParams::default();
    let start = SystemState::initial(50);

    let cases = [
        ("prior", PosteriorState::default()),
        ("λ≈10 after a year", PosteriorState::new(3650.0, 366.0, 8.0, 358.0)?),
        ("λ≈20 after a year", PosteriorState::new(7300.0, 366.0, 8.0, 358.0)?),
        ("frequent disruptions", PosteriorState::new(3650.0, 366.0, 55.0, 311.0)?),
    ];
    for (name, posterior) in cases {
        let mut rng = RngStream::new(9, StreamId::Optimizer, 0);
        let (best, evaluations) = optimize(&posterior, &config, &costs, &start, &mut rng)?;
        let cost = evaluations
            .iter()
            .find(|e| e.params == best)
            .map(|e| e.estimated_cost)
            .unwrap_or(f64::NAN);
        println!(
            "{name:<22} best {best}  cost over {} periods {cost:8.1}  ({} candidates)",
            config.planning_horizon,
            evaluations.len()
        );
    }
    Ok(())
}
