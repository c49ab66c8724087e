//! Static against adaptive control on all three scenarios with a paired
//! t-test per scenario. Uses a reduced optimizer budget so it finishes in
//! well under a minute in release mode.

use adaptive_inventory::harness::{run_experiment, ExperimentConfig};
use adaptive_inventory::scenarios::ScenarioSchedule;

fn main() -> adaptive_inventory::Result<()> {
    let mut config = ExperimentConfig::default();
    config.adaptive.optimizer.num_samples = 100;

    println!(
        "{:<18} {:>10} {:>10} {:>8} {:>8} {:>10}",
        "scenario", "static", "adaptive", "change", "t", "p"
    );
    for scenario in [
        ScenarioSchedule::stationary(),
        ScenarioSchedule::demand_shock(),
        ScenarioSchedule::supply_disruption(),
    ] {
        let r = run_experiment(&scenario, 10, 42, &config)?;
        println!(
            "{:<18} {:>10.1} {:>10.1} {:>7.1}% {:>8.2} {:>10.2e}",
            r.scenario,
            r.baseline.total_cost,
            r.adaptive.total_cost,
            r.percent_change,
            r.t_statistic,
            r.p_value
        );
    }
    Ok(())
}
