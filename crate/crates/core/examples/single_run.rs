//! One year of the static (25, 50) policy under the supply-disruption
//! scenario, with the trace written as CSV to stdout's first few lines.

use adaptive_inventory::harness::{run_policy, ExperimentConfig, PolicyKind};
use adaptive_inventory::output::write_trace_csv;
use adaptive_inventory::scenarios::ScenarioSchedule;

fn main() -> adaptive_inventory::Result<()> {
    let config = ExperimentConfig::default();
    let scenario = ScenarioSchedule::supply_disruption();
    let run = run_policy(PolicyKind::Static, &scenario, &config, 42, 0)?;

    let mut csv = Vec::new();
    write_trace_csv(&mut csv, &run.trace)?;
    for line in String::from_utf8_lossy(&csv).lines().take(6) {
        println!("{line}");
    }
    println!("...");

    let m = &run.metrics;
    println!();
    println!("total cost       {:.1}", m.total_cost);
    println!("  holding        {:.1}", m.holding_total);
    println!("  stockout       {:.1}", m.stockout_total);
    println!("  ordering       {:.1}", m.ordering_total);
    println!("service level    {:.1}%", 100.0 * m.period_service_level);
    println!("fill rate        {:.1}%", 100.0 * m.fill_rate);
    println!("disruptions      {}", m.disruptions_experienced);
    Ok(())
}
