//! Demand-shock experiments at increasing post-shock rates.

use adaptive_inventory::harness::{robustness_sweep, ExperimentConfig};

fn main() -> adaptive_inventory::Result<()> {
    let mut config = ExperimentConfig::default();
    config.adaptive.optimizer.num_samples = 100;

    let rows = robustness_sweep(&[15.0, 20.0, 25.0], 8, 42, &config)?;
    for row in rows {
        let r = &row.result;
        println!(
            "λ after shock {:>4}: static {:>9.1}  adaptive {:>9.1}  change {:>6.1}%  p {:.2e}",
            row.magnitude, r.baseline.total_cost, r.adaptive.total_cost, r.percent_change, r.p_value
        );
    }
    Ok(())
}
