//! Draws from each variate generator and compares sample moments with the
//! distribution's own.
//!
//! ```text
//! cargo run --release --example samplers
//! ```

use adaptive_inventory::stochastic::{
    sample_bernoulli, sample_beta, sample_gamma, sample_poisson, GeometricConvention,
    LeadTimeLaw, RngStream, StreamId,
};
use adaptive_inventory::Result;

const N: usize = 50_000;

fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

fn main() -> Result<()> {
    let mut rng = RngStream::new(1, StreamId::Demand, 0);

    for lambda in [10.0, 20.0, 80.0] {
        let xs: Vec<f64> = (0..N)
            .map(|_| sample_poisson(lambda, &mut rng).map(f64::from))
            .collect::<Result<_>>()?;
        let (m, v) = moments(&xs);
        println!("Poisson({lambda:>4})      mean {m:8.3} var {v:8.3}   (both {lambda})");
    }

    for convention in [GeometricConvention::Failures, GeometricConvention::Trials] {
        let law = LeadTimeLaw { p: 0.8, convention };
        let xs: Vec<f64> = (0..N)
            .map(|_| law.sample(&mut rng).map(f64::from))
            .collect::<Result<_>>()?;
        let (m, _) = moments(&xs);
        println!(
            "lead time ({:<8})  mean {m:8.3}              (expected {:.3})",
            convention.as_str(),
            law.mean()
        );
    }

    let (shape, rate) = (10.0, 1.0);
    let xs: Vec<f64> = (0..N)
        .map(|_| sample_gamma(shape, rate, &mut rng))
        .collect::<Result<_>>()?;
    let (m, v) = moments(&xs);
    println!("Gamma(10, 1)          mean {m:8.3} var {v:8.3}   (10, 10)");

    let (a, b) = (1.0, 49.0);
    let xs: Vec<f64> = (0..N).map(|_| sample_beta(a, b, &mut rng)).collect::<Result<_>>()?;
    let (m, _) = moments(&xs);
    println!("Beta(1, 49)           mean {m:8.4}              (0.0200)");

    let hits = (0..N)
        .map(|_| sample_bernoulli(0.15, &mut rng))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|&h| h)
        .count();
    println!("Bernoulli(0.15)       rate {:8.4}", hits as f64 / N as f64);
    Ok(())
}
