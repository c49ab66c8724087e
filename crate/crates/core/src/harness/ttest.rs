use serde::{Deserialize, Serialize};

use crate::special::student_t_two_sided;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub std_dev: f64,
    pub t_statistic: f64,
    /// Two-sided, Student-t with n − 1 degrees of freedom.
    pub p_value: f64,
}

/// Paired t-test on per-replication differences.
pub fn paired_t_test(differences: &[f64]) -> Result<TTest> {
    let n = differences.len();
    if n < 2 {
        return Err(Error::invalid(
            "n",
            n as f64,
            "a paired t-test needs at least two differences",
        ));
    }
    if let Some(bad) = differences.iter().find(|d| !d.is_finite()) {
        return Err(Error::invalid("difference", *bad, "must be finite"));
    }
    if differences.iter().all(|&d| d == differences[0]) {
        return Err(Error::DegenerateSample("all paired differences are identical"));
    }
    let nf = n as f64;
    let mean = differences.iter().sum::<f64>() / nf;
    let ss: f64 = differences.iter().map(|d| (d - mean) * (d - mean)).sum();
    let std_dev = (ss / (nf - 1.0)).sqrt();
    let t_statistic = mean / (std_dev / nf.sqrt());
    let p_value = student_t_two_sided(t_statistic, nf - 1.0);
    Ok(TTest {
        n,
        mean,
        std_dev,
        t_statistic,
        p_value,
    })
}
