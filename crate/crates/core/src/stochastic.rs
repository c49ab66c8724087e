//! Seedable random streams and the variate generators the model draws from.
//!
//! Every stream is a ChaCha8 generator keyed by a SplitMix64 digest of
//! `(seed, stream id, replication)`. Keys are a pure function of those
//! labels, so streams can be created in any order, on any thread, and two
//! streams with different labels never share state. Sub-streams (used by the
//! optimizer for per-scenario randomness) extend the key digest with an index.
//!
//! The generators are implemented here rather than taken from a distribution
//! crate so the exact draw sequence for a given key is pinned by this file:
//!
//! * Poisson: sequential inversion for `lambda < 30`, Hörmann's PTRS
//!   transformed rejection above.
//! * Geometric lead time: closed-form inversion.
//! * Gamma: Marsaglia–Tsang, with the `U^(1/shape)` boost for `shape < 1`.
//! * Beta: ratio of two gammas.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::special::ln_gamma;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StreamId {
    Demand,
    LeadTime,
    Disruption,
    Optimizer,
}

impl StreamId {
    fn code(self) -> u64 {
        match self {
            StreamId::Demand => 0x64656d616e64,
            StreamId::LeadTime => 0x6c65616474696d65,
            StreamId::Disruption => 0x6469737275707420,
            StreamId::Optimizer => 0x6f7074696d697a65,
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn digest(words: &[u64]) -> [u64; 4] {
    let mut state = 0x243f_6a88_85a3_08d3;
    let mut h = 0u64;
    for &w in words {
        state ^= w;
        h = splitmix64(&mut state);
        state ^= h.rotate_left(17);
    }
    let mut out = [0u64; 4];
    let mut s = h ^ state;
    for o in out.iter_mut() {
        *o = splitmix64(&mut s);
    }
    out
}

fn rng_from_key(key: &[u64; 4]) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    for (chunk, word) in bytes.chunks_exact_mut(8).zip(key) {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}

/// A named, reproducible random stream.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: StreamId,
    key: [u64; 4],
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: StreamId, replication: u64) -> Self {
        let key = digest(&[seed, stream_id.code(), replication]);
        Self {
            seed,
            stream_id,
            key,
            rng: rng_from_key(&key),
        }
    }

    /// Independent child stream. Depends only on this stream's labels and
    /// `index`, never on how many values have been drawn from it.
    pub fn substream(&self, index: u64) -> Self {
        let key = digest(&[self.key[0], self.key[1], self.key[2], self.key[3], index]);
        Self {
            seed: self.seed,
            stream_id: self.stream_id,
            key,
            rng: rng_from_key(&key),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> StreamId {
        self.stream_id
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    fn standard_normal(&mut self) -> f64 {
        // Marsaglia polar method; the second variate is discarded so the
        // stream carries no hidden cache.
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                return u * (-2.0 * s.ln() / s).sqrt();
            }
        }
    }
}

pub fn sample_poisson(lambda: f64, rng: &mut RngStream) -> Result<u32> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::invalid("lambda", lambda, "must be finite and >= 0"));
    }
    if lambda == 0.0 {
        return Ok(0);
    }
    if lambda < 30.0 {
        Ok(poisson_inversion(lambda, rng))
    } else {
        Ok(poisson_ptrs(lambda, rng))
    }
}

fn poisson_inversion(lambda: f64, rng: &mut RngStream) -> u32 {
    let u = rng.uniform();
    let mut k = 0u32;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    while u > cdf && p > 0.0 {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
    }
    k
}

// Hörmann (1993), "The transformed rejection method for generating Poisson
// random variables".
fn poisson_ptrs(lambda: f64, rng: &mut RngStream) -> u32 {
    let slam = lambda.sqrt();
    let loglam = lambda.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.uniform() - 0.5;
        let v = rng.uniform_open();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u32;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        if v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln()
            <= -lambda + k * loglam - ln_gamma(k + 1.0)
        {
            return k as u32;
        }
    }
}

/// Lead time `1 + G`, where `G` counts failures before the first success at
/// success probability `p`.
pub fn sample_lead_time(p: f64, rng: &mut RngStream) -> Result<u32> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid("p", p, "must lie in (0, 1]"));
    }
    if p == 1.0 {
        return Ok(1);
    }
    let failures = (rng.uniform_open().ln() / (1.0 - p).ln()).floor();
    Ok((failures as u32).saturating_add(1))
}

/// How the geometric part of the lead time is counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeometricConvention {
    /// Failures before the first success, support `{0, 1, …}`:
    /// `L = 1 + G`, mean `1 + (1 − p) / p`.
    #[default]
    Failures,
    /// Trials up to and including the first success, support `{1, 2, …}`:
    /// `L = 1 + G`, mean `1 + 1 / p`. This is what NumPy's `geometric`
    /// returns.
    Trials,
}

impl GeometricConvention {
    pub fn as_str(&self) -> &'static str {
        match self {
            GeometricConvention::Failures => "failures",
            GeometricConvention::Trials => "trials",
        }
    }
}

impl std::str::FromStr for GeometricConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "failures" => Ok(GeometricConvention::Failures),
            "trials" => Ok(GeometricConvention::Trials),
            other => Err(Error::Configuration(format!(
                "unknown geometric convention `{other}` (expected failures|trials)"
            ))),
        }
    }
}

/// Lead-time law `1 + Geometric(p)` under a counting convention.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeadTimeLaw {
    pub p: f64,
    pub convention: GeometricConvention,
}

impl Default for LeadTimeLaw {
    fn default() -> Self {
        Self {
            p: 0.8,
            convention: GeometricConvention::Failures,
        }
    }
}

impl LeadTimeLaw {
    pub fn validate(&self) -> Result<()> {
        if self.p > 0.0 && self.p <= 1.0 {
            Ok(())
        } else {
            Err(Error::invalid("lead_time_p", self.p, "must lie in (0, 1]"))
        }
    }

    pub fn mean(&self) -> f64 {
        match self.convention {
            GeometricConvention::Failures => 1.0 + (1.0 - self.p) / self.p,
            GeometricConvention::Trials => 1.0 + 1.0 / self.p,
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> Result<u32> {
        let lead = sample_lead_time(self.p, rng)?;
        Ok(match self.convention {
            GeometricConvention::Failures => lead,
            GeometricConvention::Trials => lead + 1,
        })
    }
}

pub fn sample_bernoulli(alpha: f64, rng: &mut RngStream) -> Result<bool> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid("alpha", alpha, "must lie in [0, 1]"));
    }
    Ok(rng.uniform() < alpha)
}

/// Gamma variate in the shape–rate parameterization (mean `shape / rate`).
pub fn sample_gamma(shape: f64, rate: f64, rng: &mut RngStream) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite()) {
        return Err(Error::invalid("shape", shape, "must be finite and > 0"));
    }
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::invalid("rate", rate, "must be finite and > 0"));
    }
    Ok(standard_gamma(shape, rng) / rate)
}

fn standard_gamma(shape: f64, rng: &mut RngStream) -> f64 {
    if shape < 1.0 {
        let boost = rng.uniform_open().powf(1.0 / shape);
        return standard_gamma(shape + 1.0, rng) * boost;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = rng.standard_normal();
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = rng.uniform_open();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

pub fn sample_beta(a: f64, b: f64, rng: &mut RngStream) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid("a", a, "must be finite and > 0"));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::invalid("b", b, "must be finite and > 0"));
    }
    let x = standard_gamma(a, rng);
    let y = standard_gamma(b, rng);
    let sum = x + y;
    if sum == 0.0 {
        // both gammas underflowed (tiny shapes): fall back to the limiting
        // two-point law
        return Ok(if rng.uniform() < a / (a + b) { 1.0 } else { 0.0 });
    }
    Ok(x / sum)
}
