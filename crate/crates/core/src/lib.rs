//! Static versus adaptive (s,S) inventory control.
//!
//! A single-product, lost-sales inventory system with Poisson demand,
//! stochastic lead times and Bernoulli supply disruptions. Two controllers
//! are compared under common random numbers:
//!
//! * a static (s,S) policy fixed at construction, and
//! * an adaptive policy that keeps conjugate Gamma/Beta posteriors over the
//!   demand rate and disruption probability and re-optimizes (s,S) every
//!   `N` periods by sample average approximation over posterior draws.
//!
//! Module map:
//!
//! | module        | contents                                              |
//! |---------------|-------------------------------------------------------|
//! | [`stochastic`]| named, seedable random streams and variate samplers   |
//! | [`inventory`] | system state, the per-period event sequence, costs    |
//! | [`policies`]  | (s,S) decision rule and the static/adaptive controller|
//! | [`learning`]  | Gamma-Poisson and Beta-Bernoulli posterior updates    |
//! | [`optimizer`] | simulation-based (s,S) grid search with CRN           |
//! | [`scenarios`] | time-indexed true parameters for each experiment      |
//! | [`harness`]   | replications, metrics, paired t-tests, sweeps         |
//! | [`config`]    | flat `key = value` run configuration                  |
//! | [`output`]    | CSV/JSON writers and plot-data extraction             |
//! | [`cli`]       | the `adaptive-inv` command-line front end             |

pub mod cli;
pub mod config;
mod error;
pub mod harness;
pub mod inventory;
pub mod learning;
pub mod optimizer;
pub mod output;
pub mod policies;
pub mod scenarios;
pub mod special;
pub mod stochastic;

pub use error::{Error, Result};
