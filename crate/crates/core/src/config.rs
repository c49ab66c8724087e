//! Flat `key = value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! horizon = 365
//! scenario = custom
//! segment = 1,100,10,0.02
//! segment = 101,365,14,0.05
//! ```
//!
//! Every key is optional; omitted keys take the defaults below. `segment`
//! may repeat, every other key may appear once. Parsing checks each value
//! where it appears and reports the offending line.
//!
//! | key | default |
//! |-----|---------|
//! | `horizon` | 365 |
//! | `n_reps` | 30 |
//! | `seed` | 42 |
//! | `holding_cost`, `stockout_cost`, `fixed_order_cost` | 1, 10, 5 |
//! | `baseline_reorder_point`, `baseline_order_up_to` | 25, 50 |
//! | `lead_time_p` | 0.8 |
//! | `lead_time_convention` | `failures` (or `trials`) |
//! | `prior_demand_shape`, `prior_demand_rate` | 10, 1 |
//! | `prior_disruption_alpha`, `prior_disruption_beta` | 1, 49 |
//! | `update_period` | 7 |
//! | `optimizer_samples`, `planning_horizon` | 1000, 50 |
//! | `optimizer_mode` | `posterior` (or `point`) |
//! | `optimizer_refine`, `refine_radius` | false, 4 |
//! | `grid_reorder_min`, `grid_reorder_max`, `grid_step`, `grid_order_up_to_max` | 0, 60, 5, 120 |
//! | `scenario` | `stationary` |
//! | `base_lambda`, `base_alpha` | 10, 0.02 |
//! | `shock_lambda`, `shock_period` | per scenario |
//! | `disruption_alpha`, `disruption_window` (`start,end`) | per scenario |
//! | `segment` (`start,end,lambda,alpha`) | none |
//! | `output_dir` | `results` |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::harness::ExperimentConfig;
use crate::inventory::CostParams;
use crate::learning::PosteriorState;
use crate::optimizer::{GridSpec, SamplingMode};
use crate::policies::PolicyParams;
use crate::scenarios::{ScenarioKind, ScenarioSchedule, Segment};
use crate::stochastic::GeometricConvention;
use crate::{Error, Result};

const KEYS: &[&str] = &[
    "horizon",
    "n_reps",
    "seed",
    "holding_cost",
    "stockout_cost",
    "fixed_order_cost",
    "baseline_reorder_point",
    "baseline_order_up_to",
    "lead_time_p",
    "lead_time_convention",
    "prior_demand_shape",
    "prior_demand_rate",
    "prior_disruption_alpha",
    "prior_disruption_beta",
    "update_period",
    "optimizer_samples",
    "planning_horizon",
    "optimizer_mode",
    "optimizer_refine",
    "refine_radius",
    "grid_reorder_min",
    "grid_reorder_max",
    "grid_step",
    "grid_order_up_to_max",
    "scenario",
    "base_lambda",
    "base_alpha",
    "shock_lambda",
    "shock_period",
    "disruption_alpha",
    "disruption_window",
    "segment",
    "output_dir",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    /// Bounds the adaptive optimizer's candidate grid is built from.
    pub grid: GridSpec,
    pub n_reps: usize,
    pub seed: u64,
    pub scenario: ScenarioSchedule,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentConfig::default(),
            grid: GridSpec::default(),
            n_reps: 30,
            seed: 42,
            scenario: ScenarioSchedule::stationary(),
            output_dir: PathBuf::from("results"),
        }
    }
}

struct Entry {
    line: usize,
    value: String,
}

fn at(line: usize, message: impl Into<String>) -> Error {
    Error::ConfigParse {
        line,
        message: message.into(),
    }
}

fn parse_value<T: FromStr>(e: &Entry, key: &str, what: &str) -> Result<T> {
    e.value
        .parse()
        .map_err(|_| at(e.line, format!("`{key}` expects {what}, got `{}`", e.value)))
}

fn parse_f64(e: &Entry, key: &str) -> Result<f64> {
    let v: f64 = parse_value(e, key, "a number")?;
    if !v.is_finite() {
        return Err(at(e.line, format!("`{key}` must be finite")));
    }
    Ok(v)
}

fn parse_list<T: FromStr>(e: &Entry, key: &str, n: usize, what: &str) -> Result<Vec<T>> {
    let parts: Vec<&str> = e.value.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(at(
            e.line,
            format!("`{key}` expects {n} comma-separated values ({what}), got `{}`", e.value),
        ));
    }
    parts
        .iter()
        .map(|p| {
            p.parse()
                .map_err(|_| at(e.line, format!("`{key}` has an unparseable value `{p}`")))
        })
        .collect()
}

/// Attaches `line` to errors raised while checking an assembled value.
fn check(line: usize, r: Result<()>) -> Result<()> {
    r.map_err(|e| match e {
        Error::ConfigParse { .. } => e,
        other => at(line, other.to_string()),
    })
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Configuration(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<&str, Entry> = BTreeMap::new();
        let mut segments: Vec<Entry> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| at(line, format!("expected `key = value`, got `{content}`")))?;
            let key = key.trim();
            let value = value.trim().to_string();
            let Some(&key) = KEYS.iter().find(|k| **k == key) else {
                return Err(at(line, format!("unknown key `{key}`")));
            };
            if value.is_empty() {
                return Err(at(line, format!("`{key}` has no value")));
            }
            if key == "segment" {
                segments.push(Entry { line, value });
            } else if let Some(prev) = entries.insert(key, Entry { line, value }) {
                return Err(at(line, format!("`{key}` already set on line {}", prev.line)));
            }
        }

        let mut cfg = RunConfig::default();
        let line_of = |k: &str| entries.get(k).map_or(0, |e| e.line);

        if let Some(e) = entries.get("horizon") {
            cfg.experiment.horizon = parse_value(e, "horizon", "a positive integer")?;
            if cfg.experiment.horizon == 0 {
                return Err(at(e.line, "`horizon` must be at least 1"));
            }
        }
        if let Some(e) = entries.get("n_reps") {
            cfg.n_reps = parse_value(e, "n_reps", "an integer")?;
            if cfg.n_reps < 2 {
                return Err(at(e.line, "`n_reps` must be at least 2"));
            }
        }
        if let Some(e) = entries.get("seed") {
            cfg.seed = parse_value(e, "seed", "an unsigned 64-bit integer")?;
        }

        let costs = &mut cfg.experiment.costs;
        for (key, slot) in [
            ("holding_cost", &mut costs.holding),
            ("stockout_cost", &mut costs.stockout),
            ("fixed_order_cost", &mut costs.fixed_order),
        ] {
            if let Some(e) = entries.get(key) {
                *slot = parse_f64(e, key)?;
                if *slot < 0.0 {
                    return Err(at(e.line, format!("`{key}` must be non-negative")));
                }
            }
        }
        let c = cfg.experiment.costs;
        check(
            line_of("stockout_cost").max(line_of("holding_cost")),
            CostParams::new(c.holding, c.stockout, c.fixed_order).map(|_| ()),
        )?;

        let baseline = &mut cfg.experiment.baseline;
        if let Some(e) = entries.get("baseline_reorder_point") {
            baseline.reorder_point = parse_value(e, "baseline_reorder_point", "an integer")?;
        }
        if let Some(e) = entries.get("baseline_order_up_to") {
            baseline.order_up_to = parse_value(e, "baseline_order_up_to", "an integer")?;
        }
        let b = cfg.experiment.baseline;
        check(
            line_of("baseline_order_up_to").max(line_of("baseline_reorder_point")),
            PolicyParams::new(b.reorder_point, b.order_up_to).map(|_| ()),
        )?;

        let lead = &mut cfg.experiment.lead_time;
        if let Some(e) = entries.get("lead_time_p") {
            lead.p = parse_f64(e, "lead_time_p")?;
            check(e.line, lead.validate())?;
        }
        if let Some(e) = entries.get("lead_time_convention") {
            lead.convention = check_parse::<GeometricConvention>(e)?;
        }

        let prior = &mut cfg.experiment.adaptive.prior;
        for (key, slot) in [
            ("prior_demand_shape", &mut prior.demand_shape),
            ("prior_demand_rate", &mut prior.demand_rate),
            ("prior_disruption_alpha", &mut prior.disruption_alpha),
            ("prior_disruption_beta", &mut prior.disruption_beta),
        ] {
            if let Some(e) = entries.get(key) {
                *slot = parse_f64(e, key)?;
                if *slot <= 0.0 {
                    return Err(at(e.line, format!("`{key}` must be positive")));
                }
            }
        }
        let p = cfg.experiment.adaptive.prior;
        PosteriorState::new(
            p.demand_shape,
            p.demand_rate,
            p.disruption_alpha,
            p.disruption_beta,
        )?;

        let adaptive = &mut cfg.experiment.adaptive;
        if let Some(e) = entries.get("update_period") {
            adaptive.update_period = parse_value(e, "update_period", "an integer")?;
            if adaptive.update_period == 0 {
                return Err(at(e.line, "`update_period` must be at least 1"));
            }
        }
        let opt = &mut adaptive.optimizer;
        if let Some(e) = entries.get("optimizer_samples") {
            opt.num_samples = parse_value(e, "optimizer_samples", "an integer")?;
            if opt.num_samples == 0 {
                return Err(at(e.line, "`optimizer_samples` must be at least 1"));
            }
        }
        if let Some(e) = entries.get("planning_horizon") {
            opt.planning_horizon = parse_value(e, "planning_horizon", "an integer")?;
            if opt.planning_horizon == 0 {
                return Err(at(e.line, "`planning_horizon` must be at least 1"));
            }
        }
        if let Some(e) = entries.get("optimizer_mode") {
            opt.mode = check_parse::<SamplingMode>(e)?;
        }
        if let Some(e) = entries.get("optimizer_refine") {
            opt.refine = parse_value(e, "optimizer_refine", "true or false")?;
        }
        if let Some(e) = entries.get("refine_radius") {
            opt.refine_radius = parse_value(e, "refine_radius", "an integer")?;
        }
        for (key, slot) in [
            ("grid_reorder_min", &mut cfg.grid.reorder_min),
            ("grid_reorder_max", &mut cfg.grid.reorder_max),
            ("grid_step", &mut cfg.grid.step),
            ("grid_order_up_to_max", &mut cfg.grid.order_up_to_max),
        ] {
            if let Some(e) = entries.get(key) {
                *slot = parse_value(e, key, "an integer")?;
            }
        }
        let grid_line = [
            "grid_reorder_min",
            "grid_reorder_max",
            "grid_step",
            "grid_order_up_to_max",
        ]
        .iter()
        .map(|k| line_of(k))
        .max()
        .unwrap_or(0);
        opt.grid = cfg.grid.candidates().map_err(|e| at(grid_line, e.to_string()))?;
        opt.lead_time = cfg.experiment.lead_time;

        if let Some(e) = entries.get("scenario") {
            cfg.scenario = ScenarioSchedule::preset(check_parse::<ScenarioKind>(e)?);
        }
        let sc = &mut cfg.scenario;
        for (key, slot) in [
            ("base_lambda", &mut sc.base_lambda),
            ("base_alpha", &mut sc.base_alpha),
        ] {
            if let Some(e) = entries.get(key) {
                *slot = parse_f64(e, key)?;
            }
        }
        if let Some(e) = entries.get("shock_lambda") {
            sc.shock_lambda = Some(parse_f64(e, "shock_lambda")?);
        }
        if let Some(e) = entries.get("shock_period") {
            sc.shock_period = Some(parse_value(e, "shock_period", "an integer")?);
        }
        if let Some(e) = entries.get("disruption_alpha") {
            sc.disruption_alpha = Some(parse_f64(e, "disruption_alpha")?);
        }
        if let Some(e) = entries.get("disruption_window") {
            let w: Vec<u32> = parse_list(e, "disruption_window", 2, "start,end")?;
            sc.disruption_window = Some((w[0], w[1]));
        }
        for e in &segments {
            let v: Vec<f64> = parse_list(e, "segment", 4, "start,end,lambda,alpha")?;
            let bounds_ok = v[..2].iter().all(|x| x.fract() == 0.0 && *x >= 0.0 && *x <= u32::MAX as f64);
            if !bounds_ok {
                return Err(at(e.line, "segment start and end must be non-negative integers"));
            }
            let seg = Segment {
                start: v[0] as u32,
                end: v[1] as u32,
                lambda: v[2],
                alpha: v[3],
            };
            let probe = ScenarioSchedule::custom(vec![seg]);
            check(e.line, probe.validate(cfg.experiment.horizon))?;
            sc.segments.push(seg);
        }
        if sc.kind == ScenarioKind::Custom && sc.segments.is_empty() {
            return Err(at(line_of("scenario"), "scenario `custom` needs at least one `segment`"));
        }
        let scenario_line = [
            "scenario",
            "base_lambda",
            "base_alpha",
            "shock_lambda",
            "shock_period",
            "disruption_alpha",
            "disruption_window",
            "horizon",
        ]
        .iter()
        .map(|k| line_of(k))
        .max()
        .unwrap_or(0);
        check(scenario_line, sc.validate(cfg.experiment.horizon))?;

        if let Some(e) = entries.get("output_dir") {
            cfg.output_dir = PathBuf::from(&e.value);
        }

        cfg.experiment.validate()?;
        Ok(cfg)
    }

    /// Writes every key explicitly. Parsing the result gives back an equal
    /// config, and writing that again gives the same text.
    pub fn to_config_string(&self) -> String {
        let x = &self.experiment;
        let p = &x.adaptive.prior;
        let o = &x.adaptive.optimizer;
        let sc = &self.scenario;
        let mut out = String::new();
        let mut kv = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("horizon", &x.horizon);
        kv("n_reps", &self.n_reps);
        kv("seed", &self.seed);
        kv("holding_cost", &x.costs.holding);
        kv("stockout_cost", &x.costs.stockout);
        kv("fixed_order_cost", &x.costs.fixed_order);
        kv("baseline_reorder_point", &x.baseline.reorder_point);
        kv("baseline_order_up_to", &x.baseline.order_up_to);
        kv("lead_time_p", &x.lead_time.p);
        kv("lead_time_convention", &x.lead_time.convention.as_str());
        kv("prior_demand_shape", &p.demand_shape);
        kv("prior_demand_rate", &p.demand_rate);
        kv("prior_disruption_alpha", &p.disruption_alpha);
        kv("prior_disruption_beta", &p.disruption_beta);
        kv("update_period", &x.adaptive.update_period);
        kv("optimizer_samples", &o.num_samples);
        kv("planning_horizon", &o.planning_horizon);
        kv("optimizer_mode", &o.mode.as_str());
        kv("optimizer_refine", &o.refine);
        kv("refine_radius", &o.refine_radius);
        kv("grid_reorder_min", &self.grid.reorder_min);
        kv("grid_reorder_max", &self.grid.reorder_max);
        kv("grid_step", &self.grid.step);
        kv("grid_order_up_to_max", &self.grid.order_up_to_max);
        kv("scenario", &sc.name());
        kv("base_lambda", &sc.base_lambda);
        kv("base_alpha", &sc.base_alpha);
        if let Some(v) = sc.shock_lambda {
            kv("shock_lambda", &v);
        }
        if let Some(v) = sc.shock_period {
            kv("shock_period", &v);
        }
        if let Some(v) = sc.disruption_alpha {
            kv("disruption_alpha", &v);
        }
        if let Some((a, b)) = sc.disruption_window {
            kv("disruption_window", &format!("{a},{b}"));
        }
        for s in &sc.segments {
            kv("segment", &format!("{},{},{},{}", s.start, s.end, s.lambda, s.alpha));
        }
        kv("output_dir", &self.output_dir.display());
        out
    }
}

fn check_parse<T: FromStr<Err = Error>>(e: &Entry) -> Result<T> {
    e.value.parse().map_err(|err: Error| at(e.line, err.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = RunConfig::parse("# nothing\n\n").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.experiment.adaptive.optimizer.grid.len(), 234);
        assert_eq!(cfg.experiment.baseline, PolicyParams::new(25, 50).unwrap());
    }

    #[test]
    fn overrides_and_segments() {
        let cfg = RunConfig::parse(
            "horizon = 100\nscenario = custom # inline\nsegment = 1,50,10,0.02\nsegment = 51,100,14,0.1\nlead_time_convention = trials\n",
        )
        .unwrap();
        assert_eq!(cfg.experiment.horizon, 100);
        assert_eq!(cfg.scenario.kind, ScenarioKind::Custom);
        assert_eq!(cfg.scenario.params_at(60).unwrap(), (14.0, 0.1));
        assert_eq!(cfg.experiment.adaptive.optimizer.lead_time.convention, GeometricConvention::Trials);
    }

    fn line_of(text: &str) -> usize {
        match RunConfig::parse(text).unwrap_err() {
            Error::ConfigParse { line, .. } => line,
            other => panic!("expected a line-numbered error, got {other}"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(line_of("horizon = 10\nbogus = 1\n"), 2);
        assert_eq!(line_of("\n\nholding_cost = abc"), 3);
        assert_eq!(line_of("holding_cost = 2\nstockout_cost = 1\n"), 2);
        assert_eq!(line_of("baseline_order_up_to = 20\n"), 1);
        assert_eq!(line_of("lead_time_p = 0\n"), 1);
        assert_eq!(line_of("scenario = weird\n"), 1);
        assert_eq!(line_of("scenario = custom\n"), 1);
        assert_eq!(line_of("seed = 1\nseed = 2\n"), 2);
        assert_eq!(line_of("x\n"), 1);
        assert_eq!(line_of("segment = 1,2,3\n"), 1);
        assert_eq!(line_of("segment = 1,2,3,1.5\n"), 1);
        assert_eq!(line_of("n_reps = 1\n"), 1);
        assert_eq!(line_of("grid_step = 0\n"), 1);
    }

    #[test]
    fn round_trip_is_idempotent() {
        let text = "seed = 7\nscenario = supply-disruption\nholding_cost = 0.3\nsegment = 5,9,12.5,0.1\noptimizer_mode = point\n";
        let cfg = RunConfig::parse(text).unwrap();
        let once = cfg.to_config_string();
        let again = RunConfig::parse(&once).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_config_string(), once);
    }
}
