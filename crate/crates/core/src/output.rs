//! File formats: per-period trace CSV, run summary JSON, comparison CSV/JSON
//! and plot-ready series.
//!
//! Trace columns, in order:
//!
//! ```text
//! period,lambda_true,alpha_true,demand,sales,lost_units,on_hand_end,order_qty,
//! order_placed,sampled_lead_time,disrupted,active_s,active_S,lambda_hat,
//! alpha_hat,holding_cost,stockout_cost,ordering_cost,total_cost
//! ```
//!
//! Flags are `0`/`1`, estimates are empty for a static policy, and reals are
//! written with 17 significant digits so they read back bit for bit.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::harness::{ComparisonResult, MeanMetrics, RobustnessRow, RunMetrics, SensitivityReport};
use crate::inventory::PeriodRecord;
use crate::learning::PosteriorState;
use crate::policies::PolicyParams;
use crate::{Error, Result};

pub const TRACE_COLUMNS: [&str; 19] = [
    "period",
    "lambda_true",
    "alpha_true",
    "demand",
    "sales",
    "lost_units",
    "on_hand_end",
    "order_qty",
    "order_placed",
    "sampled_lead_time",
    "disrupted",
    "active_s",
    "active_S",
    "lambda_hat",
    "alpha_hat",
    "holding_cost",
    "stockout_cost",
    "ordering_cost",
    "total_cost",
];

pub const COMPARISON_COLUMNS: [&str; 19] = [
    "section",
    "label",
    "scenario",
    "policy",
    "n",
    "total_cost",
    "cost_per_period",
    "period_service_level",
    "fill_rate",
    "avg_inventory",
    "stockout_events",
    "holding_total",
    "stockout_total",
    "ordering_total",
    "disruptions_experienced",
    "percent_change",
    "mean_cost_difference",
    "t_statistic",
    "p_value",
];

/// C's `%.17g`.
pub fn format_g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let fixed = format!("{:.*}", (16 - exp) as usize, x);
        strip_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip_zeros(mantissa), exp.abs())
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_g17).unwrap_or_default()
}

pub fn write_trace_csv<W: Write>(out: W, trace: &[PeriodRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS).map_err(csv_err)?;
    for r in trace {
        w.write_record([
            r.period.to_string(),
            format_g17(r.lambda_true),
            format_g17(r.alpha_true),
            r.demand.to_string(),
            r.sales.to_string(),
            r.lost_units.to_string(),
            r.on_hand_end.to_string(),
            r.order_qty.to_string(),
            flag(r.order_placed).into(),
            r.sampled_lead_time.to_string(),
            flag(r.disrupted).into(),
            r.active_s.to_string(),
            r.active_order_up_to.to_string(),
            opt(r.lambda_hat),
            opt(r.alpha_hat),
            format_g17(r.holding_cost),
            format_g17(r.stockout_cost),
            format_g17(r.ordering_cost),
            format_g17(r.total_cost),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Malformed(format!("csv: {other:?}")),
    }
}

pub fn read_trace_csv<R: Read>(input: R) -> Result<Vec<PeriodRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.iter().ne(TRACE_COLUMNS) {
        return Err(Error::Malformed(format!(
            "trace header does not match the expected columns: {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut trace = Vec::new();
    for (i, row) in rd.records().enumerate() {
        let row = row.map_err(csv_err)?;
        let line = i + 2;
        let field = |c: usize| -> &str { row.get(c).unwrap_or("") };
        fn num<T: std::str::FromStr>(s: &str, line: usize, col: &str) -> Result<T> {
            s.parse()
                .map_err(|_| Error::Malformed(format!("trace line {line}: bad `{col}` value `{s}`")))
        }
        let u = |c: usize| num::<u32>(field(c), line, TRACE_COLUMNS[c]);
        let f = |c: usize| num::<f64>(field(c), line, TRACE_COLUMNS[c]);
        let b = |c: usize| match field(c) {
            "0" => Ok(false),
            "1" => Ok(true),
            s => Err(Error::Malformed(format!(
                "trace line {line}: bad `{}` flag `{s}`",
                TRACE_COLUMNS[c]
            ))),
        };
        let o = |c: usize| match field(c) {
            "" => Ok(None),
            s => num::<f64>(s, line, TRACE_COLUMNS[c]).map(Some),
        };
        trace.push(PeriodRecord {
            period: u(0)?,
            lambda_true: f(1)?,
            alpha_true: f(2)?,
            demand: u(3)?,
            sales: u(4)?,
            lost_units: u(5)?,
            on_hand_end: u(6)?,
            order_qty: u(7)?,
            order_placed: b(8)?,
            sampled_lead_time: u(9)?,
            disrupted: b(10)?,
            active_s: u(11)?,
            active_order_up_to: u(12)?,
            lambda_hat: o(13)?,
            alpha_hat: o(14)?,
            holding_cost: f(15)?,
            stockout_cost: f(16)?,
            ordering_cost: f(17)?,
            total_cost: f(18)?,
        });
    }
    Ok(trace)
}

/// Metrics JSON written next to a single-run trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: String,
    pub policy: String,
    pub seed: u64,
    pub replication: u64,
    pub metrics: RunMetrics,
    pub final_params: PolicyParams,
    pub final_posterior: Option<PosteriorState>,
    pub reoptimizations: u32,
}

/// Per-scenario comparison without the per-replication detail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub section: String,
    pub label: String,
    pub scenario: String,
    pub n: usize,
    pub baseline: MeanMetrics,
    pub adaptive: MeanMetrics,
    pub mean_cost_difference: f64,
    pub percent_change: f64,
    pub service_level_change: f64,
    pub t_statistic: f64,
    pub p_value: f64,
    /// Per-replication `baseline − adaptive` total cost.
    pub differences: Vec<f64>,
}

impl ComparisonEntry {
    pub fn new(section: &str, label: &str, r: &ComparisonResult) -> Self {
        Self {
            section: section.into(),
            label: label.into(),
            scenario: r.scenario.clone(),
            n: r.n,
            baseline: r.baseline,
            adaptive: r.adaptive,
            mean_cost_difference: r.mean_cost_difference,
            percent_change: r.percent_change,
            service_level_change: r.service_level_change(),
            t_statistic: r.t_statistic,
            p_value: r.p_value,
            differences: r
                .replications
                .iter()
                .map(|o| o.baseline.total_cost - o.adaptive.total_cost)
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub seed: u64,
    pub n_reps: usize,
    /// Static policy under the stationary scenario, for reading the other
    /// scenarios against a common reference.
    pub stationary_baseline_reference: Option<MeanMetrics>,
    pub entries: Vec<ComparisonEntry>,
    pub rejected_variations: Vec<(String, String)>,
}

impl ComparisonReport {
    pub fn push_main(&mut self, r: &ComparisonResult) {
        self.entries.push(ComparisonEntry::new("main", &r.scenario, r));
    }

    pub fn push_robustness(&mut self, rows: &[RobustnessRow]) {
        for row in rows {
            let label = format!("lambda={}", row.magnitude);
            self.entries
                .push(ComparisonEntry::new("robustness", &label, &row.result));
        }
    }

    pub fn push_sensitivity(&mut self, report: &SensitivityReport) {
        for row in &report.rows {
            self.entries
                .push(ComparisonEntry::new("sensitivity", &row.variation, &row.result));
        }
        self.rejected_variations.extend(
            report
                .rejected
                .iter()
                .map(|r| (r.variation.clone(), r.reason.clone())),
        );
    }

    /// Two rows per entry, static then adaptive; test columns are filled on
    /// the adaptive row only.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(COMPARISON_COLUMNS).map_err(csv_err)?;
        for e in &self.entries {
            for (policy, m, adaptive) in [("static", &e.baseline, false), ("adaptive", &e.adaptive, true)] {
                let mut row = vec![
                    e.section.clone(),
                    e.label.clone(),
                    e.scenario.clone(),
                    policy.to_string(),
                    e.n.to_string(),
                ];
                row.extend(
                    [
                        m.total_cost,
                        m.cost_per_period,
                        m.period_service_level,
                        m.fill_rate,
                        m.avg_inventory,
                        m.stockout_events,
                        m.holding_total,
                        m.stockout_total,
                        m.ordering_total,
                        m.disruptions_experienced,
                    ]
                    .map(format_g17),
                );
                let tests = [e.percent_change, e.mean_cost_difference, e.t_statistic, e.p_value];
                row.extend(tests.map(|v| if adaptive { format_g17(v) } else { String::new() }));
                w.write_record(&row).map_err(csv_err)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    Convergence,
    Adaptation,
    Performance,
}

impl PlotKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PlotKind::Convergence => "convergence",
            PlotKind::Adaptation => "adaptation",
            PlotKind::Performance => "performance",
        }
    }

    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            PlotKind::Convergence => &["series", "period", "lambda_hat", "alpha_hat", "lambda_true", "alpha_true"],
            PlotKind::Adaptation => &["series", "period", "active_s", "active_S", "on_hand_end"],
            PlotKind::Performance => &["series", "period", "cumulative_cost"],
        }
    }
}

impl std::str::FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "convergence" => Ok(PlotKind::Convergence),
            "adaptation" => Ok(PlotKind::Adaptation),
            "performance" => Ok(PlotKind::Performance),
            other => Err(Error::Configuration(format!(
                "unknown plot kind `{other}` (expected convergence|adaptation|performance)"
            ))),
        }
    }
}

/// Long-format series, one block per named trace.
pub fn write_plot_data<W: Write>(out: W, kind: PlotKind, traces: &[(String, Vec<PeriodRecord>)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(kind.columns()).map_err(csv_err)?;
    for (name, trace) in traces {
        let mut cumulative = 0.0;
        for r in trace {
            let row: Vec<String> = match kind {
                PlotKind::Convergence => {
                    let (Some(lh), Some(ah)) = (r.lambda_hat, r.alpha_hat) else {
                        return Err(Error::Malformed(format!(
                            "trace `{name}` has no posterior estimates (static policy?)"
                        )));
                    };
                    vec![
                        name.clone(),
                        r.period.to_string(),
                        format_g17(lh),
                        format_g17(ah),
                        format_g17(r.lambda_true),
                        format_g17(r.alpha_true),
                    ]
                }
                PlotKind::Adaptation => vec![
                    name.clone(),
                    r.period.to_string(),
                    r.active_s.to_string(),
                    r.active_order_up_to.to_string(),
                    r.on_hand_end.to_string(),
                ],
                PlotKind::Performance => {
                    cumulative += r.total_cost;
                    vec![name.clone(), r.period.to_string(), format_g17(cumulative)]
                }
            };
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_c_printf() {
        assert_eq!(format_g17(35.0), "35");
        assert_eq!(format_g17(0.02), "0.02");
        assert_eq!(format_g17(0.1), "0.10000000000000001");
        assert_eq!(format_g17(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(format_g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(format_g17(1e20), "1e+20");
        assert_eq!(format_g17(-2.5), "-2.5");
        assert_eq!(format_g17(0.0), "0");
    }

    #[test]
    fn g17_round_trips() {
        for x in [0.1, 1.0 / 3.0, 10.090909090909092, 6.02e23, 5e-324, f64::MAX] {
            assert_eq!(format_g17(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn plot_kind_names() {
        for k in [PlotKind::Convergence, PlotKind::Adaptation, PlotKind::Performance] {
            assert_eq!(k.as_str().parse::<PlotKind>().unwrap(), k);
        }
        assert!("scatter".parse::<PlotKind>().is_err());
    }
}
