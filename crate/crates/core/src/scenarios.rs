//! Time-indexed true demand rate and disruption probability.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioKind {
    Stationary,
    DemandShock,
    SupplyDisruption,
    Custom,
}

impl ScenarioKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::Stationary => "stationary",
            ScenarioKind::DemandShock => "demand-shock",
            ScenarioKind::SupplyDisruption => "supply-disruption",
            ScenarioKind::Custom => "custom",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stationary" => Ok(ScenarioKind::Stationary),
            "demand-shock" => Ok(ScenarioKind::DemandShock),
            "supply-disruption" => Ok(ScenarioKind::SupplyDisruption),
            "custom" => Ok(ScenarioKind::Custom),
            other => Err(Error::Configuration(format!(
                "unknown scenario `{other}` (expected stationary|demand-shock|supply-disruption|custom)"
            ))),
        }
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Inclusive period range `[start, end]` with its own `(λ, α)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: u32,
    pub end: u32,
    pub lambda: f64,
    pub alpha: f64,
}

/// Piecewise-constant truth. Outside every change region the base values
/// hold. A shock applies from `shock_period` inclusive; the disruption window
/// is inclusive at both ends; custom segments override both, later segments
/// taking precedence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSchedule {
    pub kind: ScenarioKind,
    pub base_lambda: f64,
    pub base_alpha: f64,
    pub shock_lambda: Option<f64>,
    pub shock_period: Option<u32>,
    pub disruption_alpha: Option<f64>,
    pub disruption_window: Option<(u32, u32)>,
    pub segments: Vec<Segment>,
}

pub const BASE_LAMBDA: f64 = 10.0;
pub const BASE_ALPHA: f64 = 0.02;
pub const SHOCK_PERIOD: u32 = 183;
pub const SHOCK_LAMBDA: f64 = 20.0;
pub const DISRUPTED_ALPHA: f64 = 0.15;
pub const DISRUPTION_WINDOW: (u32, u32) = (122, 244);

impl ScenarioSchedule {
    pub fn stationary() -> Self {
        Self {
            kind: ScenarioKind::Stationary,
            base_lambda: BASE_LAMBDA,
            base_alpha: BASE_ALPHA,
            shock_lambda: None,
            shock_period: None,
            disruption_alpha: None,
            disruption_window: None,
            segments: Vec::new(),
        }
    }

    pub fn demand_shock() -> Self {
        Self {
            kind: ScenarioKind::DemandShock,
            shock_lambda: Some(SHOCK_LAMBDA),
            shock_period: Some(SHOCK_PERIOD),
            ..Self::stationary()
        }
    }

    pub fn supply_disruption() -> Self {
        Self {
            kind: ScenarioKind::SupplyDisruption,
            disruption_alpha: Some(DISRUPTED_ALPHA),
            disruption_window: Some(DISRUPTION_WINDOW),
            ..Self::stationary()
        }
    }

    pub fn custom(segments: Vec<Segment>) -> Self {
        Self {
            kind: ScenarioKind::Custom,
            segments,
            ..Self::stationary()
        }
    }

    /// The built-in schedule for `kind`; `Custom` starts with no segments.
    pub fn preset(kind: ScenarioKind) -> Self {
        match kind {
            ScenarioKind::Stationary => Self::stationary(),
            ScenarioKind::DemandShock => Self::demand_shock(),
            ScenarioKind::SupplyDisruption => Self::supply_disruption(),
            ScenarioKind::Custom => Self::custom(Vec::new()),
        }
    }

    pub fn name(&self) -> &'static str {
        self.kind.as_str()
    }

    /// `(λ_t, α_t)` for period `t >= 1`.
    pub fn params_at(&self, t: u32) -> Result<(f64, f64)> {
        if t < 1 {
            return Err(Error::invalid("t", t as f64, "periods are numbered from 1"));
        }
        let mut lambda = self.base_lambda;
        let mut alpha = self.base_alpha;
        if let (Some(shock), Some(from)) = (self.shock_lambda, self.shock_period) {
            if t >= from {
                lambda = shock;
            }
        }
        if let (Some(a), Some((start, end))) = (self.disruption_alpha, self.disruption_window) {
            if (start..=end).contains(&t) {
                alpha = a;
            }
        }
        for seg in &self.segments {
            if (seg.start..=seg.end).contains(&t) {
                lambda = seg.lambda;
                alpha = seg.alpha;
            }
        }
        Ok((lambda, alpha))
    }

    pub fn validate(&self, horizon: u32) -> Result<()> {
        let rate = |name, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, v, "rates must be finite and >= 0"))
            }
        };
        let prob = |name, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::invalid(name, v, "probabilities must lie in [0, 1]"))
            }
        };
        rate("base_lambda", self.base_lambda)?;
        prob("base_alpha", self.base_alpha)?;
        if let Some(l) = self.shock_lambda {
            rate("shock_lambda", l)?;
        }
        if let Some(p) = self.shock_period {
            if p < 1 || p > horizon {
                return Err(Error::invalid(
                    "shock_period",
                    p as f64,
                    "must lie within 1..=horizon",
                ));
            }
        }
        if let Some(a) = self.disruption_alpha {
            prob("disruption_alpha", a)?;
        }
        if let Some((start, end)) = self.disruption_window {
            if start > end || start < 1 {
                return Err(Error::Configuration(format!(
                    "disruption window [{start}, {end}] is empty or starts before period 1"
                )));
            }
        }
        for seg in &self.segments {
            if seg.start > seg.end || seg.start < 1 {
                return Err(Error::Configuration(format!(
                    "segment [{}, {}] is empty or starts before period 1",
                    seg.start, seg.end
                )));
            }
            rate("segment lambda", seg.lambda)?;
            prob("segment alpha", seg.alpha)?;
        }
        Ok(())
    }
}

/// Demand-shock schedule jumping from the base rate to `target_lambda` at the
/// standard shock period.
pub fn shock_magnitude_variant(target_lambda: f64) -> Result<ScenarioSchedule> {
    if !(target_lambda > 0.0 && target_lambda.is_finite()) {
        return Err(Error::invalid(
            "target_lambda",
            target_lambda,
            "shock magnitude must be finite and > 0",
        ));
    }
    Ok(ScenarioSchedule {
        shock_lambda: Some(target_lambda),
        ..ScenarioSchedule::demand_shock()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_values() {
        assert_eq!(ScenarioSchedule::stationary().params_at(50).unwrap(), (10.0, 0.02));
        let shock = ScenarioSchedule::demand_shock();
        assert_eq!(shock.params_at(182).unwrap(), (10.0, 0.02));
        assert_eq!(shock.params_at(183).unwrap(), (20.0, 0.02));
        let dis = ScenarioSchedule::supply_disruption();
        assert_eq!(dis.params_at(121).unwrap(), (10.0, 0.02));
        assert_eq!(dis.params_at(122).unwrap(), (10.0, 0.15));
        assert_eq!(dis.params_at(244).unwrap(), (10.0, 0.15));
        assert_eq!(dis.params_at(245).unwrap(), (10.0, 0.02));
    }

    #[test]
    fn period_zero_rejected() {
        assert!(ScenarioSchedule::stationary().params_at(0).is_err());
    }

    #[test]
    fn presets_agree_with_stationary_outside_change_regions() {
        let base = ScenarioSchedule::stationary();
        let shock = ScenarioSchedule::demand_shock();
        let dis = ScenarioSchedule::supply_disruption();
        for t in 1..=365 {
            let b = base.params_at(t).unwrap();
            assert_eq!(b, base.params_at(1).unwrap());
            if t < 183 {
                assert_eq!(shock.params_at(t).unwrap(), b);
            }
            if !(122..=244).contains(&t) {
                assert_eq!(dis.params_at(t).unwrap(), b);
            }
        }
    }

    #[test]
    fn magnitude_variants() {
        let small = shock_magnitude_variant(15.0).unwrap();
        assert_eq!(small.params_at(200).unwrap().0, 15.0);
        let large = shock_magnitude_variant(25.0).unwrap();
        assert_eq!(large.params_at(183).unwrap().0, 25.0);
        let flat = shock_magnitude_variant(10.0).unwrap();
        let base = ScenarioSchedule::stationary();
        for t in 1..=365 {
            assert_eq!(flat.params_at(t).unwrap(), base.params_at(t).unwrap());
        }
        assert!(shock_magnitude_variant(0.0).is_err());
        assert!(shock_magnitude_variant(-3.0).is_err());
    }

    #[test]
    fn custom_segments_override_base() {
        let s = ScenarioSchedule::custom(vec![
            Segment { start: 10, end: 20, lambda: 30.0, alpha: 0.5 },
            Segment { start: 15, end: 15, lambda: 0.0, alpha: 1.0 },
        ]);
        assert_eq!(s.params_at(9).unwrap(), (10.0, 0.02));
        assert_eq!(s.params_at(10).unwrap(), (30.0, 0.5));
        assert_eq!(s.params_at(15).unwrap(), (0.0, 1.0));
        assert_eq!(s.params_at(21).unwrap(), (10.0, 0.02));
        s.validate(365).unwrap();
    }

    #[test]
    fn validation() {
        ScenarioSchedule::demand_shock().validate(365).unwrap();
        assert!(ScenarioSchedule::demand_shock().validate(100).is_err());
        let bad = ScenarioSchedule { disruption_window: Some((10, 5)), ..ScenarioSchedule::supply_disruption() };
        assert!(bad.validate(365).is_err());
        let bad = ScenarioSchedule { base_alpha: 1.5, ..ScenarioSchedule::stationary() };
        assert!(bad.validate(365).is_err());
    }
}
