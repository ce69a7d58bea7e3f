//! JSON run configuration.
//!
//! Strictly validated before any computation: unknown keys are rejected and
//! every referenced block is checked against the command that uses it. See
//! the README for the schema and a worked example per command.

use crate::bsb::{GridSpec, Scheme, Side, DEFAULT_DOMAIN_WIDTH, DEFAULT_N_SPACE, DEFAULT_N_TIME};
use crate::error::{Error, Result};
use crate::hedge::HedgeSide;
use crate::market::{MarketSpec, MeanBand, RateCurve, VolatilityBand};
use crate::payoff::MonitoringSchedule;
use crate::sim::{DriftPolicy, VolPolicy};
use serde::Deserialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub market: MarketConfig,
    /// Payoff source text; required by price, price-path-dep, hedge and
    /// spread.
    pub payoff: Option<String>,
    /// Monitoring dates for path-dependent pricing; must end at maturity.
    pub schedule: Option<Vec<f64>>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub price: Option<PriceBlock>,
    pub hedge: Option<HedgeBlock>,
    pub simulate: Option<SimulateBlock>,
    pub parity: Option<ParityBlock>,
    pub band_stats: Option<BandStatsBlock>,
}

impl RunConfig {
    pub fn validate_version(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        Ok(())
    }

    pub fn market_spec(&self) -> Result<MarketSpec> {
        self.market.to_spec()
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        let g = self.grid.to_spec();
        g.validate()?;
        Ok(g)
    }

    pub fn payoff_text(&self) -> Result<&str> {
        self.payoff
            .as_deref()
            .ok_or_else(|| Error::Config("this command requires a `payoff` entry".to_string()))
    }

    pub fn schedule(&self, maturity: f64) -> Result<MonitoringSchedule> {
        let dates = self
            .schedule
            .clone()
            .ok_or_else(|| Error::Config("this command requires a `schedule` entry".to_string()))?;
        MonitoringSchedule::new(dates, maturity)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketConfig {
    pub spot: f64,
    pub sigma_lo: f64,
    pub sigma_hi: f64,
    pub mu_lo: Option<f64>,
    pub mu_hi: Option<f64>,
    /// Flat short rate; exclusive with `rate_segments`.
    pub rate: Option<f64>,
    /// Piecewise-constant segments `[t_start, rate]` starting at 0.
    pub rate_segments: Option<Vec<(f64, f64)>>,
    /// Optional `[r_lo, r_hi]` band for rate-uncertain pricing.
    pub rate_band: Option<(f64, f64)>,
    pub maturity: f64,
}

impl MarketConfig {
    pub fn to_spec(&self) -> Result<MarketSpec> {
        let band = VolatilityBand::new(self.sigma_lo, self.sigma_hi)?;
        let mean_band = match (self.mu_lo, self.mu_hi) {
            (Some(lo), Some(hi)) => Some(MeanBand::new(lo, hi)?),
            (None, None) => None,
            _ => {
                return Err(Error::Config(
                    "mu_lo and mu_hi must be given together".to_string(),
                ))
            }
        };
        let mut rates = match (&self.rate, &self.rate_segments) {
            (Some(r), None) => RateCurve::flat(*r)?,
            (None, Some(segments)) => RateCurve::from_segments(segments.clone())?,
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give either `rate` or `rate_segments`, not both".to_string(),
                ))
            }
            (None, None) => {
                return Err(Error::Config(
                    "market requires `rate` or `rate_segments`".to_string(),
                ))
            }
        };
        if let Some((lo, hi)) = self.rate_band {
            rates = rates.with_rate_band(lo, hi)?;
        }
        MarketSpec::new(self.spot, band, mean_band, rates, self.maturity)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n_space: usize,
    pub n_time: usize,
    pub domain_width: f64,
    pub scheme: Scheme,
    pub stat_nodes: Option<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n_space: DEFAULT_N_SPACE,
            n_time: DEFAULT_N_TIME,
            domain_width: DEFAULT_DOMAIN_WIDTH,
            scheme: Scheme::ImplicitPolicyIteration,
            stat_nodes: None,
        }
    }
}

impl GridConfig {
    pub fn to_spec(&self) -> GridSpec {
        GridSpec {
            n_space: self.n_space,
            n_time: self.n_time,
            domain_width: self.domain_width,
            scheme: self.scheme,
            stat_nodes: self.stat_nodes,
        }
    }
}

fn default_side() -> Side {
    Side::Upper
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceBlock {
    #[serde(default = "default_side")]
    pub side: Side,
    /// Also price through the rate band when the market carries one.
    #[serde(default)]
    pub rate_uncertain: bool,
}

impl Default for PriceBlock {
    fn default() -> Self {
        PriceBlock {
            side: Side::Upper,
            rate_uncertain: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VolPolicyConfig {
    Constant {
        sigma: f64,
    },
    RandomBand,
    /// Worst case against the managing surface solved for the run.
    BangBang,
    TwoRegime {
        sigma_a: f64,
        sigma_b: f64,
        switch_time: f64,
    },
}

impl VolPolicyConfig {
    /// Builds the runtime policy; `surface` feeds the bang-bang lookup.
    pub fn to_policy(
        &self,
        surface: Option<std::sync::Arc<crate::bsb::PriceSurface>>,
    ) -> Result<VolPolicy> {
        Ok(match self {
            VolPolicyConfig::Constant { sigma } => VolPolicy::Constant(*sigma),
            VolPolicyConfig::RandomBand => VolPolicy::RandomBand,
            VolPolicyConfig::BangBang => VolPolicy::BangBang(surface.ok_or_else(|| {
                Error::Config(
                    "bang_bang volatility policy requires a solved surface; it is available \
                     in the hedge command only"
                        .to_string(),
                )
            })?),
            VolPolicyConfig::TwoRegime {
                sigma_a,
                sigma_b,
                switch_time,
            } => VolPolicy::TwoRegime {
                sigma_a: *sigma_a,
                sigma_b: *sigma_b,
                switch_time: *switch_time,
            },
        })
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriftPolicyConfig {
    RiskNeutralZero,
    Constant { mu: f64 },
    Coupled { gamma: f64 },
}

impl DriftPolicyConfig {
    pub fn to_policy(&self) -> DriftPolicy {
        match self {
            DriftPolicyConfig::RiskNeutralZero => DriftPolicy::RiskNeutralZero,
            DriftPolicyConfig::Constant { mu } => DriftPolicy::Constant(*mu),
            DriftPolicyConfig::Coupled { gamma } => DriftPolicy::Coupled { gamma: *gamma },
        }
    }
}

fn default_drift() -> DriftPolicyConfig {
    DriftPolicyConfig::RiskNeutralZero
}

fn default_hedge_side() -> HedgeSide {
    HedgeSide::ShortUpper
}

fn default_clamp() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HedgeBlock {
    #[serde(default = "default_hedge_side")]
    pub side: HedgeSide,
    pub vol_policy: VolPolicyConfig,
    #[serde(default = "default_drift")]
    pub drift_policy: DriftPolicyConfig,
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    #[serde(default = "default_clamp")]
    pub clamp_to_domain: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateBlock {
    pub vol_policy: VolPolicyConfig,
    #[serde(default = "default_drift")]
    pub drift_policy: DriftPolicyConfig,
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParityBlock {
    pub strike: f64,
    #[serde(default = "default_side")]
    pub side: Side,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandStatsBlock {
    /// Drift used for the log-return mean band.
    pub mu: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(extra: &str) -> String {
        format!(
            r#"{{
  "schema_version": 1,
  "market": {{ "spot": 100.0, "sigma_lo": 0.2, "sigma_hi": 0.4, "rate": 0.05, "maturity": 1.0 }}{extra}
}}"#
        )
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg: RunConfig = serde_json::from_str(&minimal("")).unwrap();
        cfg.validate_version().unwrap();
        let spec = cfg.market_spec().unwrap();
        assert_eq!(spec.spot, 100.0);
        let grid = cfg.grid_spec().unwrap();
        assert_eq!(grid.n_space, DEFAULT_N_SPACE);
        assert_eq!(grid.n_time, DEFAULT_N_TIME);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = minimal(r#", "surprise": 1"#);
        assert!(serde_json::from_str::<RunConfig>(&text).is_err());
        let nested = r#"{
  "schema_version": 1,
  "market": { "spot": 100.0, "sigma_lo": 0.2, "sigma_hi": 0.4, "rate": 0.05,
              "maturity": 1.0, "dividend": 0.01 }
}"#;
        assert!(serde_json::from_str::<RunConfig>(nested).is_err());
    }

    #[test]
    fn reversed_band_fails_validation() {
        let text = r#"{
  "schema_version": 1,
  "market": { "spot": 100.0, "sigma_lo": 0.4, "sigma_hi": 0.2, "rate": 0.05, "maturity": 1.0 }
}"#;
        let cfg: RunConfig = serde_json::from_str(text).unwrap();
        assert!(cfg.market_spec().is_err());
    }

    #[test]
    fn rate_exclusivity_is_enforced() {
        let text = r#"{
  "schema_version": 1,
  "market": { "spot": 100.0, "sigma_lo": 0.2, "sigma_hi": 0.4, "rate": 0.05,
              "rate_segments": [[0.0, 0.02]], "maturity": 1.0 }
}"#;
        let cfg: RunConfig = serde_json::from_str(text).unwrap();
        assert!(cfg.market_spec().is_err());
    }

    #[test]
    fn policy_blocks_parse() {
        let text = r#"{
  "schema_version": 1,
  "market": { "spot": 100.0, "sigma_lo": 0.2, "sigma_hi": 0.4, "rate": 0.05, "maturity": 1.0 },
  "payoff": "max(S - 100, 0)",
  "hedge": {
    "vol_policy": { "kind": "two_regime", "sigma_a": 0.2, "sigma_b": 0.4, "switch_time": 0.5 },
    "n_paths": 10, "n_steps": 32, "seed": 7
  },
  "simulate": {
    "vol_policy": { "kind": "random_band" },
    "drift_policy": { "kind": "coupled", "gamma": 0.5 },
    "n_paths": 10, "n_steps": 32, "seed": 7
  }
}"#;
        let cfg: RunConfig = serde_json::from_str(text).unwrap();
        assert!(matches!(
            cfg.hedge.as_ref().unwrap().vol_policy,
            VolPolicyConfig::TwoRegime { .. }
        ));
        assert!(matches!(
            cfg.simulate.as_ref().unwrap().drift_policy,
            DriftPolicyConfig::Coupled { .. }
        ));
        assert_eq!(cfg.hedge.as_ref().unwrap().side, HedgeSide::ShortUpper);
        assert!(cfg.hedge.as_ref().unwrap().clamp_to_domain);
    }
}
