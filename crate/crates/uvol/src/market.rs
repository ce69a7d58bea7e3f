//! Market uncertainty model: volatility/drift bands, the piecewise-constant
//! short-rate curve, discounting, the generator function `G`, and the
//! elementary robust statistics of the log return.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Volatility band `[sigma_lo, sigma_hi]` (per sqrt-year).
///
/// The only assumption made about the instantaneous volatility is that it
/// stays inside this interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolatilityBand {
    pub sigma_lo: f64,
    pub sigma_hi: f64,
}

impl VolatilityBand {
    /// Requires `0 < sigma_lo <= sigma_hi`.
    pub fn new(sigma_lo: f64, sigma_hi: f64) -> Result<Self> {
        if !(sigma_lo > 0.0 && sigma_lo <= sigma_hi && sigma_hi.is_finite()) {
            return Err(Error::domain(format!(
                "volatility band requires 0 < sigma_lo <= sigma_hi, got [{sigma_lo}, {sigma_hi}]"
            )));
        }
        Ok(Self { sigma_lo, sigma_hi })
    }

    /// Degenerate band `[sigma, sigma]` (single-measure model).
    pub fn degenerate(sigma: f64) -> Result<Self> {
        Self::new(sigma, sigma)
    }

    pub fn is_degenerate(&self) -> bool {
        self.sigma_lo == self.sigma_hi
    }

    pub fn var_lo(&self) -> f64 {
        self.sigma_lo * self.sigma_lo
    }

    pub fn var_hi(&self) -> f64 {
        self.sigma_hi * self.sigma_hi
    }

    /// The generator function `G(a) = 1/2 * sup {s^2 * a : s^2 in [var_lo, var_hi]}`,
    /// i.e. `G(a) = 1/2 (var_hi * a^+ - var_lo * a^-)`.
    ///
    /// Positively homogeneous and subadditive in `a`, and dominates
    /// `1/2 s^2 a` for every in-band `s`.
    pub fn g_function(&self, a: f64) -> f64 {
        if a >= 0.0 {
            0.5 * self.var_hi() * a
        } else {
            0.5 * self.var_lo() * a
        }
    }
}

/// Drift band `[mu_lo, mu_hi]` (per year) of the expected rate of return.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanBand {
    pub mu_lo: f64,
    pub mu_hi: f64,
}

impl MeanBand {
    /// Requires `mu_lo <= mu_hi`.
    pub fn new(mu_lo: f64, mu_hi: f64) -> Result<Self> {
        if !(mu_lo <= mu_hi) || !mu_lo.is_finite() || !mu_hi.is_finite() {
            return Err(Error::domain(format!(
                "mean band requires mu_lo <= mu_hi, got [{mu_lo}, {mu_hi}]"
            )));
        }
        Ok(Self { mu_lo, mu_hi })
    }
}

/// Band for the expected continuously compounded rate of return.
///
/// With drift `mu` and volatility confined to the band, the mean of the
/// annualized log return lies in `[mu - var_hi/2, mu - var_lo/2]`.
pub fn log_return_mean_band(mu: f64, band: &VolatilityBand) -> (f64, f64) {
    (mu - 0.5 * band.var_hi(), mu - 0.5 * band.var_lo())
}

/// Piecewise-constant, right-continuous short-rate curve.
///
/// Segments are `(t_start, rate)` with strictly increasing `t_start`
/// beginning at 0; the last segment extends to infinity. Optionally carries
/// a rate band for rate-uncertain pricing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub segments: Vec<(f64, f64)>,
    pub rate_band: Option<(f64, f64)>,
}

impl RateCurve {
    /// Curve with segments `(t_start, rate)`; requires coverage from 0,
    /// strictly increasing starts and nonnegative rates.
    pub fn from_segments(segments: Vec<(f64, f64)>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::domain("rate curve requires at least one segment"));
        }
        if segments[0].0 != 0.0 {
            return Err(Error::domain(format!(
                "rate curve must start at t = 0, got {}",
                segments[0].0
            )));
        }
        for w in segments.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::domain(
                    "rate curve segment starts must be strictly increasing",
                ));
            }
        }
        for &(t, r) in &segments {
            if !(r >= 0.0) || !r.is_finite() || !t.is_finite() {
                return Err(Error::domain(format!(
                    "short rate must be nonnegative and finite, got {r} at t = {t}"
                )));
            }
        }
        Ok(Self {
            segments,
            rate_band: None,
        })
    }

    /// Flat curve at rate `r >= 0`.
    pub fn flat(r: f64) -> Result<Self> {
        Self::from_segments(vec![(0.0, r)])
    }

    /// Attaches a rate band `0 <= r_lo <= r_hi` for rate-uncertain pricing.
    pub fn with_rate_band(mut self, r_lo: f64, r_hi: f64) -> Result<Self> {
        if !(0.0 <= r_lo && r_lo <= r_hi && r_hi.is_finite()) {
            return Err(Error::domain(format!(
                "rate band requires 0 <= r_lo <= r_hi, got [{r_lo}, {r_hi}]"
            )));
        }
        self.rate_band = Some((r_lo, r_hi));
        Ok(self)
    }

    /// Instantaneous rate at time `t >= 0` (right-continuous lookup).
    pub fn rate_at(&self, t: f64) -> f64 {
        let mut r = self.segments[0].1;
        for &(start, rate) in &self.segments {
            if t >= start {
                r = rate;
            } else {
                break;
            }
        }
        r
    }

    /// Exact integral of the rate over `[t0, t1]` for the piecewise-constant
    /// curve.
    pub fn integral(&self, t0: f64, t1: f64) -> Result<f64> {
        if !(0.0 <= t0 && t0 <= t1) || !t1.is_finite() {
            return Err(Error::domain(format!(
                "rate integral requires 0 <= t0 <= t1, got t0 = {t0}, t1 = {t1}"
            )));
        }
        let mut acc = 0.0;
        for (i, &(start, rate)) in self.segments.iter().enumerate() {
            let end = self
                .segments
                .get(i + 1)
                .map(|s| s.0)
                .unwrap_or(f64::INFINITY);
            let lo = t0.max(start);
            let hi = t1.min(end);
            if hi > lo {
                acc += rate * (hi - lo);
            }
        }
        Ok(acc)
    }

    /// Discount factor `exp(-integral of r over [t0, t1])`, in `(0, 1]`.
    pub fn discount_factor(&self, t0: f64, t1: f64) -> Result<f64> {
        Ok((-self.integral(t0, t1)?).exp())
    }

    /// Time-average rate over `[t0, t1]`; equals the flat rate for flat curves.
    pub fn average_rate(&self, t0: f64, t1: f64) -> Result<f64> {
        if t1 == t0 {
            return Ok(self.rate_at(t0));
        }
        Ok(self.integral(t0, t1)? / (t1 - t0))
    }
}

/// Full market description for one pricing or simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSpec {
    /// Spot price `S_0 > 0`.
    pub spot: f64,
    /// Volatility band.
    pub band: VolatilityBand,
    /// Drift band; only simulation-side drift policies consult it.
    pub mean_band: Option<MeanBand>,
    /// Short-rate curve.
    pub rates: RateCurve,
    /// Maturity in years, `> 0`.
    pub maturity: f64,
}

impl MarketSpec {
    pub fn new(
        spot: f64,
        band: VolatilityBand,
        mean_band: Option<MeanBand>,
        rates: RateCurve,
        maturity: f64,
    ) -> Result<Self> {
        if !(spot > 0.0) || !spot.is_finite() {
            return Err(Error::domain(format!("spot must be positive, got {spot}")));
        }
        if !(maturity > 0.0) || !maturity.is_finite() {
            return Err(Error::domain(format!(
                "maturity must be positive, got {maturity}"
            )));
        }
        Ok(Self {
            spot,
            band,
            mean_band,
            rates,
            maturity,
        })
    }

    /// Robust 95% confidence interval for the terminal log price, evaluated
    /// at the worst-case volatility `sigma_hi` and the time-average rate:
    ///
    /// `ln S_0 + (r - var_hi/2) T -+ 1.96 sigma_hi sqrt(T)`.
    ///
    /// The coverage argument relies on monotonicity of the interval
    /// endpoints in sigma, valid for bands inside `[0.2, 0.4]` and `T <= 1`;
    /// outside that region the result carries a warning flag instead of a
    /// coverage claim.
    pub fn robust_confidence_interval(&self) -> Result<RobustInterval> {
        let t = self.maturity;
        let r = self.rates.average_rate(0.0, t)?;
        let s = self.band.sigma_hi;
        let center = self.spot.ln() + (r - 0.5 * s * s) * t;
        let half = 1.96 * s * t.sqrt();
        let outside = t > 1.0 || self.band.sigma_lo < 0.2 || self.band.sigma_hi > 0.4;
        Ok(RobustInterval {
            ln_lo: center - half,
            ln_hi: center + half,
            outside_validated_region: outside,
        })
    }
}

/// Interval for the terminal log price with a flag marking parameter
/// regions where the monotonicity argument behind the coverage claim does
/// not apply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustInterval {
    pub ln_lo: f64,
    pub ln_hi: f64,
    pub outside_validated_region: bool,
}
