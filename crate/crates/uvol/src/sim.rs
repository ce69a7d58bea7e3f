//! Path simulation under volatility and drift ambiguity.
//!
//! Nature's choice of volatility/drift inside the bands is an explicit
//! user policy; sweeping policies produces lower bounds on worst-case
//! functionals (the admissible set is not constructive, so no finite sweep
//! attains the supremum). Each path records the realized per-step variance
//! increments (the quadratic variation of the driving noise) and the excess
//! drift increments, both confined to their bands by construction.
//!
//! Normals come from a counter-based generator keyed by `(seed, stream,
//! path, step)`: path sets are order-independent, reproducible bit-for-bit
//! and safe to generate in parallel.

use crate::bsb::{PriceSurface, Side};
use crate::error::{Error, Result};
use crate::market::MarketSpec;
use rayon::prelude::*;
use std::io::Write;
use std::sync::Arc;

const STREAM_NORMAL: u64 = 0x01;
const STREAM_VOL: u64 = 0x02;

/// splitmix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn key(seed: u64, stream: u64, path: u64, step: u64) -> u64 {
    let mut h = mix64(seed ^ 0x243f_6a88_85a3_08d3);
    h = mix64(h ^ stream.wrapping_mul(0x1319_8a2e_0370_7344));
    h = mix64(h ^ path.wrapping_mul(0xa409_3822_299f_31d0));
    h = mix64(h ^ step.wrapping_mul(0x082e_fa98_ec4e_6c89));
    h
}

/// Uniform in [0, 1) from a 64-bit word (53-bit mantissa).
fn to_unit(u: u64) -> f64 {
    (u >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// Standard normal for `(seed, path, step)`, Box-Muller on two
/// counter-derived uniforms.
fn normal_at(seed: u64, path: u64, step: u64) -> f64 {
    let base = key(seed, STREAM_NORMAL, path, step);
    let u1 = to_unit(mix64(base ^ 0x5555_5555_5555_5555));
    let u2 = to_unit(mix64(base ^ 0xaaaa_aaaa_aaaa_aaaa));
    // 1 - u1 lies in (0, 1]; the log is finite.
    (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Uniform in [0, 1) for the in-band volatility draw of `random_band`.
fn uniform_at(seed: u64, path: u64, step: u64) -> f64 {
    to_unit(key(seed, STREAM_VOL, path, step))
}

/// Realized-volatility policy, valued in the band at every step.
#[derive(Debug, Clone)]
pub enum VolPolicy {
    /// Constant in-band volatility.
    Constant(f64),
    /// Independent per-step uniform draw in `[sigma_lo, sigma_hi]`, seeded
    /// by the same counter generator as the normals.
    RandomBand,
    /// Worst case for a hedger managing at `surface`: the volatility that
    /// attains the generator optimum given the sign of the surface Gamma at
    /// `(t, S)` (queries clamped to the grid domain).
    BangBang(Arc<PriceSurface>),
    /// `sigma_a` before `switch_time`, `sigma_b` from then on.
    TwoRegime {
        sigma_a: f64,
        sigma_b: f64,
        switch_time: f64,
    },
}

impl VolPolicy {
    fn validate(&self, spec: &MarketSpec) -> Result<()> {
        let band = &spec.band;
        let check = |s: f64, what: &str| -> Result<()> {
            if s < band.sigma_lo || s > band.sigma_hi {
                return Err(Error::domain(format!(
                    "{what} volatility {s} outside the band [{}, {}]",
                    band.sigma_lo, band.sigma_hi
                )));
            }
            Ok(())
        };
        match self {
            VolPolicy::Constant(s) => check(*s, "constant-policy"),
            VolPolicy::RandomBand => Ok(()),
            VolPolicy::BangBang(_) => Ok(()),
            VolPolicy::TwoRegime {
                sigma_a,
                sigma_b,
                switch_time,
            } => {
                check(*sigma_a, "first-regime")?;
                check(*sigma_b, "second-regime")?;
                if !(*switch_time >= 0.0) {
                    return Err(Error::domain("switch_time must be nonnegative"));
                }
                Ok(())
            }
        }
    }

    fn sigma_at(&self, spec: &MarketSpec, seed: u64, path: u64, step: u64, t: f64, s: f64) -> f64 {
        let band = &spec.band;
        match self {
            VolPolicy::Constant(sig) => *sig,
            VolPolicy::RandomBand => {
                let u = uniform_at(seed, path, step);
                (band.sigma_lo + u * (band.sigma_hi - band.sigma_lo)).min(band.sigma_hi)
            }
            VolPolicy::BangBang(surface) => {
                let g = surface
                    .greeks_at(t.min(surface.maturity()), surface.clamp_spot(s))
                    .expect("clamped query lies inside the surface domain");
                let pick_hi = match surface.side {
                    Side::Upper => g.gamma >= 0.0,
                    Side::Lower => g.gamma < 0.0,
                };
                if pick_hi {
                    band.sigma_hi
                } else {
                    band.sigma_lo
                }
            }
            VolPolicy::TwoRegime {
                sigma_a,
                sigma_b,
                switch_time,
            } => {
                if t < *switch_time {
                    *sigma_a
                } else {
                    *sigma_b
                }
            }
        }
    }
}

/// Excess-drift policy: the per-step drift above the short rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriftPolicy {
    /// Zero excess drift (risk-neutral dynamics).
    RiskNeutralZero,
    /// Constant total drift `mu`; the excess is `mu - r_t`. Requires a mean
    /// band containing `mu`.
    Constant(f64),
    /// Drift moving with the realized variance:
    /// `mu = mu_lo + gamma/2 (sigma^2 - sigma_lo^2)`.
    Coupled { gamma: f64 },
}

impl DriftPolicy {
    fn validate(&self, spec: &MarketSpec) -> Result<()> {
        match self {
            DriftPolicy::RiskNeutralZero => Ok(()),
            DriftPolicy::Constant(mu) => {
                if let Some(mb) = &spec.mean_band {
                    if *mu < mb.mu_lo || *mu > mb.mu_hi {
                        return Err(Error::domain(format!(
                            "constant drift {mu} outside the mean band [{}, {}]",
                            mb.mu_lo, mb.mu_hi
                        )));
                    }
                    Ok(())
                } else {
                    Err(Error::domain(
                        "constant drift policy requires a mean band on the market spec",
                    ))
                }
            }
            DriftPolicy::Coupled { gamma } => {
                let mb = spec.mean_band.as_ref().ok_or_else(|| {
                    Error::domain("coupled drift policy requires a mean band on the market spec")
                })?;
                if !(*gamma >= 0.0) {
                    return Err(Error::domain("coupling gamma must be nonnegative"));
                }
                let top = mb.mu_lo + 0.5 * gamma * (spec.band.var_hi() - spec.band.var_lo());
                if top > mb.mu_hi + 1e-15 {
                    return Err(Error::domain(format!(
                        "coupled drift exits the mean band: mu_lo + gamma/2 (var_hi - var_lo) \
                         = {top} > mu_hi = {}",
                        mb.mu_hi
                    )));
                }
                Ok(())
            }
        }
    }

    /// Excess drift `b = mu - r` for the step.
    fn excess_at(&self, spec: &MarketSpec, r: f64, sigma: f64) -> f64 {
        match self {
            DriftPolicy::RiskNeutralZero => 0.0,
            DriftPolicy::Constant(mu) => mu - r,
            DriftPolicy::Coupled { gamma } => {
                let mb = spec.mean_band.as_ref().expect("validated");
                mb.mu_lo - r + 0.5 * gamma * (sigma * sigma - spec.band.var_lo()).max(0.0)
            }
        }
    }
}

/// One simulated stock path with its realized variance and drift records.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    /// Path index within its batch.
    pub path_id: usize,
    /// Uniform step length `T / n_steps`.
    pub dt: f64,
    /// Step times `0, dt, ..., T` (`n_steps + 1` entries).
    pub times: Vec<f64>,
    /// Prices at the step times.
    pub prices: Vec<f64>,
    /// Realized quadratic-variation increments `sigma_t^2 dt` per step.
    pub d_qv: Vec<f64>,
    /// Excess-drift increments `(mu_t - r_t) dt` per step.
    pub beta_increments: Vec<f64>,
    /// Seed of the batch that produced the path.
    pub seed: u64,
}

impl SimulatedPath {
    pub fn n_steps(&self) -> usize {
        self.d_qv.len()
    }

    pub fn terminal(&self) -> f64 {
        *self.prices.last().unwrap()
    }

    /// Running quadratic variation: cumulative sums of `d_qv` with a
    /// leading zero; the final value lies in `[var_lo T, var_hi T]`.
    pub fn quadratic_variation(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.d_qv.len() + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for &d in &self.d_qv {
            acc += d;
            out.push(acc);
        }
        out
    }
}

/// Euler log-scheme simulation of `n_paths` paths over `n_steps` uniform
/// steps: per step the log price advances by
/// `(r + b - sigma^2/2) dt + sigma sqrt(dt) Z`. Fully reproducible per
/// `(seed, policies, spec, discretization)` and parallel across paths.
pub fn simulate_paths(
    spec: &MarketSpec,
    vol_policy: &VolPolicy,
    drift_policy: &DriftPolicy,
    n_paths: usize,
    n_steps: usize,
    seed: u64,
) -> Result<Vec<SimulatedPath>> {
    if n_paths == 0 || n_steps == 0 {
        return Err(Error::domain("n_paths and n_steps must be at least 1"));
    }
    vol_policy.validate(spec)?;
    drift_policy.validate(spec)?;

    let dt = spec.maturity / n_steps as f64;
    let sqrt_dt = dt.sqrt();
    // Average rates per step are path-independent; precompute.
    let mut step_rates = Vec::with_capacity(n_steps);
    for j in 0..n_steps {
        let (t0, t1) = (j as f64 * dt, (j + 1) as f64 * dt);
        step_rates.push(spec.rates.average_rate(t0, t1.min(spec.maturity))?);
    }

    let paths: Vec<SimulatedPath> = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let mut times = Vec::with_capacity(n_steps + 1);
            let mut prices = Vec::with_capacity(n_steps + 1);
            let mut d_qv = Vec::with_capacity(n_steps);
            let mut beta = Vec::with_capacity(n_steps);
            let mut ln_s = spec.spot.ln();
            times.push(0.0);
            prices.push(spec.spot);
            for j in 0..n_steps {
                let t = j as f64 * dt;
                let s = prices[j];
                let sigma = vol_policy.sigma_at(spec, seed, p as u64, j as u64, t, s);
                let r = step_rates[j];
                let b = drift_policy.excess_at(spec, r, sigma);
                let z = normal_at(seed, p as u64, j as u64);
                ln_s += (r + b - 0.5 * sigma * sigma) * dt + sigma * sqrt_dt * z;
                times.push((j + 1) as f64 * dt);
                prices.push(ln_s.exp());
                d_qv.push(sigma * sigma * dt);
                beta.push(b * dt);
            }
            SimulatedPath {
                path_id: p,
                dt,
                times,
                prices,
                d_qv,
                beta_increments: beta,
                seed,
            }
        })
        .collect();
    Ok(paths)
}

/// CSV export of a path batch: `path_id,step,t,S,sigma2_dt,beta_dt`.
/// The step-0 row carries the initial price with zero increments.
pub fn write_paths_csv<W: Write>(paths: &[SimulatedPath], out: &mut W) -> Result<()> {
    writeln!(out, "path_id,step,t,S,sigma2_dt,beta_dt")?;
    for path in paths {
        for (j, &t) in path.times.iter().enumerate() {
            let (qv, b) = if j == 0 {
                (0.0, 0.0)
            } else {
                (path.d_qv[j - 1], path.beta_increments[j - 1])
            };
            writeln!(
                out,
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
                path.path_id, j, t, path.prices[j], qv, b
            )?;
        }
    }
    Ok(())
}
