//! Robust option pricing and hedging when volatility and drift are only
//! known to lie within bands.
//!
//! The stock's instantaneous volatility is assumed to stay inside
//! `[sigma_lo, sigma_hi]` and (optionally) its drift inside `[mu_lo,
//! mu_hi]`, with no distributional assumption beyond that. The cheapest
//! price that still superhedges the claim against every conforming model —
//! the upper price — solves a nonlinear PDE whose generator takes the
//! worst-case variance node by node; the mirrored best case gives the lower
//! (subhedging) price, and the gap between them is the ask-bid spread the
//! ambiguity forces.
//!
//! # Modules
//!
//! - [`market`] — bands, rate curves, discounting and the elementary
//!   robust statistics of the log return
//! - [`payoff`] — the payoff expression language and monitoring schedules
//! - [`bsb`] — the worst-case PDE engine (upper/lower surfaces, greeks,
//!   optional rate band, optional source term)
//! - [`chain`] — discrete-path-dependent pricing by backward recursion with
//!   a summary-statistic state
//! - [`sim`] — path simulation under explicit volatility/drift policies
//!   with a counter-based, reproducible generator
//! - [`hedge`] — discrete delta hedging and the per-step worst-case P&L
//! - [`metrics`] — spread bounds, put-call parity residuals, the
//!   linear-generator decomposition and superhedge subadditivity
//! - [`analytic`] — closed-form single-volatility reference prices
//! - [`config`] / [`cli`] — the JSON batch interface behind the `uvol`
//!   binary
//!
//! # Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --release -p uvol --example price_vanilla
//! cargo run --release -p uvol --example price_rate_band
//! cargo run --release -p uvol --example price_asian
//! cargo run --release -p uvol --example hedge_pnl
//! cargo run --release -p uvol --example spread_bound
//! cargo run --release -p uvol --example put_call_parity
//! cargo run --release -p uvol --example simulate_paths
//! cargo run --release -p uvol --example band_stats
//! cargo run --release -p uvol --example gbsde_linear
//! cargo run --release -p uvol --example cooperation
//! ```
//!
//! The same operations are scriptable through the `uvol` binary; see the
//! README for the configuration schema.

pub mod analytic;
pub mod bsb;
pub mod chain;
pub mod cli;
pub mod config;
pub mod error;
pub mod hedge;
pub mod market;
pub mod metrics;
pub mod payoff;
pub mod sim;

pub use error::{Error, Result};
