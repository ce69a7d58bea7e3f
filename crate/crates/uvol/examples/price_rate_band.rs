//! Pricing with an uncertain riskless rate: the generator optimizes the
//! rate inside a band node by node, together with the variance.
//!
//! Run with: cargo run --release -p uvol --example price_rate_band

use uvol::bsb::{solve_bsb, solve_bsb_rate_uncertain, GridSpec, Side};
use uvol::market::{MarketSpec, RateCurve, VolatilityBand};
use uvol::payoff::Payoff;

fn main() -> uvol::Result<()> {
    let payoff = Payoff::parse("max(S - 100, 0)")?;
    let grid = GridSpec::default();
    let band = VolatilityBand::new(0.1, 0.3)?;

    let at_rate = |r: f64| -> uvol::Result<f64> {
        let spec = MarketSpec::new(100.0, band, None, RateCurve::flat(r)?, 1.0)?;
        Ok(solve_bsb(&payoff, &spec, &grid, Side::Upper, None)?.price_at_spot())
    };

    let spec = MarketSpec::new(
        100.0,
        band,
        None,
        RateCurve::flat(0.05)?.with_rate_band(0.03, 0.07)?,
        1.0,
    )?;
    let upper = solve_bsb_rate_uncertain(&payoff, &spec, &grid, Side::Upper)?.price_at_spot();
    let lower = solve_bsb_rate_uncertain(&payoff, &spec, &grid, Side::Lower)?.price_at_spot();

    println!("call, vol band [0.10, 0.30], rate band [0.03, 0.07]");
    println!("  fixed r=0.03 upper : {:.6}", at_rate(0.03)?);
    println!("  fixed r=0.05 upper : {:.6}", at_rate(0.05)?);
    println!("  fixed r=0.07 upper : {:.6}", at_rate(0.07)?);
    println!("  rate-band upper    : {upper:.6}   (call pins the top rate)");
    println!("  rate-band lower    : {lower:.6}");
    Ok(())
}
