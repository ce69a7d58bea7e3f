//! Ask-bid spreads forced by volatility ambiguity and their gamma-exposure
//! bound `(sigma_hi^2 - sigma_lo^2) * L`.
//!
//! Run with: cargo run --release -p uvol --example spread_bound

use uvol::bsb::GridSpec;
use uvol::market::{MarketSpec, RateCurve, VolatilityBand};
use uvol::metrics::spread;
use uvol::payoff::Payoff;

fn main() -> uvol::Result<()> {
    let spec = MarketSpec::new(
        100.0,
        VolatilityBand::new(0.1, 0.3)?,
        None,
        RateCurve::flat(0.05)?,
        1.0,
    )?;
    let grid = GridSpec::default();

    println!("band [0.10, 0.30], r = 5%, T = 1");
    println!("payoff                          upper     lower    spread     bound");
    for (name, text) in [
        ("call K=100            ", "max(S - 100, 0)"),
        ("put K=100             ", "max(100 - S, 0)"),
        (
            "butterfly 90/100/110  ",
            "max(S-90,0) - 2*max(S-100,0) + max(S-110,0)",
        ),
        ("discounted constant 25", "25"),
    ] {
        let payoff = Payoff::parse(text)?;
        let report = spread(&payoff, &spec, &grid)?;
        println!(
            "{name}  {:8.4}  {:8.4}  {:8.4}  {:8.4}",
            report.upper_price, report.lower_price, report.spread, report.bound
        );
    }
    println!("\nthe spread always sits below (sigma_hi^2 - sigma_lo^2) * L, where L");
    println!("aggregates worst-case discounted gamma exposure over the option's life.");
    Ok(())
}
