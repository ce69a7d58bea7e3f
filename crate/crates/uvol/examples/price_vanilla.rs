//! Upper and lower prices of a vanilla call under a volatility band, with
//! the degenerate-band reduction to the single-measure closed form.
//!
//! Run with: cargo run --release -p uvol --example price_vanilla

use uvol::analytic::{black_scholes_closed_form, OptionKind};
use uvol::bsb::{solve_bsb, GridSpec, Side};
use uvol::market::{MarketSpec, RateCurve, VolatilityBand};
use uvol::payoff::Payoff;

fn main() -> uvol::Result<()> {
    let payoff = Payoff::parse("max(S - 100, 0)")?;
    let grid = GridSpec::default();

    // Collapsed band: both sides must agree with the closed form.
    let single = MarketSpec::new(
        100.0,
        VolatilityBand::degenerate(0.2)?,
        None,
        RateCurve::flat(0.05)?,
        1.0,
    )?;
    let upper = solve_bsb(&payoff, &single, &grid, Side::Upper, None)?.price_at_spot();
    let lower = solve_bsb(&payoff, &single, &grid, Side::Lower, None)?.price_at_spot();
    let bs = black_scholes_closed_form(100.0, 100.0, 0.05, 0.2, 1.0, OptionKind::Call)?;
    println!("degenerate band sigma = 0.20");
    println!("  closed form : {bs:.6}");
    println!("  upper       : {upper:.6}");
    println!("  lower       : {lower:.6}");

    // Genuine ambiguity: the band [0.1, 0.3] forces an ask-bid gap.
    let banded = MarketSpec::new(
        100.0,
        VolatilityBand::new(0.1, 0.3)?,
        None,
        RateCurve::flat(0.05)?,
        1.0,
    )?;
    let upper_s = solve_bsb(&payoff, &banded, &grid, Side::Upper, None)?;
    let lower_s = solve_bsb(&payoff, &banded, &grid, Side::Lower, None)?;
    println!("\nband [0.10, 0.30]");
    println!("  upper (ask) : {:.6}", upper_s.price_at_spot());
    println!("  lower (bid) : {:.6}", lower_s.price_at_spot());

    let g = upper_s.greeks_at(0.0, 100.0)?;
    println!(
        "  upper greeks at (t=0, S=100): delta {:.4}, gamma {:.5}, eta {:.3}",
        g.delta, g.gamma, g.eta
    );
    Ok(())
}
