//! Superhedging is subadditive: covering a book as a whole never costs more
//! than covering each claim on its own, so agents gain by pooling.
//!
//! Run with: cargo run --release -p uvol --example cooperation

use uvol::bsb::GridSpec;
use uvol::market::{MarketSpec, RateCurve, VolatilityBand};
use uvol::metrics::cooperation_check;
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

    let pairs = [
        ("call 100 + put 100", "max(S - 100, 0)", "max(100 - S, 0)"),
        ("call 100 + call 100", "max(S - 100, 0)", "max(S - 100, 0)"),
        (
            "butterfly + short-wing call",
            "max(S-90,0) - 2*max(S-100,0) + max(S-110,0)",
            "max(S - 110, 0)",
        ),
    ];
    println!("band [0.10, 0.30]: upper(p1 + p2) vs upper(p1) + upper(p2)");
    for (name, a, b) in pairs {
        let p1 = Payoff::parse(a)?;
        let p2 = Payoff::parse(b)?;
        let report = cooperation_check(&p1, &p2, &spec, &grid)?;
        println!(
            "  {name:28}  {:.6} <= {:.6}  (saving {:+.6})",
            report.lhs,
            report.rhs,
            report.rhs - report.lhs
        );
        assert!(report.holds);
    }
    println!("\nthe gap is the pricing error saved by hedging the book jointly;");
    println!("it is zero when the legs load the same band edge everywhere.");
    Ok(())
}
