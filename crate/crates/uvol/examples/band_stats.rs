//! Elementary robust statistics: the band of the expected log return and
//! the worst-case 95% confidence interval for the terminal price.
//!
//! Run with: cargo run --release -p uvol --example band_stats

use uvol::market::{log_return_mean_band, MarketSpec, RateCurve, VolatilityBand};

fn main() -> uvol::Result<()> {
    let band = VolatilityBand::new(0.2, 0.4)?;
    let (lo, hi) = log_return_mean_band(0.1, &band);
    println!("drift mu = 10%, volatility band [20%, 40%]");
    println!("  expected annual log return lies in [{lo:.4}, {hi:.4}]");

    let spec = MarketSpec::new(100.0, band, None, RateCurve::flat(0.05)?, 1.0)?;
    let iv = spec.robust_confidence_interval()?;
    println!("\nworst-case 95% interval for ln S_T (r = 5%, T = 1):");
    println!("  [{:.4}, {:.4}]", iv.ln_lo, iv.ln_hi);
    println!(
        "  i.e. S_T in [{:.2}, {:.2}] with at least 95% confidence under every model",
        iv.ln_lo.exp(),
        iv.ln_hi.exp()
    );
    println!(
        "  outside validated parameter region: {}",
        iv.outside_validated_region
    );

    // Long maturities fall outside the monotonicity argument behind the
    // coverage claim; the result is flagged instead of asserted.
    let long = MarketSpec::new(100.0, band, None, RateCurve::flat(0.05)?, 3.0)?;
    let flagged = long.robust_confidence_interval()?;
    println!(
        "\nsame band at T = 3: flagged = {}",
        flagged.outside_validated_region
    );
    Ok(())
}
