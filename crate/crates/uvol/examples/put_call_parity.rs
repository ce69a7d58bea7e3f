//! Put-call parity survives model ambiguity: on either side, the call/put
//! prices struck alike satisfy c + K D(t,T) = p + S at every state.
//!
//! Run with: cargo run --release -p uvol --example put_call_parity

use uvol::bsb::{GridSpec, Side};
use uvol::market::{MarketSpec, RateCurve, VolatilityBand};
use uvol::metrics::parity_check;

fn main() -> uvol::Result<()> {
    let spec = MarketSpec::new(
        100.0,
        VolatilityBand::new(0.1, 0.3)?,
        None,
        RateCurve::flat(0.05)?,
        1.0,
    )?;

    println!("max |c + K D - p - S| over the central half of the grid, K = 100");
    for n in [200usize, 400, 800] {
        let grid = GridSpec {
            n_space: n,
            n_time: n,
            ..GridSpec::default()
        };
        let upper = parity_check(&spec, 100.0, &grid, Side::Upper)?;
        let lower = parity_check(&spec, 100.0, &grid, Side::Lower)?;
        println!("  {n:4}x{n:<4}  upper {upper:.3e}   lower {lower:.3e}");
    }
    println!("\nresiduals are pure discretization and shrink under refinement;");
    println!("the parity identity itself is insensitive to the band.");
    Ok(())
}
