//! Closed-form reference pricing under a single volatility.
//!
//! Serves as the oracle for degenerate-band and convex-payoff cross-checks
//! of the PDE engine; it sits on no shared code path with the solver.

use crate::error::{Error, Result};

/// Call/put selector for the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptionKind {
    Call,
    Put,
}

/// Standard normal CDF, double precision (Hart/West rational
/// approximation, abs error ~1e-15).
pub fn norm_cdf(x: f64) -> f64 {
    let z = x.abs();
    if z > 37.0 {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    let e = (-z * z / 2.0).exp();
    let c = if z < 7.071_067_811_865_475 {
        const NUM: [f64; 7] = [
            3.526_249_659_989_109e-2,
            0.700_383_064_443_688,
            6.373_962_203_531_65,
            33.912_866_078_383,
            112.079_291_497_871,
            221.213_596_169_931,
            220.206_867_912_376,
        ];
        const DEN: [f64; 8] = [
            8.838_834_764_831_84e-2,
            1.755_667_163_182_64,
            16.064_177_579_207,
            86.780_732_202_946_1,
            296.564_248_779_674,
            637.333_633_378_831,
            793.826_512_519_948,
            440.413_735_824_752,
        ];
        let horner = |coeffs: &[f64]| coeffs.iter().fold(0.0, |acc, &k| acc * z + k);
        e * horner(&NUM) / horner(&DEN)
    } else {
        let b = z + 0.65;
        let b = z + 4.0 / b;
        let b = z + 3.0 / b;
        let b = z + 2.0 / b;
        let b = z + 1.0 / b;
        e / (b * 2.506_628_274_631_000_5)
    };
    if x > 0.0 {
        1.0 - c
    } else {
        c
    }
}

/// Black-Scholes price of a European call or put under constant volatility
/// and a flat rate.
pub fn black_scholes_closed_form(
    spot: f64,
    strike: f64,
    rate: f64,
    sigma: f64,
    maturity: f64,
    kind: OptionKind,
) -> Result<f64> {
    if !(spot > 0.0 && strike > 0.0 && sigma > 0.0 && maturity > 0.0) {
        return Err(Error::domain(format!(
            "closed form requires positive spot/strike/sigma/maturity, \
             got S={spot}, K={strike}, sigma={sigma}, T={maturity}"
        )));
    }
    let sqrt_t = maturity.sqrt();
    let d1 = ((spot / strike).ln() + (rate + 0.5 * sigma * sigma) * maturity) / (sigma * sqrt_t);
    let d2 = d1 - sigma * sqrt_t;
    let df = (-rate * maturity).exp();
    Ok(match kind {
        OptionKind::Call => spot * norm_cdf(d1) - strike * df * norm_cdf(d2),
        OptionKind::Put => strike * df * norm_cdf(-d2) - spot * norm_cdf(-d1),
    })
}

/// Black-Scholes delta of a European call (N(d1)).
pub fn black_scholes_call_delta(
    spot: f64,
    strike: f64,
    rate: f64,
    sigma: f64,
    maturity: f64,
) -> f64 {
    let sqrt_t = maturity.sqrt();
    let d1 = ((spot / strike).ln() + (rate + 0.5 * sigma * sigma) * maturity) / (sigma * sqrt_t);
    norm_cdf(d1)
}
