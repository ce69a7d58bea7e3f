//! Worst-case (upper) and best-case (lower) PDE pricing on a log-price grid.
//!
//! The upper price of a state-dependent claim solves
//!
//! ```text
//! dV/dt + sup_{sigma in [sigma_lo, sigma_hi]} { 1/2 sigma^2 x^2 V_xx }
//!       + r x V_x - r V + f = 0,     V(T, x) = payoff(x)
//! ```
//!
//! (inf for the lower price). The optimizing variance is bang-bang in the
//! sign of the second derivative: `sigma_hi^2` where the discrete Gamma is
//! nonnegative, `sigma_lo^2` where it is negative, reversed on the lower
//! side. Under the log transform `x = ln S` the diffusion coefficients are
//! constant per regime, and the far-field boundaries are Dirichlet values
//! linear in `S` (zero Gamma).
//!
//! The default scheme is fully implicit in time with policy iteration over
//! the two-point variance set per node; an explicit scheme with the usual
//! stability bound `dt <= dx^2 / sigma_hi^2` is available for cross-checks.

use crate::error::{Error, Result};
use crate::market::{MarketSpec, RateCurve, VolatilityBand};
use crate::payoff::Payoff;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Default spatial node count.
pub const DEFAULT_N_SPACE: usize = 400;
/// Default number of time steps.
pub const DEFAULT_N_TIME: usize = 400;
/// Default log-space half-width in multiples of `sigma_hi * sqrt(T)`.
pub const DEFAULT_DOMAIN_WIDTH: f64 = 6.0;
/// Policy iteration stops when the assignment is fixed and successive
/// values move less than this.
pub const POLICY_TOL: f64 = 1e-10;
/// Policy iteration attempt cap per time step.
pub const POLICY_MAX_ITERS: usize = 50;

/// Which price the solve targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Cheapest superhedging price (sup generator).
    Upper,
    /// Most expensive subhedging price (inf generator).
    Lower,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Upper => write!(f, "upper"),
            Side::Lower => write!(f, "lower"),
        }
    }
}

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Explicit,
    ImplicitPolicyIteration,
}

/// Discretization parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Spatial nodes, at least 16.
    pub n_space: usize,
    /// Time steps, at least 8.
    pub n_time: usize,
    /// Log-space half-width in multiples of `sigma_hi * sqrt(T)`.
    pub domain_width: f64,
    pub scheme: Scheme,
    /// Node count of the summary-statistic dimension used by the
    /// path-dependent chain; defaults to `n_space / 2`.
    pub stat_nodes: Option<usize>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n_space: DEFAULT_N_SPACE,
            n_time: DEFAULT_N_TIME,
            domain_width: DEFAULT_DOMAIN_WIDTH,
            scheme: Scheme::ImplicitPolicyIteration,
            stat_nodes: None,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_space < 16 {
            return Err(Error::domain(format!(
                "n_space must be at least 16, got {}",
                self.n_space
            )));
        }
        if self.n_time < 8 {
            return Err(Error::domain(format!(
                "n_time must be at least 8, got {}",
                self.n_time
            )));
        }
        if !(self.domain_width > 0.0) {
            return Err(Error::domain(format!(
                "domain_width must be positive, got {}",
                self.domain_width
            )));
        }
        Ok(())
    }

    pub(crate) fn stat_node_count(&self) -> usize {
        self.stat_nodes.unwrap_or(self.n_space / 2).max(3)
    }
}

/// Interpolated point values on a [`PriceSurface`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Greeks {
    pub value: f64,
    pub delta: f64,
    pub gamma: f64,
    /// `eta = 1/2 S^2 Gamma`.
    pub eta: f64,
}

/// Grid solution of one upper/lower solve: values plus first and second
/// derivatives in the spot, row per time slice (ascending times).
#[derive(Debug, Clone)]
pub struct PriceSurface {
    pub times: Vec<f64>,
    pub log_prices: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub delta: Vec<Vec<f64>>,
    pub gamma: Vec<Vec<f64>>,
    pub eta: Vec<Vec<f64>>,
    pub side: Side,
    pub spot: f64,
}

impl PriceSurface {
    pub fn maturity(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Value at the valuation point `(t = 0, S = spot)`.
    pub fn price_at_spot(&self) -> f64 {
        self.greeks_at(0.0, self.spot)
            .expect("spot lies inside the grid domain")
            .value
    }

    /// Bilinear interpolation of value/delta/gamma at `(t, s)`;
    /// `eta` is recomputed as `1/2 s^2 gamma`.
    pub fn greeks_at(&self, t: f64, s: f64) -> Result<Greeks> {
        // Queries produced by clamp_spot round-trip through exp/ln and can
        // land a few ulps outside the grid; snap those onto the boundary.
        let (x_lo, x_hi) = (self.log_prices[0], *self.log_prices.last().unwrap());
        let snap = 8.0 * f64::EPSILON * x_hi.abs().max(x_lo.abs()).max(1.0);
        let mut x = s.ln();
        if x < x_lo && x_lo - x <= snap {
            x = x_lo;
        } else if x > x_hi && x - x_hi <= snap {
            x = x_hi;
        }
        let (kt, wt) = locate(&self.times, t).ok_or_else(|| {
            Error::domain(format!(
                "time {t} outside surface domain [0, {}]",
                self.maturity()
            ))
        })?;
        let (kx, wx) = locate(&self.log_prices, x).ok_or_else(|| {
            Error::domain(format!(
                "price {s} outside surface domain [{:.6}, {:.6}]",
                self.log_prices[0].exp(),
                self.log_prices.last().unwrap().exp()
            ))
        })?;
        let pick = |m: &Vec<Vec<f64>>| -> f64 {
            let v00 = m[kt][kx];
            let v01 = m[kt][kx + 1];
            let v10 = m[kt + 1][kx];
            let v11 = m[kt + 1][kx + 1];
            (1.0 - wt) * ((1.0 - wx) * v00 + wx * v01) + wt * ((1.0 - wx) * v10 + wx * v11)
        };
        let value = pick(&self.values);
        let delta = pick(&self.delta);
        let gamma = pick(&self.gamma);
        Ok(Greeks {
            value,
            delta,
            gamma,
            eta: 0.5 * s * s * gamma,
        })
    }

    /// True when `(t, s)` can be queried without clamping.
    pub fn contains(&self, t: f64, s: f64) -> bool {
        let x = s.ln();
        t >= 0.0
            && t <= self.maturity()
            && x >= self.log_prices[0]
            && x <= *self.log_prices.last().unwrap()
    }

    /// Clamps a spot value into the grid domain.
    pub fn clamp_spot(&self, s: f64) -> f64 {
        s.clamp(
            self.log_prices[0].exp(),
            self.log_prices.last().unwrap().exp(),
        )
    }

    /// CSV export: `t,x,S,value,delta,gamma,eta`, row-major by time then
    /// space, full double precision.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "t,x,S,value,delta,gamma,eta")?;
        for (k, t) in self.times.iter().enumerate() {
            for (i, x) in self.log_prices.iter().enumerate() {
                writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    t,
                    x,
                    x.exp(),
                    self.values[k][i],
                    self.delta[k][i],
                    self.gamma[k][i],
                    self.eta[k][i]
                )?;
            }
        }
        Ok(())
    }
}

/// Index and weight for linear interpolation on a sorted grid.
pub(crate) fn locate(grid: &[f64], v: f64) -> Option<(usize, f64)> {
    let n = grid.len();
    if n < 2 || v < grid[0] || v > grid[n - 1] {
        return None;
    }
    let mut k = grid.partition_point(|&g| g <= v);
    // partition_point returns the first index with grid > v; step back to
    // the left cell edge and clamp the top boundary onto the last cell.
    k = k.saturating_sub(1).min(n - 2);
    let w = (v - grid[k]) / (grid[k + 1] - grid[k]);
    Some((k, w))
}

// ---------------------------------------------------------------------------
// Internal solver machinery (shared with the path-dependent chain)
// ---------------------------------------------------------------------------

/// Uniform log-price lattice.
#[derive(Debug, Clone)]
pub(crate) struct Lattice {
    pub x: Vec<f64>,
    pub s: Vec<f64>,
    pub dx: f64,
}

impl Lattice {
    pub(crate) fn build(spot: f64, band: &VolatilityBand, maturity: f64, grid: &GridSpec) -> Self {
        let half_width = grid.domain_width * band.sigma_hi * maturity.sqrt();
        let x0 = spot.ln() - half_width;
        let dx = 2.0 * half_width / (grid.n_space - 1) as f64;
        let x: Vec<f64> = (0..grid.n_space).map(|i| x0 + i as f64 * dx).collect();
        let s: Vec<f64> = x.iter().map(|&v| v.exp()).collect();
        Lattice { x, s, dx }
    }
}

/// Rate input of a solve: the deterministic curve, or a band optimized
/// node-wise together with the variance.
#[derive(Debug, Clone, Copy)]
pub(crate) enum RateRegime<'a> {
    Curve(&'a RateCurve),
    Band(f64, f64),
}

/// Far-field asymptote `a + b S` fitted per boundary from a terminal slice.
/// Linear-in-S data propagates backwards as `a * D(t, t_end) + b * S`, with
/// the constant leg discounted at the band extreme matching the side when
/// rates are uncertain.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LinearAsymptote {
    a_left: f64,
    b_left: f64,
    a_right: f64,
    b_right: f64,
    s_left: f64,
    s_right: f64,
}

impl LinearAsymptote {
    pub(crate) fn fit(values: &[f64], s: &[f64]) -> Self {
        let n = values.len();
        let b_left = (values[1] - values[0]) / (s[1] - s[0]);
        let a_left = values[0] - b_left * s[0];
        let b_right = (values[n - 1] - values[n - 2]) / (s[n - 1] - s[n - 2]);
        let a_right = values[n - 1] - b_right * s[n - 1];
        LinearAsymptote {
            a_left,
            b_left,
            a_right,
            b_right,
            s_left: s[0],
            s_right: s[n - 1],
        }
    }

    /// Boundary values at time `t` for data anchored at `t_end`.
    pub(crate) fn values_at(
        &self,
        t: f64,
        t_end: f64,
        regime: RateRegime<'_>,
        side: Side,
    ) -> Result<(f64, f64)> {
        let disc = |a: f64| -> Result<f64> {
            match regime {
                RateRegime::Curve(curve) => curve.discount_factor(t, t_end),
                RateRegime::Band(r_lo, r_hi) => {
                    // sup (lower: inf) of r (x V_x - V) = -r a D picks the
                    // rate extreme by the sign of the constant leg.
                    let r = match (side, a <= 0.0) {
                        (Side::Upper, true) | (Side::Lower, false) => r_hi,
                        _ => r_lo,
                    };
                    Ok((-r * (t_end - t)).exp())
                }
            }
        };
        Ok((
            self.a_left * disc(self.a_left)? + self.b_left * self.s_left,
            self.a_right * disc(self.a_right)? + self.b_right * self.s_right,
        ))
    }
}

/// One backward time step of the generator on a fixed lattice.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SegmentSolver<'a> {
    pub lattice: &'a Lattice,
    pub band: VolatilityBand,
    pub side: Side,
    pub regime: RateRegime<'a>,
    pub scheme: Scheme,
}

/// Per-node control choice: variance and effective rate.
#[derive(Debug, Clone, PartialEq)]
struct Policy {
    var: Vec<f64>,
    rate: Vec<f64>,
}

impl<'a> SegmentSolver<'a> {
    /// Bang-bang selection from central differences of the iterate:
    /// the variance from the sign of Gamma, and (with a rate band) the rate
    /// from the sign of `x V_x - V`. Values within the rounding-noise floor
    /// of the differences are snapped to the tie (zero) so the tie-break is
    /// deterministic instead of flapping on last-bit noise.
    fn select_policy(&self, v: &[f64], r_step: f64) -> Policy {
        let n = v.len();
        let dx = self.lattice.dx;
        let (var_lo, var_hi) = (self.band.var_lo(), self.band.var_hi());
        let mut var = vec![var_hi; n];
        let mut rate = vec![r_step; n];
        for i in 1..n - 1 {
            let scale = v[i - 1].abs() + 2.0 * v[i].abs() + v[i + 1].abs();
            let d2 = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (dx * dx);
            let d1 = (v[i + 1] - v[i - 1]) / (2.0 * dx);
            let tie_gamma = 32.0 * f64::EPSILON * scale * (1.0 / (dx * dx) + 1.0 / (2.0 * dx));
            let mut gamma_sign = d2 - d1; // sign of S^2 Gamma
            if gamma_sign.abs() <= tie_gamma {
                gamma_sign = 0.0;
            }
            var[i] = match (self.side, gamma_sign >= 0.0) {
                (Side::Upper, true) | (Side::Lower, false) => var_hi,
                _ => var_lo,
            };
            if let RateRegime::Band(r_lo, r_hi) = self.regime {
                let tie_q = 32.0 * f64::EPSILON * (scale / (2.0 * dx) + v[i].abs());
                let mut q = d1 - v[i]; // x V_x - V
                if q.abs() <= tie_q {
                    q = 0.0;
                }
                rate[i] = match (self.side, q >= 0.0) {
                    (Side::Upper, true) | (Side::Lower, false) => r_hi,
                    _ => r_lo,
                };
            }
        }
        Policy { var, rate }
    }

    /// Row coefficients `(sub, diag, sup)` of the generator at node `i`.
    ///
    /// The reaction coefficient is `expm1(r dt)/dt` instead of `r`, and the
    /// drift carries a matching `dx/sinh(dx)` factor: with these the scheme
    /// reproduces constants (discounted at the exact curve factor) and
    /// linear-in-S data without time-stepping error, so discounted strikes
    /// and forwards reprice cleanly.
    fn operator_row(&self, policy: &Policy, i: usize, dt: f64) -> (f64, f64, f64) {
        let dx = self.lattice.dx;
        let half_var = 0.5 * policy.var[i];
        let rho = (policy.rate[i] * dt).exp_m1() / dt;
        let drift = rho * dx / dx.sinh();
        let c_sub = half_var / (dx * dx) + (half_var - drift) / (2.0 * dx);
        let c_diag = -policy.var[i] / (dx * dx) - rho;
        let c_sup = half_var / (dx * dx) - (half_var - drift) / (2.0 * dx);
        (c_sub, c_diag, c_sup)
    }

    /// Solves `(I - dt L) v_new = old + dt f` for the given policy.
    fn implicit_solve(
        &self,
        policy: &Policy,
        old: &[f64],
        dt: f64,
        bc: (f64, f64),
        source: Option<&[f64]>,
    ) -> Vec<f64> {
        let n = old.len();
        let mut sub = vec![0.0; n];
        let mut diag = vec![1.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        rhs[0] = bc.0;
        rhs[n - 1] = bc.1;
        for i in 1..n - 1 {
            let (c_sub, c_diag, c_sup) = self.operator_row(policy, i, dt);
            sub[i] = -dt * c_sub;
            diag[i] = 1.0 - dt * c_diag;
            sup[i] = -dt * c_sup;
            rhs[i] = old[i] + dt * source.map_or(0.0, |f| f[i]);
        }
        thomas(&sub, &diag, &sup, &rhs)
    }

    /// Explicit update `v_new = old + dt (L old + f)`.
    fn explicit_step(
        &self,
        policy: &Policy,
        old: &[f64],
        dt: f64,
        bc: (f64, f64),
        source: Option<&[f64]>,
    ) -> Vec<f64> {
        let n = old.len();
        let mut v = vec![0.0; n];
        v[0] = bc.0;
        v[n - 1] = bc.1;
        for i in 1..n - 1 {
            let (c_sub, c_diag, c_sup) = self.operator_row(policy, i, dt);
            let l = c_sub * old[i - 1] + c_diag * old[i] + c_sup * old[i + 1];
            v[i] = old[i] + dt * (l + source.map_or(0.0, |f| f[i]));
        }
        v
    }

    /// Advances one step backward from `old` over a step of length `dt`.
    /// `r_step` is the step-average curve rate (ignored under a rate band),
    /// `bc` the Dirichlet boundary pair at the new time level.
    pub(crate) fn advance(
        &self,
        old: &[f64],
        dt: f64,
        r_step: f64,
        bc: (f64, f64),
        source: Option<&[f64]>,
        t_label: f64,
    ) -> Result<Vec<f64>> {
        match self.scheme {
            Scheme::Explicit => {
                let dt_max = self.lattice.dx * self.lattice.dx / self.band.var_hi();
                if dt > dt_max {
                    return Err(Error::solver(format!(
                        "explicit scheme unstable: dt = {dt:.3e} exceeds dx^2/sigma_hi^2 = \
                         {dt_max:.3e}; increase n_time or switch to implicit_policy_iteration"
                    )));
                }
                let policy = self.select_policy(old, r_step);
                Ok(self.explicit_step(&policy, old, dt, bc, source))
            }
            Scheme::ImplicitPolicyIteration => {
                let mut policy = self.select_policy(old, r_step);
                let mut prev = old.to_vec();
                let mut last_change = f64::INFINITY;
                let mut flips = 0usize;
                let mut stagnant = 0usize;
                for iter in 0..POLICY_MAX_ITERS {
                    let v = self.implicit_solve(&policy, old, dt, bc, source);
                    let new_policy = self.select_policy(&v, r_step);
                    last_change = v
                        .iter()
                        .zip(&prev)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    let fixed = new_policy == policy;
                    if !fixed {
                        flips += 1;
                    }
                    stagnant = if last_change < POLICY_TOL {
                        stagnant + 1
                    } else {
                        0
                    };
                    prev = v;
                    policy = new_policy;
                    if iter > 0 && last_change < POLICY_TOL && (fixed || stagnant >= 2) {
                        // Either the assignment is fixed, or it keeps
                        // swapping between value-equivalent optima at
                        // second-derivative near-ties while the values have
                        // stagnated below tolerance.
                        return Ok(prev);
                    }
                }
                Err(Error::solver(format!(
                    "policy iteration did not converge within {POLICY_MAX_ITERS} iterations \
                     at t = {t_label:.6} (side {}, {flips} policy reassignments, \
                     last max value change {last_change:.3e})",
                    self.side
                )))
            }
        }
    }
}

/// Tridiagonal solve (Thomas algorithm). The assembled systems are strictly
/// diagonally dominant.
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / m;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut v = vec![0.0; n];
    v[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        v[i] = d[i] - c[i] * v[i + 1];
    }
    v
}

/// Central-difference delta/gamma/eta fields for a stack of time slices.
fn greek_fields(
    values: &[Vec<f64>],
    lattice: &Lattice,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = lattice.s.len();
    let dx = lattice.dx;
    let mut delta = Vec::with_capacity(values.len());
    let mut gamma = Vec::with_capacity(values.len());
    let mut eta = Vec::with_capacity(values.len());
    for v in values {
        let mut dl = vec![0.0; n];
        let mut gm = vec![0.0; n];
        let mut et = vec![0.0; n];
        for i in 1..n - 1 {
            let d1 = (v[i + 1] - v[i - 1]) / (2.0 * dx);
            let d2 = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (dx * dx);
            dl[i] = d1 / lattice.s[i];
            gm[i] = (d2 - d1) / (lattice.s[i] * lattice.s[i]);
            et[i] = 0.5 * (d2 - d1);
        }
        // One-sided delta at the far-field boundaries; Gamma is zero there
        // by the boundary condition.
        dl[0] = (v[1] - v[0]) / (dx * lattice.s[0]);
        dl[n - 1] = (v[n - 1] - v[n - 2]) / (dx * lattice.s[n - 1]);
        delta.push(dl);
        gamma.push(gm);
        eta.push(et);
    }
    (delta, gamma, eta)
}

fn solve_grid(
    terminal: Vec<f64>,
    spec: &MarketSpec,
    grid: &GridSpec,
    side: Side,
    regime: RateRegime<'_>,
    source: Option<&dyn Fn(f64, f64) -> f64>,
    lattice: Lattice,
) -> Result<PriceSurface> {
    let n_time = grid.n_time;
    let t_end = spec.maturity;
    let times: Vec<f64> = (0..=n_time)
        .map(|k| t_end * k as f64 / n_time as f64)
        .collect();

    let asymptote = LinearAsymptote::fit(&terminal, &lattice.s);
    let solver = SegmentSolver {
        lattice: &lattice,
        band: spec.band,
        side,
        regime,
        scheme: grid.scheme,
    };

    let mut values = vec![Vec::new(); n_time + 1];
    values[n_time] = terminal;
    let mut src_buf = vec![0.0; lattice.s.len()];
    for k in (0..n_time).rev() {
        let (t_new, t_old) = (times[k], times[k + 1]);
        let dt = t_old - t_new;
        let r_step = match regime {
            RateRegime::Curve(curve) => curve.average_rate(t_new, t_old)?,
            RateRegime::Band(..) => 0.0,
        };
        let bc = asymptote.values_at(t_new, t_end, regime, side)?;
        let src_slice = source.map(|f| {
            let t_eval = match grid.scheme {
                Scheme::ImplicitPolicyIteration => t_new,
                Scheme::Explicit => t_old,
            };
            for (i, &s) in lattice.s.iter().enumerate() {
                src_buf[i] = f(t_eval, s);
            }
            src_buf.as_slice()
        });
        values[k] = solver.advance(&values[k + 1], dt, r_step, bc, src_slice, t_new)?;
    }

    let (delta, gamma, eta) = greek_fields(&values, &lattice);
    Ok(PriceSurface {
        times,
        log_prices: lattice.x,
        values,
        delta,
        gamma,
        eta,
        side,
        spot: spec.spot,
    })
}

fn terminal_slice(payoff: &Payoff, lattice: &Lattice) -> Result<Vec<f64>> {
    lattice.s.iter().map(|&s| payoff.eval(s, &[])).collect()
}

/// Solves the worst-case pricing PDE for a state-dependent payoff, with an
/// optional source term `f(t, S)` added to the generator.
pub fn solve_bsb(
    payoff: &Payoff,
    spec: &MarketSpec,
    grid: &GridSpec,
    side: Side,
    source: Option<&dyn Fn(f64, f64) -> f64>,
) -> Result<PriceSurface> {
    grid.validate()?;
    if !payoff.is_state_dependent() {
        return Err(Error::domain(
            "solve_bsb requires a state-dependent payoff (no fixings or aggregates); \
             use solve_path_dependent instead",
        ));
    }
    let lattice = Lattice::build(spec.spot, &spec.band, spec.maturity, grid);
    let terminal = terminal_slice(payoff, &lattice)?;
    solve_grid(
        terminal,
        spec,
        grid,
        side,
        RateRegime::Curve(&spec.rates),
        source,
        lattice,
    )
}

/// Solves the rate-uncertain variant: both the variance and the rate are
/// optimized node-wise, the rate over the curve's `rate_band`.
pub fn solve_bsb_rate_uncertain(
    payoff: &Payoff,
    spec: &MarketSpec,
    grid: &GridSpec,
    side: Side,
) -> Result<PriceSurface> {
    grid.validate()?;
    let (r_lo, r_hi) = spec.rates.rate_band.ok_or_else(|| {
        Error::domain("solve_bsb_rate_uncertain requires a rate_band on the rate curve")
    })?;
    if !payoff.is_state_dependent() {
        return Err(Error::domain(
            "solve_bsb_rate_uncertain requires a state-dependent payoff",
        ));
    }
    let lattice = Lattice::build(spec.spot, &spec.band, spec.maturity, grid);
    let terminal = terminal_slice(payoff, &lattice)?;
    solve_grid(
        terminal,
        spec,
        grid,
        side,
        RateRegime::Band(r_lo, r_hi),
        None,
        lattice,
    )
}
