//! Discrete-path-dependent pricing via a backward chain of PDE solves.
//!
//! Between consecutive monitoring dates the claim value solves the same
//! worst-case generator as the state-dependent case, with the path summary
//! statistic frozen as an extra tensor dimension. At each monitoring date
//! `t_k` (walking backward) the slices are stitched:
//!
//! ```text
//! V(t_k-, x, a) = V(t_k+, x, update(a, S_x, k))
//! ```
//!
//! with `update` the running-statistic refresh (mean, max or min over the
//! fixings observed so far). The supported payoffs depend on the fixings
//! only through one such statistic, optionally combined with the terminal
//! price; the tensor stays two-dimensional in `(x, a)`.

use crate::bsb::{locate, GridSpec, Lattice, LinearAsymptote, RateRegime, SegmentSolver, Side};
use crate::error::{Error, Result};
use crate::market::MarketSpec;
use crate::payoff::{AggKind, MonitoringSchedule, Payoff};
use rayon::prelude::*;
use std::io::Write;

/// Path summary statistic carried through the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatKind {
    RunningAvg,
    RunningMax,
    RunningMin,
}

impl StatKind {
    fn from_agg(kind: AggKind) -> Self {
        match kind {
            AggKind::Avg => StatKind::RunningAvg,
            AggKind::MaxF => StatKind::RunningMax,
            AggKind::MinF => StatKind::RunningMin,
        }
    }
}

/// Running-statistic refresh when the `k`-th fixing (1-based) comes in at
/// price `s`. The first fixing initializes the statistic regardless of the
/// prior value.
pub fn update_stat(kind: StatKind, stat: f64, s: f64, k: usize) -> f64 {
    if k <= 1 {
        return s;
    }
    match kind {
        StatKind::RunningAvg => ((k - 1) as f64 * stat + s) / k as f64,
        StatKind::RunningMax => stat.max(s),
        StatKind::RunningMin => stat.min(s),
    }
}

/// Value tensor of one inter-monitoring segment `[t_{k-1}, t_k]`.
///
/// `values[time][stat][x]`, times ascending; the last time slice is the
/// stitched (post-jump) tensor at `t_k`, the first the pre-jump tensor at
/// `t_{k-1}`.
#[derive(Debug, Clone)]
pub struct AugmentedSurface {
    pub stat_kind: StatKind,
    pub stat_nodes: Vec<f64>,
    pub times: Vec<f64>,
    pub log_prices: Vec<f64>,
    pub values: Vec<Vec<Vec<f64>>>,
    pub side: Side,
    /// 1-based segment index `k`; the segment spans `(t_{k-1}, t_k]`.
    pub segment: usize,
}

impl AugmentedSurface {
    /// CSV export: `t,x,S,stat,value`, full double precision.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "t,x,S,stat,value")?;
        for (kt, t) in self.times.iter().enumerate() {
            for (ka, a) in self.stat_nodes.iter().enumerate() {
                for (kx, x) in self.log_prices.iter().enumerate() {
                    writeln!(
                        out,
                        "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                        t,
                        x,
                        x.exp(),
                        a,
                        self.values[kt][ka][kx]
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// Payoff analysis outcome: which statistic drives the claim.
fn required_stat(payoff: &Payoff) -> Result<Option<StatKind>> {
    if payoff.n_fixings > 0 {
        return Err(Error::UnsupportedPayoff(format!(
            "`{}` references individual fixings S[i]; only payoffs driven by one of \
             AVG/MAXF/MINF (plus the terminal price) are reducible to a summary statistic",
            payoff.source_text
        )));
    }
    let aggs = payoff.aggregates();
    match aggs.len() {
        0 => Ok(None),
        1 => Ok(Some(StatKind::from_agg(aggs[0]))),
        _ => Err(Error::UnsupportedPayoff(format!(
            "`{}` mixes {} aggregate kinds; a single summary statistic is required",
            payoff.source_text,
            aggs.len()
        ))),
    }
}

fn eval_tensor_entry(payoff: &Payoff, has_agg: bool, s: f64, stat: f64) -> Result<f64> {
    if has_agg {
        payoff.eval_with_aggregate(s, stat)
    } else {
        payoff.eval(s, &[])
    }
}

/// Linear interpolation over the stat dimension of a `[stat][x]` tensor at
/// column `x_idx`, clamped to the stat span.
fn interp_stat(tensor: &[Vec<f64>], stat_nodes: &[f64], x_idx: usize, q: f64) -> f64 {
    if stat_nodes.len() == 1 {
        return tensor[0][x_idx];
    }
    let q = q.clamp(stat_nodes[0], *stat_nodes.last().unwrap());
    let (k, w) = locate(stat_nodes, q).expect("clamped query lies inside the stat span");
    (1.0 - w) * tensor[k][x_idx] + w * tensor[k + 1][x_idx]
}

/// Prices a discrete-path-dependent claim by backward recursion over the
/// monitoring dates. Returns the time-0 value at the spot (with the empty
/// statistic) together with the per-segment tensors, ascending by segment.
pub fn solve_path_dependent(
    payoff: &Payoff,
    schedule: &MonitoringSchedule,
    spec: &MarketSpec,
    grid: &GridSpec,
    side: Side,
) -> Result<(f64, Vec<AugmentedSurface>)> {
    grid.validate()?;
    if *schedule.dates.last().unwrap() != spec.maturity {
        return Err(Error::domain(format!(
            "schedule ends at {} but the market maturity is {}",
            schedule.dates.last().unwrap(),
            spec.maturity
        )));
    }
    let stat_kind_opt = required_stat(payoff)?;
    let has_agg = stat_kind_opt.is_some();
    let stat_kind = stat_kind_opt.unwrap_or(StatKind::RunningAvg);
    let n_fix = schedule.len();

    let lattice = Lattice::build(spec.spot, &spec.band, spec.maturity, grid);
    let full_stat_nodes: Vec<f64> = if has_agg && n_fix > 1 {
        let m = grid.stat_node_count();
        let (lo, hi) = (lattice.s[0], *lattice.s.last().unwrap());
        (0..m)
            .map(|j| lo + (hi - lo) * j as f64 / (m - 1) as f64)
            .collect()
    } else {
        vec![spec.spot]
    };
    let single_stat = vec![spec.spot];

    // Tensor at t_N = T: the final fixing enters the statistic before the
    // payoff is read off.
    let terminal: Vec<Vec<f64>> = if n_fix == 1 {
        vec![lattice
            .s
            .iter()
            .map(|&s| eval_tensor_entry(payoff, has_agg, s, update_stat(stat_kind, s, s, 1)))
            .collect::<Result<Vec<f64>>>()?]
    } else {
        full_stat_nodes
            .iter()
            .map(|&a| {
                lattice
                    .s
                    .iter()
                    .map(|&s| {
                        eval_tensor_entry(payoff, has_agg, s, update_stat(stat_kind, a, s, n_fix))
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<Vec<f64>>>>()?
    };

    // Per-segment step counts by cumulative proportional allocation.
    let t_total = spec.maturity;
    let boundary = |k: usize| -> f64 {
        if k == 0 {
            0.0
        } else {
            schedule.dates[k - 1]
        }
    };
    let cum = |k: usize| -> usize { (grid.n_time as f64 * boundary(k) / t_total).round() as usize };

    let solver = SegmentSolver {
        lattice: &lattice,
        band: spec.band,
        side,
        regime: RateRegime::Curve(&spec.rates),
        scheme: grid.scheme,
    };

    let mut current = terminal;
    let mut surfaces: Vec<AugmentedSurface> = Vec::with_capacity(n_fix);
    let mut price_at_0 = f64::NAN;

    for k in (1..=n_fix).rev() {
        let (t_lo, t_hi) = (boundary(k - 1), boundary(k));
        let steps = (cum(k).saturating_sub(cum(k - 1))).max(1);
        let times: Vec<f64> = (0..=steps)
            .map(|i| t_lo + (t_hi - t_lo) * i as f64 / steps as f64)
            .collect();
        let seg_stat_nodes = if current.len() == 1 {
            single_stat.clone()
        } else {
            full_stat_nodes.clone()
        };

        // Solve each stat slice independently backward over the segment.
        let per_slice: Vec<Result<Vec<Vec<f64>>>> = current
            .par_iter()
            .map(|slice_terminal| {
                let asymptote = LinearAsymptote::fit(slice_terminal, &lattice.s);
                let mut slices: Vec<Vec<f64>> = vec![Vec::new(); steps + 1];
                slices[steps] = slice_terminal.clone();
                for i in (0..steps).rev() {
                    let (t_new, t_old) = (times[i], times[i + 1]);
                    let dt = t_old - t_new;
                    let r_step = spec.rates.average_rate(t_new, t_old)?;
                    let bc =
                        asymptote.values_at(t_new, t_hi, RateRegime::Curve(&spec.rates), side)?;
                    slices[i] = solver.advance(&slices[i + 1], dt, r_step, bc, None, t_new)?;
                }
                Ok(slices)
            })
            .collect();

        // Reassemble as [time][stat][x].
        let mut tensor: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(current.len()); steps + 1];
        for slice in per_slice {
            let slice = slice?;
            for (ti, v) in slice.into_iter().enumerate() {
                tensor[ti].push(v);
            }
        }

        let at_left = tensor[0].clone();
        surfaces.push(AugmentedSurface {
            stat_kind,
            stat_nodes: seg_stat_nodes.clone(),
            times,
            log_prices: lattice.x.clone(),
            values: tensor,
            side,
            segment: k,
        });

        if k >= 2 {
            // Jump at t_{k-1}: refresh the statistic with the fixing at S_x.
            let date_idx = k - 1;
            current = if date_idx == 1 {
                // First fixing initializes the statistic; the result no
                // longer depends on the incoming stat value.
                vec![lattice
                    .s
                    .iter()
                    .enumerate()
                    .map(|(xi, &s)| {
                        interp_stat(
                            &at_left,
                            &seg_stat_nodes,
                            xi,
                            update_stat(stat_kind, s, s, 1),
                        )
                    })
                    .collect()]
            } else {
                full_stat_nodes
                    .iter()
                    .map(|&a| {
                        lattice
                            .s
                            .iter()
                            .enumerate()
                            .map(|(xi, &s)| {
                                interp_stat(
                                    &at_left,
                                    &seg_stat_nodes,
                                    xi,
                                    update_stat(stat_kind, a, s, date_idx),
                                )
                            })
                            .collect()
                    })
                    .collect()
            };
        } else {
            let x0 = spec.spot.ln();
            let (kx, wx) = locate(&lattice.x, x0).expect("spot lies inside the lattice");
            price_at_0 = (1.0 - wx) * at_left[0][kx] + wx * at_left[0][kx + 1];
        }
    }

    surfaces.reverse();
    Ok((price_at_0, surfaces))
}
