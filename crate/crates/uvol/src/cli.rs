//! Batch front-end: reads a JSON run configuration, dispatches to the
//! pricing/hedging/metric operations and writes CSV/JSON results plus a run
//! manifest into the output directory.
//!
//! Exit codes: 0 success, 1 configuration/validation failure (no files are
//! written), 2 computation failure (the manifest is still written with an
//! error status).

use crate::bsb::{
    solve_bsb, solve_bsb_rate_uncertain, GridSpec, Side, POLICY_MAX_ITERS, POLICY_TOL,
};
use crate::chain::solve_path_dependent;
use crate::config::{PriceBlock, RunConfig};
use crate::error::{Error, Result};
use crate::hedge::run_delta_hedge;
use crate::market::{log_return_mean_band, MarketSpec};
use crate::metrics::{parity_check, spread};
use crate::payoff::Payoff;
use crate::sim::{simulate_paths, write_paths_csv};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

/// Batch commands, one output-file contract each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Price,
    PricePathDep,
    Hedge,
    Spread,
    Parity,
    Simulate,
    BandStats,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Price => "price",
            Command::PricePathDep => "price-path-dep",
            Command::Hedge => "hedge",
            Command::Spread => "spread",
            Command::Parity => "parity",
            Command::Simulate => "simulate",
            Command::BandStats => "band-stats",
        }
    }
}

impl std::str::FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "price" => Command::Price,
            "price-path-dep" => Command::PricePathDep,
            "hedge" => Command::Hedge,
            "spread" => Command::Spread,
            "parity" => Command::Parity,
            "simulate" => Command::Simulate,
            "band-stats" => Command::BandStats,
            other => return Err(Error::Config(format!("unknown command `{other}`"))),
        })
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    command: &'a str,
    config_hash: String,
    versions: Versions,
    seed: Option<u64>,
    wall_time_seconds: f64,
    status: &'a str,
    error: Option<String>,
    resolved: ResolvedDefaults,
}

#[derive(Serialize)]
struct Versions {
    uvol: &'static str,
}

#[derive(Serialize)]
struct ResolvedDefaults {
    n_space: usize,
    n_time: usize,
    domain_width: f64,
    scheme: crate::bsb::Scheme,
    stat_nodes: usize,
    policy_tol: f64,
    policy_max_iters: usize,
}

#[derive(Serialize)]
struct PriceOutput {
    side: Side,
    value: f64,
    upper: Option<f64>,
    lower: Option<f64>,
    rate_uncertain: bool,
}

#[derive(Serialize)]
struct ParityOutput {
    residual: f64,
    strike: f64,
    side: Side,
}

#[derive(Serialize)]
struct BandStatsOutput {
    mean_band: (f64, f64),
    log_confidence_interval: (f64, f64),
    interval_outside_validated_region: bool,
}

/// Everything validated before any output is produced.
struct Prepared {
    config: RunConfig,
    spec: MarketSpec,
    grid: GridSpec,
    config_hash: String,
    seed: Option<u64>,
}

fn prepare(command: Command, config_path: &Path, seed_override: Option<u64>) -> Result<Prepared> {
    let raw = fs::read(config_path)?;
    let config: RunConfig = serde_json::from_slice(&raw)
        .map_err(|e| Error::Config(format!("invalid configuration: {e}")))?;
    config.validate_version()?;
    let spec = config.market_spec()?;
    let grid = config.grid_spec()?;

    // Command-specific block presence and payoff syntax are part of
    // validation: fail before creating any output.
    match command {
        Command::Price | Command::Spread => {
            Payoff::parse(config.payoff_text()?)?;
        }
        Command::PricePathDep => {
            Payoff::parse(config.payoff_text()?)?;
            config.schedule(spec.maturity)?;
        }
        Command::Hedge => {
            Payoff::parse(config.payoff_text()?)?;
            config
                .hedge
                .as_ref()
                .ok_or_else(|| Error::Config("hedge command requires a `hedge` block".into()))?;
        }
        Command::Simulate => {
            config.simulate.as_ref().ok_or_else(|| {
                Error::Config("simulate command requires a `simulate` block".into())
            })?;
        }
        Command::Parity => {
            config
                .parity
                .as_ref()
                .ok_or_else(|| Error::Config("parity command requires a `parity` block".into()))?;
        }
        Command::BandStats => {
            config.band_stats.as_ref().ok_or_else(|| {
                Error::Config("band-stats command requires a `band_stats` block".into())
            })?;
        }
    }

    let mut hasher = Sha256::new();
    hasher.update(&raw);
    let config_hash = format!("sha256:{:x}", hasher.finalize());

    let seed = seed_override.or(match command {
        Command::Hedge => config.hedge.as_ref().map(|h| h.seed),
        Command::Simulate => config.simulate.as_ref().map(|s| s.seed),
        _ => None,
    });

    Ok(Prepared {
        config,
        spec,
        grid,
        config_hash,
        seed,
    })
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut file = io::BufWriter::new(fs::File::create(dir.join(name))?);
    serde_json::to_writer_pretty(&mut file, value)?;
    writeln!(file)?;
    Ok(())
}

fn create_buffered(path: std::path::PathBuf) -> Result<io::BufWriter<fs::File>> {
    Ok(io::BufWriter::new(fs::File::create(path)?))
}

fn execute(command: Command, p: &Prepared, out_dir: &Path) -> Result<()> {
    let spec = &p.spec;
    let grid = &p.grid;
    match command {
        Command::Price => {
            let payoff = Payoff::parse(p.config.payoff_text()?)?;
            let block = p.config.price.unwrap_or(PriceBlock::default());
            if block.rate_uncertain {
                let chosen = solve_bsb_rate_uncertain(&payoff, spec, grid, block.side)?;
                write_json(
                    out_dir,
                    "price.json",
                    &PriceOutput {
                        side: block.side,
                        value: chosen.price_at_spot(),
                        upper: None,
                        lower: None,
                        rate_uncertain: true,
                    },
                )?;
                let mut f = create_buffered(out_dir.join("surface.csv"))?;
                chosen.write_csv(&mut f)?;
            } else {
                let upper = solve_bsb(&payoff, spec, grid, Side::Upper, None)?;
                let lower = solve_bsb(&payoff, spec, grid, Side::Lower, None)?;
                let chosen = match block.side {
                    Side::Upper => &upper,
                    Side::Lower => &lower,
                };
                write_json(
                    out_dir,
                    "price.json",
                    &PriceOutput {
                        side: block.side,
                        value: chosen.price_at_spot(),
                        upper: Some(upper.price_at_spot()),
                        lower: Some(lower.price_at_spot()),
                        rate_uncertain: false,
                    },
                )?;
                let mut f = create_buffered(out_dir.join("surface.csv"))?;
                chosen.write_csv(&mut f)?;
            }
        }
        Command::PricePathDep => {
            let payoff = Payoff::parse(p.config.payoff_text()?)?;
            let schedule = p.config.schedule(spec.maturity)?;
            let side = p.config.price.unwrap_or_default().side;
            let (value, _) = solve_path_dependent(&payoff, &schedule, spec, grid, side)?;
            write_json(
                out_dir,
                "price.json",
                &PriceOutput {
                    side,
                    value,
                    upper: None,
                    lower: None,
                    rate_uncertain: false,
                },
            )?;
        }
        Command::Hedge => {
            let payoff = Payoff::parse(p.config.payoff_text()?)?;
            let block = p.config.hedge.as_ref().expect("validated in prepare");
            let surface_side = match block.side {
                crate::hedge::HedgeSide::ShortUpper => Side::Upper,
                crate::hedge::HedgeSide::LongLower => Side::Lower,
            };
            let surface = Arc::new(solve_bsb(&payoff, spec, grid, surface_side, None)?);
            let vol_policy = block.vol_policy.to_policy(Some(surface.clone()))?;
            let drift_policy = block.drift_policy.to_policy();
            let seed = p.seed.expect("hedge runs carry a seed");
            let paths = simulate_paths(
                spec,
                &vol_policy,
                &drift_policy,
                block.n_paths,
                block.n_steps,
                seed,
            )?;
            let mut f = create_buffered(out_dir.join("paths.csv"))?;
            write_paths_csv(&paths, &mut f)?;
            for path in &paths {
                let ledger =
                    run_delta_hedge(&surface, path, spec, block.side, block.clamp_to_domain)?;
                let mut f = create_buffered(out_dir.join(format!("ledger_{}.csv", path.path_id)))?;
                ledger.write_csv(&mut f)?;
            }
        }
        Command::Spread => {
            let payoff = Payoff::parse(p.config.payoff_text()?)?;
            let report = spread(&payoff, spec, grid)?;
            write_json(out_dir, "spread.json", &report)?;
        }
        Command::Parity => {
            let block = p.config.parity.expect("validated in prepare");
            let residual = parity_check(spec, block.strike, grid, block.side)?;
            write_json(
                out_dir,
                "parity.json",
                &ParityOutput {
                    residual,
                    strike: block.strike,
                    side: block.side,
                },
            )?;
        }
        Command::Simulate => {
            let block = p.config.simulate.as_ref().expect("validated in prepare");
            let vol_policy = block.vol_policy.to_policy(None)?;
            let drift_policy = block.drift_policy.to_policy();
            let seed = p.seed.expect("simulate runs carry a seed");
            let paths = simulate_paths(
                spec,
                &vol_policy,
                &drift_policy,
                block.n_paths,
                block.n_steps,
                seed,
            )?;
            let mut f = create_buffered(out_dir.join("paths.csv"))?;
            write_paths_csv(&paths, &mut f)?;
        }
        Command::BandStats => {
            let block = p.config.band_stats.expect("validated in prepare");
            let interval = spec.robust_confidence_interval()?;
            write_json(
                out_dir,
                "band_stats.json",
                &BandStatsOutput {
                    mean_band: log_return_mean_band(block.mu, &spec.band),
                    log_confidence_interval: (interval.ln_lo, interval.ln_hi),
                    interval_outside_validated_region: interval.outside_validated_region,
                },
            )?;
        }
    }
    Ok(())
}

/// Runs `command` against the configuration at `config_path`, writing
/// results into `out_dir`. Returns the process exit code.
pub fn run(
    command: Command,
    config_path: &Path,
    out_dir: &Path,
    seed_override: Option<u64>,
) -> i32 {
    let prepared = match prepare(command, config_path, seed_override) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("uvol {}: {e}", command.name());
            return 1;
        }
    };
    if let Err(e) = fs::create_dir_all(out_dir) {
        eprintln!(
            "uvol {}: cannot create output directory: {e}",
            command.name()
        );
        return 1;
    }

    let started = Instant::now();
    let outcome = execute(command, &prepared, out_dir);
    let wall = started.elapsed().as_secs_f64();

    let (status, error, code) = match &outcome {
        Ok(()) => ("ok", None, 0),
        Err(e) => {
            eprintln!("uvol {}: {e}", command.name());
            ("error", Some(e.to_string()), 2)
        }
    };
    let manifest = Manifest {
        schema_version: crate::config::SCHEMA_VERSION,
        command: command.name(),
        config_hash: prepared.config_hash.clone(),
        versions: Versions {
            uvol: env!("CARGO_PKG_VERSION"),
        },
        seed: prepared.seed,
        wall_time_seconds: wall,
        status,
        error,
        resolved: ResolvedDefaults {
            n_space: prepared.grid.n_space,
            n_time: prepared.grid.n_time,
            domain_width: prepared.grid.domain_width,
            scheme: prepared.grid.scheme,
            stat_nodes: prepared
                .grid
                .stat_nodes
                .unwrap_or(prepared.grid.n_space / 2),
            policy_tol: POLICY_TOL,
            policy_max_iters: POLICY_MAX_ITERS,
        },
    };
    if let Err(e) = write_json(out_dir, "manifest.json", &manifest) {
        eprintln!("uvol {}: cannot write manifest: {e}", command.name());
        return if code == 0 { 2 } else { code };
    }
    code
}
