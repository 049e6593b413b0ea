//! Monte-Carlo sweeps over Es/N0.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::trial::{Link, TrialCounts};
use crate::error::{Error, Result};

/// Trials per scheduling batch. Stopping decisions are taken only between
/// batches, which keeps the set of executed trials independent of the
/// worker count.
pub const BATCH: u64 = 64;

/// One aggregated grid point, laid out as a CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scheme: String,
    pub estimator: String,
    #[serde(rename = "U")]
    pub uavs: usize,
    #[serde(rename = "M")]
    pub order: usize,
    #[serde(rename = "Mp")]
    pub pole_modulus: f64,
    #[serde(rename = "Tc")]
    pub taps: usize,
    #[serde(rename = "KriceDb")]
    pub k_rice_db: f64,
    #[serde(rename = "EsN0Db")]
    pub esn0_db: f64,
    pub blocks: u64,
    pub symbols: u64,
    #[serde(rename = "symbolErrors")]
    pub symbol_errors: u64,
    pub ser: f64,
    #[serde(rename = "serCi95")]
    pub ser_ci95: f64,
    pub bits: u64,
    #[serde(rename = "bitErrors")]
    pub bit_errors: u64,
    pub ber: f64,
    pub seed: u64,
    #[serde(rename = "configDigest")]
    pub config_digest: String,
}

impl SweepRow {
    pub fn new(cfg: &ScenarioConfig, esn0_db: f64, counts: TrialCounts) -> Self {
        let ser = counts.ser();
        Self {
            scheme: cfg.scheme.as_str().to_string(),
            estimator: cfg.estimator.as_str().to_string(),
            uavs: cfg.uavs,
            order: cfg.apf.order,
            pole_modulus: cfg.apf.pole_modulus,
            taps: cfg.apf.taps,
            k_rice_db: cfg.channel.k_rice_db,
            esn0_db,
            blocks: counts.blocks,
            symbols: counts.symbols,
            symbol_errors: counts.symbol_errors,
            ser,
            ser_ci95: ci95(ser, counts.symbols),
            bits: counts.bits,
            bit_errors: counts.bit_errors,
            ber: counts.ber(),
            seed: cfg.sweep.master_seed,
            config_digest: cfg.digest(),
        }
    }

    /// Binomial standard error of the SER.
    pub fn ser_sigma(&self) -> f64 {
        sigma(self.ser, self.symbols)
    }
}

fn sigma(p: f64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        (p * (1.0 - p) / n as f64).sqrt()
    }
}

/// Normal-approximation 95% half-width `1.96 sqrt(p (1 - p) / n)`.
pub fn ci95(p: f64, n: u64) -> f64 {
    1.96 * sigma(p, n)
}

/// Rows of a sweep plus per-point wall times (kept out of the CSV so that
/// files stay reproducible).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Raw counts behind each row.
    pub counts: Vec<TrialCounts>,
    pub wall_times: Vec<Duration>,
}

impl SweepResult {
    pub fn extend(&mut self, other: SweepResult) {
        self.rows.extend(other.rows);
        self.counts.extend(other.counts);
        self.wall_times.extend(other.wall_times);
    }
}

/// Runs trials `0, 1, ...` of `link` at one Es/N0 until the block budget is
/// spent or, if configured, enough symbol errors were collected.
pub fn run_point(link: &Link, esn0_db: f64, pool: &rayon::ThreadPool) -> Result<TrialCounts> {
    let sweep = &link.config().sweep;
    let mut total = TrialCounts::default();
    let mut next = 0u64;
    while next < sweep.blocks_per_point {
        if sweep.min_symbol_errors > 0 && total.symbol_errors >= sweep.min_symbol_errors {
            break;
        }
        let end = (next + BATCH).min(sweep.blocks_per_point);
        let batch: Vec<TrialCounts> =
            pool.install(|| (next..end).into_par_iter().map(|t| link.run_block(esn0_db, t)).collect::<Result<_>>())?;
        total += batch.into_iter().sum();
        next = end;
    }
    Ok(total)
}

pub fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start {workers} workers: {e}")))
}

/// One row per Es/N0 grid point.
pub fn run_sweep(cfg: &ScenarioConfig, workers: usize) -> Result<SweepResult> {
    let link = Link::new(cfg)?;
    let pool = thread_pool(workers)?;
    let mut out = SweepResult::default();
    for &esn0 in &cfg.sweep.esn0_db {
        let start = Instant::now();
        let counts = run_point(&link, esn0, &pool)?;
        out.rows.push(SweepRow::new(cfg, esn0, counts));
        out.counts.push(counts);
        out.wall_times.push(start.elapsed());
    }
    Ok(out)
}
