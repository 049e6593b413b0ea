//! Pole-modulus sweeps and composite-channel flatness statistics.

use serde::Serialize;

use super::config::ScenarioConfig;
use super::sweep::{run_point, thread_pool, SweepResult, SweepRow};
use super::trial::Link;
use crate::channel::{self, ChannelRealization};
use crate::dsp::RngStream;
use crate::error::{Error, Result};
use crate::stbc;
use crate::vchan::{self, VchanScheme};

/// SER at one Es/N0 over every `(M_p, M, T_c)` combination, in that nesting
/// order. Combinations that violate the estimator constraints are rejected
/// before anything runs.
pub fn pole_modulus_study(
    cfg: &ScenarioConfig,
    moduli: &[f64],
    orders: &[usize],
    taps: &[usize],
    esn0_db: f64,
    workers: usize,
) -> Result<SweepResult> {
    if cfg.scheme != VchanScheme::Apf {
        return Err(Error::Config("the pole study needs the apf scheme".into()));
    }
    let mut grid = Vec::new();
    for &mp in moduli {
        for &m in orders {
            for &tc in taps {
                let mut c = cfg.clone();
                c.apf.pole_modulus = mp;
                c.apf.order = m;
                c.apf.taps = tc;
                c.validate()?;
                grid.push(c);
            }
        }
    }
    let pool = thread_pool(workers)?;
    let mut out = SweepResult::default();
    for c in grid {
        let start = std::time::Instant::now();
        let counts = run_point(&Link::new(&c)?, esn0_db, &pool)?;
        out.rows.push(SweepRow::new(&c, esn0_db, counts));
        out.counts.push(counts);
        out.wall_times.push(start.elapsed());
    }
    Ok(out)
}

/// Composite-channel magnitude statistics for one UAV count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatnessEntry {
    pub uavs: usize,
    /// `|H_eq(0,k)|` of the first realization.
    pub trace: Vec<f64>,
    /// Largest `||H_eq(0,k)| - 1|` over all realizations and bins.
    pub max_deviation: f64,
    /// Mean of `||H_eq(0,k)| - 1|` over all realizations and bins.
    pub mean_deviation: f64,
    /// Variance of `|H_eq(0,k)|` over `k`, averaged over realizations.
    pub selectivity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatnessReport {
    pub realizations: usize,
    pub ideal_channel: bool,
    pub entries: Vec<FlatnessEntry>,
}

/// Draws `realizations` sets of virtual and propagation channels per UAV
/// count and summarizes the first row of the composite response. With
/// `ideal_channel` every propagation channel is the unit impulse.
pub fn flatness_report(
    cfg: &ScenarioConfig,
    uav_counts: &[usize],
    realizations: usize,
    ideal_channel: bool,
) -> Result<FlatnessReport> {
    if cfg.scheme != VchanScheme::Apf {
        return Err(Error::Config("the flatness report needs the apf scheme".into()));
    }
    if realizations == 0 || uav_counts.contains(&0) {
        return Err(Error::InvalidParameter("need at least one realization and one UAV".into()));
    }
    cfg.validate()?;
    let st = cfg.stbc_config();
    let k = st.subcarriers;
    let mut entries = Vec::with_capacity(uav_counts.len());
    for &u in uav_counts {
        let mut trace = Vec::new();
        let (mut max_dev, mut sum_dev, mut sum_var) = (0.0f64, 0.0, 0.0);
        for r in 0..realizations {
            let base = RngStream::new(cfg.sweep.master_seed, r as u64);
            let mut vrng = base.fork(u as u64).fork(1).rng();
            let mut crng = base.fork(u as u64).fork(2).rng();
            let vchans = (0..u)
                .map(|_| vchan::generate_apf_vchan(st.code_dims, k, &cfg.apf, &mut vrng))
                .collect::<Result<Vec<_>>>()?;
            let chans = (0..u)
                .map(|_| {
                    if ideal_channel {
                        Ok(ChannelRealization::ideal())
                    } else {
                        channel::draw_rician(&cfg.channel, &mut crng)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let mag: Vec<f64> = stbc::composite_channel(&vchans, &chans, &st)?.freq[0]
                .iter()
                .map(|v| v.norm())
                .collect();
            let mean = mag.iter().sum::<f64>() / k as f64;
            sum_var += mag.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / k as f64;
            for m in &mag {
                let d = (m - 1.0).abs();
                max_dev = max_dev.max(d);
                sum_dev += d;
            }
            if r == 0 {
                trace = mag;
            }
        }
        entries.push(FlatnessEntry {
            uavs: u,
            trace,
            max_deviation: max_dev,
            mean_deviation: sum_dev / (realizations * k) as f64,
            selectivity: sum_var / realizations as f64,
        });
    }
    Ok(FlatnessReport { realizations, ideal_channel, entries })
}
