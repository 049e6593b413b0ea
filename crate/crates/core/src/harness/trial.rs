//! One block through the complete uplink chain.

use std::ops::{Add, AddAssign};

use rand::Rng;

use super::config::{Estimator, Redraw, ScenarioConfig, SerPoint};
use crate::bicm::{self, CodecConfig, Interleaver};
use crate::channel::{self, ChannelRealization};
use crate::dsp::{Complex, RngStream};
use crate::error::{Error, Result};
use crate::stbc::{self, CompositeChannel, PilotScheme, PilotSpec, StbcConfig, PILOT_SEED};
use crate::vchan::{self, VchanScheme, VirtualChannelMatrix};

const TAG_DATA: u64 = 1;
const TAG_VCHAN: u64 = 2;
const TAG_CHANNEL: u64 = 3;
const TAG_NOISE: u64 = 4;
/// Stream id of the draws shared by every trial of a run.
const RUN_STREAM: u64 = u64::MAX;

/// Error counts of one or more blocks. Addition is associative and
/// commutative, so aggregates do not depend on evaluation order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrialCounts {
    pub blocks: u64,
    pub symbols: u64,
    pub symbol_errors: u64,
    pub bits: u64,
    pub bit_errors: u64,
    /// Sum over blocks of the squared per-block symbol-error count.
    pub symbol_errors_sq: u64,
}

impl Add for TrialCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            blocks: self.blocks + o.blocks,
            symbols: self.symbols + o.symbols,
            symbol_errors: self.symbol_errors + o.symbol_errors,
            bits: self.bits + o.bits,
            bit_errors: self.bit_errors + o.bit_errors,
            symbol_errors_sq: self.symbol_errors_sq + o.symbol_errors_sq,
        }
    }
}

impl AddAssign for TrialCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl std::iter::Sum for TrialCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

impl TrialCounts {
    pub fn ser(&self) -> f64 {
        ratio(self.symbol_errors, self.symbols)
    }

    pub fn ber(&self) -> f64 {
        ratio(self.bit_errors, self.bits)
    }

    /// Standard error of the SER treating blocks, not symbols, as the
    /// independent samples. Errors cluster within blocks (a decoder failure
    /// hits many symbols at once), so this is the honest uncertainty when it
    /// exceeds the binomial one.
    pub fn ser_block_sigma(&self) -> f64 {
        if self.blocks < 2 || self.symbols == 0 {
            return 0.0;
        }
        let n = self.blocks as f64;
        let per_block = self.symbols as f64 / n;
        let mean = self.symbol_errors as f64 / n;
        let var = (self.symbol_errors_sq as f64 - n * mean * mean).max(0.0) / (n - 1.0);
        (var / n).sqrt() / per_block
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-UAV randomizations and channels for one block.
#[derive(Debug, Clone)]
pub struct BlockSetup {
    pub vchans: Vec<VirtualChannelMatrix>,
    pub channels: Vec<ChannelRealization>,
}

/// A validated scenario with everything that is fixed across trials
/// precomputed.
#[derive(Debug, Clone)]
pub struct Link {
    cfg: ScenarioConfig,
    stbc: StbcConfig,
    codec: CodecConfig,
    interleaver: Interleaver,
    pilot: PilotSpec,
    fixed_vchans: Option<Vec<VirtualChannelMatrix>>,
}

impl Link {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let stbc = cfg.stbc_config();
        let codec = cfg.codec_config()?;
        let pilot_scheme = match cfg.estimator {
            Estimator::CyclicDelay => PilotScheme::CyclicDelay,
            Estimator::Ls | Estimator::PerfectCsi => PilotScheme::LsFrequency,
        };
        let mut link = Self {
            cfg: cfg.clone(),
            stbc,
            codec,
            interleaver: Interleaver::for_codec(&codec),
            pilot: PilotSpec::bpsk(stbc.subcarriers, PILOT_SEED, pilot_scheme),
            fixed_vchans: None,
        };
        if cfg.sweep.vchan_redraw == Redraw::PerRun {
            let mut rng = RngStream::new(cfg.sweep.master_seed, RUN_STREAM).fork(TAG_VCHAN).rng();
            link.fixed_vchans = Some(link.draw_vchans(&mut rng)?);
        }
        Ok(link)
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn codec(&self) -> &CodecConfig {
        &self.codec
    }

    fn draw_vchans<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<VirtualChannelMatrix>> {
        let (dims, k) = (self.stbc.code_dims, self.stbc.subcarriers);
        (0..self.cfg.uavs)
            .map(|_| match self.cfg.scheme {
                VchanScheme::Apf => vchan::generate_apf_vchan(dims, k, &self.cfg.apf, rng),
                VchanScheme::PhaseDither => vchan::generate_dither_vchan(dims, k, self.stbc.group_size, rng),
                VchanScheme::Identity => Ok(VirtualChannelMatrix::identity(dims, k)),
            })
            .collect()
    }

    /// Virtual channels and fading channels of trial `trial`.
    pub fn draw_setup(&self, trial: u64) -> Result<BlockSetup> {
        let base = RngStream::new(self.cfg.sweep.master_seed, trial);
        let vchans = match &self.fixed_vchans {
            Some(v) => v.clone(),
            None => self.draw_vchans(&mut base.fork(TAG_VCHAN).rng())?,
        };
        let mut rng = base.fork(TAG_CHANNEL).rng();
        let channels = (0..self.cfg.uavs)
            .map(|_| channel::draw_rician(&self.cfg.channel, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockSetup { vchans, channels })
    }

    /// One block with the randomizations and channels drawn for `trial`.
    pub fn run_block(&self, esn0_db: f64, trial: u64) -> Result<TrialCounts> {
        let setup = self.draw_setup(trial)?;
        self.run_block_with(esn0_db, trial, &setup)
    }

    /// One block with caller-supplied randomizations and channels. Data and
    /// noise still come from the streams of `trial`.
    pub fn run_block_with(&self, esn0_db: f64, trial: u64, setup: &BlockSetup) -> Result<TrialCounts> {
        let u = self.cfg.uavs;
        if setup.vchans.len() != u || setup.channels.len() != u {
            return Err(Error::DimensionMismatch(format!(
                "{u} UAVs but {} virtual channels and {} channels",
                setup.vchans.len(),
                setup.channels.len()
            )));
        }
        let st = &self.stbc;
        let (k, t_p) = (st.subcarriers, st.pilot_symbols);
        let base = RngStream::new(self.cfg.sweep.master_seed, trial);

        let mut data_rng = base.fork(TAG_DATA).rng();
        let info: Vec<u8> = (0..self.codec.info_bits).map(|_| data_rng.random::<bool>() as u8).collect();
        let coded = self.interleaver.interleave(&bicm::conv_encode(&info))?;
        let symbols = bicm::qpsk_map(&coded)?;

        let tx = setup
            .vchans
            .iter()
            .map(|r| self.uav_stream(&symbols, r))
            .collect::<Result<Vec<_>>>()?;
        let (noise_time, noise_bin) = self.cfg.noise_variances(esn0_db);
        let rx = channel::apply_uplink(&tx, &setup.channels, noise_time, &mut base.fork(TAG_NOISE).rng())?;
        let rx_freq = rx
            .chunks_exact(st.symbol_len())
            .map(|s| stbc::ofdm_demodulate(s, st))
            .collect::<Result<Vec<_>>>()?;

        let est = self.estimate(&rx_freq[..t_p], setup)?;

        let mut llrs = Vec::with_capacity(coded.len());
        for y in &rx_freq[t_p..] {
            for g in (0..k).step_by(st.group_size) {
                let c = stbc::alamouti_combine([y[g], y[g + 1]], [est.freq[0][g], est.freq[1][g]]);
                for s in c.symbols {
                    if c.is_erasure() {
                        llrs.extend([0.0, 0.0]);
                    } else {
                        llrs.extend(bicm::qpsk_demap_llr(s, c.gain, noise_bin)?);
                    }
                }
            }
        }

        match self.cfg.receiver.ser_point {
            SerPoint::PostDecoder => {
                let decoded = bicm::viterbi_decode(&self.interleaver.deinterleave(&llrs)?, &self.codec)?;
                Ok(count_errors(&info, &decoded))
            }
            SerPoint::PreDecoder => {
                let hard: Vec<u8> = llrs.iter().map(|&l| bicm::hard_bit(l)).collect();
                Ok(count_errors(&coded, &hard))
            }
        }
    }

    /// Pilot symbols followed by the space-time coded data symbols, in the
    /// time domain with prefixes.
    fn uav_stream(&self, symbols: &[Complex], vchan: &VirtualChannelMatrix) -> Result<Vec<Complex>> {
        let st = &self.stbc;
        let pilot = match self.pilot.scheme {
            PilotScheme::LsFrequency => stbc::build_pilot_ls(&self.pilot, vchan, st)?,
            PilotScheme::CyclicDelay => stbc::build_pilot_cyclic(&self.pilot, vchan, st)?,
        };
        let mut out = Vec::with_capacity(st.block_symbols * st.symbol_len());
        for _ in 0..st.pilot_symbols {
            out.extend(stbc::ofdm_modulate(&pilot, st)?);
        }
        for chunk in symbols.chunks_exact(st.subcarriers) {
            out.extend(stbc::ofdm_modulate(&stbc::stbc_encode(chunk, vchan, st)?, st)?);
        }
        Ok(out)
    }

    fn estimate(&self, pilots: &[Vec<Complex>], setup: &BlockSetup) -> Result<CompositeChannel> {
        match self.cfg.estimator {
            Estimator::PerfectCsi => stbc::composite_channel(&setup.vchans, &setup.channels, &self.stbc),
            Estimator::CyclicDelay => stbc::estimate_cyclic(pilots, &self.pilot, &self.stbc),
            Estimator::Ls if self.cfg.ls_denoise() => stbc::estimate_ls(pilots, &self.pilot, &self.stbc),
            Estimator::Ls => stbc::estimate_ls_undenoised(pilots, &self.pilot, &self.stbc),
        }
    }
}

/// Bit errors, and symbol errors over consecutive bit pairs (a trailing odd
/// bit forms a symbol on its own).
fn count_errors(sent: &[u8], got: &[u8]) -> TrialCounts {
    let bit_errors = sent.iter().zip(got).filter(|(a, b)| a != b).count() as u64;
    let symbol_errors = sent
        .chunks(2)
        .zip(got.chunks(2))
        .filter(|(a, b)| a != b)
        .count() as u64;
    TrialCounts {
        blocks: 1,
        symbols: sent.len().div_ceil(2) as u64,
        symbol_errors,
        bits: sent.len() as u64,
        bit_errors,
        symbol_errors_sq: symbol_errors * symbol_errors,
    }
}

/// One full block of `cfg` at `esn0_db`.
pub fn run_block_trial(cfg: &ScenarioConfig, esn0_db: f64, trial: u64) -> Result<TrialCounts> {
    Link::new(cfg)?.run_block(esn0_db, trial)
}
