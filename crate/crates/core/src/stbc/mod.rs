//! Randomized distributed Alamouti coding over OFDM.
//!
//! Subcarriers are organized in groups of `P` starting at multiples of `P`.
//! Each group of data symbols is mapped to its Alamouti matrix `S(k)` and
//! multiplied by column `k` of the UAV's virtual channel matrix. The
//! receiver sees the composite channel `H_eq(n,k) = sum_u R_u(n,k) H_u(k)`.

mod estimate;
mod ofdm;
mod pilot;

pub use estimate::{estimate_cyclic, estimate_ls, estimate_ls_undenoised};
pub use ofdm::{ofdm_demodulate, ofdm_modulate};
pub use pilot::{build_pilot_cyclic, build_pilot_ls, PilotScheme, PilotSpec, PILOT_SEED};

use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::dsp::{self, Complex, ZERO};
use crate::error::{Error, Result};
use crate::vchan::VirtualChannelMatrix;

/// OFDM frame and code geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StbcConfig {
    /// `K`, number of subcarriers.
    pub subcarriers: usize,
    /// `P`, subcarriers per code group.
    pub group_size: usize,
    /// `N`, dimensions of the underlying space-time code.
    pub code_dims: usize,
    /// `T_cp`, cyclic prefix length in samples.
    pub cp_len: usize,
    /// `T`, OFDM symbols per block, pilots included.
    pub block_symbols: usize,
    /// `T_p`, leading pilot symbols per block.
    pub pilot_symbols: usize,
    /// `T_c`, taps of the virtual channels. Taken from the all-pass settings
    /// when a scenario is assembled.
    #[serde(skip, default = "default_vchan_taps")]
    pub vchan_taps: usize,
}

fn default_vchan_taps() -> usize {
    12
}

impl Default for StbcConfig {
    fn default() -> Self {
        Self {
            subcarriers: 128,
            group_size: 2,
            code_dims: 2,
            cp_len: 16,
            block_symbols: 20,
            pilot_symbols: 2,
            vchan_taps: default_vchan_taps(),
        }
    }
}

impl StbcConfig {
    pub fn validate(&self) -> Result<()> {
        let k = self.subcarriers;
        if k == 0 || !k.is_power_of_two() {
            return Err(Error::Config(format!("subcarrier count {k} must be a power of two")));
        }
        if self.group_size == 0 || k % self.group_size != 0 {
            return Err(Error::Config(format!(
                "{k} subcarriers are not divisible into groups of {}",
                self.group_size
            )));
        }
        if self.code_dims == 0 || self.code_dims > self.group_size {
            return Err(Error::Config(format!(
                "code dimension {} must lie in 1..={}",
                self.code_dims, self.group_size
            )));
        }
        if k % self.code_dims != 0 {
            return Err(Error::Config(format!(
                "{k} subcarriers are not a multiple of the code dimension {}",
                self.code_dims
            )));
        }
        if self.cp_len >= k {
            return Err(Error::Config("cyclic prefix must be shorter than the symbol".into()));
        }
        if self.pilot_symbols == 0 || self.pilot_symbols >= self.block_symbols {
            return Err(Error::Config(format!(
                "need 1 <= pilot symbols ({}) < block symbols ({})",
                self.pilot_symbols, self.block_symbols
            )));
        }
        if self.vchan_taps == 0 || self.vchan_taps > k {
            return Err(Error::Config(format!(
                "virtual channel length {} must lie in 1..={k}",
                self.vchan_taps
            )));
        }
        Ok(())
    }

    /// Non-overlap of the cyclically shifted composite responses:
    /// `T_c <= K/N - T_cp`.
    pub fn validate_cyclic(&self) -> Result<()> {
        self.validate()?;
        let segment = self.subcarriers / self.code_dims;
        if self.vchan_taps + self.cp_len > segment {
            return Err(Error::Config(format!(
                "cyclic-delay estimation needs T_c <= K/N - T_cp = {}, got T_c = {}",
                segment as isize - self.cp_len as isize,
                self.vchan_taps
            )));
        }
        Ok(())
    }

    /// Samples per OFDM symbol including the prefix.
    pub fn symbol_len(&self) -> usize {
        self.subcarriers + self.cp_len
    }

    pub fn data_symbols(&self) -> usize {
        self.block_symbols - self.pilot_symbols
    }

    /// Coded bits carried by the data region of one block (QPSK).
    pub fn coded_bits_per_block(&self) -> usize {
        2 * self.subcarriers * self.data_symbols()
    }

    fn require_alamouti(&self) -> Result<()> {
        if self.group_size != 2 || self.code_dims != 2 {
            return Err(Error::Config(format!(
                "the Alamouti code needs P = N = 2, got P = {}, N = {}",
                self.group_size, self.code_dims
            )));
        }
        Ok(())
    }
}

/// Frequency response (and optionally impulse response) of the composite
/// MISO channel, one row per code dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeChannel {
    pub freq: Vec<Vec<Complex>>,
    pub taps: Option<Vec<Vec<Complex>>>,
}

impl CompositeChannel {
    pub fn dims(&self) -> usize {
        self.freq.len()
    }

    /// `(H(0,k), ..., H(N-1,k))`.
    pub fn column(&self, k: usize) -> Vec<Complex> {
        self.freq.iter().map(|row| row[k]).collect()
    }
}

/// The 2x2 Alamouti matrix `[[s0, s1], [-s1*, s0*]]`.
pub fn alamouti_matrix(symbols: &[Complex]) -> Result<[[Complex; 2]; 2]> {
    match *symbols {
        [s0, s1] => Ok([[s0, s1], [-s1.conj(), s0.conj()]]),
        _ => Err(Error::DimensionMismatch(format!(
            "Alamouti block takes 2 symbols, got {}",
            symbols.len()
        ))),
    }
}

/// One UAV's frequency-domain OFDM symbol: each group's Alamouti matrix
/// times the virtual-channel column at the group start.
pub fn stbc_encode(
    symbols: &[Complex],
    vchan: &VirtualChannelMatrix,
    cfg: &StbcConfig,
) -> Result<Vec<Complex>> {
    cfg.require_alamouti()?;
    let k = cfg.subcarriers;
    if symbols.len() != k || vchan.subcarriers() != k || vchan.dims() != cfg.code_dims {
        return Err(Error::DimensionMismatch(format!(
            "need {k} symbols and a {}x{k} virtual channel, got {} symbols and {}x{}",
            cfg.code_dims,
            symbols.len(),
            vchan.dims(),
            vchan.subcarriers()
        )));
    }
    let mut out = vec![ZERO; k];
    for g in (0..k).step_by(cfg.group_size) {
        let s = alamouti_matrix(&symbols[g..g + 2])?;
        let r = [vchan.at(0, g), vchan.at(1, g)];
        out[g] = s[0][0] * r[0] + s[0][1] * r[1];
        out[g + 1] = s[1][0] * r[0] + s[1][1] * r[1];
    }
    Ok(out)
}

/// Output of Alamouti combining for one group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Combined {
    /// `gain * S_{k+n} + noise`, `n = 0, 1`.
    pub symbols: [Complex; 2],
    /// `|H(0,k)|^2 + |H(1,k)|^2`.
    pub gain: f64,
}

impl Combined {
    /// A group whose channel estimate vanished carries no information.
    pub fn is_erasure(&self) -> bool {
        !(self.gain > 0.0) || !self.gain.is_finite()
    }
}

/// Orthogonal combining of the two received bins of a group against the
/// channel column at the group start.
pub fn alamouti_combine(y: [Complex; 2], h: [Complex; 2]) -> Combined {
    let s0 = h[0].conj() * y[0] + h[1] * y[1].conj();
    let s1 = h[1].conj() * y[0] - h[0] * y[1].conj();
    Combined {
        symbols: [s0, s1],
        gain: h[0].norm_sqr() + h[1].norm_sqr(),
    }
}

/// `H_eq(n,k) = sum_u R_u(n,k) H_u(k)`; also the composite impulse responses
/// when every virtual channel has taps.
pub fn composite_channel(
    vchans: &[VirtualChannelMatrix],
    channels: &[ChannelRealization],
    cfg: &StbcConfig,
) -> Result<CompositeChannel> {
    if vchans.is_empty() || vchans.len() != channels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} virtual channels for {} propagation channels",
            vchans.len(),
            channels.len()
        )));
    }
    let (k, dims) = (cfg.subcarriers, cfg.code_dims);
    if vchans.iter().any(|r| r.subcarriers() != k || r.dims() != dims) {
        return Err(Error::DimensionMismatch(format!(
            "every virtual channel must be {dims}x{k}"
        )));
    }
    let mut freq = vec![vec![ZERO; k]; dims];
    for (r, h) in vchans.iter().zip(channels) {
        let hf = dsp::padded_fft(h.taps(), k)?;
        for (n, row) in freq.iter_mut().enumerate() {
            for ((acc, &rv), &hv) in row.iter_mut().zip(r.row(n)).zip(&hf) {
                *acc += rv * hv;
            }
        }
    }

    let taps = if vchans.iter().all(|r| r.taps().is_some()) {
        let mut rows = Vec::with_capacity(dims);
        for n in 0..dims {
            let mut acc: Vec<Complex> = Vec::new();
            for (r, h) in vchans.iter().zip(channels) {
                let c = dsp::linear_convolve(&r.taps().unwrap()[n], h.taps())?;
                if c.len() > acc.len() {
                    acc.resize(c.len(), ZERO);
                }
                acc.iter_mut().zip(&c).for_each(|(a, v)| *a += v);
            }
            rows.push(acc);
        }
        Some(rows)
    } else {
        None
    };
    Ok(CompositeChannel { freq, taps })
}
