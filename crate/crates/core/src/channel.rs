//! Block-fading Rician multipath channels and the multi-UAV uplink.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dsp::{self, Complex, ONE, ZERO};
use crate::error::{Error, Result};

/// Phase of the line-of-sight component on tap 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LosPhase {
    /// Always zero: every UAV's direct path arrives in phase.
    Zero,
    /// Uniform on `[0, 2 pi)`, drawn per UAV and per block.
    Uniform,
}

/// Rician tapped-delay-line parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    /// `L`, number of taps.
    pub taps: usize,
    /// Rician factor (LoS power over total diffuse power) in dB.
    pub k_rice_db: f64,
    /// `tau` of the exponential power-delay profile `exp(-i / tau)`.
    pub pdp_decay: f64,
    pub los_phase: LosPhase,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            taps: 3,
            k_rice_db: 20.0,
            pdp_decay: 1.0,
            los_phase: LosPhase::Uniform,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.taps == 0 {
            return Err(Error::Config("channel needs at least one tap".into()));
        }
        if self.k_rice_db.is_nan() {
            return Err(Error::Config("Rician factor must be a number".into()));
        }
        if !(self.pdp_decay > 0.0) || !self.pdp_decay.is_finite() {
            return Err(Error::Config(format!(
                "power-delay decay must be positive, got {}",
                self.pdp_decay
            )));
        }
        Ok(())
    }

    /// Normalized tap powers `P_i`, summing to one.
    pub fn tap_powers(&self) -> Vec<f64> {
        let raw: Vec<f64> = (0..self.taps).map(|i| (-(i as f64) / self.pdp_decay).exp()).collect();
        let total: f64 = raw.iter().sum();
        raw.iter().map(|p| p / total).collect()
    }

    /// `K / (K + 1)`, the share of the LoS component.
    pub fn los_share(&self) -> f64 {
        1.0 / (1.0 + 10f64.powf(-self.k_rice_db / 10.0))
    }
}

/// One UAV's impulse response for one block.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    taps: Vec<Complex>,
}

impl ChannelRealization {
    pub fn new(taps: Vec<Complex>) -> Self {
        assert!(!taps.is_empty(), "channel realization needs at least one tap");
        Self { taps }
    }

    /// The unit impulse.
    pub fn ideal() -> Self {
        Self { taps: vec![ONE] }
    }

    pub fn taps(&self) -> &[Complex] {
        &self.taps
    }

    pub fn negated(&self) -> Self {
        Self {
            taps: self.taps.iter().map(|v| -v).collect(),
        }
    }
}

/// Draws one Rician realization: a deterministic LoS term of power
/// `K/(K+1)` on tap 0 plus diffuse complex Gaussian taps of total power
/// `1/(K+1)` shaped by the power-delay profile.
pub fn draw_rician<R: Rng + ?Sized>(cfg: &ChannelConfig, rng: &mut R) -> Result<ChannelRealization> {
    cfg.validate()?;
    let los = cfg.los_share();
    let diffuse = 1.0 - los;
    let phase = match cfg.los_phase {
        LosPhase::Zero => 0.0,
        LosPhase::Uniform => 2.0 * PI * rng.random::<f64>(),
    };
    let mut taps = Vec::with_capacity(cfg.taps);
    for (i, p) in cfg.tap_powers().into_iter().enumerate() {
        let scatter = dsp::gaussian_noise(1, p * diffuse, rng)?[0];
        let direct = if i == 0 { Complex::from_polar(los.sqrt(), phase) } else { ZERO };
        taps.push(direct + scatter);
    }
    Ok(ChannelRealization { taps })
}

/// Superposition at the receiver: each UAV stream convolved with its
/// channel (truncated to the stream length) plus AWGN of per-sample
/// variance `noise_var`.
pub fn apply_uplink<R: Rng + ?Sized>(
    tx: &[Vec<Complex>],
    channels: &[ChannelRealization],
    noise_var: f64,
    rng: &mut R,
) -> Result<Vec<Complex>> {
    if tx.is_empty() || tx.len() != channels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} streams for {} channels",
            tx.len(),
            channels.len()
        )));
    }
    let len = tx[0].len();
    if tx.iter().any(|x| x.len() != len) {
        return Err(Error::DimensionMismatch("UAV streams differ in length".into()));
    }
    let mut y = dsp::gaussian_noise(len, noise_var, rng)?;
    for (x, h) in tx.iter().zip(channels) {
        for (d, &tap) in h.taps().iter().enumerate() {
            if d >= len {
                break;
            }
            for (out, &v) in y[d..].iter_mut().zip(x) {
                *out += tap * v;
            }
        }
    }
    Ok(y)
}
