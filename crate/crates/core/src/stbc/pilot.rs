use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::StbcConfig;
use crate::dsp::{Complex, RngStream, ZERO};
use crate::error::{Error, Result};
use crate::vchan::VirtualChannelMatrix;

/// Seed of the shared BPSK training sequence.
pub const PILOT_SEED: u64 = 0x4C54_5331;

/// How the training symbols separate the code dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PilotScheme {
    /// Dimension `n` is sounded on tone `k + n` of each group.
    LsFrequency,
    /// Dimension `n` is sounded by a cyclic shift of `nK/N` samples.
    CyclicDelay,
}

/// Known unit-modulus training tones shared by every UAV.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotSpec {
    pub tones: Vec<Complex>,
    pub scheme: PilotScheme,
}

impl PilotSpec {
    /// Pseudo-random +-1 tones drawn from `seed`.
    pub fn bpsk(subcarriers: usize, seed: u64, scheme: PilotScheme) -> Self {
        let mut rng = RngStream::new(seed, 0).rng();
        let tones = (0..subcarriers)
            .map(|_| Complex::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0))
            .collect();
        Self { tones, scheme }
    }

    pub fn with_tones(tones: Vec<Complex>, scheme: PilotScheme) -> Result<Self> {
        if tones.iter().any(|t| (t.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::InvalidParameter("pilot tones must have unit modulus".into()));
        }
        Ok(Self { tones, scheme })
    }

    fn check(&self, want: PilotScheme, vchan: &VirtualChannelMatrix, cfg: &StbcConfig) -> Result<()> {
        if self.scheme != want {
            return Err(Error::InvalidParameter(format!(
                "pilot built for {:?} used with {:?}",
                self.scheme, want
            )));
        }
        let k = cfg.subcarriers;
        if self.tones.len() != k || vchan.subcarriers() != k || vchan.dims() != cfg.code_dims {
            return Err(Error::DimensionMismatch(format!(
                "pilot of {} tones and {}x{} virtual channel for K = {k}, N = {}",
                self.tones.len(),
                vchan.dims(),
                vchan.subcarriers(),
                cfg.code_dims
            )));
        }
        Ok(())
    }
}

/// Frequency-multiplexed training symbol: bin `k + n` of each group carries
/// `P_{k+n} R(n,k)`; bins `n >= N` stay empty.
pub fn build_pilot_ls(pilot: &PilotSpec, vchan: &VirtualChannelMatrix, cfg: &StbcConfig) -> Result<Vec<Complex>> {
    pilot.check(PilotScheme::LsFrequency, vchan, cfg)?;
    let mut out = vec![ZERO; cfg.subcarriers];
    for g in (0..cfg.subcarriers).step_by(cfg.group_size) {
        for n in 0..cfg.code_dims {
            out[g + n] = pilot.tones[g + n] * vchan.at(n, g);
        }
    }
    Ok(out)
}

/// Cyclic-delay training symbol: bin `k` carries
/// `sum_n P_k exp(-2 pi j k n / N) R(n,k)`.
pub fn build_pilot_cyclic(
    pilot: &PilotSpec,
    vchan: &VirtualChannelMatrix,
    cfg: &StbcConfig,
) -> Result<Vec<Complex>> {
    pilot.check(PilotScheme::CyclicDelay, vchan, cfg)?;
    let (k_total, dims) = (cfg.subcarriers, cfg.code_dims);
    if k_total % dims != 0 {
        return Err(Error::Config(format!("K = {k_total} is not a multiple of N = {dims}")));
    }
    Ok((0..k_total)
        .map(|k| {
            (0..dims)
                .map(|n| {
                    let shift = Complex::from_polar(1.0, -2.0 * PI * ((k * n) % dims) as f64 / dims as f64);
                    pilot.tones[k] * shift * vchan.at(n, k)
                })
                .sum()
        })
        .collect())
}
