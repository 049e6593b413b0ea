//! Scenario configuration, loaded from TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bicm::CodecConfig;
use crate::channel::ChannelConfig;
use crate::error::{Error, Result};
use crate::stbc::StbcConfig;
use crate::vchan::{ApfConfig, VchanScheme};

/// How the receiver obtains the composite channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    Ls,
    CyclicDelay,
    PerfectCsi,
}

impl Estimator {
    pub fn as_str(&self) -> &'static str {
        match self {
            Estimator::Ls => "ls",
            Estimator::CyclicDelay => "cyclic-delay",
            Estimator::PerfectCsi => "perfect-csi",
        }
    }
}

/// Where symbol errors are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SerPoint {
    /// Decoded information bits, grouped in consecutive pairs.
    PostDecoder,
    /// Hard decisions on the combined QPSK symbols before deinterleaving.
    PreDecoder,
}

/// How often virtual channels are redrawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Redraw {
    PerBlock,
    /// One draw per UAV for the whole run.
    PerRun,
}

/// Time-domain denoising of the LS estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LsDenoise {
    /// On for all-pass virtual channels, off for phase dithering, whose
    /// composite response is not confined to `T_c + T_cp` taps.
    Auto,
    On,
    Off,
}

/// Reference of the `N0` in `Es/N0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseReference {
    /// `N0` is the noise variance per time-domain sample; with the
    /// unnormalized FFT each subcarrier then sees `K * N0`.
    Sample,
    /// `N0` is the noise variance per subcarrier after the FFT.
    Subcarrier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodecSettings {
    pub interleaver_seed: u64,
}

impl Default for CodecSettings {
    fn default() -> Self {
        Self { interleaver_seed: 0x1D5E_ED01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReceiverConfig {
    pub ser_point: SerPoint,
    pub ls_denoise: LsDenoise,
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        Self {
            ser_point: SerPoint::PostDecoder,
            ls_denoise: LsDenoise::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub esn0_db: Vec<f64>,
    /// Upper bound on blocks per Es/N0 point.
    pub blocks_per_point: u64,
    /// Stop a point early once this many symbol errors were seen; 0 runs
    /// every block.
    pub min_symbol_errors: u64,
    pub master_seed: u64,
    pub vchan_redraw: Redraw,
    pub noise_reference: NoiseReference,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            esn0_db: vec![10.0, 15.0, 20.0, 25.0, 30.0],
            blocks_per_point: 20_000,
            min_symbol_errors: 100,
            master_seed: 1,
            vchan_redraw: Redraw::PerBlock,
            noise_reference: NoiseReference::Sample,
        }
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// `U`, number of transmitting UAVs.
    pub uavs: usize,
    pub scheme: VchanScheme,
    pub estimator: Estimator,
    #[serde(default)]
    pub apf: ApfConfig,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub stbc: StbcConfig,
    #[serde(default)]
    pub codec: CodecSettings,
    #[serde(default)]
    pub receiver: ReceiverConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            uavs: 1,
            scheme: VchanScheme::Apf,
            estimator: Estimator::CyclicDelay,
            apf: ApfConfig::default(),
            channel: ChannelConfig::default(),
            stbc: StbcConfig::default(),
            codec: CodecSettings::default(),
            receiver: ReceiverConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config is always serializable")
    }

    /// Frame geometry with the virtual-channel length filled in.
    pub fn stbc_config(&self) -> StbcConfig {
        StbcConfig {
            vchan_taps: self.apf.taps,
            ..self.stbc
        }
    }

    /// Codec sized so that one coded block fills the data region of a frame.
    pub fn codec_config(&self) -> Result<CodecConfig> {
        CodecConfig::for_coded_bits(self.stbc_config().coded_bits_per_block(), self.codec.interleaver_seed)
    }

    pub fn ls_denoise(&self) -> bool {
        match self.receiver.ls_denoise {
            LsDenoise::On => true,
            LsDenoise::Off => false,
            LsDenoise::Auto => self.scheme != VchanScheme::PhaseDither,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.uavs == 0 {
            return Err(Error::Config("at least one UAV is required".into()));
        }
        if self.scheme == VchanScheme::Apf {
            self.apf.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        let stbc = self.stbc_config();
        stbc.validate()?;
        if stbc.group_size != 2 || stbc.code_dims != 2 {
            return Err(Error::Config("only the Alamouti code (P = N = 2) is supported".into()));
        }
        self.channel.validate()?;
        if self.channel.taps > stbc.cp_len + 1 {
            return Err(Error::Config(format!(
                "channel of {} taps exceeds the cyclic prefix of {} samples",
                self.channel.taps, stbc.cp_len
            )));
        }
        if self.estimator == Estimator::CyclicDelay {
            if self.scheme == VchanScheme::PhaseDither {
                return Err(Error::Config(
                    "cyclic-delay estimation needs time-domain virtual channels; phase dithering only supports ls".into(),
                ));
            }
            stbc.validate_cyclic()?;
        }
        if self.sweep.esn0_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("Es/N0 grid values must be finite".into()));
        }
        if self.sweep.blocks_per_point == 0 {
            return Err(Error::Config("blocks_per_point must be positive".into()));
        }
        self.codec_config()?;
        Ok(())
    }

    /// Short stable fingerprint of the full configuration.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("scenario config is always serializable");
        let hash = Sha256::digest(canonical.as_bytes());
        hex::encode(&hash[..8])
    }

    /// Per-sample and per-subcarrier noise variances for a given Es/N0 with
    /// unit-energy constellation symbols.
    pub fn noise_variances(&self, esn0_db: f64) -> (f64, f64) {
        let n0 = 10f64.powf(-esn0_db / 10.0);
        let k = self.stbc.subcarriers as f64;
        match self.sweep.noise_reference {
            NoiseReference::Sample => (n0, n0 * k),
            NoiseReference::Subcarrier => (n0 / k, n0),
        }
    }
}
