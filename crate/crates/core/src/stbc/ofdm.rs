use super::StbcConfig;
use crate::dsp::{self, Complex};
use crate::error::{Error, Result};

/// IFFT of one frequency-domain symbol with its last `T_cp` samples
/// prepended.
pub fn ofdm_modulate(spectrum: &[Complex], cfg: &StbcConfig) -> Result<Vec<Complex>> {
    if spectrum.len() != cfg.subcarriers {
        return Err(Error::DimensionMismatch(format!(
            "expected {} bins, got {}",
            cfg.subcarriers,
            spectrum.len()
        )));
    }
    let body = dsp::ifft(spectrum)?;
    let mut out = Vec::with_capacity(cfg.symbol_len());
    out.extend_from_slice(&body[body.len() - cfg.cp_len..]);
    out.extend_from_slice(&body);
    Ok(out)
}

/// Drops the prefix and returns the FFT of the remaining `K` samples.
pub fn ofdm_demodulate(samples: &[Complex], cfg: &StbcConfig) -> Result<Vec<Complex>> {
    if samples.len() != cfg.symbol_len() {
        return Err(Error::DimensionMismatch(format!(
            "expected {} samples, got {}",
            cfg.symbol_len(),
            samples.len()
        )));
    }
    dsp::fft(&samples[cfg.cp_len..])
}
