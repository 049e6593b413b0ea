//! Composite-channel estimators.
//!
//! Both estimators average the per-tone ratios `Y / P` over the pilot
//! symbols of a block before any further processing.

use super::{CompositeChannel, PilotScheme, PilotSpec, StbcConfig};
use crate::dsp::{self, Complex};
use crate::error::{Error, Result};

fn check_inputs(rx: &[Vec<Complex>], pilot: &PilotSpec, want: PilotScheme, cfg: &StbcConfig) -> Result<()> {
    if pilot.scheme != want {
        return Err(Error::InvalidParameter(format!(
            "pilot built for {:?} used with the {:?} estimator",
            pilot.scheme, want
        )));
    }
    if rx.is_empty() {
        return Err(Error::DimensionMismatch("no received pilot symbols".into()));
    }
    let k = cfg.subcarriers;
    if pilot.tones.len() != k || rx.iter().any(|y| y.len() != k) {
        return Err(Error::DimensionMismatch(format!(
            "pilot symbols must have {k} bins"
        )));
    }
    Ok(())
}

/// Average of `Y_t(k) / P_k` over the received pilot symbols.
fn averaged_ratio(rx: &[Vec<Complex>], pilot: &PilotSpec, k: usize) -> Complex {
    let sum: Complex = rx.iter().map(|y| y[k] / pilot.tones[k]).sum();
    sum / rx.len() as f64
}

/// Steps (1)-(2) of the LS estimator: per-group LS values placed at the
/// group start and linearly interpolated over all bins, with constant
/// extrapolation after the last group.
fn ls_interpolated(rx: &[Vec<Complex>], pilot: &PilotSpec, cfg: &StbcConfig) -> Result<Vec<Vec<Complex>>> {
    check_inputs(rx, pilot, PilotScheme::LsFrequency, cfg)?;
    cfg.validate()?;
    let (k_total, group) = (cfg.subcarriers, cfg.group_size);
    let nodes = k_total / group;
    Ok((0..cfg.code_dims)
        .map(|n| {
            let values: Vec<Complex> = (0..nodes).map(|g| averaged_ratio(rx, pilot, g * group + n)).collect();
            (0..k_total)
                .map(|k| {
                    let g = k / group;
                    if g + 1 >= nodes {
                        return values[nodes - 1];
                    }
                    let frac = (k % group) as f64 / group as f64;
                    values[g] * (1.0 - frac) + values[g + 1] * frac
                })
                .collect()
        })
        .collect())
}

/// LS frequency-domain estimate with linear interpolation but no
/// time-domain denoising. At the group starts the result equals the raw
/// per-tone LS values, which is what a randomization without a short impulse
/// response (phase dithering) requires.
pub fn estimate_ls_undenoised(rx: &[Vec<Complex>], pilot: &PilotSpec, cfg: &StbcConfig) -> Result<CompositeChannel> {
    Ok(CompositeChannel {
        freq: ls_interpolated(rx, pilot, cfg)?,
        taps: None,
    })
}

/// LS estimate followed by time-domain denoising: taps at index
/// `i > T_c + T_cp` of the interpolated response are zeroed.
pub fn estimate_ls(rx: &[Vec<Complex>], pilot: &PilotSpec, cfg: &StbcConfig) -> Result<CompositeChannel> {
    let interp = ls_interpolated(rx, pilot, cfg)?;
    let keep = (cfg.vchan_taps + cfg.cp_len + 1).min(cfg.subcarriers);
    let mut freq = Vec::with_capacity(interp.len());
    let mut taps = Vec::with_capacity(interp.len());
    for row in &interp {
        let mut h = dsp::ifft(row)?;
        h.truncate(keep);
        freq.push(dsp::padded_fft(&h, cfg.subcarriers)?);
        taps.push(h);
    }
    Ok(CompositeChannel { freq, taps: Some(taps) })
}

/// Cyclic-delay estimate: the IFFT of `Y_k / P_k` holds the composite
/// impulse response of dimension `n` starting at sample `nK/N`; a window of
/// `T_c + T_cp` samples is cut out per dimension.
pub fn estimate_cyclic(rx: &[Vec<Complex>], pilot: &PilotSpec, cfg: &StbcConfig) -> Result<CompositeChannel> {
    check_inputs(rx, pilot, PilotScheme::CyclicDelay, cfg)?;
    cfg.validate_cyclic()?;
    let k_total = cfg.subcarriers;
    let ratio: Vec<Complex> = (0..k_total).map(|k| averaged_ratio(rx, pilot, k)).collect();
    let joint = dsp::ifft(&ratio)?;
    let segment = k_total / cfg.code_dims;
    let window = cfg.vchan_taps + cfg.cp_len;
    let mut freq = Vec::with_capacity(cfg.code_dims);
    let mut taps = Vec::with_capacity(cfg.code_dims);
    for n in 0..cfg.code_dims {
        let start = n * segment;
        let h = joint[start..start + window].to_vec();
        freq.push(dsp::padded_fft(&h, k_total)?);
        taps.push(h);
    }
    Ok(CompositeChannel { freq, taps: Some(taps) })
}
