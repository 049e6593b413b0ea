//! Per-UAV virtual transmit channels.
//!
//! Two randomizations are provided. The all-pass scheme draws a random
//! cascade of first-order all-pass filters per row, truncates its impulse
//! response to `T_c` taps and uses the FFT of the truncated response as the
//! row. The phase-dither baseline draws one uniform phase per group of `P`
//! subcarriers and has no time-domain representation.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dsp::{self, Complex, ONE, ZERO};
use crate::error::{Error, Result};

/// Parameters of the truncated all-pass cascade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApfConfig {
    /// Number of first-order sections.
    pub order: usize,
    /// Common modulus of all poles, strictly inside the unit circle.
    pub pole_modulus: f64,
    /// Truncation length of the impulse response, in taps.
    pub taps: usize,
}

impl Default for ApfConfig {
    fn default() -> Self {
        Self {
            order: 4,
            pole_modulus: 0.7,
            taps: 12,
        }
    }
}

impl ApfConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::InvalidParameter("APF order must be at least 1".into()));
        }
        check_modulus(self.pole_modulus)?;
        if self.taps == 0 {
            return Err(Error::InvalidParameter("APF truncation length must be at least 1".into()));
        }
        Ok(())
    }
}

fn check_modulus(modulus: f64) -> Result<()> {
    if !(modulus > 0.0 && modulus < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "pole modulus must lie in (0, 1), got {modulus}"
        )));
    }
    Ok(())
}

/// Which randomization produced a [`VirtualChannelMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VchanScheme {
    Apf,
    PhaseDither,
    /// All-ones rows: no randomization at all.
    Identity,
}

impl VchanScheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            VchanScheme::Apf => "apf",
            VchanScheme::PhaseDither => "phase-dither",
            VchanScheme::Identity => "identity",
        }
    }
}

/// The `N x K` frequency-domain randomization matrix of one UAV.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualChannelMatrix {
    rows: Vec<Vec<Complex>>,
    taps: Option<Vec<Vec<Complex>>>,
    scheme: VchanScheme,
}

impl VirtualChannelMatrix {
    /// Builds the matrix from time-domain taps, one row per code dimension.
    pub fn from_taps(taps: Vec<Vec<Complex>>, subcarriers: usize) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::DimensionMismatch("virtual channel needs at least one row".into()));
        }
        let rows = taps
            .iter()
            .map(|t| dsp::padded_fft(t, subcarriers))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            rows,
            taps: Some(taps),
            scheme: VchanScheme::Apf,
        })
    }

    /// All-ones rows (a single-tap unit impulse per row).
    pub fn identity(dims: usize, subcarriers: usize) -> Self {
        Self {
            rows: vec![vec![ONE; subcarriers]; dims],
            taps: Some(vec![vec![ONE]; dims]),
            scheme: VchanScheme::Identity,
        }
    }

    /// Multiplies every entry (and tap) by `c`.
    pub fn scaled(&self, c: Complex) -> Self {
        let scale = |m: &Vec<Vec<Complex>>| -> Vec<Vec<Complex>> {
            m.iter().map(|r| r.iter().map(|v| v * c).collect()).collect()
        };
        Self {
            rows: scale(&self.rows),
            taps: self.taps.as_ref().map(scale),
            scheme: self.scheme,
        }
    }

    pub fn scheme(&self) -> VchanScheme {
        self.scheme
    }

    /// Number of code dimensions `N`.
    pub fn dims(&self) -> usize {
        self.rows.len()
    }

    /// Number of subcarriers `K`.
    pub fn subcarriers(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<Complex>] {
        &self.rows
    }

    pub fn row(&self, n: usize) -> &[Complex] {
        &self.rows[n]
    }

    pub fn taps(&self) -> Option<&[Vec<Complex>]> {
        self.taps.as_deref()
    }

    pub fn at(&self, n: usize, k: usize) -> Complex {
        self.rows[n][k]
    }

    /// Largest `||R(n,k)| - 1|` over the whole matrix.
    pub fn flatness_deviation(&self) -> f64 {
        self.rows
            .iter()
            .flatten()
            .map(|v| (v.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Draws `order` poles on the circle of radius `modulus` with i.i.d. uniform
/// angles.
pub fn sample_poles<R: Rng + ?Sized>(order: usize, modulus: f64, rng: &mut R) -> Result<Vec<Complex>> {
    check_modulus(modulus)?;
    Ok((0..order)
        .map(|_| Complex::from_polar(modulus, 2.0 * PI * rng.random::<f64>()))
        .collect())
}

/// First `len` taps of the causal first-order all-pass filter with pole `p`:
/// `g(0) = -p*`, `g(i) = p^(i-1) (1 - |p|^2)` for `i >= 1`.
pub fn apf_first_order_taps(pole: Complex, len: usize) -> Result<Vec<Complex>> {
    if !(pole.norm() < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "all-pass pole must lie inside the unit circle, got |p| = {}",
            pole.norm()
        )));
    }
    if len == 0 {
        return Err(Error::Sizing("all-pass impulse response needs at least one tap".into()));
    }
    let gain = 1.0 - pole.norm_sqr();
    let mut taps = Vec::with_capacity(len);
    taps.push(-pole.conj());
    let mut power = ONE;
    for _ in 1..len {
        taps.push(power * gain);
        power *= pole;
    }
    Ok(taps)
}

/// First `len` taps of the cascade of first-order sections.
///
/// Tap `i` of a product depends only on taps `0..=i` of each factor, so
/// convolving truncated factors and keeping `len` outputs is exact.
pub fn apf_cascade_taps(poles: &[Complex], len: usize) -> Result<Vec<Complex>> {
    if poles.is_empty() {
        return Err(Error::InvalidParameter("all-pass cascade needs at least one pole".into()));
    }
    let mut acc = vec![ZERO; len.max(1)];
    acc[0] = ONE;
    for &p in poles {
        let factor = apf_first_order_taps(p, len)?;
        let mut next = vec![ZERO; len];
        for (i, out) in next.iter_mut().enumerate() {
            *out = (0..=i).map(|m| acc[m] * factor[i - m]).sum();
        }
        acc = next;
    }
    Ok(acc)
}

/// Untruncated cascade response evaluated on `bins` equally spaced points of
/// the unit circle, straight from the rational transfer function.
pub fn apf_frequency_response(poles: &[Complex], bins: usize) -> Vec<Complex> {
    (0..bins)
        .map(|k| {
            let z_inv = Complex::from_polar(1.0, -2.0 * PI * k as f64 / bins as f64);
            poles
                .iter()
                .map(|p| (z_inv - p.conj()) / (ONE - p * z_inv))
                .product()
        })
        .collect()
}

/// One truncated random all-pass filter per row, `dims` rows of `subcarriers`
/// bins.
pub fn generate_apf_vchan<R: Rng + ?Sized>(
    dims: usize,
    subcarriers: usize,
    cfg: &ApfConfig,
    rng: &mut R,
) -> Result<VirtualChannelMatrix> {
    cfg.validate()?;
    if cfg.taps > subcarriers {
        return Err(Error::InvalidParameter(format!(
            "truncation length {} exceeds the {subcarriers} subcarriers",
            cfg.taps
        )));
    }
    let taps = (0..dims)
        .map(|_| {
            let poles = sample_poles(cfg.order, cfg.pole_modulus, rng)?;
            apf_cascade_taps(&poles, cfg.taps)
        })
        .collect::<Result<Vec<_>>>()?;
    VirtualChannelMatrix::from_taps(taps, subcarriers)
}

/// Unit-modulus phases, constant over each group of `group` subcarriers and
/// independent across groups and rows.
pub fn generate_dither_vchan<R: Rng + ?Sized>(
    dims: usize,
    subcarriers: usize,
    group: usize,
    rng: &mut R,
) -> Result<VirtualChannelMatrix> {
    if group == 0 || subcarriers % group != 0 {
        return Err(Error::InvalidParameter(format!(
            "{subcarriers} subcarriers are not divisible into groups of {group}"
        )));
    }
    if dims == 0 {
        return Err(Error::DimensionMismatch("virtual channel needs at least one row".into()));
    }
    let rows = (0..dims)
        .map(|_| {
            let mut row = Vec::with_capacity(subcarriers);
            for _ in 0..subcarriers / group {
                let (s, c) = (2.0 * PI * rng.random::<f64>()).sin_cos();
                row.extend(std::iter::repeat_n(Complex::new(c, s), group));
            }
            row
        })
        .collect();
    Ok(VirtualChannelMatrix {
        rows,
        taps: None,
        scheme: VchanScheme::PhaseDither,
    })
}
