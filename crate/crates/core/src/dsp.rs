//! Complex baseband DSP primitives shared by the rest of the crate.
//!
//! The FFT convention is fixed throughout: the forward transform is
//! unnormalized, `X(k) = sum_i x(i) exp(-2 pi j i k / K)`, and the inverse
//! carries the `1/K` factor.

use std::cell::RefCell;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub type Complex = num_complex::Complex64;

pub const ZERO: Complex = Complex::new(0.0, 0.0);
pub const ONE: Complex = Complex::new(1.0, 0.0);

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Result<Arc<dyn Fft<f64>>> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::Sizing(format!(
            "FFT length must be a power of two, got {len}"
        )));
    }
    Ok(PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    }))
}

/// Unnormalized forward FFT of a power-of-two length vector.
pub fn fft(x: &[Complex]) -> Result<Vec<Complex>> {
    let plan = plan(x.len(), false)?;
    let mut buf = x.to_vec();
    plan.process(&mut buf);
    Ok(buf)
}

/// Inverse FFT including the `1/K` normalization.
pub fn ifft(spectrum: &[Complex]) -> Result<Vec<Complex>> {
    let plan = plan(spectrum.len(), true)?;
    let mut buf = spectrum.to_vec();
    plan.process(&mut buf);
    let scale = 1.0 / spectrum.len() as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    Ok(buf)
}

/// Zero-pads (or errors if too long) `x` to `len` samples.
pub fn zero_pad(x: &[Complex], len: usize) -> Result<Vec<Complex>> {
    if x.len() > len {
        return Err(Error::Sizing(format!(
            "cannot zero-pad {} samples into {len}",
            x.len()
        )));
    }
    let mut out = x.to_vec();
    out.resize(len, ZERO);
    Ok(out)
}

/// Forward FFT of `x` zero-padded to `len` samples.
pub fn padded_fft(x: &[Complex], len: usize) -> Result<Vec<Complex>> {
    fft(&zero_pad(x, len)?)
}

/// Full linear convolution, output length `|a| + |b| - 1`.
pub fn linear_convolve(a: &[Complex], b: &[Complex]) -> Result<Vec<Complex>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Sizing("convolution of an empty sequence".into()));
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    Ok(out)
}

/// I.i.d. circular complex Gaussian samples of total variance `n0`
/// (`n0 / 2` per real dimension).
pub fn gaussian_noise<R: Rng + ?Sized>(len: usize, n0: f64, rng: &mut R) -> Result<Vec<Complex>> {
    if !(n0 >= 0.0) || !n0.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise variance must be finite and non-negative, got {n0}"
        )));
    }
    if n0 == 0.0 {
        return Ok(vec![ZERO; len]);
    }
    let sigma = (n0 / 2.0).sqrt();
    Ok((0..len)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(sigma * re, sigma * im)
        })
        .collect())
}

/// Energy `sum |x|^2`.
pub fn energy(x: &[Complex]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

/// A reproducible random stream identified by `(seed, stream)`.
///
/// Streams are ChaCha8 keyed by the seed with the stream id selecting one of
/// 2^64 independent keystreams, so trial `i` of a run always sees the same
/// numbers regardless of which worker executes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Instantiates the generator at the start of the stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// A sibling stream for a named purpose (channels, noise, ...), keyed by
    /// mixing `tag` into the seed. The stream id is kept.
    pub fn fork(&self, tag: u64) -> Self {
        Self {
            seed: splitmix64(self.seed ^ splitmix64(tag)),
            stream: self.stream,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
