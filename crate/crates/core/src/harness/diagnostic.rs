//! Uncoded QPSK over AWGN, for calibrating the noise model against closed
//! forms.

use rand::Rng;
use statrs::function::erf::erfc;

use super::trial::TrialCounts;
use crate::bicm;
use crate::dsp::{self, RngStream};
use crate::error::Result;

/// Gaussian tail `Q(x) = erfc(x / sqrt 2) / 2`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Bit error rate of Gray QPSK: `Q(sqrt(2 Eb/N0))` with `Eb = Es/2`.
pub fn qpsk_ber_theory(esn0_db: f64) -> f64 {
    let ebn0 = 10f64.powf(esn0_db / 10.0) / 2.0;
    q_function((2.0 * ebn0).sqrt())
}

/// Symbol error rate of Gray QPSK: `1 - (1 - p)^2` with `p` the bit error
/// rate of either axis.
pub fn qpsk_ser_theory(esn0_db: f64) -> f64 {
    let p = qpsk_ber_theory(esn0_db);
    1.0 - (1.0 - p) * (1.0 - p)
}

/// Sends `symbols` unit-energy QPSK symbols through complex AWGN of variance
/// `N0 = 10^(-Es/N0 / 10)` and counts hard-decision errors.
pub fn awgn_qpsk(esn0_db: f64, symbols: usize, seed: u64) -> Result<TrialCounts> {
    let n0 = 10f64.powf(-esn0_db / 10.0);
    let stream = RngStream::new(seed, 0);
    let mut data = stream.fork(1).rng();
    let bits: Vec<u8> = (0..2 * symbols).map(|_| data.random::<bool>() as u8).collect();
    let tx = bicm::qpsk_map(&bits)?;
    let noise = dsp::gaussian_noise(symbols, n0, &mut stream.fork(2).rng())?;
    let mut counts = TrialCounts { blocks: 1, symbols: symbols as u64, bits: bits.len() as u64, ..Default::default() };
    for ((s, w), b) in tx.iter().zip(&noise).zip(bits.chunks_exact(2)) {
        let llr = bicm::qpsk_demap_llr(s + w, 1.0, n0)?;
        let e0 = bicm::hard_bit(llr[0]) != b[0];
        let e1 = bicm::hard_bit(llr[1]) != b[1];
        counts.bit_errors += e0 as u64 + e1 as u64;
        counts.symbol_errors += (e0 || e1) as u64;
    }
    Ok(counts)
}
