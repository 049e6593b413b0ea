//! Bit-interleaved coded modulation: the rate-1/2 (7,5) convolutional code,
//! a seeded bit interleaver, Gray QPSK and a soft-input Viterbi decoder.
//!
//! Bits are `u8` values in `{0, 1}`. LLRs are positive when a zero bit is
//! more likely.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dsp::{Complex, RngStream};
use crate::error::{Error, Result};

/// Encoder memory (constraint length 3).
pub const MEMORY: usize = 2;
const STATES: usize = 1 << MEMORY;

/// Codec parameters. The generators are fixed at (7,5) octal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodecConfig {
    /// Seed of the bit interleaver permutation.
    pub interleaver_seed: u64,
    /// Information bits per block, excluding the two tail bits.
    pub info_bits: usize,
}

impl CodecConfig {
    /// Coded bits per block: two per input bit including the tail.
    pub fn coded_bits(&self) -> usize {
        2 * (self.info_bits + MEMORY)
    }

    /// Configuration whose coded block exactly fills `coded_bits` bits.
    pub fn for_coded_bits(coded_bits: usize, interleaver_seed: u64) -> Result<Self> {
        if coded_bits % 2 != 0 || coded_bits <= 2 * MEMORY {
            return Err(Error::Sizing(format!(
                "{coded_bits} coded bits cannot hold a terminated rate-1/2 block"
            )));
        }
        Ok(Self {
            interleaver_seed,
            info_bits: coded_bits / 2 - MEMORY,
        })
    }
}

#[inline]
fn branch_output(state: usize, input: u8) -> (u8, u8) {
    let s1 = (state >> 1) as u8 & 1;
    let s2 = state as u8 & 1;
    (input ^ s1 ^ s2, input ^ s2)
}

#[inline]
fn next_state(state: usize, input: u8) -> usize {
    ((input as usize) << 1) | (state >> 1)
}

/// Zero-terminated (7,5) encoding; output length `2 (len + 2)`.
pub fn conv_encode(info: &[u8]) -> Vec<u8> {
    let mut state = 0;
    let mut out = Vec::with_capacity(2 * (info.len() + MEMORY));
    for &u in info.iter().chain(std::iter::repeat_n(&0, MEMORY)) {
        let (a, b) = branch_output(state, u & 1);
        out.push(a);
        out.push(b);
        state = next_state(state, u & 1);
    }
    out
}

/// A fixed pseudo-random permutation of one block's coded bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<usize>,
}

impl Interleaver {
    pub fn new(len: usize, seed: u64) -> Self {
        let mut perm: Vec<usize> = (0..len).collect();
        perm.shuffle(&mut RngStream::new(seed, 0).rng());
        Self { perm }
    }

    pub fn for_codec(cfg: &CodecConfig) -> Self {
        Self::new(cfg.coded_bits(), cfg.interleaver_seed)
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.perm.len() {
            return Err(Error::DimensionMismatch(format!(
                "interleaver length {} but got {len} values",
                self.perm.len()
            )));
        }
        Ok(())
    }

    /// `out[i] = x[perm[i]]`.
    pub fn interleave<T: Copy>(&self, x: &[T]) -> Result<Vec<T>> {
        self.check(x.len())?;
        Ok(self.perm.iter().map(|&p| x[p]).collect())
    }

    pub fn deinterleave<T: Copy + Default>(&self, y: &[T]) -> Result<Vec<T>> {
        self.check(y.len())?;
        let mut out = vec![T::default(); y.len()];
        for (&p, &v) in self.perm.iter().zip(y) {
            out[p] = v;
        }
        Ok(out)
    }
}

/// Gray QPSK: `(b0, b1) -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2)`.
pub fn qpsk_map(bits: &[u8]) -> Result<Vec<Complex>> {
    if bits.len() % 2 != 0 {
        return Err(Error::Sizing(format!(
            "QPSK needs an even number of bits, got {}",
            bits.len()
        )));
    }
    Ok(bits
        .chunks_exact(2)
        .map(|b| {
            let re = if b[0] & 1 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
            let im = if b[1] & 1 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
            Complex::new(re, im)
        })
        .collect())
}

/// Exact per-axis LLRs of a combined observation `s_hat = gain * s + w`
/// with `Var(w) = gain * n0`.
pub fn qpsk_demap_llr(combined: Complex, gain: f64, n0: f64) -> Result<[f64; 2]> {
    if !(gain > 0.0) || !(n0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "demapper needs positive gain and noise variance, got gain {gain}, N0 {n0}"
        )));
    }
    let scale = 2.0 * std::f64::consts::SQRT_2 / n0;
    Ok([scale * combined.re, scale * combined.im])
}

/// Hard decision from an LLR.
#[inline]
pub fn hard_bit(llr: f64) -> u8 {
    (llr < 0.0) as u8
}

/// Maximum-likelihood decoding of a zero-terminated (7,5) block.
///
/// The branch metric adds `+llr/2` for a hypothesized zero and `-llr/2` for
/// a one. On equal path metrics the predecessor with the lower state index
/// survives, which makes decoding bit-exact reproducible.
pub fn viterbi_decode(llrs: &[f64], cfg: &CodecConfig) -> Result<Vec<u8>> {
    if llrs.len() != cfg.coded_bits() {
        return Err(Error::DimensionMismatch(format!(
            "expected {} LLRs, got {}",
            cfg.coded_bits(),
            llrs.len()
        )));
    }
    let steps = llrs.len() / 2;
    let mut metric = [f64::NEG_INFINITY; STATES];
    metric[0] = 0.0;
    // survivors[t][s] = predecessor of state s at step t + 1.
    let mut survivors: Vec<[u8; STATES]> = Vec::with_capacity(steps);

    for pair in llrs.chunks_exact(2) {
        let half = [0.5 * pair[0], 0.5 * pair[1]];
        let mut next = [f64::NEG_INFINITY; STATES];
        let mut choice = [0u8; STATES];
        for (s, slot) in next.iter_mut().enumerate() {
            let input = (s >> 1) as u8;
            // Predecessors of s are (s & 1) << 1 | {0, 1}, in ascending order.
            let base = (s & 1) << 1;
            for prev in [base, base | 1] {
                if metric[prev] == f64::NEG_INFINITY {
                    continue;
                }
                let (a, b) = branch_output(prev, input);
                let bm = if a == 0 { half[0] } else { -half[0] } + if b == 0 { half[1] } else { -half[1] };
                let m = metric[prev] + bm;
                if m > *slot {
                    *slot = m;
                    choice[s] = prev as u8;
                }
            }
        }
        metric = next;
        survivors.push(choice);
    }

    let mut state = 0usize;
    let mut decoded = vec![0u8; steps];
    for t in (0..steps).rev() {
        decoded[t] = (state >> 1) as u8;
        state = survivors[t][state] as usize;
    }
    decoded.truncate(cfg.info_bits);
    Ok(decoded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_bits(len: usize, seed: u64) -> Vec<u8> {
        let mut rng = RngStream::new(seed, 1).rng();
        (0..len).map(|_| rng.random::<bool>() as u8).collect()
    }

    fn perfect_llrs(coded: &[u8]) -> Vec<f64> {
        coded.iter().map(|&b| if b == 0 { 100.0 } else { -100.0 }).collect()
    }

    #[test]
    fn encoder_trellis_trace() {
        let out = conv_encode(&[1, 0, 0]);
        assert_eq!(out.len(), 10);
        assert_eq!(&out[..6], &[1, 1, 1, 0, 1, 1]);
        assert!(conv_encode(&[0; 40]).iter().all(|&b| b == 0));
    }

    #[test]
    fn encoder_is_linear() {
        for seed in 0..100 {
            let a = random_bits(50, seed);
            let b = random_bits(50, seed + 1000);
            let sum: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            let lhs = conv_encode(&sum);
            let rhs: Vec<u8> = conv_encode(&a)
                .iter()
                .zip(conv_encode(&b))
                .map(|(x, y)| x ^ y)
                .collect();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn interleaver_is_a_seeded_bijection() {
        let il = Interleaver::new(4608, 77);
        let mut sorted = il.permutation().to_vec();
        sorted.sort_unstable();
        assert!(sorted.iter().enumerate().all(|(i, &p)| i == p));
        assert_eq!(il, Interleaver::new(4608, 77));
        assert_ne!(il, Interleaver::new(4608, 78));

        let x = random_bits(4608, 3);
        let y = il.interleave(&x).unwrap();
        assert_ne!(x, y);
        assert_eq!(il.deinterleave(&y).unwrap(), x);
        assert!(il.interleave(&x[1..]).is_err());
        assert!(il.deinterleave(&x[1..]).is_err());
    }

    #[test]
    fn qpsk_constellation() {
        let s = qpsk_map(&[0, 0, 0, 1, 1, 0, 1, 1]).unwrap();
        let r = FRAC_1_SQRT_2;
        assert_eq!(s[0], Complex::new(r, r));
        assert_eq!(s[1], Complex::new(r, -r));
        assert_eq!(s[2], Complex::new(-r, r));
        assert_eq!(s[3], Complex::new(-r, -r));
        assert!(s.iter().all(|v| (v.norm_sqr() - 1.0).abs() < 1e-15));
        assert!(qpsk_map(&[1, 0, 1]).is_err());
    }

    #[test]
    fn qpsk_is_gray_labelled() {
        // Nearest neighbours (distance sqrt 2) differ in exactly one bit.
        let labels = [[0u8, 0], [0, 1], [1, 0], [1, 1]];
        let points: Vec<Complex> = labels.iter().map(|l| qpsk_map(l).unwrap()[0]).collect();
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    continue;
                }
                let d = (points[i] - points[j]).norm();
                let hamming = (labels[i][0] ^ labels[j][0]) + (labels[i][1] ^ labels[j][1]);
                if (d - std::f64::consts::SQRT_2).abs() < 1e-12 {
                    assert_eq!(hamming, 1);
                } else {
                    assert_eq!(hamming, 2);
                }
            }
        }
    }

    #[test]
    fn demapper_signs_and_errors() {
        let s = Complex::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2) * 2.5;
        let llr = qpsk_demap_llr(s, 2.5, 0.1).unwrap();
        assert!(llr[0] > 0.0 && llr[1] > 0.0);
        assert_eq!(qpsk_demap_llr(Complex::new(0.0, 0.0), 1.0, 1.0).unwrap(), [0.0, 0.0]);
        assert!(qpsk_demap_llr(s, 0.0, 1.0).is_err());
        assert!(qpsk_demap_llr(s, 1.0, 0.0).is_err());
    }

    #[test]
    fn demapper_agrees_with_nearest_point() {
        let mut rng = RngStream::new(12, 0).rng();
        let labels = [[0u8, 0], [0, 1], [1, 0], [1, 1]];
        let points: Vec<Complex> = labels.iter().map(|l| qpsk_map(l).unwrap()[0]).collect();
        for _ in 0..10_000 {
            let gain = 0.1 + 2.0 * rng.random::<f64>();
            let idx = rng.random_range(0..4);
            let noise = Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * 2.0;
            let obs = points[idx] * gain + noise;
            let llr = qpsk_demap_llr(obs, gain, 0.5).unwrap();
            let nearest = (0..4)
                .min_by(|&a, &b| {
                    (obs - points[a] * gain)
                        .norm()
                        .total_cmp(&(obs - points[b] * gain).norm())
                })
                .unwrap();
            assert_eq!([hard_bit(llr[0]), hard_bit(llr[1])], labels[nearest]);
        }
    }

    #[test]
    fn viterbi_decodes_noiseless_blocks() {
        let cfg = CodecConfig { interleaver_seed: 0, info_bits: 200 };
        for seed in 0..100 {
            let info = random_bits(200, seed);
            let llrs = perfect_llrs(&conv_encode(&info));
            assert_eq!(viterbi_decode(&llrs, &cfg).unwrap(), info);
        }
    }

    /// Free distance of the (7,5) code by exhaustive search over all
    /// detours leaving and re-entering state zero within a short horizon.
    fn free_distance() -> u32 {
        let mut best = u32::MAX;
        for len in 1..=12usize {
            for pattern in 0u32..(1 << len) {
                if pattern & 1 == 0 {
                    continue;
                }
                let bits: Vec<u8> = (0..len).map(|i| ((pattern >> i) & 1) as u8).collect();
                let w = conv_encode(&bits).iter().map(|&b| b as u32).sum();
                best = best.min(w);
            }
        }
        best
    }

    #[test]
    fn corrects_any_single_coded_bit_error() {
        assert_eq!(free_distance(), 5);
        let cfg = CodecConfig { interleaver_seed: 0, info_bits: 300 };
        let info = random_bits(300, 99);
        let coded = conv_encode(&info);
        for flip in 0..coded.len() {
            let mut llrs = perfect_llrs(&coded);
            llrs[flip] = -llrs[flip];
            assert_eq!(viterbi_decode(&llrs, &cfg).unwrap(), info, "flip at {flip}");
        }
    }

    #[test]
    fn zero_llrs_decode_to_zero_block() {
        let cfg = CodecConfig { interleaver_seed: 0, info_bits: 64 };
        let out = viterbi_decode(&vec![0.0; cfg.coded_bits()], &cfg).unwrap();
        assert_eq!(out, vec![0; 64]);
        assert!(viterbi_decode(&[0.0; 10], &cfg).is_err());
    }

    #[test]
    fn chain_round_trip_without_channel() {
        let cfg = CodecConfig::for_coded_bits(4608, 5).unwrap();
        assert_eq!(cfg.info_bits, 2302);
        let il = Interleaver::for_codec(&cfg);
        let info = random_bits(cfg.info_bits, 8);
        let symbols = qpsk_map(&il.interleave(&conv_encode(&info)).unwrap()).unwrap();
        let llrs: Vec<f64> = symbols
            .iter()
            .flat_map(|&s| qpsk_demap_llr(s, 1.0, 0.01).unwrap())
            .collect();
        let decoded = viterbi_decode(&il.deinterleave(&llrs).unwrap(), &cfg).unwrap();
        assert_eq!(decoded, info);
    }
}
