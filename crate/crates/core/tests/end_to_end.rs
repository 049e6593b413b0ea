use apfrelay::bicm::{self, Interleaver};
use apfrelay::channel::{self, ChannelConfig, ChannelRealization, LosPhase};
use apfrelay::dsp::{self, Complex, RngStream, ZERO};
use apfrelay::harness::diagnostic::qpsk_ber_theory;
use apfrelay::harness::{run_sweep, BlockSetup, Estimator, Link, ScenarioConfig};
use apfrelay::stbc::{self, PilotScheme, PilotSpec, StbcConfig, PILOT_SEED};
use apfrelay::vchan::{self, ApfConfig, VchanScheme, VirtualChannelMatrix};
use rand::Rng;

fn scenario(scheme: VchanScheme, estimator: Estimator, uavs: usize) -> ScenarioConfig {
    ScenarioConfig { uavs, scheme, estimator, ..Default::default() }
}

#[test]
fn noiseless_perfect_csi_has_no_errors() {
    for scheme in [VchanScheme::Apf, VchanScheme::PhaseDither] {
        for u in 1..=3 {
            let link = Link::new(&scenario(scheme, Estimator::PerfectCsi, u)).unwrap();
            for t in 0..100 {
                let c = link.run_block(100.0, t).unwrap();
                assert_eq!(c.symbol_errors, 0, "{scheme:?} U={u} trial {t}");
            }
        }
    }
}

#[test]
fn group_constant_channels_decode_without_errors() {
    // Single-tap virtual channels and flat propagation channels keep the
    // composite response constant across each group.
    let mut rng = RngStream::new(40, 0).rng();
    let mut tap = || vec![Complex::from_polar(0.5 + rng.random::<f64>(), rng.random::<f64>() * 6.28)];
    for (scheme, est) in [(VchanScheme::Apf, Estimator::Ls), (VchanScheme::Apf, Estimator::CyclicDelay)] {
        for u in 1..=3 {
            let link = Link::new(&scenario(scheme, est, u)).unwrap();
            for t in 0..10 {
                let setup = BlockSetup {
                    vchans: (0..u).map(|_| VirtualChannelMatrix::from_taps(vec![tap(), tap()], 128).unwrap()).collect(),
                    channels: (0..u).map(|_| ChannelRealization::new(tap())).collect(),
                };
                let c = link.run_block_with(100.0, t, &setup).unwrap();
                assert_eq!(c.bit_errors, 0, "{est:?} U={u}");
            }
        }
    }
}

/// Time-domain chain (per-UAV IFFT, prefix, convolution, sum, FFT) against
/// the per-group frequency model `Y = S [H_eq(0,g), H_eq(1,g)]^T`.
#[test]
fn frequency_model_matches_time_domain_chain() {
    let cfg = StbcConfig::default();
    let mut rng = RngStream::new(41, 0).rng();
    let symbols = bicm::qpsk_map(&(0..256).map(|_| rng.random::<bool>() as u8).collect::<Vec<_>>()).unwrap();
    let run = |vchans: &[VirtualChannelMatrix], chans: &[ChannelRealization]| -> (Vec<Complex>, Vec<Complex>, f64) {
        let tx: Vec<Vec<Complex>> = vchans
            .iter()
            .map(|r| stbc::ofdm_modulate(&stbc::stbc_encode(&symbols, r, &cfg).unwrap(), &cfg).unwrap())
            .collect();
        let mut rx = vec![ZERO; cfg.symbol_len()];
        for (x, h) in tx.iter().zip(chans) {
            let full = dsp::linear_convolve(x, h.taps()).unwrap();
            rx.iter_mut().zip(&full).for_each(|(a, b)| *a += b);
        }
        let y = stbc::ofdm_demodulate(&rx, &cfg).unwrap();
        let h = stbc::composite_channel(vchans, chans, &cfg).unwrap();
        let mut model = vec![ZERO; 128];
        let mut bound = 0.0f64;
        for g in (0..128).step_by(2) {
            let s = stbc::alamouti_matrix(&symbols[g..g + 2]).unwrap();
            let hg = [h.freq[0][g], h.freq[1][g]];
            model[g] = s[0][0] * hg[0] + s[0][1] * hg[1];
            model[g + 1] = s[1][0] * hg[0] + s[1][1] * hg[1];
            let drift = (h.freq[0][g + 1] - hg[0]).norm() + (h.freq[1][g + 1] - hg[1]).norm();
            bound = bound.max(drift * std::f64::consts::FRAC_1_SQRT_2);
        }
        (y, model, bound)
    };

    let flat_v: Vec<_> = (0..2)
        .map(|_| VirtualChannelMatrix::from_taps(vec![vec![Complex::new(0.6, -0.8)], vec![Complex::new(0.0, 1.0)]], 128).unwrap())
        .collect();
    let flat_h = vec![ChannelRealization::new(vec![Complex::new(0.9, 0.1)]), ChannelRealization::new(vec![Complex::new(-0.3, 0.7)])];
    let (y, model, bound) = run(&flat_v, &flat_h);
    assert_eq!(bound, 0.0);
    for (a, b) in y.iter().zip(&model) {
        assert!((a - b).norm() < 1e-10);
    }

    let ch = ChannelConfig { k_rice_db: 5.0, ..Default::default() };
    let vchans: Vec<_> = (0..2).map(|_| vchan::generate_apf_vchan(2, 128, &ApfConfig::default(), &mut rng).unwrap()).collect();
    let chans: Vec<_> = (0..2).map(|_| channel::draw_rician(&ch, &mut rng).unwrap()).collect();
    let (y, model, bound) = run(&vchans, &chans);
    let worst = y.iter().zip(&model).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    println!("group-variation error {worst:.3e}, bound {bound:.3e}");
    for g in (0..128).step_by(2) {
        assert!((y[g] - model[g]).norm() < 1e-10);
    }
    assert!(worst <= bound + 1e-10);
}

#[test]
fn coding_gain_over_awgn() {
    let esn0_db = 6.0;
    let n0 = 10f64.powf(-esn0_db / 10.0);
    let cfg = bicm::CodecConfig { interleaver_seed: 3, info_bits: 2302 };
    let il = Interleaver::for_codec(&cfg);
    let stream = RngStream::new(42, 0);
    let (mut rng, mut noise_rng) = (stream.fork(1).rng(), stream.fork(2).rng());
    let (mut bits, mut errors) = (0usize, 0usize);
    for _ in 0..200 {
        let info: Vec<u8> = (0..cfg.info_bits).map(|_| rng.random::<bool>() as u8).collect();
        let tx = bicm::qpsk_map(&il.interleave(&bicm::conv_encode(&info)).unwrap()).unwrap();
        let noise = dsp::gaussian_noise(tx.len(), n0, &mut noise_rng).unwrap();
        let llrs: Vec<f64> = tx
            .iter()
            .zip(&noise)
            .flat_map(|(s, w)| bicm::qpsk_demap_llr(s + w, 1.0, n0).unwrap())
            .collect();
        let dec = bicm::viterbi_decode(&il.deinterleave(&llrs).unwrap(), &cfg).unwrap();
        errors += dec.iter().zip(&info).filter(|(a, b)| a != b).count();
        bits += info.len();
    }
    let coded = errors as f64 / bits as f64;
    let uncoded = qpsk_ber_theory(esn0_db);
    assert!(coded < uncoded / 10.0, "coded {coded:.3e} vs uncoded {uncoded:.3e}");
}

#[test]
fn ls_denoising_reduces_estimation_error() {
    let cfg = StbcConfig::default();
    let pilot = PilotSpec::bpsk(128, PILOT_SEED, PilotScheme::LsFrequency);
    let chan_cfg = ChannelConfig::default();
    let mut rng = RngStream::new(43, 0).rng();
    let (mut raw, mut denoised) = (0.0, 0.0);
    for _ in 0..200 {
        let vchans = vec![vchan::generate_apf_vchan(2, 128, &ApfConfig::default(), &mut rng).unwrap()];
        let chans = vec![channel::draw_rician(&chan_cfg, &mut rng).unwrap()];
        let truth = stbc::composite_channel(&vchans, &chans, &cfg).unwrap();
        let x = stbc::build_pilot_ls(&pilot, &vchans[0], &cfg).unwrap();
        let hf = dsp::padded_fft(chans[0].taps(), 128).unwrap();
        let rx: Vec<Vec<Complex>> = (0..2)
            .map(|_| {
                let w = dsp::gaussian_noise(128, 0.5, &mut rng).unwrap();
                x.iter().zip(&hf).zip(&w).map(|((a, b), n)| a * b + n).collect()
            })
            .collect();
        let mse = |est: &stbc::CompositeChannel| -> f64 {
            (0..2)
                .flat_map(|n| (0..128).step_by(2).map(move |g| (n, g)))
                .map(|(n, g)| (est.freq[n][g] - truth.freq[n][g]).norm_sqr())
                .sum::<f64>()
        };
        raw += mse(&stbc::estimate_ls_undenoised(&rx, &pilot, &cfg).unwrap());
        denoised += mse(&stbc::estimate_ls(&rx, &pilot, &cfg).unwrap());
    }
    assert!(denoised < 0.7 * raw, "denoised {denoised:.3e} raw {raw:.3e}");
}

#[test]
fn ser_falls_with_esn0() {
    let mut cfg = scenario(VchanScheme::Apf, Estimator::CyclicDelay, 1);
    cfg.sweep.esn0_db = vec![5.0, 10.0, 15.0, 20.0, 25.0];
    cfg.sweep.blocks_per_point = 400;
    let rows = run_sweep(&cfg, 1).unwrap().rows;
    for w in rows.windows(2) {
        let slack = 2.0 * (w[0].ser_sigma().powi(2) + w[1].ser_sigma().powi(2)).sqrt();
        assert!(w[1].ser <= w[0].ser + slack, "{} dB: {} -> {}", w[1].esn0_db, w[0].ser, w[1].ser);
    }
    assert!(rows[0].ser > rows[4].ser);
}

#[test]
fn cooperation_helps_with_perfect_csi() {
    let mut sers = Vec::new();
    for u in [1, 2] {
        let mut cfg = scenario(VchanScheme::Apf, Estimator::PerfectCsi, u);
        cfg.channel.k_rice_db = 10.0;
        cfg.sweep.esn0_db = vec![20.0];
        cfg.sweep.blocks_per_point = 2000;
        cfg.sweep.min_symbol_errors = 0;
        sers.push(run_sweep(&cfg, 1).unwrap().rows.remove(0));
    }
    let sigma = (sers[0].ser_sigma().powi(2) + sers[1].ser_sigma().powi(2)).sqrt();
    assert!(sers[0].ser - sers[1].ser > 2.0 * sigma, "U=1 {} U=2 {}", sers[0].ser, sers[1].ser);
}

#[test]
fn anti_phase_uavs_without_randomization_cancel() {
    let mut cfg = scenario(VchanScheme::Identity, Estimator::Ls, 2);
    cfg.channel = ChannelConfig { los_phase: LosPhase::Zero, ..Default::default() };
    let link = Link::new(&cfg).unwrap();
    let mut failed = 0;
    for t in 0..20 {
        let h = link.draw_setup(t).unwrap().channels[0].clone();
        let setup = BlockSetup {
            vchans: vec![VirtualChannelMatrix::identity(2, 128); 2],
            channels: vec![h.clone(), h.negated()],
        };
        let c = link.run_block_with(30.0, t, &setup).unwrap();
        failed += (c.ser() > 0.4) as usize;
    }
    assert_eq!(failed, 20);
}

#[test]
fn longer_truncation_is_flatter() {
    let mut rng = RngStream::new(44, 0).rng();
    for _ in 0..200 {
        let p = vchan::sample_poles(4, 0.1, &mut rng).unwrap();
        let dev = |tc| VirtualChannelMatrix::from_taps(vec![vchan::apf_cascade_taps(&p, tc).unwrap()], 128).unwrap().flatness_deviation();
        assert!(dev(12) < dev(6));
    }
}

fn deviations(p: &[Complex]) -> Vec<f64> {
    [6, 12, 24, 48]
        .iter()
        .map(|&tc| VirtualChannelMatrix::from_taps(vec![vchan::apf_cascade_taps(p, tc).unwrap()], 128).unwrap().flatness_deviation())
        .collect()
}

fn non_increasing(d: &[f64]) -> bool {
    d.windows(2).all(|w| w[1] <= w[0] + 1e-14)
}

#[test]
fn truncation_deviation_shrinks_per_draw_for_moderate_moduli() {
    let mut rng = RngStream::new(45, 0).rng();
    for m in 1..=4 {
        for mp in [0.1, 0.3, 0.5] {
            for _ in 0..200 {
                let d = deviations(&vchan::sample_poles(m, mp, &mut rng).unwrap());
                assert!(non_increasing(&d), "M={m} Mp={mp}: {d:?}");
            }
        }
    }
}

/// For moduli near one a longer truncation can overshoot on individual
/// draws; the mean deviation still falls.
#[test]
fn mean_truncation_deviation_shrinks() {
    let mut rng = RngStream::new(46, 0).rng();
    for m in [1, 2, 4] {
        for mp in [0.7, 0.9] {
            let mut mean = [0.0; 4];
            for _ in 0..300 {
                let d = deviations(&vchan::sample_poles(m, mp, &mut rng).unwrap());
                mean.iter_mut().zip(&d).for_each(|(a, b)| *a += b / 300.0);
            }
            assert!(mean.windows(2).all(|w| w[1] < w[0]), "M={m} Mp={mp}: {mean:?}");
        }
    }
}
