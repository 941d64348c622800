//! Statistical checks of the sampling engine against analytic expectations.

mod common;

use common::{bench_arm, pure, quiet_detector, run, still_fiber};
use qdlink::channel::{apply_channel, ChannelState, FiberParams};
use qdlink::detection::{extract_g2_zero, shot_overlap, DetectorParams};
use qdlink::engine::{pair_weighted_visibility, run_hbt, HbtExperiment, HomExperiment, RunSpec};
use qdlink::model::{decompose_dephasing, remote_visibility, EmitterParams};
use qdlink::photon::{
    companion_prob_from_g2, g2_from_companion_prob, sample_frequency_offset, sample_pulse_emission,
    CorrelationMode, PhotonRecord,
};
use qdlink::qfc::{apply_conversion, QfcParams};
use qdlink::units::ghz_to_rad_per_ps;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn hbt_recovers_companion_statistics() {
    for beta in [0.01, 0.0389, 0.1] {
        let g2 = g2_from_companion_prob(beta);
        let e = EmitterParams {
            g2_zero: g2,
            ..EmitterParams::qd1()
        };
        let exp = HbtExperiment::new(format!("beta-{beta}"), e.clone(), DetectorParams::default());
        let spec = RunSpec {
            master_seed: 41,
            trials: 2_000_000,
            workers: 2,
        };
        let run = run_hbt(&exp, &spec, common::meta(&exp.label, e.pulse_period_ps())).unwrap();
        let est = extract_g2_zero(&run.histogram).unwrap();
        assert!(
            (est.value - g2).abs() < 3.0 * est.stderr,
            "β = {beta}: {} ± {} vs {g2}",
            est.value,
            est.stderr
        );
    }
}

#[test]
fn identical_pure_photons_always_bunch() {
    let e = EmitterParams {
        t2_ps: 2.0 * 78.0,
        m_consecutive: 1.0,
        g2_zero: 0.0,
        ..EmitterParams::qd1()
    };
    let exp = HomExperiment::new(
        "bunching",
        [bench_arm(e.clone()), bench_arm(e)],
        quiet_detector(),
    );
    let r = run(&exp, 50_000, 3);
    assert_eq!(r.histogram.total_pairs, 0);
}

#[test]
fn contaminated_visibility_follows_pair_weighting() {
    let (e1, e2) = (EmitterParams::qd1(), EmitterParams::qd2());
    let det = quiet_detector();
    let arms = [bench_arm(e1.clone()), bench_arm(e2.clone())];
    let res = HomExperiment::new("weighted-resonant", arms.clone(), det.clone());
    let mut reference = res.clone();
    reference.label = "weighted-reference".into();
    let delta_ref = ghz_to_rad_per_ps(38.0);
    reference.detuning_rad_per_ps = delta_ref;
    let period = common::period(&res);
    let v = run(&res, 1_000_000, 5)
        .visibility(&run(&reference, 1_000_000, 5), period)
        .unwrap();
    let expected = pair_weighted_visibility(
        remote_visibility(&e1, &e2, 0.0).unwrap(),
        remote_visibility(&e1, &e2, delta_ref).unwrap(),
        [
            arms[0].photon_detection_probability(&det).unwrap(),
            arms[1].photon_detection_probability(&det).unwrap(),
        ],
        [
            companion_prob_from_g2(e1.g2_zero).unwrap(),
            companion_prob_from_g2(e2.g2_zero).unwrap(),
        ],
    );
    assert!(
        (v.visibility - expected).abs() < 3.0 * v.stderr,
        "{} ± {} vs {expected}",
        v.visibility,
        v.stderr
    );
}

#[test]
fn emitted_photons_per_pulse() {
    let e = EmitterParams::qd2();
    let d = decompose_dephasing(&e).unwrap();
    let beta = companion_prob_from_g2(e.g2_zero).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 400_000;
    let mut photons = 0usize;
    for pulse in 0..n {
        photons += sample_pulse_emission(&e, &d, 2, pulse, &mut None, &mut rng)
            .unwrap()
            .len();
    }
    let mean = photons as f64 / n as f64;
    let expected = e.eta_sys * (1.0 + beta);
    let se = (expected / n as f64).sqrt();
    assert!((mean - expected).abs() < 3.0 * se, "{mean} vs {expected}");
}

#[test]
fn consecutive_mode_shares_slow_term() {
    // With m_consecutive = 1 all dephasing is slow, so consecutive photons share their offset.
    let e = EmitterParams {
        m_consecutive: 1.0,
        ..EmitterParams::qd1()
    };
    let d = decompose_dephasing(&e).unwrap();
    assert_eq!(d.gamma_fast_star, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..1000 {
        let mut slot = None;
        let a = sample_frequency_offset(&d, CorrelationMode::ConsecutivePair, &mut slot, &mut rng);
        let b = sample_frequency_offset(&d, CorrelationMode::ConsecutivePair, &mut slot, &mut rng);
        assert_eq!(a, b);
        let c = sample_frequency_offset(&d, CorrelationMode::Independent, &mut slot, &mut rng);
        assert_ne!(a, c);
    }
}

fn photon(e: &EmitterParams, offset: f64) -> PhotonRecord {
    PhotonRecord {
        source_id: 1,
        pulse_index: 0,
        nominal_emit_time_ps: 0.0,
        freq_offset: offset,
        pol_angle_rad: 0.0,
        quad_phase_ps2: 0.0,
        extra_delay_ps: 0.0,
        gamma_rad: e.gamma_rad(),
        wavelength_nm: 1582.75,
        is_companion: false,
        alive: true,
    }
}

#[test]
fn identical_fibers_leave_overlap_unchanged() {
    let (e1, e2) = (EmitterParams::qd1(), EmitterParams::qd2());
    let (a, b) = (photon(&e1, 0.0), photon(&e2, 0.002));
    let before = shot_overlap(&a, &b).unwrap();
    let fiber = FiberParams {
        loss_db_per_km: 0.0,
        ..still_fiber(151.0)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (a2, b2) = (
        apply_channel(&a, &fiber, 0.0, &mut rng),
        apply_channel(&b, &fiber, 0.0, &mut rng),
    );
    assert!(a2.quad_phase_ps2 != 0.0);
    assert_eq!(a2.freq_offset, a.freq_offset);
    assert_eq!(a2.gamma_rad, a.gamma_rad);
    let after = shot_overlap(&a2, &b2).unwrap();
    assert!((after - before).abs() < 1e-12, "{before} -> {after}");
}

#[test]
fn time_drift_stays_bounded() {
    let fiber = FiberParams::with_length(100.0);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for k in 0..10_000 {
        let hr = k as f64 / 10_000.0;
        let s = ChannelState::sample(&fiber, hr, &mut rng);
        assert!(
            s.delay_ps.abs() <= fiber.time_drift_ps_per_hr * 1.0,
            "{} at {hr} h",
            s.delay_ps
        );
    }
}

#[test]
fn conversion_thins_and_preserves() {
    let q = QfcParams {
        raman_coeff: 0.0,
        ..QfcParams::qfc1()
    };
    let e = pure(EmitterParams::qd1());
    let mut p = photon(&e, 0.0012);
    p.wavelength_nm = e.wavelength_nm;
    p.pol_angle_rad = 0.3;
    p.extra_delay_ps = 4.0;
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let n = 1_000_000;
    let mut survivors = 0;
    for _ in 0..n {
        let out = apply_conversion(&p, &q, q.p_max_mw, 12_453.0, &mut rng).unwrap();
        assert!(out.noise_arrivals_ps.is_empty());
        if out.photon.alive {
            survivors += 1;
            assert_eq!(out.photon.freq_offset, p.freq_offset);
            assert_eq!(out.photon.gamma_rad, p.gamma_rad);
            assert_eq!(out.photon.pol_angle_rad, p.pol_angle_rad);
            assert_eq!(out.photon.arrival_ps(), p.arrival_ps());
        }
    }
    let frac = survivors as f64 / n as f64;
    assert!((frac - 0.48).abs() < 0.0015, "{frac}");
}
