//! Monte-Carlo engines.
//!
//! The HOM engine samples single excitation pulses conditioned on at least two
//! detection-level events (photons that will click, noise photons, dark counts), since only
//! those can produce a coincidence. Each trial therefore stands for 1/P(≥2) pulses, which
//! keeps long-fiber runs as cheap as short ones. The HBT engine simulates every pulse so
//! that side peaks are populated.
//!
//! Trials are grouped in fixed chunks; each chunk owns its random streams and the chunk
//! results are reduced in order, so the worker count never changes the output.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelState, FiberParams};
use crate::detection::{
    apply_detector, extract_visibility, hom_sample_pair, Arrival, ClickOrigin, ClickRecord,
    CoincidenceHistogram, DetectorParams, HistogramMeta, VisibilityEstimate,
};
use crate::error::{ensure, Error, Result};
use crate::model::{decompose_dephasing, DephasingDecomposition, EmitterParams};
use crate::photon::{
    companion_prob_from_g2, sample_frequency_offset, sample_poissonian_emission,
    sample_pulse_emission, CorrelationMode, PhotonRecord,
};
use crate::qfc::{conversion_efficiency, converted_wavelength, QfcParams};
use crate::rng::{experiment_id, RngStreamSpec, Stage};

/// Trials per chunk; also the unit over which the channel condition is frozen.
pub const CHUNK_TRIALS: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSpec {
    pub master_seed: u64,
    pub trials: u64,
    pub workers: usize,
}

fn run_chunks<T, F>(trials: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, std::ops::Range<u64>) -> Result<T> + Sync,
{
    let chunks = trials.div_ceil(CHUNK_TRIALS);
    let job = || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK_TRIALS;
                f(c, start..(start + CHUNK_TRIALS).min(trials))
            })
            .collect::<Result<Vec<T>>>()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Undefined(format!("cannot start worker pool: {e}")))?;
    pool.install(job)
}

/// One source with its conversion stage and fiber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSetup {
    pub emitter: EmitterParams,
    pub qfc: Option<QfcParams>,
    pub fiber: FiberParams,
}

impl ArmSetup {
    pub fn validate(&self) -> Result<()> {
        self.emitter.validate()?;
        if let Some(q) = &self.qfc {
            q.validate()?;
        }
        self.fiber.validate()
    }

    fn qfc_efficiency(&self) -> Result<f64> {
        match &self.qfc {
            Some(q) => conversion_efficiency(q.pump_mw, q),
            None => Ok(1.0),
        }
    }

    /// Wavelength of the photons entering the fiber.
    pub fn fiber_wavelength_nm(&self) -> Result<f64> {
        match &self.qfc {
            Some(q) => converted_wavelength(self.emitter.wavelength_nm, q.pump_wavelength_nm),
            None => Ok(self.emitter.wavelength_nm),
        }
    }

    /// Probability that an emitted photon survives to a click, before polarization loss.
    pub fn photon_detection_probability(&self, det: &DetectorParams) -> Result<f64> {
        Ok(self.emitter.eta_sys
            * self.qfc_efficiency()?
            * self.fiber.transmission()
            * det.efficiency)
    }
}

/// Two-source interference run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomExperiment {
    pub label: String,
    pub arms: [ArmSetup; 2],
    pub detector: DetectorParams,
    /// Carrier of arm 2 minus carrier of arm 1 (rad/ps).
    pub detuning_rad_per_ps: f64,
    /// Rotate arm 2 to the orthogonal polarization (distinguishable reference).
    pub orthogonal: bool,
    /// `ConsecutivePair` treats the two primaries as successive photons of one source that
    /// share the slow spectral-diffusion term.
    pub correlation: CorrelationMode,
    /// Wall-clock time represented by one chunk of trials (hr).
    pub batch_hours: f64,
    pub bin_width_ps: f64,
    pub range_ps: f64,
}

impl HomExperiment {
    pub fn new(label: impl Into<String>, arms: [ArmSetup; 2], detector: DetectorParams) -> Self {
        Self {
            label: label.into(),
            arms,
            detector,
            detuning_rad_per_ps: 0.0,
            orthogonal: false,
            correlation: CorrelationMode::Independent,
            batch_hours: 0.1,
            bin_width_ps: crate::detection::DEFAULT_BIN_WIDTH_PS,
            range_ps: crate::detection::DEFAULT_RANGE_PS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for arm in &self.arms {
            arm.validate()?;
        }
        self.detector.validate()?;
        ensure(
            self.detuning_rad_per_ps.is_finite(),
            "detuning_rad_per_ps",
            self.detuning_rad_per_ps,
            "finite",
        )?;
        ensure(
            self.batch_hours > 0.0 && self.batch_hours.is_finite(),
            "batch_hours",
            self.batch_hours,
            "batch_hours > 0",
        )
    }
}

#[derive(Debug, Clone, Copy)]
enum Counting {
    Bernoulli(f64),
    Poisson(f64),
}

impl Counting {
    /// P(0), P(1), P(≥2).
    fn classes(self) -> [f64; 3] {
        match self {
            Counting::Bernoulli(p) => [1.0 - p, p, 0.0],
            Counting::Poisson(l) => {
                let e = (-l).exp();
                let two_plus = if l < 0.01 {
                    e * l * l / 2.0 * (1.0 + l / 3.0 + l * l / 12.0)
                } else {
                    (1.0 - e - l * e).max(0.0)
                };
                [e, l * e, two_plus]
            }
        }
    }

    fn sample_two_plus<R: Rng + ?Sized>(self, two_plus: f64, rng: &mut R) -> u32 {
        match self {
            Counting::Bernoulli(_) => 1,
            Counting::Poisson(l) => {
                let target = rng.random::<f64>() * two_plus;
                let mut term = (-l).exp() * l * l / 2.0;
                let mut acc = term;
                let mut k = 2u32;
                while acc < target && k < 1000 {
                    k += 1;
                    term *= l / k as f64;
                    acc += term;
                }
                k
            }
        }
    }
}

/// Exact sampler of independent counts conditioned on their sum being at least two.
struct ConditionedCounts {
    components: Vec<(Counting, [f64; 3])>,
    /// Suffix probabilities P(S_k = 0), P(S_k = 1), P(S_k ≥ 2) of the counts from k on.
    suffix: Vec<[f64; 3]>,
}

impl ConditionedCounts {
    fn new(components: &[Counting]) -> Self {
        let comps: Vec<_> = components.iter().map(|c| (*c, c.classes())).collect();
        let mut suffix = vec![[1.0, 0.0, 0.0]; comps.len() + 1];
        for k in (0..comps.len()).rev() {
            let [q0, q1, q2] = comps[k].1;
            let [z, o, g] = suffix[k + 1];
            suffix[k] = [q0 * z, q0 * o + q1 * z, g + o * (q1 + q2) + z * q2];
        }
        Self {
            components: comps,
            suffix,
        }
    }

    fn prob_two_plus(&self) -> f64 {
        self.suffix[0][2]
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [u32]) {
        let mut have = 0u32;
        for (k, (dist, [q0, q1, q2])) in self.components.iter().enumerate() {
            let [_, o, g] = self.suffix[k + 1];
            let at_least = |m: u32| match m {
                0 => 1.0,
                1 => o + g,
                _ => g,
            };
            let need = 2u32.saturating_sub(have);
            let w0 = q0 * at_least(need);
            let w1 = q1 * at_least(need.saturating_sub(1));
            let w2 = *q2;
            let u = rng.random::<f64>() * (w0 + w1 + w2);
            let n = if u < w0 {
                0
            } else if u < w0 + w1 {
                1
            } else {
                dist.sample_two_plus(*q2, rng)
            };
            out[k] = n;
            have = (have + n).min(2);
        }
    }
}

/// Per-chunk constants of one arm.
struct ArmBatch {
    decomposition: DephasingDecomposition,
    primary: f64,
    companion: f64,
    noise: f64,
    delay_ps: f64,
    quad_phase: f64,
    wavelength_nm: f64,
}

/// Result of a post-selected HOM run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomRun {
    pub label: String,
    pub histogram: CoincidenceHistogram,
    pub trials: u64,
    /// Number of excitation pulses the trials stand for.
    pub pulses: f64,
    pub rep_rate_hz: f64,
}

impl HomRun {
    /// Coincidence rate within |τ| ≤ window/2 with its Poisson error (Hz).
    pub fn coincidence_rate(&self, window_ps: f64) -> (f64, f64) {
        let n = self.histogram.window_count(0.0, 0.5 * window_ps) as f64;
        let scale = self.rep_rate_hz / self.pulses;
        (n * scale, n.sqrt() * scale)
    }

    pub fn visibility(&self, reference: &HomRun, window_ps: f64) -> Result<VisibilityEstimate> {
        extract_visibility(&self.histogram, &reference.histogram, window_ps)
    }
}

fn exp_time<R: Rng + ?Sized>(gamma: f64, rng: &mut R) -> f64 {
    Exp::new(gamma).expect("positive rate").sample(rng)
}

/// Channel conditions of both arms during chunk `chunk`; shared by every run with the same
/// seed so resonant and reference runs see the same link.
pub fn channel_states(exp: &HomExperiment, master_seed: u64, chunk: u64) -> [ChannelState; 2] {
    let mut rng =
        RngStreamSpec::new(master_seed, experiment_id("channel"), chunk, Stage::Channel).rng();
    let elapsed = (chunk as f64 + 0.5) * exp.batch_hours;
    [
        ChannelState::sample(&exp.arms[0].fiber, elapsed, &mut rng),
        ChannelState::sample(&exp.arms[1].fiber, elapsed, &mut rng),
    ]
}

fn arm_batch(arm: &ArmSetup, det: &DetectorParams, state: &ChannelState) -> Result<ArmBatch> {
    let decomposition = decompose_dephasing(&arm.emitter)?;
    let beta = companion_prob_from_g2(arm.emitter.g2_zero)?;
    let pol = state.pol_pass_probability();
    let primary = arm.photon_detection_probability(det)? * pol;
    let noise = match &arm.qfc {
        Some(q) => {
            q.noise_rate_hz()
                * det.gate_window_ps
                * 1e-12
                * arm.fiber.transmission()
                * pol
                * det.efficiency
        }
        None => 0.0,
    };
    let wavelength_nm = arm.fiber_wavelength_nm()?;
    Ok(ArmBatch {
        decomposition,
        primary,
        companion: primary * beta,
        noise,
        delay_ps: state.delay_ps,
        quad_phase: arm.fiber.quad_phase(wavelength_nm),
        wavelength_nm,
    })
}

struct ChunkResult {
    histogram: CoincidenceHistogram,
    pulses: f64,
}

/// Runs the post-selected two-source experiment.
pub fn run_hom(exp: &HomExperiment, spec: &RunSpec, meta: HistogramMeta) -> Result<HomRun> {
    exp.validate()?;
    ensure(
        spec.trials >= 1,
        "trials",
        spec.trials as f64,
        "trials >= 1",
    )?;
    let exp_id = experiment_id(&exp.label);
    let det = &exp.detector;
    let empty = CoincidenceHistogram::new(exp.bin_width_ps, exp.range_ps, meta)?;
    let jitter = (det.jitter_sigma_ps() > 0.0)
        .then(|| rand_distr::Normal::new(0.0, det.jitter_sigma_ps()).expect("finite jitter"));

    let chunks = run_chunks(spec.trials, spec.workers, |chunk, range| {
        let states = channel_states(exp, spec.master_seed, chunk);
        let a = [
            arm_batch(&exp.arms[0], det, &states[0])?,
            arm_batch(&exp.arms[1], det, &states[1])?,
        ];
        let dark = det.dark_mean_per_gate();
        let sampler = ConditionedCounts::new(&[
            Counting::Bernoulli(a[0].primary),
            Counting::Bernoulli(a[0].companion),
            Counting::Poisson(a[0].noise),
            Counting::Bernoulli(a[1].primary),
            Counting::Bernoulli(a[1].companion),
            Counting::Poisson(a[1].noise),
            Counting::Poisson(dark),
            Counting::Poisson(dark),
        ]);
        let p2 = sampler.prob_two_plus();
        let mut hist = empty.clone();
        if p2 <= 0.0 {
            return Ok(ChunkResult {
                histogram: hist,
                pulses: f64::INFINITY,
            });
        }
        let mut counts = [0u32; 8];
        let mut clicks: Vec<ClickRecord> = Vec::with_capacity(8);
        for trial in range.clone() {
            let mut rng = RngStreamSpec::new(spec.master_seed, exp_id, trial, Stage::Trial).rng();
            sampler.sample(&mut rng, &mut counts);
            clicks.clear();
            let mut emit =
                |detector: u8, t: f64, origin: ClickOrigin, rng: &mut rand_chacha::ChaCha8Rng| {
                    let dt = match (origin, jitter) {
                        (ClickOrigin::Dark, _) | (_, None) => 0.0,
                        (_, Some(j)) => j.sample(rng),
                    };
                    clicks.push(ClickRecord {
                        detector,
                        timestamp_ps: t + dt,
                        origin,
                    });
                };
            let port =
                |rng: &mut rand_chacha::ChaCha8Rng| if rng.random::<bool>() { 1u8 } else { 2u8 };

            let mut slot = None;
            let mut primaries: [Option<PhotonRecord>; 2] = [None, None];
            for (i, arm) in a.iter().enumerate() {
                if counts[3 * i] == 0 {
                    continue;
                }
                let mode = exp.correlation;
                let offset = sample_frequency_offset(&arm.decomposition, mode, &mut slot, &mut rng);
                let center = if i == 1 { exp.detuning_rad_per_ps } else { 0.0 };
                primaries[i] = Some(PhotonRecord {
                    source_id: i as u8 + 1,
                    pulse_index: 0,
                    nominal_emit_time_ps: 0.0,
                    freq_offset: center + offset,
                    pol_angle_rad: if i == 1 && exp.orthogonal {
                        std::f64::consts::FRAC_PI_2
                    } else {
                        0.0
                    },
                    quad_phase_ps2: arm.quad_phase,
                    extra_delay_ps: arm.delay_ps,
                    gamma_rad: arm.decomposition.gamma_rad,
                    wavelength_nm: arm.wavelength_nm,
                    is_companion: false,
                    alive: true,
                });
            }
            match &primaries {
                [Some(p1), Some(p2)] => {
                    let out = hom_sample_pair(p1, p2, &mut rng)?.expect("both photons alive");
                    for k in 0..2 {
                        emit(out.ports[k], out.times_ps[k], ClickOrigin::Signal, &mut rng);
                    }
                }
                _ => {
                    for p in primaries.iter().flatten() {
                        let t = p.arrival_ps() + exp_time(p.gamma_rad, &mut rng);
                        let d = port(&mut rng);
                        emit(d, t, ClickOrigin::Signal, &mut rng);
                    }
                }
            }
            for (i, arm) in a.iter().enumerate() {
                if counts[3 * i + 1] == 1 {
                    let t = arm.delay_ps + exp_time(arm.decomposition.gamma_rad, &mut rng);
                    let d = port(&mut rng);
                    emit(d, t, ClickOrigin::Companion, &mut rng);
                }
                for _ in 0..counts[3 * i + 2] {
                    let t = det.gate_offset_ps + rng.random::<f64>() * det.gate_window_ps;
                    let d = port(&mut rng);
                    emit(d, t, ClickOrigin::Noise, &mut rng);
                }
            }
            for (j, detector) in [1u8, 2].into_iter().enumerate() {
                for _ in 0..counts[6 + j] {
                    let t = det.gate_offset_ps + rng.random::<f64>() * det.gate_window_ps;
                    emit(detector, t, ClickOrigin::Dark, &mut rng);
                }
            }
            hist.record_clicks(&clicks);
        }
        Ok(ChunkResult {
            histogram: hist,
            pulses: (range.end - range.start) as f64 / p2,
        })
    })?;

    let mut histogram = empty;
    let mut pulses = 0.0;
    for c in &chunks {
        histogram.merge(&c.histogram)?;
        pulses += c.pulses;
    }
    Ok(HomRun {
        label: exp.label.clone(),
        histogram,
        trials: spec.trials,
        pulses,
        rep_rate_hz: exp.arms[0].emitter.rep_rate_hz,
    })
}

/// Expected full-window raw visibility when companions never interfere and there is no
/// background: V_raw = p₁p₂(V − V_ref) / (p₁p₂[(1+β₁)(1+β₂) − V_ref] + p₁²β₁ + p₂²β₂),
/// with pᵢ the detection probabilities of the primaries.
pub fn pair_weighted_visibility(
    v_intrinsic: f64,
    v_reference: f64,
    p: [f64; 2],
    beta: [f64; 2],
) -> f64 {
    let pp = p[0] * p[1];
    let denom = pp * ((1.0 + beta[0]) * (1.0 + beta[1]) - v_reference)
        + p[0] * p[0] * beta[0]
        + p[1] * p[1] * beta[1];
    pp * (v_intrinsic - v_reference) / denom
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhotonStatistics {
    /// Primary plus an independent companion fixed by g²(0).
    Companion,
    /// Poisson photon number with mean `eta_sys`.
    Poissonian,
}

/// Single-source intensity-correlation run: the source feeds a 50:50 splitter and every
/// pulse is simulated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbtExperiment {
    pub label: String,
    pub emitter: EmitterParams,
    pub statistics: PhotonStatistics,
    pub detector: DetectorParams,
    pub bin_width_ps: f64,
    pub range_ps: f64,
}

impl HbtExperiment {
    pub fn new(label: impl Into<String>, emitter: EmitterParams, detector: DetectorParams) -> Self {
        Self {
            label: label.into(),
            emitter,
            statistics: PhotonStatistics::Companion,
            detector,
            bin_width_ps: crate::detection::DEFAULT_BIN_WIDTH_PS,
            range_ps: crate::detection::DEFAULT_RANGE_PS,
        }
    }
}

fn hbt_pulse_clicks(
    exp: &HbtExperiment,
    d: &DephasingDecomposition,
    exp_id: u64,
    seed: u64,
    pulse: u64,
    out: &mut Vec<ClickRecord>,
) -> Result<()> {
    let mut rng = RngStreamSpec::new(seed, exp_id, pulse, Stage::Emission).rng();
    let photons = match exp.statistics {
        PhotonStatistics::Companion => {
            sample_pulse_emission(&exp.emitter, d, 1, pulse, &mut None, &mut rng)?
        }
        PhotonStatistics::Poissonian => {
            sample_poissonian_emission(&exp.emitter, d, 1, pulse, &mut rng)
        }
    };
    let pulse_time = pulse as f64 * exp.emitter.pulse_period_ps();
    let arrivals: Vec<Arrival> = photons
        .iter()
        .map(|p| Arrival {
            detector: if rng.random::<bool>() { 1 } else { 2 },
            time_ps: p.arrival_ps() + exp_time(p.gamma_rad, &mut rng),
            origin: if p.is_companion {
                ClickOrigin::Companion
            } else {
                ClickOrigin::Signal
            },
        })
        .collect();
    out.extend(apply_detector(
        &arrivals,
        &exp.detector,
        pulse_time,
        &mut rng,
    ));
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbtRun {
    pub label: String,
    pub histogram: CoincidenceHistogram,
    pub pulses: u64,
}

/// Simulates `spec.trials` pulses and histograms all detector-1/detector-2 pairs within
/// the histogram range, including pairs from different pulses.
pub fn run_hbt(exp: &HbtExperiment, spec: &RunSpec, meta: HistogramMeta) -> Result<HbtRun> {
    exp.emitter.validate()?;
    exp.detector.validate()?;
    ensure(
        spec.trials >= 1,
        "trials",
        spec.trials as f64,
        "trials >= 1",
    )?;
    let d = decompose_dephasing(&exp.emitter)?;
    let exp_id = experiment_id(&exp.label);
    let period = exp.emitter.pulse_period_ps();
    let empty = CoincidenceHistogram::new(exp.bin_width_ps, exp.range_ps, meta)?;
    let reach = (exp.range_ps / period).ceil() as u64 + 1;
    let n = spec.trials;

    let chunks = run_chunks(n, spec.workers, |_, range| {
        let lo = range.start.saturating_sub(reach);
        let hi = (range.end + reach).min(n);
        let mut own = Vec::new();
        let mut others = Vec::new();
        let mut buf = Vec::new();
        for pulse in lo..hi {
            buf.clear();
            hbt_pulse_clicks(exp, &d, exp_id, spec.master_seed, pulse, &mut buf)?;
            for c in &buf {
                if c.detector == 1 && range.contains(&pulse) {
                    own.push(c.timestamp_ps);
                } else if c.detector == 2 {
                    others.push(c.timestamp_ps);
                }
            }
        }
        others.sort_by(f64::total_cmp);
        let mut hist = empty.clone();
        for &t in &own {
            let start = others.partition_point(|&x| x < t - exp.range_ps);
            for &u in others[start..]
                .iter()
                .take_while(|&&x| x <= t + exp.range_ps)
            {
                hist.record(t - u);
            }
        }
        Ok(hist)
    })?;
    let mut histogram = empty;
    for h in &chunks {
        histogram.merge(h)?;
    }
    Ok(HbtRun {
        label: exp.label.clone(),
        histogram,
        pulses: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conditioned_counts_match_brute_force() {
        let comps = [
            Counting::Bernoulli(0.3),
            Counting::Poisson(0.2),
            Counting::Bernoulli(0.05),
            Counting::Poisson(1e-4),
        ];
        let s = ConditionedCounts::new(&comps);
        // P(S ≥ 2) by enumeration up to 15 counts per Poisson component.
        let pois = |l: f64, k: u32| {
            (-l).exp() * l.powi(k as i32) / (1..=k).map(f64::from).product::<f64>()
        };
        let mut p = 0.0;
        for a in 0..2u32 {
            for b in 0..16u32 {
                for c in 0..2u32 {
                    for d in 0..16u32 {
                        if a + b + c + d >= 2 {
                            let pa = if a == 1 { 0.3 } else { 0.7 };
                            let pc = if c == 1 { 0.05 } else { 0.95 };
                            p += pa * pois(0.2, b) * pc * pois(1e-4, d);
                        }
                    }
                }
            }
        }
        assert!(
            (s.prob_two_plus() - p).abs() < 1e-12,
            "{} vs {p}",
            s.prob_two_plus()
        );

        let mut rng = RngStreamSpec::new(1, 1, 1, Stage::Trial).rng();
        let mut out = [0u32; 4];
        let n = 200_000;
        let mut first = 0.0;
        for _ in 0..n {
            s.sample(&mut rng, &mut out);
            assert!(out.iter().sum::<u32>() >= 2);
            first += out[0] as f64;
        }
        // P(A = 1 | S ≥ 2) = 0.3·P(rest ≥ 1)/P(S ≥ 2).
        let rest_ge1 = 1.0 - (-0.2f64).exp() * 0.95 * (-1e-4f64).exp();
        let expect = 0.3 * rest_ge1 / p;
        let sd = (expect * (1.0 - expect) / n as f64).sqrt();
        assert!((first / n as f64 - expect).abs() < 4.0 * sd);
    }

    #[test]
    fn tiny_probabilities_stay_accurate() {
        let s = ConditionedCounts::new(&[
            Counting::Bernoulli(1e-5),
            Counting::Bernoulli(1e-5),
            Counting::Poisson(1e-9),
        ]);
        assert!((s.prob_two_plus() / 1e-10 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn pair_weights_reduce_to_intrinsic_for_pure_sources() {
        assert_eq!(
            pair_weighted_visibility(0.77, 0.0, [0.1, 0.2], [0.0, 0.0]),
            0.77
        );
    }
}
