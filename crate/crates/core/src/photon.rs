//! Per-pulse photon emission with multiphoton companions and Cauchy frequency noise.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::model::{DephasingDecomposition, EmitterParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonRecord {
    pub source_id: u8,
    pub pulse_index: u64,
    pub nominal_emit_time_ps: f64,
    /// Carrier offset from the common reference (rad/ps).
    pub freq_offset: f64,
    pub pol_angle_rad: f64,
    pub quad_phase_ps2: f64,
    pub extra_delay_ps: f64,
    pub gamma_rad: f64,
    pub wavelength_nm: f64,
    pub is_companion: bool,
    pub alive: bool,
}

impl PhotonRecord {
    /// Start of the wavepacket at the beamsplitter.
    pub fn arrival_ps(&self) -> f64 {
        self.nominal_emit_time_ps + self.extra_delay_ps
    }
}

/// Companion probability β giving a pulsed HBT ratio 2β/(1+β)² equal to `g2_zero`.
pub fn companion_prob_from_g2(g2_zero: f64) -> Result<f64> {
    ensure(
        (0.0..=0.5).contains(&g2_zero),
        "g2_zero",
        g2_zero,
        "0 <= g2_zero <= 0.5 (2b/(1+b)^2 never exceeds 1/2 for b in [0,1])",
    )?;
    // Smaller root of g·β² + 2(g−1)β + g = 0, written without cancellation.
    Ok(g2_zero / ((1.0 - g2_zero) + (1.0 - 2.0 * g2_zero).sqrt()))
}

/// HBT central-peak ratio produced by companion probability `beta`.
pub fn g2_from_companion_prob(beta: f64) -> f64 {
    2.0 * beta / ((1.0 + beta) * (1.0 + beta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrelationMode {
    /// Every photon gets fresh fast and slow draws.
    Independent,
    /// The slow term is drawn once per slot and reused.
    ConsecutivePair,
}

fn cauchy<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    if scale == 0.0 {
        return 0.0;
    }
    let u: f64 = rng.random();
    scale * (PI * (u - 0.5)).tan()
}

pub fn sample_fast_term<R: Rng + ?Sized>(d: &DephasingDecomposition, rng: &mut R) -> f64 {
    cauchy(d.gamma_fast_star, rng)
}

pub fn sample_slow_term<R: Rng + ?Sized>(d: &DephasingDecomposition, rng: &mut R) -> f64 {
    cauchy(d.gamma_slow, rng)
}

/// Draws one photon's carrier offset. In consecutive-pair mode the slow term is taken from
/// `shared_slow`, filling it on first use.
pub fn sample_frequency_offset<R: Rng + ?Sized>(
    d: &DephasingDecomposition,
    mode: CorrelationMode,
    shared_slow: &mut Option<f64>,
    rng: &mut R,
) -> f64 {
    let fast = sample_fast_term(d, rng);
    let slow = match mode {
        CorrelationMode::Independent => sample_slow_term(d, rng),
        CorrelationMode::ConsecutivePair => match *shared_slow {
            Some(s) => s,
            None => {
                let s = sample_slow_term(d, rng);
                *shared_slow = Some(s);
                s
            }
        },
    };
    fast + slow
}

fn record(
    emitter: &EmitterParams,
    source_id: u8,
    pulse_index: u64,
    offset: f64,
    companion: bool,
) -> PhotonRecord {
    PhotonRecord {
        source_id,
        pulse_index,
        nominal_emit_time_ps: pulse_index as f64 * emitter.pulse_period_ps(),
        freq_offset: offset,
        pol_angle_rad: 0.0,
        quad_phase_ps2: 0.0,
        extra_delay_ps: 0.0,
        gamma_rad: emitter.gamma_rad(),
        wavelength_nm: emitter.wavelength_nm,
        is_companion: companion,
        alive: true,
    }
}

/// Photons leaving the source in one excitation pulse: a primary with probability
/// `eta_sys` and an independent companion with probability `eta_sys·β`. All photons of the
/// pulse share the slow spectral-diffusion term held in `slow`; pass the same slot for two
/// pulses to correlate them.
pub fn sample_pulse_emission<R: Rng + ?Sized>(
    emitter: &EmitterParams,
    d: &DephasingDecomposition,
    source_id: u8,
    pulse_index: u64,
    slow: &mut Option<f64>,
    rng: &mut R,
) -> Result<Vec<PhotonRecord>> {
    let beta = companion_prob_from_g2(emitter.g2_zero)?;
    let mut out = Vec::new();
    if rng.random::<f64>() < emitter.eta_sys {
        let w = sample_frequency_offset(d, CorrelationMode::ConsecutivePair, slow, rng);
        out.push(record(emitter, source_id, pulse_index, w, false));
    }
    if rng.random::<f64>() < emitter.eta_sys * beta {
        let w = sample_frequency_offset(d, CorrelationMode::ConsecutivePair, slow, rng);
        out.push(record(emitter, source_id, pulse_index, w, true));
    }
    Ok(out)
}

/// Coherent-state emission: the photon number is Poisson with mean `eta_sys`.
pub fn sample_poissonian_emission<R: Rng + ?Sized>(
    emitter: &EmitterParams,
    d: &DephasingDecomposition,
    source_id: u8,
    pulse_index: u64,
    rng: &mut R,
) -> Vec<PhotonRecord> {
    let n = Poisson::new(emitter.eta_sys)
        .map(|p| p.sample(rng) as usize)
        .unwrap_or(0);
    let mut slow = None;
    (0..n)
        .map(|_| {
            let w = sample_frequency_offset(d, CorrelationMode::ConsecutivePair, &mut slow, rng);
            record(emitter, source_id, pulse_index, w, false)
        })
        .collect()
}
