//! Beamsplitter interference, detector response and coincidence analysis.

mod histogram;
mod oracle;

pub use histogram::{
    accumulate_histogram, extract_g2_zero, extract_visibility, CoincidenceHistogram, Estimate,
    HistogramMeta, VisibilityEstimate, DEFAULT_BIN_WIDTH_PS, DEFAULT_RANGE_PS,
};
pub use oracle::WindowedOracle;

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::model::overlap_chirped;
use crate::photon::PhotonRecord;

/// FWHM of a Gaussian divided by its standard deviation.
pub const FWHM_PER_SIGMA: f64 = 2.355;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorParams {
    pub efficiency: f64,
    pub jitter_fwhm_ps: f64,
    pub dark_rate_hz: f64,
    pub gate_window_ps: f64,
    /// Gate start relative to the nominal photon arrival.
    pub gate_offset_ps: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            efficiency: 0.76,
            jitter_fwhm_ps: 70.0,
            dark_rate_hz: 300.0,
            gate_window_ps: 1200.0,
            gate_offset_ps: -400.0,
        }
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<()> {
        ensure(
            self.efficiency > 0.0 && self.efficiency <= 1.0,
            "efficiency",
            self.efficiency,
            "0 < efficiency <= 1",
        )?;
        ensure(
            self.jitter_fwhm_ps >= 0.0 && self.jitter_fwhm_ps.is_finite(),
            "jitter_fwhm_ps",
            self.jitter_fwhm_ps,
            "jitter_fwhm_ps >= 0",
        )?;
        ensure(
            self.dark_rate_hz >= 0.0 && self.dark_rate_hz.is_finite(),
            "dark_rate_hz",
            self.dark_rate_hz,
            "dark_rate_hz >= 0",
        )?;
        ensure(
            self.gate_window_ps > 0.0 && self.gate_window_ps.is_finite(),
            "gate_window_ps",
            self.gate_window_ps,
            "gate_window_ps > 0",
        )?;
        ensure(
            self.gate_offset_ps.is_finite(),
            "gate_offset_ps",
            self.gate_offset_ps,
            "finite",
        )
    }

    pub fn jitter_sigma_ps(&self) -> f64 {
        self.jitter_fwhm_ps / FWHM_PER_SIGMA
    }

    /// Mean dark counts per gate per detector.
    pub fn dark_mean_per_gate(&self) -> f64 {
        self.dark_rate_hz * self.gate_window_ps * 1e-12
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClickOrigin {
    Signal,
    Companion,
    Noise,
    Dark,
}

/// Light reaching a detector, before efficiency and jitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arrival {
    pub detector: u8,
    pub time_ps: f64,
    pub origin: ClickOrigin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClickRecord {
    pub detector: u8,
    pub timestamp_ps: f64,
    pub origin: ClickOrigin,
}

/// Intensity profile of a one-sided exponential wavepacket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavepacket {
    pub gamma: f64,
    pub omega: f64,
    pub start_ps: f64,
}

impl Wavepacket {
    pub fn from_photon(p: &PhotonRecord) -> Self {
        Self {
            gamma: p.gamma_rad,
            omega: p.freq_offset,
            start_ps: p.arrival_ps(),
        }
    }

    pub fn density(&self, t: f64) -> f64 {
        if t < self.start_ps {
            0.0
        } else {
            self.gamma * (-self.gamma * (t - self.start_ps)).exp()
        }
    }

    pub fn sample_time<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.start_ps + Exp::new(self.gamma).expect("positive rate").sample(rng)
    }
}

/// Draws two detection times from the (anti)symmetrized two-photon density
/// |ψ₁(a)ψ₂(b) ∓ ψ₁(b)ψ₂(a)|² whose interference term is scaled by `coherence`.
///
/// Proposals come from the equal mixture of the two product densities, which bounds the
/// target within a factor of two.
pub fn sample_pair_times<R: Rng + ?Sized>(
    w1: &Wavepacket,
    w2: &Wavepacket,
    coherence: f64,
    antisymmetric: bool,
    rng: &mut R,
) -> (f64, f64) {
    let delta = w1.omega - w2.omega;
    let sign = if antisymmetric { -1.0 } else { 1.0 };
    loop {
        let (a, b) = if rng.random::<bool>() {
            (w1.sample_time(rng), w2.sample_time(rng))
        } else {
            (w2.sample_time(rng), w1.sample_time(rng))
        };
        let d12 = w1.density(a) * w2.density(b);
        let d21 = w1.density(b) * w2.density(a);
        let envelope = d12 + d21;
        let cross = 2.0 * coherence * (d12 * d21).sqrt() * (delta * (a - b)).cos();
        let target = envelope + sign * cross;
        if rng.random::<f64>() * 2.0 * envelope < target {
            return (a, b);
        }
    }
}

/// Outcome of two photons meeting at the beamsplitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomOutcome {
    /// Output port (1 or 2) of each detected time.
    pub ports: [u8; 2],
    pub times_ps: [f64; 2],
    pub overlap: f64,
}

impl HomOutcome {
    pub fn is_coincidence(&self) -> bool {
        self.ports[0] != self.ports[1]
    }
}

/// Squared overlap of two photons including polarization mismatch and arrival delay.
/// Companions never interfere.
pub fn shot_overlap(p1: &PhotonRecord, p2: &PhotonRecord) -> Result<f64> {
    if p1.is_companion || p2.is_companion {
        return Ok(0.0);
    }
    let pol = (p1.pol_angle_rad - p2.pol_angle_rad).cos().powi(2);
    let delay = p2.arrival_ps() - p1.arrival_ps();
    let early = if delay >= 0.0 {
        p1.gamma_rad
    } else {
        p2.gamma_rad
    };
    let base = overlap_chirped(
        p1.gamma_rad,
        p1.freq_offset,
        p1.quad_phase_ps2,
        p2.gamma_rad,
        p2.freq_offset,
        p2.quad_phase_ps2,
    )? * (-early * delay.abs()).exp();
    Ok(base * pol)
}

/// Samples the beamsplitter output for two photons: a coincidence (one photon per port)
/// with probability (1−O)/2, bunching otherwise. Returns `None` unless both are alive.
pub fn hom_sample_pair<R: Rng + ?Sized>(
    p1: &PhotonRecord,
    p2: &PhotonRecord,
    rng: &mut R,
) -> Result<Option<HomOutcome>> {
    if !(p1.alive && p2.alive) {
        return Ok(None);
    }
    let overlap = shot_overlap(p1, p2)?;
    let coherence = if p1.is_companion || p2.is_companion {
        0.0
    } else {
        (p1.pol_angle_rad - p2.pol_angle_rad).cos().powi(2)
    };
    let (w1, w2) = (Wavepacket::from_photon(p1), Wavepacket::from_photon(p2));
    let cross = rng.random::<f64>() < 0.5 * (1.0 - overlap);
    let (a, b) = sample_pair_times(&w1, &w2, coherence, cross, rng);
    let ports = if cross {
        [1, 2]
    } else if rng.random::<bool>() {
        [1, 1]
    } else {
        [2, 2]
    };
    Ok(Some(HomOutcome {
        ports,
        times_ps: [a, b],
        overlap,
    }))
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean)
        .map(|p| p.sample(rng) as u64)
        .unwrap_or(0)
}

/// Applies detection efficiency and timing jitter to arrivals and adds dark clicks in the
/// gate that opens at `pulse_time_ps + gate_offset_ps`.
pub fn apply_detector<R: Rng + ?Sized>(
    arrivals: &[Arrival],
    det: &DetectorParams,
    pulse_time_ps: f64,
    rng: &mut R,
) -> Vec<ClickRecord> {
    let sigma = det.jitter_sigma_ps();
    let jitter = (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("finite sigma"));
    let mut clicks = Vec::with_capacity(arrivals.len());
    for a in arrivals {
        if rng.random::<f64>() >= det.efficiency {
            continue;
        }
        let dt = jitter.map_or(0.0, |j| j.sample(rng));
        clicks.push(ClickRecord {
            detector: a.detector,
            timestamp_ps: a.time_ps + dt,
            origin: a.origin,
        });
    }
    let gate_start = pulse_time_ps + det.gate_offset_ps;
    for detector in [1u8, 2] {
        for _ in 0..poisson(det.dark_mean_per_gate(), rng) {
            clicks.push(ClickRecord {
                detector,
                timestamp_ps: gate_start + rng.random::<f64>() * det.gate_window_ps,
                origin: ClickOrigin::Dark,
            });
        }
    }
    clicks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{RngStreamSpec, Stage};

    fn photon(gamma: f64, offset: f64) -> PhotonRecord {
        PhotonRecord {
            source_id: 1,
            pulse_index: 0,
            nominal_emit_time_ps: 0.0,
            freq_offset: offset,
            pol_angle_rad: 0.0,
            quad_phase_ps2: 0.0,
            extra_delay_ps: 0.0,
            gamma_rad: gamma,
            wavelength_nm: 1582.75,
            is_companion: false,
            alive: true,
        }
    }

    #[test]
    fn identical_photons_always_bunch() {
        let p = photon(1.0 / 78.0, 0.0);
        let mut rng = RngStreamSpec::new(1, 2, 3, Stage::Interference).rng();
        for _ in 0..10_000 {
            let o = hom_sample_pair(&p, &p, &mut rng).unwrap().unwrap();
            assert!(!o.is_coincidence());
        }
    }

    #[test]
    fn orthogonal_photons_split_half_the_time() {
        let p1 = photon(1.0 / 78.0, 0.0);
        let mut p2 = photon(1.0 / 78.0, 0.0);
        p2.pol_angle_rad = std::f64::consts::FRAC_PI_2;
        let mut rng = RngStreamSpec::new(1, 2, 3, Stage::Interference).rng();
        let n = 200_000;
        let hits = (0..n)
            .filter(|_| {
                hom_sample_pair(&p1, &p2, &mut rng)
                    .unwrap()
                    .unwrap()
                    .is_coincidence()
            })
            .count() as f64;
        let p = hits / n as f64;
        assert!(
            (p - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt() + 1e-9,
            "{p}"
        );
    }

    #[test]
    fn dead_photon_gives_nothing() {
        let p1 = photon(0.01, 0.0);
        let mut p2 = photon(0.01, 0.0);
        p2.alive = false;
        let mut rng = RngStreamSpec::new(1, 2, 3, Stage::Interference).rng();
        assert!(hom_sample_pair(&p1, &p2, &mut rng).unwrap().is_none());
    }

    #[test]
    fn ideal_detector_is_identity() {
        let det = DetectorParams {
            efficiency: 1.0,
            jitter_fwhm_ps: 0.0,
            dark_rate_hz: 0.0,
            ..DetectorParams::default()
        };
        let arrivals = [
            Arrival {
                detector: 1,
                time_ps: 12.0,
                origin: ClickOrigin::Signal,
            },
            Arrival {
                detector: 2,
                time_ps: -3.0,
                origin: ClickOrigin::Noise,
            },
        ];
        let mut rng = RngStreamSpec::new(1, 2, 3, Stage::Detection).rng();
        let clicks = apply_detector(&arrivals, &det, 0.0, &mut rng);
        assert_eq!(clicks.len(), 2);
        for (c, a) in clicks.iter().zip(&arrivals) {
            assert_eq!(
                (c.detector, c.timestamp_ps, c.origin),
                (a.detector, a.time_ps, a.origin)
            );
        }
    }

    #[test]
    fn dark_probability_per_gate() {
        let det = DetectorParams {
            gate_window_ps: 1000.0,
            ..DetectorParams::default()
        };
        assert!((det.dark_mean_per_gate() - 3e-7).abs() < 1e-20);
    }
}
