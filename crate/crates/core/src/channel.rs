//! Fiber propagation: attenuation, dispersion as spectral phase, polarization and delay drift.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::photon::PhotonRecord;
use crate::units::SPEED_OF_LIGHT_NM_PER_PS;

/// Walk scale that gives a 10% mean projection loss with hourly realignment.
pub const DEFAULT_POL_DRIFT_RAD_PER_SQRT_HR: f64 = 0.481_774_197;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiberParams {
    pub length_km: f64,
    pub loss_db_per_km: f64,
    pub dispersion_ps_nm_km: f64,
    pub pol_drift_rad_per_sqrt_hr: f64,
    pub time_drift_ps_per_hr: f64,
    pub temp_stability_k: f64,
    /// Polarization is re-aligned to the receiver axis this often.
    pub pol_realign_interval_hr: f64,
    /// Arrival-time drift is re-zeroed this often.
    pub delay_resync_interval_hr: f64,
}

impl Default for FiberParams {
    fn default() -> Self {
        Self {
            length_km: 0.0,
            loss_db_per_km: 0.19,
            dispersion_ps_nm_km: 18.0,
            pol_drift_rad_per_sqrt_hr: DEFAULT_POL_DRIFT_RAD_PER_SQRT_HR,
            time_drift_ps_per_hr: 10.0,
            temp_stability_k: 0.1,
            pol_realign_interval_hr: 1.0,
            delay_resync_interval_hr: 1.0 / 60.0,
        }
    }
}

impl FiberParams {
    pub fn with_length(length_km: f64) -> Self {
        Self {
            length_km,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("length_km", self.length_km),
            ("loss_db_per_km", self.loss_db_per_km),
            ("dispersion_ps_nm_km", self.dispersion_ps_nm_km),
            ("pol_drift_rad_per_sqrt_hr", self.pol_drift_rad_per_sqrt_hr),
            ("time_drift_ps_per_hr", self.time_drift_ps_per_hr),
            ("temp_stability_k", self.temp_stability_k),
        ];
        for (name, v) in fields {
            ensure(v >= 0.0 && v.is_finite(), name, v, "finite and >= 0")?;
        }
        ensure(
            self.pol_realign_interval_hr > 0.0,
            "pol_realign_interval_hr",
            self.pol_realign_interval_hr,
            "> 0",
        )?;
        ensure(
            self.delay_resync_interval_hr > 0.0,
            "delay_resync_interval_hr",
            self.delay_resync_interval_hr,
            "> 0",
        )
    }

    pub fn transmission(&self) -> f64 {
        transmission_probability(self.length_km, self.loss_db_per_km)
    }

    /// Accumulated β₂·L at `wavelength_nm` (ps²).
    pub fn quad_phase(&self, wavelength_nm: f64) -> f64 {
        beta2_from_dispersion(self.dispersion_ps_nm_km, wavelength_nm) * self.length_km
    }
}

pub fn transmission_probability(length_km: f64, loss_db_per_km: f64) -> f64 {
    10f64.powf(-loss_db_per_km * length_km / 10.0)
}

/// Group-velocity dispersion β₂ (ps²/km) from the dispersion parameter D (ps/nm/km).
pub fn beta2_from_dispersion(d_ps_nm_km: f64, wavelength_nm: f64) -> f64 {
    -d_ps_nm_km * wavelength_nm * wavelength_nm / (2.0 * PI * SPEED_OF_LIGHT_NM_PER_PS)
}

/// Spread in group delay across the Lorentzian FWHM 1/(π·T2) of a photon (ps).
pub fn group_delay_spread(
    coherence_time_ps: f64,
    wavelength_nm: f64,
    fiber: &FiberParams,
) -> Result<f64> {
    ensure(
        coherence_time_ps > 0.0,
        "coherence_time_ps",
        coherence_time_ps,
        "coherence_time_ps > 0",
    )?;
    ensure(
        wavelength_nm > 0.0,
        "wavelength_nm",
        wavelength_nm,
        "wavelength_nm > 0",
    )?;
    let dnu = 1.0 / (PI * coherence_time_ps);
    let dlambda = wavelength_nm * wavelength_nm / SPEED_OF_LIGHT_NM_PER_PS * dnu;
    Ok(fiber.dispersion_ps_nm_km * fiber.length_km * dlambda)
}

/// Dispersion parameter that reproduces a measured delay spread.
pub fn fit_effective_dispersion(
    coherence_time_ps: f64,
    wavelength_nm: f64,
    length_km: f64,
    spread_ps: f64,
) -> Result<f64> {
    ensure(length_km > 0.0, "length_km", length_km, "length_km > 0")?;
    let unit = FiberParams {
        length_km,
        dispersion_ps_nm_km: 1.0,
        ..FiberParams::default()
    };
    Ok(spread_ps / group_delay_spread(coherence_time_ps, wavelength_nm, &unit)?)
}

/// Mean projection loss sin²θ of a Gaussian angle walk with variance σ²·t, averaged over a
/// realignment interval `interval_hr`.
pub fn mean_polarization_loss(sigma_rad_per_sqrt_hr: f64, interval_hr: f64) -> f64 {
    let x = 2.0 * sigma_rad_per_sqrt_hr * sigma_rad_per_sqrt_hr * interval_hr;
    if x < 1e-8 {
        return 0.25 * x;
    }
    0.5 * (1.0 - (-x).exp_m1() / -x)
}

/// Walk scale giving `target_loss` mean projection loss over `interval_hr`.
pub fn calibrate_pol_walk(target_loss: f64, interval_hr: f64) -> Result<f64> {
    if !(target_loss > 0.0 && target_loss < 0.5) {
        return Err(Error::NoSolution(format!(
            "mean projection loss {target_loss} is outside (0, 0.5)"
        )));
    }
    ensure(
        interval_hr > 0.0,
        "interval_hr",
        interval_hr,
        "interval_hr > 0",
    )?;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while mean_polarization_loss(hi, interval_hr) < target_loss {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_polarization_loss(mid, interval_hr) < target_loss {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Slowly varying channel condition, frozen within one batch of trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelState {
    /// Polarization rotation relative to the receiver axis (rad, in [0, π)).
    pub pol_angle_rad: f64,
    pub delay_ps: f64,
}

impl ChannelState {
    pub const IDENTITY: ChannelState = ChannelState {
        pol_angle_rad: 0.0,
        delay_ps: 0.0,
    };

    /// Draws the channel condition at wall-clock time `elapsed_hr` since the start.
    pub fn sample<R: Rng + ?Sized>(fiber: &FiberParams, elapsed_hr: f64, rng: &mut R) -> Self {
        let since_align = elapsed_hr.rem_euclid(fiber.pol_realign_interval_hr);
        let sd = fiber.pol_drift_rad_per_sqrt_hr * since_align.sqrt();
        let angle = if sd > 0.0 {
            Normal::new(0.0, sd).expect("finite sd").sample(rng)
        } else {
            0.0
        };
        let since_sync = elapsed_hr.rem_euclid(fiber.delay_resync_interval_hr);
        let bound = fiber.time_drift_ps_per_hr * since_sync;
        let delay = if bound > 0.0 {
            rng.random_range(-bound..=bound)
        } else {
            0.0
        };
        Self {
            pol_angle_rad: angle.rem_euclid(PI),
            delay_ps: delay,
        }
    }

    /// Probability that a photon aligned with the reference axis passes the exit polarizer.
    pub fn pol_pass_probability(&self) -> f64 {
        self.pol_angle_rad.cos().powi(2)
    }
}

/// Propagates a photon under a given channel condition.
pub fn apply_channel_state<R: Rng + ?Sized>(
    photon: &PhotonRecord,
    fiber: &FiberParams,
    state: &ChannelState,
    rng: &mut R,
) -> PhotonRecord {
    let mut out = photon.clone();
    if !out.alive {
        return out;
    }
    if fiber.length_km == 0.0 && *state == ChannelState::IDENTITY {
        return out;
    }
    out.alive = rng.random::<f64>() < fiber.transmission();
    out.quad_phase_ps2 += fiber.quad_phase(photon.wavelength_nm);
    out.extra_delay_ps += state.delay_ps;
    let angle = (photon.pol_angle_rad + state.pol_angle_rad).rem_euclid(PI);
    if out.alive {
        out.alive = rng.random::<f64>() >= angle.sin().powi(2);
    }
    out.pol_angle_rad = if out.alive { 0.0 } else { angle };
    out
}

pub fn apply_channel<R: Rng + ?Sized>(
    photon: &PhotonRecord,
    fiber: &FiberParams,
    elapsed_hr: f64,
    rng: &mut R,
) -> PhotonRecord {
    let state = ChannelState::sample(fiber, elapsed_hr, rng);
    apply_channel_state(photon, fiber, &state, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{RngStreamSpec, Stage};

    #[test]
    fn loss_examples() {
        let t = transmission_probability(300.0, 0.19);
        assert!((-10.0 * t.log10() - 57.0).abs() < 1e-12);
        assert!((t - 1.995_262e-6).abs() < 1e-12);
        assert_eq!(transmission_probability(0.0, 0.19), 1.0);
        assert!((transmission_probability(151.0, 0.19) - 1.352_072_56e-3).abs() < 1e-11);
    }

    #[test]
    fn beta2_examples() {
        assert!((beta2_from_dispersion(18.0, 1582.75) + 23.938_48).abs() < 1e-4);
        assert!((beta2_from_dispersion(17.0, 1582.75) + 22.608_56).abs() < 1e-4);
        assert_eq!(beta2_from_dispersion(0.0, 1582.75), 0.0);
    }

    #[test]
    fn delay_spreads() {
        let f = FiberParams::with_length(151.0);
        let qd1 = group_delay_spread(126.0, 1582.75, &f).unwrap();
        assert!((qd1 - 57.38).abs() < 0.05, "{qd1}");
        assert_eq!(
            group_delay_spread(126.0, 1582.75, &FiberParams::default()).unwrap(),
            0.0
        );
        let d_eff = fit_effective_dispersion(126.0, 1582.75, 151.0, 66.5).unwrap();
        assert!((d_eff - 20.86).abs() < 0.01, "{d_eff}");
        let refit = FiberParams {
            dispersion_ps_nm_km: d_eff,
            ..f
        };
        assert!((group_delay_spread(126.0, 1582.75, &refit).unwrap() - 66.5).abs() < 1e-9);
    }

    #[test]
    fn pol_walk_calibration() {
        let sigma = calibrate_pol_walk(0.10, 1.0).unwrap();
        assert!(
            (sigma - DEFAULT_POL_DRIFT_RAD_PER_SQRT_HR).abs() < 1e-6,
            "{sigma}"
        );
        assert!(
            (mean_polarization_loss(DEFAULT_POL_DRIFT_RAD_PER_SQRT_HR, 1.0) - 0.1).abs() < 1e-7
        );
        assert!(calibrate_pol_walk(0.6, 1.0).is_err());
    }

    #[test]
    fn zero_length_is_identity() {
        let p = PhotonRecord {
            source_id: 1,
            pulse_index: 3,
            nominal_emit_time_ps: 1.0,
            freq_offset: 0.01,
            pol_angle_rad: 0.0,
            quad_phase_ps2: 0.0,
            extra_delay_ps: 0.0,
            gamma_rad: 0.01,
            wavelength_nm: 1582.75,
            is_companion: false,
            alive: true,
        };
        let fiber = FiberParams::default();
        let mut rng = RngStreamSpec::new(0, 0, 0, Stage::Channel).rng();
        assert_eq!(apply_channel(&p, &fiber, 0.0, &mut rng), p);
    }

    #[test]
    fn drift_stays_bounded() {
        let fiber = FiberParams {
            delay_resync_interval_hr: 10.0,
            ..FiberParams::with_length(50.0)
        };
        let mut rng = RngStreamSpec::new(0, 0, 0, Stage::Channel).rng();
        for i in 0..1000 {
            let t = i as f64 * 1e-3;
            let s = ChannelState::sample(&fiber, t, &mut rng);
            assert!(s.delay_ps.abs() <= fiber.time_drift_ps_per_hr * t + 1e-12);
            assert!((0.0..PI).contains(&s.pol_angle_rad));
        }
    }
}
