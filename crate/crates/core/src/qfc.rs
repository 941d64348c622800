//! Difference-frequency conversion: pump solving, fine tuning, efficiency and Raman noise.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::photon::PhotonRecord;
use crate::units::{linear_to_db, SPEED_OF_LIGHT_NM_PER_PS};

/// Converted telecom wavelength shared by both arms.
pub const TARGET_WAVELENGTH_NM: f64 = 1582.75;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QfcParams {
    pub eta_max: f64,
    pub p_max_mw: f64,
    /// Noise photon rate inside the final filter band per mW of pump (Hz/mW).
    pub raman_coeff: f64,
    pub pump_wavelength_nm: f64,
    /// Operating pump power (mW).
    pub pump_mw: f64,
    pub pzt_step_pm: f64,
    pub filter_band_ghz: f64,
}

impl QfcParams {
    /// Converter for the micropillar source, calibrated to 29.8 dB at 271 mW.
    pub fn qfc1() -> Self {
        let mut q = Self {
            eta_max: 0.48,
            p_max_mw: 271.0,
            raman_coeff: 0.0,
            pump_wavelength_nm: 2049.98,
            pump_mw: 271.0,
            pzt_step_pm: 0.03,
            filter_band_ghz: 12.5,
        };
        q.raman_coeff = calibrate_raman_coeff(&q, 20.2e6, q.p_max_mw, 29.8)
            .expect("preset calibration point is valid");
        q
    }

    /// Converter for the bullseye source, calibrated to 28.5 dB at 461 mW.
    pub fn qfc2() -> Self {
        let mut q = Self {
            eta_max: 0.52,
            p_max_mw: 461.0,
            raman_coeff: 0.0,
            pump_wavelength_nm: 2043.46,
            pump_mw: 461.0,
            pzt_step_pm: 0.03,
            filter_band_ghz: 12.5,
        };
        q.raman_coeff = calibrate_raman_coeff(&q, 16.2e6, q.p_max_mw, 28.5)
            .expect("preset calibration point is valid");
        q
    }

    pub fn validate(&self) -> Result<()> {
        ensure(
            self.eta_max > 0.0 && self.eta_max <= 1.0,
            "eta_max",
            self.eta_max,
            "0 < eta_max <= 1",
        )?;
        ensure(
            self.p_max_mw > 0.0,
            "p_max_mw",
            self.p_max_mw,
            "p_max_mw > 0",
        )?;
        ensure(
            self.raman_coeff >= 0.0 && self.raman_coeff.is_finite(),
            "raman_coeff",
            self.raman_coeff,
            "raman_coeff >= 0",
        )?;
        ensure(self.pump_mw >= 0.0, "pump_mw", self.pump_mw, "pump_mw >= 0")?;
        ensure(
            self.pump_wavelength_nm > 0.0,
            "pump_wavelength_nm",
            self.pump_wavelength_nm,
            "pump_wavelength_nm > 0",
        )?;
        ensure(
            self.pzt_step_pm >= 0.0,
            "pzt_step_pm",
            self.pzt_step_pm,
            "pzt_step_pm >= 0",
        )?;
        ensure(
            self.filter_band_ghz > 0.0,
            "filter_band_ghz",
            self.filter_band_ghz,
            "filter_band_ghz > 0",
        )
    }

    /// Noise photon rate at the operating pump power (Hz).
    pub fn noise_rate_hz(&self) -> f64 {
        self.raman_coeff * self.pump_mw
    }
}

/// Pump wavelength that maps `signal_nm` onto `target_nm`.
pub fn solve_pump_wavelength(signal_nm: f64, target_nm: f64) -> Result<f64> {
    if !(signal_nm > 0.0 && signal_nm < target_nm && target_nm.is_finite()) {
        return Err(Error::NoSolution(format!(
            "down-conversion needs 0 < signal ({signal_nm} nm) < target ({target_nm} nm)"
        )));
    }
    Ok(signal_nm * target_nm / (target_nm - signal_nm))
}

pub fn converted_wavelength(signal_nm: f64, pump_nm: f64) -> Result<f64> {
    ensure(signal_nm > 0.0, "signal_nm", signal_nm, "signal_nm > 0")?;
    ensure(
        pump_nm > signal_nm,
        "pump_nm",
        pump_nm,
        &format!("pump_nm > signal_nm = {signal_nm}"),
    )?;
    Ok(signal_nm * pump_nm / (pump_nm - signal_nm))
}

/// Optical frequency change (MHz) for a wavelength step of `delta_lambda_pm`.
pub fn pzt_frequency_step(delta_lambda_pm: f64, at_wavelength_nm: f64) -> Result<f64> {
    ensure(
        at_wavelength_nm > 0.0,
        "at_wavelength_nm",
        at_wavelength_nm,
        "at_wavelength_nm > 0",
    )?;
    let dl_nm = delta_lambda_pm * 1e-3;
    // nm/ps / nm -> 1/ps = THz; THz -> MHz.
    Ok(SPEED_OF_LIGHT_NM_PER_PS * dl_nm / (at_wavelength_nm * at_wavelength_nm) * 1e6)
}

/// End-to-end efficiency at pump power `pump_mw`; rolls off past `p_max_mw`.
pub fn conversion_efficiency(pump_mw: f64, qfc: &QfcParams) -> Result<f64> {
    ensure(
        pump_mw >= 0.0 && pump_mw.is_finite(),
        "pump_mw",
        pump_mw,
        "pump_mw >= 0",
    )?;
    let s = (FRAC_PI_2 * (pump_mw / qfc.p_max_mw).sqrt()).sin();
    Ok(qfc.eta_max * s * s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "db")]
pub enum SnrDb {
    Finite(f64),
    /// No noise at all; the ratio is unbounded.
    Infinite,
}

impl SnrDb {
    pub fn value(self) -> f64 {
        match self {
            SnrDb::Finite(v) => v,
            SnrDb::Infinite => f64::INFINITY,
        }
    }
}

/// Converted signal rate over Raman noise rate.
pub fn conversion_snr(pump_mw: f64, signal_rate_hz: f64, qfc: &QfcParams) -> Result<SnrDb> {
    ensure(
        signal_rate_hz > 0.0,
        "signal_rate_hz",
        signal_rate_hz,
        "signal_rate_hz > 0",
    )?;
    let eta = conversion_efficiency(pump_mw, qfc)?;
    let noise = qfc.raman_coeff * pump_mw;
    if noise == 0.0 {
        return Ok(SnrDb::Infinite);
    }
    Ok(SnrDb::Finite(linear_to_db(signal_rate_hz * eta / noise)))
}

/// Raman coefficient that yields `snr_db` for `signal_rate_hz` at `pump_mw`.
pub fn calibrate_raman_coeff(
    qfc: &QfcParams,
    signal_rate_hz: f64,
    pump_mw: f64,
    snr_db: f64,
) -> Result<f64> {
    ensure(pump_mw > 0.0, "pump_mw", pump_mw, "pump_mw > 0")?;
    ensure(
        signal_rate_hz > 0.0,
        "signal_rate_hz",
        signal_rate_hz,
        "signal_rate_hz > 0",
    )?;
    let eta = conversion_efficiency(pump_mw, qfc)?;
    Ok(signal_rate_hz * eta / (pump_mw * 10f64.powf(snr_db / 10.0)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConversionOutput {
    pub photon: PhotonRecord,
    /// Noise photon emission times within the pulse period (ps, relative to the pulse).
    pub noise_arrivals_ps: Vec<f64>,
}

/// Converts one photon. Survivors keep their carrier offset, linewidth, polarization and
/// timing; only the wavelength changes.
pub fn apply_conversion<R: Rng + ?Sized>(
    photon: &PhotonRecord,
    qfc: &QfcParams,
    pump_mw: f64,
    period_ps: f64,
    rng: &mut R,
) -> Result<ConversionOutput> {
    let eta = conversion_efficiency(pump_mw, qfc)?;
    let mut out = photon.clone();
    if out.alive {
        out.alive = rng.random::<f64>() < eta;
        out.wavelength_nm = converted_wavelength(photon.wavelength_nm, qfc.pump_wavelength_nm)?;
    }
    let mean = qfc.raman_coeff * pump_mw * period_ps * 1e-12;
    let n = if mean > 0.0 {
        Poisson::new(mean)
            .map(|p| p.sample(rng) as usize)
            .unwrap_or(0)
    } else {
        0
    };
    let noise_arrivals_ps = (0..n).map(|_| rng.random::<f64>() * period_ps).collect();
    Ok(ConversionOutput {
        photon: out,
        noise_arrivals_ps,
    })
}
