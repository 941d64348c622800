//! Unit conventions and the conversions used at configuration boundaries.
//!
//! Internally rates are in 1/ps, times in ps and angular frequencies in rad/ps.

use std::f64::consts::PI;

pub const SPEED_OF_LIGHT_M_PER_S: f64 = 299_792_458.0;

/// Speed of light in nm/ps.
pub const SPEED_OF_LIGHT_NM_PER_PS: f64 = SPEED_OF_LIGHT_M_PER_S * 1e-3;

pub const PS_PER_S: f64 = 1e12;

pub fn ghz_to_rad_per_ps(ghz: f64) -> f64 {
    2.0 * PI * ghz * 1e-3
}

pub fn rad_per_ps_to_ghz(omega: f64) -> f64 {
    omega / (2.0 * PI) * 1e3
}

pub fn hz_to_per_ps(hz: f64) -> f64 {
    hz / PS_PER_S
}

/// Pulse period in ps for a repetition rate in Hz.
pub fn period_ps(rep_rate_hz: f64) -> f64 {
    PS_PER_S / rep_rate_hz
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Optical frequency in THz for a vacuum wavelength in nm.
pub fn wavelength_to_thz(nm: f64) -> f64 {
    SPEED_OF_LIGHT_NM_PER_PS / nm
}
