//! Time-resolved coincidence density for two dephased exponential sources, convolved with
//! detector jitter and integrated over a coincidence window.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::FWHM_PER_SIGMA;
use crate::error::{ensure, Result};
use crate::model::{decompose_dephasing, EmitterParams};
use crate::quad::{integrate, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowedOracle {
    pub gamma1: f64,
    pub gamma2: f64,
    /// Summed Cauchy half-widths of both sources' carrier offsets (1/ps).
    pub offset_width: f64,
    /// Jitter of each detector (FWHM, ps).
    pub jitter_fwhm_ps: f64,
}

impl WindowedOracle {
    pub fn from_emitters(
        e1: &EmitterParams,
        e2: &EmitterParams,
        jitter_fwhm_ps: f64,
    ) -> Result<Self> {
        let d1 = decompose_dephasing(e1)?;
        let d2 = decompose_dephasing(e2)?;
        Ok(Self {
            gamma1: d1.gamma_rad,
            gamma2: d2.gamma_rad,
            offset_width: d1.offset_width() + d2.offset_width(),
            jitter_fwhm_ps,
        })
    }

    fn tau_sigma(&self) -> f64 {
        SQRT_2 * self.jitter_fwhm_ps / FWHM_PER_SIGMA
    }

    fn exp_difference(&self, tau: f64) -> f64 {
        let (g1, g2) = (self.gamma1, self.gamma2);
        let k = g1 * g2 / (g1 + g2);
        if tau >= 0.0 {
            k * (-g1 * tau).exp()
        } else {
            k * (g2 * tau).exp()
        }
    }

    /// Density of cross-port coincidences at detector time difference `tau` before jitter.
    /// `detuning` is `None` for orthogonally polarized photons.
    pub fn coincidence_density(&self, tau: f64, detuning: Option<f64>) -> f64 {
        let base = 0.25 * (self.exp_difference(tau) + self.exp_difference(-tau));
        let Some(delta) = detuning else {
            return base;
        };
        let a = 0.5 * (self.gamma1 + self.gamma2);
        let interference = 0.25 * self.gamma1 * self.gamma2 / a
            * (-(a + self.offset_width) * tau.abs()).exp()
            * (delta * tau).cos();
        base - interference
    }

    /// Probability that a true difference `s` is recorded inside |τ| ≤ window/2.
    fn acceptance(&self, s: f64, window_ps: f64) -> f64 {
        let half = 0.5 * window_ps;
        let sigma = self.tau_sigma();
        if sigma == 0.0 {
            return if s.abs() <= half { 1.0 } else { 0.0 };
        }
        let phi = |x: f64| 0.5 * erfc(-x / SQRT_2);
        if s >= 0.0 {
            phi((half - s) / sigma) - phi((-half - s) / sigma)
        } else {
            phi((half + s) / sigma) - phi((-half + s) / sigma)
        }
    }

    /// Coincidence probability per pair inside a window of full width `window_ps`.
    pub fn window_probability(&self, window_ps: f64, detuning: Option<f64>) -> Result<f64> {
        ensure(window_ps > 0.0, "window_ps", window_ps, "window_ps > 0")?;
        let slowest = self.gamma1.min(self.gamma2);
        let sigma = self.tau_sigma();
        let reach = (0.5 * window_ps + 12.0 * sigma).min(60.0 / slowest);
        let opts = QuadOptions {
            initial_panels: 32,
            abs_tol: 1e-13,
            max_intervals: 100_000,
        };
        let f = |t: f64| self.coincidence_density(t, detuning) * self.acceptance(t, window_ps);
        let pos = integrate(f, 0.0, reach, &opts)?.value;
        let neg = integrate(f, -reach, 0.0, &opts)?.value;
        Ok(pos + neg)
    }

    /// Windowed visibility against a reference run (`reference_detuning` as in
    /// [`coincidence_density`](Self::coincidence_density)).
    pub fn windowed_visibility(
        &self,
        window_ps: f64,
        detuning: f64,
        reference_detuning: Option<f64>,
    ) -> Result<f64> {
        let res = self.window_probability(window_ps, Some(detuning))?;
        let reference = self.window_probability(window_ps, reference_detuning)?;
        Ok(1.0 - res / reference)
    }
}
