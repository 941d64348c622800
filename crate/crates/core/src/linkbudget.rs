//! Analytic two-photon coincidence rate and accidental-limited SNR versus fiber length.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::qfc::SnrDb;
use crate::units::linear_to_db;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioParams {
    pub label: String,
    pub rep_rate_hz: f64,
    pub eta_sys: f64,
    pub eta_det: f64,
    pub eta_qfc: f64,
    pub loss_db_per_km: f64,
    pub dark_rate_hz: f64,
    pub coincidence_window_ps: f64,
    /// Calibration factor on the per-arm efficiency product.
    pub kappa_sys: f64,
}

/// Length and rate of the improved-scenario projection point.
pub const PROJECTION_LENGTH_KM: f64 = 600.0;
pub const PROJECTION_RATE_HZ: f64 = 0.012;
pub const PROJECTION_SNR_DB: f64 = 10.0;

impl ScenarioParams {
    /// Parameters of the demonstrated link.
    pub fn current() -> Self {
        Self {
            label: "current".into(),
            rep_rate_hz: 80e6,
            eta_sys: 0.2,
            eta_det: 0.76,
            eta_qfc: 0.5,
            loss_db_per_km: 0.19,
            dark_rate_hz: 300.0,
            coincidence_window_ps: 100.0,
            kappa_sys: 1.0,
        }
    }

    /// Feasibly improved link: faster excitation, brighter sources, lower-loss fiber.
    pub fn improved() -> Self {
        Self {
            label: "improved".into(),
            rep_rate_hz: 2.6e9,
            eta_sys: 0.8,
            loss_db_per_km: 0.16,
            ..Self::current()
        }
    }

    /// Both presets with κ fitted to the projected rate and τ_w to the projected SNR.
    pub fn calibrated_pair() -> Result<(Self, Self)> {
        let mut improved = Self::improved();
        improved.kappa_sys = calibrate_kappa(&improved, PROJECTION_LENGTH_KM, PROJECTION_RATE_HZ)?;
        improved.coincidence_window_ps =
            calibrate_window_for_snr(&improved, PROJECTION_LENGTH_KM, PROJECTION_SNR_DB)?;
        let current = Self {
            kappa_sys: improved.kappa_sys,
            coincidence_window_ps: improved.coincidence_window_ps,
            ..Self::current()
        };
        Ok((current, improved))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eta_sys", self.eta_sys),
            ("eta_det", self.eta_det),
            ("eta_qfc", self.eta_qfc),
        ] {
            ensure(v > 0.0 && v <= 1.0, name, v, "0 < value <= 1")?;
        }
        for (name, v) in [
            ("rep_rate_hz", self.rep_rate_hz),
            ("coincidence_window_ps", self.coincidence_window_ps),
            ("kappa_sys", self.kappa_sys),
        ] {
            ensure(v > 0.0 && v.is_finite(), name, v, "value > 0")?;
        }
        ensure(
            self.loss_db_per_km >= 0.0,
            "loss_db_per_km",
            self.loss_db_per_km,
            "loss_db_per_km >= 0",
        )?;
        ensure(
            self.dark_rate_hz >= 0.0,
            "dark_rate_hz",
            self.dark_rate_hz,
            "dark_rate_hz >= 0",
        )
    }

    /// Click probability per pulse in one arm of a symmetric link of total length `l`.
    pub fn arm_probability(&self, total_length_km: f64) -> f64 {
        self.kappa_sys
            * self.eta_sys
            * self.eta_qfc
            * self.eta_det
            * 10f64.powf(-self.loss_db_per_km * 0.5 * total_length_km / 10.0)
    }

    /// Dark-click probability per detector per coincidence window.
    pub fn dark_probability(&self) -> f64 {
        self.dark_rate_hz * self.coincidence_window_ps * 1e-12
    }
}

fn check_length(total_length_km: f64) -> Result<()> {
    ensure(
        total_length_km >= 0.0 && total_length_km.is_finite(),
        "total_length_km",
        total_length_km,
        "total_length_km >= 0",
    )
}

/// Two-photon coincidence rate for distinguishable photons (Hz).
pub fn coincidence_rate(total_length_km: f64, s: &ScenarioParams) -> Result<f64> {
    check_length(total_length_km)?;
    s.validate()?;
    let p = s.arm_probability(total_length_km);
    Ok(0.5 * s.rep_rate_hz * p * p)
}

/// Accidental coincidence rate from signal-dark and dark-dark pairs (Hz).
pub fn accidental_rate(total_length_km: f64, s: &ScenarioParams) -> Result<f64> {
    check_length(total_length_km)?;
    s.validate()?;
    let p = s.arm_probability(total_length_km);
    let q = s.dark_probability();
    Ok(0.5 * s.rep_rate_hz * (2.0 * p * q + q * q))
}

pub fn snr_db(total_length_km: f64, s: &ScenarioParams) -> Result<SnrDb> {
    let acc = accidental_rate(total_length_km, s)?;
    if acc == 0.0 {
        return Ok(SnrDb::Infinite);
    }
    Ok(SnrDb::Finite(linear_to_db(
        coincidence_rate(total_length_km, s)? / acc,
    )))
}

/// κ that makes the coincidence rate equal `rate_hz` at `total_length_km`.
pub fn calibrate_kappa(s: &ScenarioParams, total_length_km: f64, rate_hz: f64) -> Result<f64> {
    ensure(rate_hz > 0.0, "rate_hz", rate_hz, "rate_hz > 0")?;
    let unit = ScenarioParams {
        kappa_sys: 1.0,
        ..s.clone()
    };
    let r1 = coincidence_rate(total_length_km, &unit)?;
    Ok((rate_hz / r1).sqrt())
}

/// Coincidence window at which the SNR equals `target_db` at `total_length_km`.
pub fn calibrate_window_for_snr(
    s: &ScenarioParams,
    total_length_km: f64,
    target_db: f64,
) -> Result<f64> {
    s.validate()?;
    if s.dark_rate_hz == 0.0 {
        return Err(Error::NoSolution(
            "no dark counts, the SNR is unbounded".into(),
        ));
    }
    let p = s.arm_probability(total_length_km);
    let r = 10f64.powf(target_db / 10.0);
    // q² + 2pq − p²/r = 0.
    let q = p * ((1.0 + 1.0 / r).sqrt() - 1.0);
    Ok(q / s.dark_rate_hz * 1e12)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub length_km: f64,
    pub rate_hz: f64,
    pub snr_db: f64,
    pub scenario: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub scenario: String,
    pub target_db: f64,
    /// `None` when the SNR does not cross the target inside the grid.
    pub length_km: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<CurveRow>,
    pub crossings: Vec<Crossing>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("length_km,rate_hz,snr_db,scenario\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:e},{},{}\n",
                r.length_km, r.rate_hz, r.snr_db, r.scenario
            ));
        }
        s
    }
}

/// Evaluates every scenario on `lengths` and bisects for the length where the SNR falls
/// through `target_db`.
pub fn sweep_curves(
    lengths: &[f64],
    scenarios: &[ScenarioParams],
    target_db: f64,
) -> Result<SweepTable> {
    let mut table = SweepTable::default();
    if lengths.is_empty() {
        return Ok(table);
    }
    for s in scenarios {
        let snr = |l: f64| snr_db(l, s).map(SnrDb::value);
        for &l in lengths {
            table.rows.push(CurveRow {
                length_km: l,
                rate_hz: coincidence_rate(l, s)?,
                snr_db: snr(l)?,
                scenario: s.label.clone(),
            });
        }
        let mut crossing = None;
        for w in lengths.windows(2) {
            let (mut lo, mut hi) = (w[0], w[1]);
            if (snr(lo)? - target_db) * (snr(hi)? - target_db) > 0.0 {
                continue;
            }
            let above_at_lo = snr(lo)? >= target_db;
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if (snr(mid)? >= target_db) == above_at_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            crossing = Some(0.5 * (lo + hi));
            break;
        }
        table.crossings.push(Crossing {
            scenario: s.label.clone(),
            target_db,
            length_km: crossing,
        });
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_hits_projection() {
        let (current, improved) = ScenarioParams::calibrated_pair().unwrap();
        assert!((coincidence_rate(600.0, &improved).unwrap() - 0.012).abs() < 1e-12);
        assert!((snr_db(600.0, &improved).unwrap().value() - 10.0).abs() < 1e-9);
        assert!(
            (improved.kappa_sys - 0.631).abs() < 1e-3,
            "{}",
            improved.kappa_sys
        );
        assert!(coincidence_rate(302.0, &current).unwrap() > 1e-4);
    }

    #[test]
    fn no_darks_is_infinite() {
        let s = ScenarioParams {
            dark_rate_hz: 0.0,
            ..ScenarioParams::current()
        };
        assert_eq!(snr_db(100.0, &s).unwrap(), SnrDb::Infinite);
    }

    #[test]
    fn short_link_asymptote() {
        let s = ScenarioParams::current();
        let p = s.arm_probability(0.0);
        let q = s.dark_probability();
        let snr = snr_db(0.0, &s).unwrap().value();
        assert!((snr - linear_to_db(p / (2.0 * q))).abs() < 1e-3);
    }

    #[test]
    fn empty_grid() {
        let t = sweep_curves(&[], &[ScenarioParams::current()], 10.0).unwrap();
        assert!(t.rows.is_empty() && t.crossings.is_empty());
    }

    #[test]
    fn crossing_outside_grid() {
        let t = sweep_curves(&[0.0, 10.0], &[ScenarioParams::current()], 10.0).unwrap();
        assert_eq!(t.crossings[0].length_km, None);
    }
}
