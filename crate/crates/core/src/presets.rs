//! Named experiments. Each preset turns an [`ExperimentConfig`] into a [`ResultBundle`] of
//! CSV tables and summary records.

use serde::{Deserialize, Serialize};

use crate::channel::{group_delay_spread, FiberParams};
use crate::config::{need, ExperimentConfig, Preset};
use crate::detection::{
    extract_g2_zero, HistogramMeta, VisibilityEstimate, WindowedOracle, DEFAULT_BIN_WIDTH_PS,
};
use crate::engine::{
    pair_weighted_visibility, run_hbt, run_hom, ArmSetup, HbtExperiment, HomExperiment, HomRun,
    RunSpec,
};
use crate::error::Result;
use crate::linkbudget::{coincidence_rate, sweep_curves, ScenarioParams};
use crate::model::{
    consecutive_visibility, corrected_visibility, decompose_dephasing, overlap_chirped,
    remote_visibility, transform_limit_ratio,
};
use crate::photon::{companion_prob_from_g2, CorrelationMode};
use crate::qfc::{
    conversion_efficiency, conversion_snr, converted_wavelength, pzt_frequency_step,
    solve_pump_wavelength, QfcParams, TARGET_WAVELENGTH_NM,
};
use crate::units::ghz_to_rad_per_ps;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Analytic,
    MonteCarlo,
    Calibration,
}

/// One extracted quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub name: String,
    pub value: f64,
    pub stderr: f64,
    pub provenance: Provenance,
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    /// File stem suffix, e.g. `302km-resonant`.
    pub name: String,
    pub csv: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub preset: Preset,
    pub seed: u64,
    pub config_hash: String,
    pub config_echo: String,
    pub tables: Vec<Table>,
    pub summary: Vec<SummaryRecord>,
}

impl ResultBundle {
    /// Bundle with no results, only the configuration.
    pub fn empty(cfg: &ExperimentConfig) -> Self {
        Self {
            preset: cfg.preset,
            seed: cfg.master_seed,
            config_hash: cfg.hash(),
            config_echo: cfg.echo(),
            tables: Vec::new(),
            summary: Vec::new(),
        }
    }

    fn record(&mut self, name: impl Into<String>, value: f64, stderr: f64, provenance: Provenance) {
        self.summary.push(SummaryRecord {
            name: name.into(),
            value,
            stderr,
            provenance,
            seed: self.seed,
            config_hash: self.config_hash.clone(),
        });
    }

    fn table(&mut self, name: impl Into<String>, csv: String) {
        self.tables.push(Table {
            name: name.into(),
            csv,
        });
    }

    pub fn get(&self, name: &str) -> Option<&SummaryRecord> {
        self.summary.iter().find(|r| r.name == name)
    }
}

/// Finer bins for the window sweep: every half-window in the default list is a whole
/// number of them.
const WINDOW_BIN_PS: f64 = 5.0;

/// Compact number for record and file names: 302, 0.024, 20.
fn tag(x: f64) -> String {
    format!("{x}")
}

pub fn run_preset(cfg: &ExperimentConfig, workers: usize) -> Result<ResultBundle> {
    let mut b = ResultBundle::empty(cfg);
    let ctx = Ctx { cfg, workers };
    match cfg.preset {
        Preset::Hbt => ctx.hbt(&mut b)?,
        Preset::HomConsecutive => ctx.hom_consecutive(&mut b)?,
        Preset::QfcCurves => ctx.qfc_curves(&mut b)?,
        Preset::HomRemote => ctx.hom_remote(&mut b)?,
        Preset::WindowSweep => ctx.window_sweep(&mut b)?,
        Preset::LengthSweep => ctx.length_sweep(&mut b)?,
        Preset::DispersionDemo => ctx.dispersion_demo(&mut b)?,
        Preset::Linkbudget => ctx.linkbudget(&mut b)?,
    }
    Ok(b)
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    workers: usize,
}

struct HomPair {
    resonant: HomRun,
    reference: HomRun,
    period_ps: f64,
}

impl HomPair {
    fn visibility(&self, window_ps: f64) -> Result<VisibilityEstimate> {
        self.resonant.visibility(&self.reference, window_ps)
    }

    fn full(&self) -> Result<VisibilityEstimate> {
        self.visibility(self.period_ps)
    }

    fn tables(&self, b: &mut ResultBundle, stem: &str) {
        b.table(format!("{stem}-resonant"), self.resonant.histogram.to_csv());
        b.table(
            format!("{stem}-reference"),
            self.reference.histogram.to_csv(),
        );
    }
}

/// Fiber with the configured properties but no drift, for table-top runs.
fn still_fiber() -> FiberParams {
    FiberParams {
        pol_drift_rad_per_sqrt_hr: 0.0,
        time_drift_ps_per_hr: 0.0,
        ..FiberParams::default()
    }
}

fn visibility_csv(first: &str, rows: &[(f64, VisibilityEstimate)]) -> String {
    let mut s = format!("{first},visibility,stderr,n_res,n_ref\n");
    for (x, v) in rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            x, v.visibility, v.stderr, v.n_res, v.n_ref
        ));
    }
    s
}

impl Ctx<'_> {
    fn spec(&self) -> Result<RunSpec> {
        Ok(RunSpec {
            master_seed: self.cfg.master_seed,
            trials: self.cfg.trials()?,
            workers: self.workers,
        })
    }

    fn meta(&self, label: &str, period_ps: f64) -> HistogramMeta {
        HistogramMeta {
            label: label.into(),
            seed: self.cfg.master_seed,
            config_hash: self.cfg.hash(),
            pulse_period_ps: period_ps,
        }
    }

    /// Both arms with converters and fibers of `lengths` km.
    fn link_arms(&self, lengths: [f64; 2]) -> Result<[ArmSetup; 2]> {
        let [e1, e2] = self.cfg.emitters()?;
        let arm = |emitter, qfc: &Option<QfcParams>, fiber: &Option<FiberParams>, key, l| {
            Ok::<_, crate::Error>(ArmSetup {
                emitter,
                qfc: Some(need(qfc, if key == 1 { "qfc1" } else { "qfc2" })?.clone()),
                fiber: FiberParams {
                    length_km: l,
                    ..need(fiber, if key == 1 { "fiber1" } else { "fiber2" })?.clone()
                },
            })
        };
        Ok([
            arm(e1, &self.cfg.qfc1, &self.cfg.fiber1, 1, lengths[0])?,
            arm(e2, &self.cfg.qfc2, &self.cfg.fiber2, 2, lengths[1])?,
        ])
    }

    /// Runs the interfering configuration and its reference. With `orthogonal` the
    /// reference is cross-polarized instead of detuned.
    fn hom_pair(
        &self,
        stem: &str,
        arms: [ArmSetup; 2],
        correlation: CorrelationMode,
        orthogonal: bool,
        bin_width_ps: f64,
    ) -> Result<HomPair> {
        let det = need(&self.cfg.detector, "detector")?.clone();
        let period_ps = arms[0].emitter.pulse_period_ps();
        let mut resonant = HomExperiment::new(format!("{stem}-resonant"), arms, det);
        resonant.correlation = correlation;
        resonant.bin_width_ps = bin_width_ps;
        resonant.range_ps = (period_ps / resonant.bin_width_ps).ceil() * resonant.bin_width_ps;
        let mut reference = resonant.clone();
        reference.label = format!("{stem}-reference");
        if orthogonal {
            reference.orthogonal = true;
        } else {
            resonant.detuning_rad_per_ps = ghz_to_rad_per_ps(self.cfg.detuning_ghz.unwrap_or(0.0));
            reference.detuning_rad_per_ps = ghz_to_rad_per_ps(*need(
                &self.cfg.reference_detuning_ghz,
                "reference_detuning_ghz",
            )?);
        }
        let spec = self.spec()?;
        log::info!("running {stem}: {} trials per configuration", spec.trials);
        let r = run_hom(&resonant, &spec, self.meta(&resonant.label, period_ps))?;
        let f = run_hom(&reference, &spec, self.meta(&reference.label, period_ps))?;
        Ok(HomPair {
            resonant: r,
            reference: f,
            period_ps,
        })
    }

    fn detunings(&self) -> Result<(f64, f64)> {
        Ok((
            ghz_to_rad_per_ps(*need(&self.cfg.detuning_ghz, "detuning_ghz")?),
            ghz_to_rad_per_ps(*need(
                &self.cfg.reference_detuning_ghz,
                "reference_detuning_ghz",
            )?),
        ))
    }

    fn hbt(&self, b: &mut ResultBundle) -> Result<()> {
        let det = need(&self.cfg.detector, "detector")?;
        for (key, e) in ["qd1", "qd2"].into_iter().zip(self.cfg.emitters()?) {
            let beta = companion_prob_from_g2(e.g2_zero)?;
            let exp = HbtExperiment::new(format!("hbt-{key}"), e.clone(), det.clone());
            log::info!("running hbt for {key}: {} pulses", self.cfg.trials()?);
            let run = run_hbt(
                &exp,
                &self.spec()?,
                self.meta(&exp.label, e.pulse_period_ps()),
            )?;
            let g2 = extract_g2_zero(&run.histogram)?;
            b.record(
                format!("companion_prob_{key}"),
                beta,
                0.0,
                Provenance::Analytic,
            );
            b.record(
                format!("g2_zero_{key}"),
                g2.value,
                g2.stderr,
                Provenance::MonteCarlo,
            );
            b.table(key, run.histogram.to_csv());
        }
        Ok(())
    }

    fn hom_consecutive(&self, b: &mut ResultBundle) -> Result<()> {
        for (key, e) in ["qd1", "qd2"].into_iter().zip(self.cfg.emitters()?) {
            let arm = ArmSetup {
                emitter: e.clone(),
                qfc: None,
                fiber: still_fiber(),
            };
            let pair = self.hom_pair(
                &format!("consecutive-{key}"),
                [arm.clone(), arm],
                CorrelationMode::ConsecutivePair,
                true,
                DEFAULT_BIN_WIDTH_PS,
            )?;
            let v = pair.full()?;
            let d = decompose_dephasing(&e)?;
            b.record(
                format!("transform_limit_ratio_{key}"),
                transform_limit_ratio(e.t1_ps, e.t2_ps)?,
                0.0,
                Provenance::Analytic,
            );
            b.record(
                format!("gamma_fast_star_{key}"),
                d.gamma_fast_star,
                0.0,
                Provenance::Analytic,
            );
            b.record(
                format!("gamma_slow_{key}"),
                d.gamma_slow,
                0.0,
                Provenance::Analytic,
            );
            b.record(
                format!("m_consecutive_{key}"),
                consecutive_visibility(&e)?,
                0.0,
                Provenance::Analytic,
            );
            b.record(
                format!("visibility_raw_{key}"),
                v.visibility,
                v.stderr,
                Provenance::MonteCarlo,
            );
            b.record(
                format!("visibility_corrected_{key}"),
                corrected_visibility(v.visibility.clamp(0.0, 1.0), e.g2_zero, e.g2_zero)?,
                v.stderr,
                Provenance::MonteCarlo,
            );
            pair.tables(b, &format!("consecutive-{key}"));
        }
        Ok(())
    }

    fn qfc_curves(&self, b: &mut ResultBundle) -> Result<()> {
        let emitters = self.cfg.emitters()?;
        let qfcs = [need(&self.cfg.qfc1, "qfc1")?, need(&self.cfg.qfc2, "qfc2")?];
        let rates = need(&self.cfg.input_rates_hz, "input_rates_hz")?;
        let mut csv = String::from("pump_mw,efficiency,noise_rate_hz,snr_db,converter\n");
        for (i, key) in ["qfc1", "qfc2"].into_iter().enumerate() {
            let (q, e, rate) = (qfcs[i], &emitters[i], rates[i]);
            for k in 1..=120 {
                let p = 5.0 * k as f64;
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    p,
                    conversion_efficiency(p, q)?,
                    q.raman_coeff * p,
                    conversion_snr(p, rate, q)?.value(),
                    key
                ));
            }
            b.record(
                format!("pump_wavelength_nm_{key}"),
                solve_pump_wavelength(e.wavelength_nm, TARGET_WAVELENGTH_NM)?,
                0.0,
                Provenance::Analytic,
            );
            b.record(
                format!("converted_wavelength_nm_{key}"),
                converted_wavelength(e.wavelength_nm, q.pump_wavelength_nm)?,
                0.0,
                Provenance::Analytic,
            );
            b.record(
                format!("efficiency_{key}"),
                conversion_efficiency(q.pump_mw, q)?,
                0.0,
                Provenance::Analytic,
            );
            b.record(
                format!("snr_db_{key}"),
                conversion_snr(q.pump_mw, rate, q)?.value(),
                0.0,
                Provenance::Analytic,
            );
            b.record(
                format!("raman_coeff_{key}"),
                q.raman_coeff,
                0.0,
                Provenance::Calibration,
            );
            b.record(
                format!("pzt_step_mhz_{key}"),
                pzt_frequency_step(q.pzt_step_pm, TARGET_WAVELENGTH_NM)?,
                0.0,
                Provenance::Analytic,
            );
        }
        b.table("curves", csv);
        Ok(())
    }

    fn record_expected(
        &self,
        b: &mut ResultBundle,
        name: String,
        arms: &[ArmSetup; 2],
    ) -> Result<()> {
        let det = need(&self.cfg.detector, "detector")?;
        let (delta, delta_ref) = self.detunings()?;
        let (e1, e2) = (&arms[0].emitter, &arms[1].emitter);
        let v = pair_weighted_visibility(
            remote_visibility(e1, e2, delta)?,
            remote_visibility(e1, e2, delta_ref)?,
            [
                arms[0].photon_detection_probability(det)?,
                arms[1].photon_detection_probability(det)?,
            ],
            [
                companion_prob_from_g2(e1.g2_zero)?,
                companion_prob_from_g2(e2.g2_zero)?,
            ],
        );
        b.record(name, v, 0.0, Provenance::Analytic);
        Ok(())
    }

    fn hom_remote(&self, b: &mut ResultBundle) -> Result<()> {
        let [e1, e2] = self.cfg.emitters()?;
        let (delta, _) = self.detunings()?;
        b.record(
            "visibility_intrinsic",
            remote_visibility(&e1, &e2, delta)?,
            0.0,
            Provenance::Analytic,
        );
        for &l in need(&self.cfg.lengths_km, "lengths_km")? {
            let t = tag(l);
            let arms = self.link_arms([0.5 * l, 0.5 * l])?;
            self.record_expected(b, format!("visibility_expected_{t}km"), &arms)?;
            let pair = self.hom_pair(
                &format!("{t}km"),
                arms,
                CorrelationMode::Independent,
                false,
                DEFAULT_BIN_WIDTH_PS,
            )?;
            let v = pair.full()?;
            b.record(
                format!("visibility_raw_{t}km"),
                v.visibility,
                v.stderr,
                Provenance::MonteCarlo,
            );
            b.record(
                format!("visibility_corrected_{t}km"),
                corrected_visibility(v.visibility.clamp(0.0, 1.0), e1.g2_zero, e2.g2_zero)?,
                v.stderr,
                Provenance::MonteCarlo,
            );
            let v20 = pair.visibility(20.0)?;
            b.record(
                format!("visibility_20ps_{t}km"),
                v20.visibility,
                v20.stderr,
                Provenance::MonteCarlo,
            );
            let (rate, err) = pair.reference.coincidence_rate(pair.period_ps);
            b.record(
                format!("reference_rate_hz_{t}km"),
                rate,
                err,
                Provenance::MonteCarlo,
            );
            pair.tables(b, &format!("{t}km"));
        }
        Ok(())
    }

    fn window_sweep(&self, b: &mut ResultBundle) -> Result<()> {
        let l = *need(&self.cfg.length_km, "length_km")?;
        let [e1, e2] = self.cfg.emitters()?;
        let det = need(&self.cfg.detector, "detector")?;
        let (delta, delta_ref) = self.detunings()?;
        let oracle = WindowedOracle::from_emitters(&e1, &e2, det.jitter_fwhm_ps)?;
        let pair = self.hom_pair(
            &format!("window-{}km", tag(l)),
            self.link_arms([0.5 * l, 0.5 * l])?,
            CorrelationMode::Independent,
            false,
            WINDOW_BIN_PS,
        )?;
        let mut rows = Vec::new();
        for &w in need(&self.cfg.windows_ps, "windows_ps")? {
            let v = pair.visibility(w)?;
            b.record(
                format!("visibility_{}ps", tag(w)),
                v.visibility,
                v.stderr,
                Provenance::MonteCarlo,
            );
            b.record(
                format!("visibility_oracle_{}ps", tag(w)),
                oracle.windowed_visibility(v.window_ps, delta, Some(delta_ref))?,
                0.0,
                Provenance::Analytic,
            );
            rows.push((w, v));
        }
        let full = pair.full()?;
        b.record(
            "visibility_full",
            full.visibility,
            full.stderr,
            Provenance::MonteCarlo,
        );
        b.table("windows", visibility_csv("window_ps", &rows));
        pair.tables(b, &format!("{}km", tag(l)));
        Ok(())
    }

    fn length_sweep(&self, b: &mut ResultBundle) -> Result<()> {
        let mut rows = Vec::new();
        for &l in need(&self.cfg.lengths_km, "lengths_km")? {
            let t = tag(l);
            let arms = self.link_arms([0.5 * l, 0.5 * l])?;
            self.record_expected(b, format!("visibility_expected_{t}km"), &arms)?;
            let pair = self.hom_pair(
                &format!("{t}km"),
                arms,
                CorrelationMode::Independent,
                false,
                DEFAULT_BIN_WIDTH_PS,
            )?;
            let v = pair.full()?;
            b.record(
                format!("visibility_raw_{t}km"),
                v.visibility,
                v.stderr,
                Provenance::MonteCarlo,
            );
            rows.push((l, v));
        }
        let lo = rows
            .iter()
            .min_by(|a, c| a.1.visibility.total_cmp(&c.1.visibility))
            .unwrap();
        let hi = rows
            .iter()
            .max_by(|a, c| a.1.visibility.total_cmp(&c.1.visibility))
            .unwrap();
        b.record(
            "visibility_spread",
            hi.1.visibility - lo.1.visibility,
            hi.1.stderr.hypot(lo.1.stderr),
            Provenance::MonteCarlo,
        );
        b.table("curve", visibility_csv("length_km", &rows));
        Ok(())
    }

    fn dispersion_demo(&self, b: &mut ResultBundle) -> Result<()> {
        let [e1, e2] = self.cfg.emitters()?;
        let l = *need(&self.cfg.length_km, "length_km")?;
        let probe = self.link_arms([1.0, 1.0])?;
        let lambda = [
            probe[0].fiber_wavelength_nm()?,
            probe[1].fiber_wavelength_nm()?,
        ];
        let beta2_l = |arm: &ArmSetup, i: usize, km: f64| {
            FiberParams {
                length_km: km,
                ..arm.fiber.clone()
            }
            .quad_phase(lambda[i])
        };
        let overlaps = |km: f64| -> Result<(f64, f64)> {
            let (g1, g2) = (e1.gamma_rad(), e2.gamma_rad());
            let q1 = beta2_l(&probe[0], 0, km);
            let sym = overlap_chirped(g1, 0.0, q1, g2, 0.0, beta2_l(&probe[1], 1, km))?;
            let asym = overlap_chirped(g1, 0.0, q1, g2, 0.0, 0.0)?;
            Ok((sym, asym))
        };
        let mut csv = String::from("length_km,overlap_symmetric,overlap_asymmetric\n");
        for &km in need(&self.cfg.lengths_km, "lengths_km")? {
            let (s, a) = overlaps(km)?;
            csv.push_str(&format!("{km},{s},{a}\n"));
        }
        b.table("overlap", csv);

        let (s, a) = overlaps(l)?;
        let t = tag(l);
        b.record(
            format!("overlap_symmetric_{t}km"),
            s,
            0.0,
            Provenance::Analytic,
        );
        b.record(
            format!("overlap_asymmetric_{t}km"),
            a,
            0.0,
            Provenance::Analytic,
        );
        for (i, (key, e)) in [("qd1", &e1), ("qd2", &e2)].into_iter().enumerate() {
            let fiber = FiberParams {
                length_km: l,
                ..probe[i].fiber.clone()
            };
            b.record(
                format!("delay_spread_ps_{key}_{t}km"),
                group_delay_spread(e.t2_ps, lambda[i], &fiber)?,
                0.0,
                Provenance::Analytic,
            );
        }

        // Both arms keep the loss of length l so that only the dispersion differs; the
        // asymmetric link carries it on arm 1 alone.
        for (name, dispersive) in [("symmetric", true), ("asymmetric", false)] {
            let mut arms = self.link_arms([l, l])?;
            if !dispersive {
                arms[1].fiber.dispersion_ps_nm_km = 0.0;
            }
            let pair = self.hom_pair(
                &format!("{name}-{t}km"),
                arms,
                CorrelationMode::Independent,
                false,
                DEFAULT_BIN_WIDTH_PS,
            )?;
            let v = pair.full()?;
            b.record(
                format!("visibility_{name}_{t}km"),
                v.visibility,
                v.stderr,
                Provenance::MonteCarlo,
            );
            pair.tables(b, &format!("{name}-{t}km"));
        }
        Ok(())
    }

    fn linkbudget(&self, b: &mut ResultBundle) -> Result<()> {
        let scenarios: [ScenarioParams; 2] = [
            need(&self.cfg.current, "current")?.clone(),
            need(&self.cfg.improved, "improved")?.clone(),
        ];
        let target = *need(&self.cfg.target_snr_db, "target_snr_db")?;
        let table = sweep_curves(
            need(&self.cfg.lengths_km, "lengths_km")?,
            &scenarios,
            target,
        )?;
        for s in &scenarios {
            b.record(
                format!("kappa_sys_{}", s.label),
                s.kappa_sys,
                0.0,
                Provenance::Calibration,
            );
            b.record(
                format!("coincidence_window_ps_{}", s.label),
                s.coincidence_window_ps,
                0.0,
                Provenance::Calibration,
            );
            b.record(
                format!("rate_hz_{}_302km", s.label),
                coincidence_rate(302.0, s)?,
                0.0,
                Provenance::Analytic,
            );
        }
        for c in &table.crossings {
            match c.length_km {
                Some(l) => {
                    b.record(
                        format!("snr_crossing_km_{}", c.scenario),
                        l,
                        0.0,
                        Provenance::Analytic,
                    );
                    let s = scenarios
                        .iter()
                        .find(|s| s.label == c.scenario)
                        .expect("scenario of crossing");
                    b.record(
                        format!("rate_hz_at_crossing_{}", c.scenario),
                        coincidence_rate(l, s)?,
                        0.0,
                        Provenance::Analytic,
                    );
                }
                None => log::warn!(
                    "scenario {} does not cross {target} dB inside the length grid",
                    c.scenario
                ),
            }
        }
        b.table("curves", table.to_csv());
        Ok(())
    }
}
