#![allow(dead_code)]

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use qdlink::channel::FiberParams;
use qdlink::detection::{DetectorParams, HistogramMeta};
use qdlink::engine::{run_hom, ArmSetup, HomExperiment, HomRun, RunSpec};
use qdlink::model::EmitterParams;

/// Emitter with its multiphoton component removed.
pub fn pure(e: EmitterParams) -> EmitterParams {
    EmitterParams { g2_zero: 0.0, ..e }
}

pub fn quiet_detector() -> DetectorParams {
    DetectorParams {
        dark_rate_hz: 0.0,
        ..DetectorParams::default()
    }
}

pub fn still_fiber(length_km: f64) -> FiberParams {
    FiberParams {
        length_km,
        pol_drift_rad_per_sqrt_hr: 0.0,
        time_drift_ps_per_hr: 0.0,
        ..FiberParams::default()
    }
}

/// Source straight onto the beamsplitter.
pub fn bench_arm(e: EmitterParams) -> ArmSetup {
    ArmSetup {
        emitter: e,
        qfc: None,
        fiber: still_fiber(0.0),
    }
}

pub fn meta(label: &str, period_ps: f64) -> HistogramMeta {
    HistogramMeta {
        label: label.into(),
        seed: 0,
        config_hash: String::new(),
        pulse_period_ps: period_ps,
    }
}

pub fn period(exp: &HomExperiment) -> f64 {
    exp.arms[0].emitter.pulse_period_ps()
}

pub fn run(exp: &HomExperiment, trials: u64, seed: u64) -> HomRun {
    let spec = RunSpec {
        master_seed: seed,
        trials,
        workers: 4,
    };
    run_hom(exp, &spec, meta(&exp.label, period(exp))).expect("run succeeds")
}

/// Composite Gauss-Legendre rule over equal panels.
pub struct Composite {
    rule: GaussLegendre,
}

impl Composite {
    pub fn new(nodes: usize) -> Self {
        Self {
            rule: GaussLegendre::new(NonZeroUsize::new(nodes).unwrap()),
        }
    }

    pub fn integrate(&self, a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + k as f64 * h;
                self.rule.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }
}

/// HOM visibility from the two-time coherence functions of the two sources:
/// V = ∫∫ Re[G₁(t,t')·G₂*(t,t')] dt dt' with G(t,t') = Γe^{−Γ(t+t')/2}·e^{−γ*|t−t'|}·e^{iωt},
/// γ* = 1/T2 − Γ/2. Independent of the spectral-offset decomposition.
pub fn visibility_two_time(e1: &EmitterParams, e2: &EmitterParams, detuning: f64) -> f64 {
    const PANELS: usize = 200;
    let (g1, g2) = (1.0 / e1.t1_ps, 1.0 / e2.t1_ps);
    let dephasing = (1.0 / e1.t2_ps - 0.5 * g1) + (1.0 / e2.t2_ps - 0.5 * g2);
    let a = 0.5 * (g1 + g2);
    let t_max = 40.0 / a;
    let gl = Composite::new(12);
    let f = |t: f64, u: f64| {
        g1 * g2
            * (-a * (t + u)).exp()
            * (-dephasing * (t - u).abs()).exp()
            * (detuning * (t - u)).cos()
    };
    gl.integrate(0.0, t_max, PANELS, |t| {
        // Split the inner line at the kink t' = t.
        let below = ((t / t_max) * PANELS as f64)
            .ceil()
            .clamp(1.0, PANELS as f64) as usize;
        let above = (PANELS - below).max(1);
        gl.integrate(0.0, t, below, |u| f(t, u)) + gl.integrate(t, t_max, above, |u| f(t, u))
    })
}
