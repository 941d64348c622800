//! Experiment configuration.
//!
//! A config is a TOML document with a few top-level keys and one table per instrument
//! block (`qd1`, `qfc1`, `fiber1`, `detector`, `current`, ...). Every block and key the
//! chosen preset uses is optional and falls back to its default; keys the preset does not
//! use are rejected. The effective configuration is echoed back as TOML, and
//! parsing the echo reproduces it exactly.

use std::fmt;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::FiberParams;
use crate::detection::DetectorParams;
use crate::error::{Error, Result};
use crate::linkbudget::ScenarioParams;
use crate::model::EmitterParams;
use crate::qfc::QfcParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Hbt,
    HomConsecutive,
    QfcCurves,
    HomRemote,
    WindowSweep,
    LengthSweep,
    DispersionDemo,
    Linkbudget,
}

const MC_KEYS: &[&str] = &["trials"];
const LINK_BLOCKS: &[&str] = &["qd1", "qd2", "qfc1", "qfc2", "fiber1", "fiber2", "detector"];

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::Hbt,
        Preset::HomConsecutive,
        Preset::QfcCurves,
        Preset::HomRemote,
        Preset::WindowSweep,
        Preset::LengthSweep,
        Preset::DispersionDemo,
        Preset::Linkbudget,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Hbt => "hbt",
            Preset::HomConsecutive => "hom-consecutive",
            Preset::QfcCurves => "qfc-curves",
            Preset::HomRemote => "hom-remote",
            Preset::WindowSweep => "window-sweep",
            Preset::LengthSweep => "length-sweep",
            Preset::DispersionDemo => "dispersion-demo",
            Preset::Linkbudget => "linkbudget",
        }
    }

    /// Instrument blocks the preset reads.
    pub fn blocks(self) -> &'static [&'static str] {
        match self {
            Preset::Hbt | Preset::HomConsecutive => &["qd1", "qd2", "detector"],
            Preset::QfcCurves => &["qd1", "qd2", "qfc1", "qfc2"],
            Preset::HomRemote
            | Preset::WindowSweep
            | Preset::LengthSweep
            | Preset::DispersionDemo => LINK_BLOCKS,
            Preset::Linkbudget => &["current", "improved"],
        }
    }

    /// Optional top-level keys the preset reads, besides `preset`, `master_seed` and `output`.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Preset::Hbt | Preset::HomConsecutive => MC_KEYS,
            Preset::QfcCurves => &["input_rates_hz"],
            Preset::HomRemote | Preset::LengthSweep => &[
                "trials",
                "detuning_ghz",
                "reference_detuning_ghz",
                "lengths_km",
            ],
            Preset::WindowSweep => &[
                "trials",
                "detuning_ghz",
                "reference_detuning_ghz",
                "length_km",
                "windows_ps",
            ],
            Preset::DispersionDemo => &[
                "trials",
                "detuning_ghz",
                "reference_detuning_ghz",
                "length_km",
                "lengths_km",
            ],
            Preset::Linkbudget => &["lengths_km", "target_snr_db"],
        }
    }

    fn default_trials(self) -> u64 {
        match self {
            Preset::Hbt => 10_000_000,
            Preset::DispersionDemo => 200_000,
            _ => 1_000_000,
        }
    }

    fn uses(self, key: &str) -> bool {
        self.blocks().contains(&key) || self.keys().contains(&key)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
                Error::config(
                    "preset",
                    format!("unknown preset `{s}`, expected one of {}", names.join(", ")),
                )
            })
    }
}

const GLOBAL_KEYS: &[&str] = &["preset", "master_seed", "output"];

const ALL_KEYS: &[&str] = &[
    "trials",
    "detuning_ghz",
    "reference_detuning_ghz",
    "length_km",
    "lengths_km",
    "windows_ps",
    "target_snr_db",
    "input_rates_hz",
    "qd1",
    "qd2",
    "qfc1",
    "qfc2",
    "fiber1",
    "fiber2",
    "detector",
    "current",
    "improved",
];

pub const DEFAULT_MASTER_SEED: u64 = 1;
pub const DEFAULT_OUTPUT: &str = "out";
pub const DEFAULT_REFERENCE_DETUNING_GHZ: f64 = 38.0;
/// Total fiber lengths of the remote-interference measurements (km).
pub const REMOTE_LENGTHS_KM: [f64; 4] = [0.024, 101.0, 201.0, 302.0];
pub const SWEEP_LENGTHS_KM: [f64; 4] = [0.0, 101.0, 201.0, 302.0];
pub const WINDOWS_PS: [f64; 8] = [20.0, 50.0, 100.0, 200.0, 400.0, 800.0, 1600.0, 3200.0];
/// Single-photon rates entering the converters (Hz).
pub const QFC_INPUT_RATES_HZ: [f64; 2] = [20.2e6, 16.2e6];

/// Effective configuration. `None` fields are not used by the preset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub master_seed: u64,
    pub output: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    /// Carrier offset of the converted photons in the interfering run (GHz).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning_ghz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_detuning_ghz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length_km: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lengths_km: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub windows_ps: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_snr_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_rates_hz: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qd1: Option<EmitterParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qd2: Option<EmitterParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qfc1: Option<QfcParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qfc2: Option<QfcParams>,
    /// Fiber properties per arm; lengths come from the preset's length keys.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fiber1: Option<FiberParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fiber2: Option<FiberParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detector: Option<DetectorParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub current: Option<ScenarioParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub improved: Option<ScenarioParams>,
}

/// Values supplied outside the document (command line).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub preset: Option<Preset>,
    pub master_seed: Option<u64>,
    pub trials: Option<u64>,
    pub output: Option<String>,
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    parse_config_with(text, &Overrides::default())
}

/// Config holding only the defaults for `preset`.
pub fn default_config(preset: Preset) -> Result<ExperimentConfig> {
    parse_config_with(
        "",
        &Overrides {
            preset: Some(preset),
            ..Default::default()
        },
    )
}

pub fn parse_config_with(text: &str, overrides: &Overrides) -> Result<ExperimentConfig> {
    let mut doc: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config("document", e.to_string().trim_end()))?;

    let named = doc
        .remove("preset")
        .map(|v| take::<String>(v, "preset"))
        .transpose()?;
    let named = named.map(|s| s.parse::<Preset>()).transpose()?;
    let preset = match (named, overrides.preset) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::Preset(format!(
                "config is written for preset `{a}` but `{b}` was requested"
            )))
        }
        (Some(p), _) | (None, Some(p)) => p,
        (None, None) => return Err(Error::config("preset", "missing preset name")),
    };

    for key in doc.keys() {
        if GLOBAL_KEYS.contains(&key.as_str()) || preset.uses(key) {
            continue;
        }
        if ALL_KEYS.contains(&key.as_str()) {
            return Err(Error::Preset(format!(
                "`{key}` is not used by preset `{preset}`"
            )));
        }
        return Err(Error::config(key, "unknown key"));
    }

    let master_seed = match overrides.master_seed {
        Some(s) => s,
        None => opt::<u64>(&mut doc, "master_seed")?.unwrap_or(DEFAULT_MASTER_SEED),
    };
    if master_seed > i64::MAX as u64 {
        return Err(Error::config(
            "master_seed",
            format!(
                "{master_seed} exceeds the largest TOML integer {}",
                i64::MAX
            ),
        ));
    }
    let output = match &overrides.output {
        Some(o) => o.clone(),
        None => opt::<String>(&mut doc, "output")?.unwrap_or_else(|| DEFAULT_OUTPUT.into()),
    };

    let mut cfg = ExperimentConfig {
        preset,
        master_seed,
        output,
        trials: None,
        detuning_ghz: None,
        reference_detuning_ghz: None,
        length_km: None,
        lengths_km: None,
        windows_ps: None,
        target_snr_db: None,
        input_rates_hz: None,
        qd1: None,
        qd2: None,
        qfc1: None,
        qfc2: None,
        fiber1: None,
        fiber2: None,
        detector: None,
        current: None,
        improved: None,
    };

    let keys = preset.keys();
    if keys.contains(&"trials") {
        let trials = match overrides.trials {
            Some(t) => t,
            None => opt::<u64>(&mut doc, "trials")?.unwrap_or(preset.default_trials()),
        };
        if trials < 1 {
            return Err(Error::config("trials", "must be >= 1"));
        }
        cfg.trials = Some(trials);
    } else if overrides.trials.is_some() {
        return Err(Error::Preset(format!(
            "preset `{preset}` takes no trial count"
        )));
    }
    if keys.contains(&"detuning_ghz") {
        cfg.detuning_ghz = Some(finite(&mut doc, "detuning_ghz", 0.0)?);
        cfg.reference_detuning_ghz = Some(finite(
            &mut doc,
            "reference_detuning_ghz",
            DEFAULT_REFERENCE_DETUNING_GHZ,
        )?);
    }
    if keys.contains(&"length_km") {
        let default = if preset == Preset::DispersionDemo {
            151.0
        } else {
            302.0
        };
        let l = finite(&mut doc, "length_km", default)?;
        non_negative("length_km", l)?;
        cfg.length_km = Some(l);
    }
    if keys.contains(&"lengths_km") {
        let default: Vec<f64> = match preset {
            Preset::HomRemote => REMOTE_LENGTHS_KM.to_vec(),
            Preset::DispersionDemo => (0..=8).map(|i| 25.0 * i as f64).collect(),
            Preset::Linkbudget => (0..=80).map(|i| 10.0 * i as f64).collect(),
            _ => SWEEP_LENGTHS_KM.to_vec(),
        };
        let lengths = opt::<Vec<f64>>(&mut doc, "lengths_km")?.unwrap_or(default);
        nonempty("lengths_km", &lengths)?;
        for &l in &lengths {
            non_negative("lengths_km", l)?;
        }
        if preset == Preset::Linkbudget && lengths.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("lengths_km", "must be strictly increasing"));
        }
        cfg.lengths_km = Some(lengths);
    }
    if keys.contains(&"windows_ps") {
        let windows = opt::<Vec<f64>>(&mut doc, "windows_ps")?.unwrap_or(WINDOWS_PS.to_vec());
        nonempty("windows_ps", &windows)?;
        for &w in &windows {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::config("windows_ps", format!("{w} is not > 0")));
            }
        }
        cfg.windows_ps = Some(windows);
    }
    if keys.contains(&"target_snr_db") {
        cfg.target_snr_db = Some(finite(&mut doc, "target_snr_db", 10.0)?);
    }
    if keys.contains(&"input_rates_hz") {
        let rates =
            opt::<Vec<f64>>(&mut doc, "input_rates_hz")?.unwrap_or(QFC_INPUT_RATES_HZ.to_vec());
        if rates.len() != 2 || rates.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::config(
                "input_rates_hz",
                "expected two rates > 0, one per converter",
            ));
        }
        cfg.input_rates_hz = Some(rates);
    }

    let blocks = preset.blocks();
    let has = |b: &str| blocks.contains(&b);
    if has("qd1") {
        cfg.qd1 = Some(block(
            &mut doc,
            "qd1",
            EmitterParams::qd1(),
            EmitterParams::validate,
        )?);
        cfg.qd2 = Some(block(
            &mut doc,
            "qd2",
            EmitterParams::qd2(),
            EmitterParams::validate,
        )?);
    }
    if has("qfc1") {
        cfg.qfc1 = Some(block(
            &mut doc,
            "qfc1",
            QfcParams::qfc1(),
            QfcParams::validate,
        )?);
        cfg.qfc2 = Some(block(
            &mut doc,
            "qfc2",
            QfcParams::qfc2(),
            QfcParams::validate,
        )?);
    }
    if has("fiber1") {
        for (name, slot) in [("fiber1", &mut cfg.fiber1), ("fiber2", &mut cfg.fiber2)] {
            let f = block(
                &mut doc,
                name,
                FiberParams::default(),
                FiberParams::validate,
            )?;
            if f.length_km != 0.0 {
                return Err(Error::config(
                    format!("{name}.length_km"),
                    "fiber lengths are set by the preset's length keys",
                ));
            }
            *slot = Some(f);
        }
    }
    if has("detector") {
        cfg.detector = Some(block(
            &mut doc,
            "detector",
            DetectorParams::default(),
            DetectorParams::validate,
        )?);
    }
    if has("current") {
        let (current, improved) = ScenarioParams::calibrated_pair()?;
        cfg.current = Some(block(
            &mut doc,
            "current",
            current,
            ScenarioParams::validate,
        )?);
        cfg.improved = Some(block(
            &mut doc,
            "improved",
            improved,
            ScenarioParams::validate,
        )?);
    }

    if matches!(
        preset,
        Preset::HomRemote | Preset::WindowSweep | Preset::LengthSweep | Preset::DispersionDemo
    ) {
        let (a, b) = (cfg.qd1.as_ref().unwrap(), cfg.qd2.as_ref().unwrap());
        if a.rep_rate_hz != b.rep_rate_hz {
            return Err(Error::config(
                "qd2.rep_rate_hz",
                format!(
                    "both sources share one excitation clock; qd1.rep_rate_hz = {}",
                    a.rep_rate_hz
                ),
            ));
        }
    }
    Ok(cfg)
}

fn take<T: DeserializeOwned>(v: toml::Value, key: &str) -> Result<T> {
    T::deserialize(v).map_err(|e| Error::config(key, e.message().to_string()))
}

fn opt<T: DeserializeOwned>(doc: &mut toml::Table, key: &str) -> Result<Option<T>> {
    doc.remove(key).map(|v| take(v, key)).transpose()
}

fn finite(doc: &mut toml::Table, key: &str, default: f64) -> Result<f64> {
    let v = opt::<f64>(doc, key)?.unwrap_or(default);
    if !v.is_finite() {
        return Err(Error::config(key, "must be finite"));
    }
    Ok(v)
}

fn non_negative(key: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, format!("{v} is not >= 0")))
    }
}

fn nonempty(key: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        Err(Error::config(key, "must not be empty"))
    } else {
        Ok(())
    }
}

/// Deserializes table `name` laid over `default`, then validates it. Errors name the key.
fn block<T: Serialize + DeserializeOwned>(
    doc: &mut toml::Table,
    name: &str,
    default: T,
    validate: impl Fn(&T) -> Result<()>,
) -> Result<T> {
    let mut merged = toml::Table::try_from(&default)
        .map_err(|e| Error::config(name, format!("cannot encode defaults: {e}")))?;
    if let Some(v) = doc.remove(name) {
        let toml::Value::Table(user) = v else {
            return Err(Error::config(name, "expected a table"));
        };
        merged.extend(user);
    }
    let value = take::<T>(toml::Value::Table(merged), name)?;
    validate(&value).map_err(|e| match e {
        Error::Validation {
            name: field,
            value,
            bound,
        } => Error::config(
            format!("{name}.{field}"),
            format!("{value} violates {bound}"),
        ),
        Error::Inconsistent(msg) => Error::config(name, msg),
        other => other,
    })?;
    Ok(value)
}

impl ExperimentConfig {
    /// Effective configuration as TOML; parsing it yields `self` again.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("config values are representable in TOML")
    }

    /// SHA-256 of the echo, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.echo().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn emitters(&self) -> Result<[EmitterParams; 2]> {
        Ok([
            need(&self.qd1, "qd1")?.clone(),
            need(&self.qd2, "qd2")?.clone(),
        ])
    }

    pub fn trials(&self) -> Result<u64> {
        need(&self.trials, "trials").copied()
    }
}

pub(crate) fn need<'a, T>(v: &'a Option<T>, key: &str) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| Error::Preset(format!("the configuration has no `{key}`")))
}
