//! Experiment configuration: a JSON document with nested sections.
//!
//! ```json
//! {
//!   "kind": "ensemble",
//!   "units": "hertz",
//!   "physics": { "gamma": 7e6, "g": 7e6, "Omega": 1e6, "g_m": 1e5, "Gamma": 100, "T_m": 0.02 },
//!   "initial": { "beta": [0, 10] },
//!   "run": { "periods": 20, "trajectories": 200, "seed": 7 },
//!   "output": { "dir": "out" }
//! }
//! ```
//!
//! Rates are given in the chosen units and divided by `gamma` on load; with
//! `"units": "normalized"` they are already in units of `gamma`, which then
//! defaults to 1. Temperatures (Kelvin) need absolute units.

use std::path::{Path, PathBuf};

use hybridmech::PhysParams;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const K_B: f64 = 1.380_649e-23;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    #[default]
    Semiclassical,
    Ensemble,
    PhaseDiagram,
    Spectra,
    Validate,
}

impl Kind {
    pub fn parse(s: &str) -> Option<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string())).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    /// Rates in units of `gamma`.
    #[default]
    Normalized,
    /// Angular frequencies in rad/s.
    Angular,
    /// Ordinary frequencies `f = omega / 2 pi` in Hz.
    Hertz,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
    #[serde(rename = "Omega", default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_m: Option<f64>,
    #[serde(rename = "Gamma", default, skip_serializing_if = "Option::is_none")]
    pub gamma_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_m: Option<f64>,
    #[serde(rename = "T_m", default, skip_serializing_if = "Option::is_none")]
    pub t_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_q: Option<f64>,
    #[serde(rename = "T_q", default, skip_serializing_if = "Option::is_none")]
    pub t_q: Option<f64>,
    /// Emitter transition frequency, needed to turn `T_q` into `n_q`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Initial {
    /// Coherent amplitude `[re, im]`.
    #[serde(default)]
    pub beta: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Run {
    /// Duration in mechanical periods.
    #[serde(default = "default_periods")]
    pub periods: f64,
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps_per_period: Option<usize>,
    /// Record every this many steps; 16 samples per period by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_stride: Option<usize>,
    /// Integrate the Bloch equations instead of using the adiabatic population.
    #[serde(default)]
    pub full_bloch: bool,
}

fn default_periods() -> f64 {
    10.0
}

fn default_trajectories() -> usize {
    100
}

impl Default for Run {
    fn default() -> Self {
        Self {
            periods: default_periods(),
            trajectories: default_trajectories(),
            seed: 0,
            steps_per_period: None,
            record_stride: None,
            full_bloch: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    /// Histogram checkpoints in mechanical periods; thirds of the run if empty.
    #[serde(default)]
    pub histogram_periods: Vec<f64>,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
}

fn default_bins() -> usize {
    40
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            histogram_periods: Vec::new(),
            histogram_bins: default_bins(),
        }
    }
}

/// Detuning sweep, in the configured units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectraSection {
    pub delta_min: f64,
    pub delta_max: f64,
    pub points: usize,
}

impl Default for SpectraSection {
    fn default() -> Self {
        Self {
            delta_min: -20.0,
            delta_max: 20.0,
            points: 401,
        }
    }
}

/// Log grid over `n_m` and `Gamma / (g_m^2/gamma)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseDiagramSection {
    pub n_m_min: f64,
    pub n_m_max: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub points: usize,
}

impl Default for PhaseDiagramSection {
    fn default() -> Self {
        Self {
            n_m_min: 1e-3,
            n_m_max: 1e7,
            ratio_min: 1e-4,
            ratio_max: 1e4,
            points: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSection {
    pub trajectories: usize,
    pub periods: f64,
}

impl Default for ValidateSection {
    fn default() -> Self {
        Self {
            trajectories: 400,
            periods: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

/// The document as written by the user, with defaults filled in.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub kind: Kind,
    #[serde(default)]
    pub units: Units,
    #[serde(default)]
    pub physics: Physics,
    #[serde(default)]
    pub initial: Initial,
    #[serde(default)]
    pub run: Run,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub spectra: SpectraSection,
    #[serde(default)]
    pub phase_diagram: PhaseDiagramSection,
    #[serde(default)]
    pub validate: ValidateSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// A validated configuration; `params` are normalized to `gamma = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub raw: RawConfig,
    pub params: PhysParams<f64>,
    /// `gamma` in the configured units, used to normalize other rates.
    pub gamma_scale: f64,
}

/// Bose–Einstein occupation at angular frequency `omega` (rad/s) and
/// temperature `t` (K).
pub fn bose_occupation(omega: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    1.0 / (HBAR * omega / (K_B * t)).exp_m1()
}

fn require(field: &str, v: Option<f64>) -> CliResult<f64> {
    v.ok_or_else(|| CliError::config(field, "required field is missing"))
}

fn check(field: &str, v: f64, positive: bool) -> CliResult<f64> {
    if !v.is_finite() {
        return Err(CliError::config(field, format!("must be finite, got {v}")));
    }
    if positive && v <= 0.0 {
        return Err(CliError::config(field, format!("must be > 0, got {v}")));
    }
    if !positive && v < 0.0 {
        return Err(CliError::config(field, format!("must be >= 0, got {v}")));
    }
    Ok(v)
}

impl RawConfig {
    /// Validates and normalizes to `gamma = 1`.
    pub fn resolve(self) -> CliResult<ExperimentConfig> {
        let ph = &self.physics;
        let gamma = match (self.units, ph.gamma) {
            (_, Some(g)) => check("physics.gamma", g, true)?,
            (Units::Normalized, None) => 1.0,
            (_, None) => {
                return Err(CliError::config(
                    "physics.gamma",
                    "required in absolute units",
                ))
            }
        };
        let omega = check("physics.Omega", require("physics.Omega", ph.omega)?, true)?;
        let g = check("physics.g", require("physics.g", ph.g)?, false)?;
        let g_m = check("physics.g_m", require("physics.g_m", ph.g_m)?, false)?;
        let delta0 = ph.delta0.unwrap_or(0.0);
        if !delta0.is_finite() {
            return Err(CliError::config("physics.delta0", "must be finite"));
        }
        let gamma_m = check("physics.Gamma", ph.gamma_m.unwrap_or(0.0), false)?;

        // absolute angular frequency of a configured rate
        let angular = |field: &str, x: f64| -> CliResult<f64> {
            match self.units {
                Units::Normalized => Err(CliError::config(
                    field,
                    "temperatures need absolute units (\"angular\" or \"hertz\")",
                )),
                Units::Angular => Ok(x),
                Units::Hertz => Ok(std::f64::consts::TAU * x),
            }
        };
        let n_m = match (ph.n_m, ph.t_m) {
            (Some(_), Some(_)) => {
                return Err(CliError::config(
                    "physics.n_m",
                    "both `n_m` and `T_m` given; specify exactly one",
                ))
            }
            (Some(n), None) => check("physics.n_m", n, false)?,
            (None, Some(t)) => bose_occupation(
                angular("physics.T_m", omega)?,
                check("physics.T_m", t, false)?,
            ),
            (None, None) => 0.0,
        };
        let n_q = match (ph.n_q, ph.t_q) {
            (Some(_), Some(_)) => {
                return Err(CliError::config(
                    "physics.n_q",
                    "both `n_q` and `T_q` given; specify exactly one",
                ))
            }
            (Some(n), None) => check("physics.n_q", n, false)?,
            (None, Some(t)) => {
                let w0 = check(
                    "physics.omega_0",
                    require("physics.omega_0", ph.omega_0)?,
                    true,
                )?;
                bose_occupation(angular("physics.T_q", w0)?, check("physics.T_q", t, false)?)
            }
            (None, None) => 0.0,
        };

        let run = &self.run;
        if !(run.periods.is_finite() && run.periods >= 1.0) {
            return Err(CliError::config(
                "run.periods",
                format!("must be at least one period, got {}", run.periods),
            ));
        }
        if run.trajectories == 0 {
            return Err(CliError::config("run.trajectories", "must be >= 1"));
        }
        if self.initial.beta.iter().any(|x| !x.is_finite()) {
            return Err(CliError::config("initial.beta", "must be finite"));
        }
        if self.ensemble.histogram_bins == 0 {
            return Err(CliError::config("ensemble.histogram_bins", "must be >= 1"));
        }
        for &h in &self.ensemble.histogram_periods {
            if !(h >= 0.0 && h <= run.periods) {
                return Err(CliError::config(
                    "ensemble.histogram_periods",
                    format!("checkpoint {h} outside the run [0, {}]", run.periods),
                ));
            }
        }
        let sp = &self.spectra;
        if sp.points < 2
            || !(sp.delta_max > sp.delta_min)
            || !sp.delta_min.is_finite()
            || !sp.delta_max.is_finite()
        {
            return Err(CliError::config(
                "spectra",
                "need delta_min < delta_max and at least 2 points",
            ));
        }
        let pd = &self.phase_diagram;
        if pd.points < 2
            || !(pd.n_m_min > 0.0
                && pd.n_m_max > pd.n_m_min
                && pd.ratio_min > 0.0
                && pd.ratio_max > pd.ratio_min)
        {
            return Err(CliError::config(
                "phase_diagram",
                "need 0 < n_m_min < n_m_max, 0 < ratio_min < ratio_max and at least 2 points",
            ));
        }
        if self.kind == Kind::PhaseDiagram && g_m == 0.0 {
            return Err(CliError::config(
                "physics.g_m",
                "the phase diagram needs g_m > 0",
            ));
        }
        if self.validate.trajectories == 0 || !(self.validate.periods >= 1.0) {
            return Err(CliError::config(
                "validate",
                "need at least one trajectory and one period",
            ));
        }

        // dividing each input by gamma directly keeps absolute and normalized
        // documents bit-identical after loading
        let params = PhysParams {
            gamma: 1.0,
            g: g / gamma,
            delta0: delta0 / gamma,
            n_q,
            omega: omega / gamma,
            g_m: g_m / gamma,
            gamma_m: gamma_m / gamma,
            n_m,
        };
        params.validate()?;
        for w in params.adiabatic_warnings() {
            log::warn!("{w}");
        }
        Ok(ExperimentConfig {
            raw: self,
            params,
            gamma_scale: gamma,
        })
    }

    /// The same experiment written in normalized units.
    pub fn to_normalized(&self) -> CliResult<RawConfig> {
        let resolved = self.clone().resolve()?;
        let p = resolved.params;
        let mut out = self.clone();
        out.units = Units::Normalized;
        out.physics = Physics {
            gamma: Some(1.0),
            g: Some(p.g),
            delta0: Some(p.delta0),
            omega: Some(p.omega),
            g_m: Some(p.g_m),
            gamma_m: Some(p.gamma_m),
            n_m: Some(p.n_m),
            t_m: None,
            n_q: Some(p.n_q),
            t_q: None,
            omega_0: None,
        };
        out.spectra.delta_min /= resolved.gamma_scale;
        out.spectra.delta_max /= resolved.gamma_scale;
        Ok(out)
    }
}

/// Parses a config document. A run manifest is accepted too: its `config`
/// member is used.
pub fn parse_config(text: &str) -> CliResult<RawConfig> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Config {
        field: None,
        message: format!("malformed JSON: {e}"),
    })?;
    let doc = match value.get("config") {
        Some(inner) if value.get("manifest_version").is_some() => inner.clone(),
        _ => value,
    };
    serde_path_to_error::deserialize(doc).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        // a missing field is reported at its parent; it names itself in backticks
        let missing = inner
            .starts_with("missing field")
            .then(|| inner.split('`').nth(1))
            .flatten();
        let field = match (path.as_str(), missing) {
            (".", Some(n)) => n.to_string(),
            (p, Some(n)) => format!("{p}.{n}"),
            (p, None) => p.to_string(),
        };
        CliError::Config {
            field: Some(field),
            message: inner,
        }
    })
}

pub fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::config("--config", format!("cannot read {}: {e}", path.display()))
    })?;
    parse_config(&text)?.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> CliResult<ExperimentConfig> {
        parse_config(text)?.resolve()
    }

    fn field_of(e: CliError) -> String {
        match e {
            CliError::Config { field, .. } => field.unwrap_or_default(),
            other => panic!("not a config error: {other}"),
        }
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let c = load(r#"{"physics": {"Omega": 0.01, "g": 1, "g_m": 0.02}}"#).unwrap();
        assert_eq!(c.raw.kind, Kind::Semiclassical);
        assert_eq!(c.params.gamma, 1.0);
        assert_eq!(c.params.n_m, 0.0);
        assert_eq!(c.raw.run.periods, 10.0);
        assert_eq!(c.raw.run.trajectories, 100);
        assert_eq!(c.gamma_scale, 1.0);
    }

    #[test]
    fn absolute_units_are_normalized() {
        let c = load(r#"{"units": "hertz", "physics": {"gamma": 7e6, "Omega": 1e6, "g": 7e6, "g_m": 1e5, "Gamma": 100}}"#)
            .unwrap();
        assert_eq!(c.params.omega, 1e6 / 7e6);
        assert_eq!(c.params.g, 1.0);
        assert_eq!(c.params.gamma_m, 100.0 / 7e6);
    }

    #[test]
    fn room_temperature_phonon_number() {
        let c = load(r#"{"units": "hertz", "physics": {"gamma": 7e6, "Omega": 1e6, "g": 7e6, "g_m": 1e5, "T_m": 300}}"#)
            .unwrap();
        // high-temperature expansion k T / hbar Omega - 1/2
        let x = K_B * 300.0 / (HBAR * std::f64::consts::TAU * 1e6);
        assert!((c.params.n_m - (x - 0.5)).abs() / x < 1e-9);
        assert!((c.params.n_m - 6.25e6).abs() < 0.05e6);
    }

    #[test]
    fn missing_omega_is_named() {
        let e = load(r#"{"physics": {"g": 1, "g_m": 0.02}}"#).unwrap_err();
        assert_eq!(field_of(e), "physics.Omega");
    }

    #[test]
    fn occupation_and_temperature_conflict() {
        let e = load(r#"{"units": "angular", "physics": {"gamma": 1, "Omega": 0.01, "g": 1, "g_m": 0.02, "n_m": 1, "T_m": 1}}"#)
            .unwrap_err();
        assert_eq!(field_of(e), "physics.n_m");
        let e = load(r#"{"physics": {"Omega": 0.01, "g": 1, "g_m": 0.02, "n_q": 0, "T_q": 1}}"#)
            .unwrap_err();
        assert_eq!(field_of(e), "physics.n_q");
    }

    #[test]
    fn schema_errors_name_the_field() {
        let e =
            load(r#"{"physics": {"Omega": 0.01, "g": 1, "g_m": 0.02, "omega": 3}}"#).unwrap_err();
        assert_eq!(field_of(e), "physics.omega");
        let e = load(r#"{"physics": {"Omega": "fast", "g": 1, "g_m": 0.02}}"#).unwrap_err();
        assert_eq!(field_of(e), "physics.Omega");
        let e =
            load(r#"{"physics": {"Omega": 0.01, "g": 1, "g_m": 0.02}, "run": {"periods": 0.5}}"#)
                .unwrap_err();
        assert_eq!(field_of(e), "run.periods");
        let e = load(r#"{"physics": {"Omega": -1, "g": 1, "g_m": 0.02}}"#).unwrap_err();
        assert_eq!(field_of(e), "physics.Omega");
        let e =
            load(r#"{"kind": "plot", "physics": {"Omega": 1, "g": 1, "g_m": 0.02}}"#).unwrap_err();
        assert_eq!(field_of(e), "kind");
    }

    #[test]
    fn temperatures_need_absolute_units() {
        let e = load(r#"{"physics": {"Omega": 0.01, "g": 1, "g_m": 0.02, "T_m": 4}}"#).unwrap_err();
        assert_eq!(field_of(e), "physics.T_m");
        let e = load(r#"{"units": "hertz", "physics": {"gamma": 1e6, "Omega": 1e4, "g": 1e6, "g_m": 1e4, "T_q": 4}}"#)
            .unwrap_err();
        assert_eq!(field_of(e), "physics.omega_0");
    }

    #[test]
    fn normalized_rewrite_loads_identically() {
        let raw = parse_config(
            r#"{"units": "hertz", "physics": {"gamma": 7e6, "Omega": 1e6, "g": 3.3e6, "g_m": 1e5, "Gamma": 100, "T_m": 0.02, "delta0": 1.1e6}}"#,
        )
        .unwrap();
        let a = raw.clone().resolve().unwrap();
        let b = raw.to_normalized().unwrap().resolve().unwrap();
        assert_eq!(a.params, b.params);
    }

    #[test]
    fn kind_names() {
        assert_eq!(Kind::parse("phase-diagram"), Some(Kind::PhaseDiagram));
        assert_eq!(Kind::parse("spectra"), Some(Kind::Spectra));
        assert_eq!(Kind::parse("nope"), None);
    }
}
