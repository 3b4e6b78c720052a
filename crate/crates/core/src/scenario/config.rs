//! JSON scenario files.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "id": "cross-correlation-strong",
//!   "system": { "gamma1": 0.9407, "gamma2": 1.0, "k": 0.5, "j_coupling": 5.8 },
//!   "rates": { "rho1": 0.3125, "rho2": 0.33, "rho12": 0.33, "sigma12": 0.02,
//!              "delta1": 0.15, "delta2": 0.05 },
//!   "pps_labels": ["00", "11"],
//!   "time_grid": { "start": 0.0, "end": 5.0, "step": 0.05 },
//!   "tau": 0.1,
//!   "readout": "coefficients",
//!   "noise": { "snr": 100, "seed": 7 },
//!   "spectra": { "fwhm": 1.0, "grid": { "start": -15, "end": 15, "points": 601 },
//!                "times": [0, 1.25, 2.5], "write_files": false },
//!   "sweep": { "parameter": "delta_scale", "values": [0, 0.5, 1], "probe_time": 0.5 }
//! }
//! ```
//!
//! Unknown keys anywhere are rejected. Only `schema_version` and `rates` are
//! required; everything else has a default.

use std::fmt;
use std::path::PathBuf;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::relax::RelaxationRates;
use crate::spectra::FrequencyGrid;
use crate::spin::{PpsLabel, SpinSystem};

pub const SCHEMA_VERSION: u32 = 1;

/// Cross-correlation pairs `(delta1, delta2)` of the default ladder, 1/s.
/// Illustrative values with `delta2 ~ delta1 / 3`.
pub const DEFAULT_DELTA_LADDER: [[f64; 2]; 4] =
    [[0.0, 0.0], [0.05, 0.0167], [0.10, 0.033], [0.15, 0.05]];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("missing field `{0}`")]
    Missing(&'static str),
    #[error("unsupported schema_version {found} (expected {SCHEMA_VERSION})")]
    UnsupportedSchema { found: u32 },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid {
            start: 0.0,
            end: 5.0,
            step: 0.05,
        }
    }
}

impl TimeGrid {
    /// `start + i * step` for `i = 0..=n`, `n = round((end - start) / step)`.
    pub fn times(&self) -> Vec<f64> {
        let n = ((self.end - self.start) / self.step).round() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if !(self.start.is_finite() && self.start >= 0.0) {
            return Err(invalid("time_grid.start", "must be finite and >= 0"));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(invalid("time_grid.step", "must be positive"));
        }
        if !(self.end.is_finite() && self.end > self.start) {
            return Err(invalid("time_grid.end", "must be greater than start"));
        }
        if (self.end - self.start) / self.step > 1e6 {
            return Err(invalid(
                "time_grid.step",
                "more than 10^6 samples requested",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Readout {
    Modes,
    #[default]
    Coefficients,
    Spectra,
}

/// Signal-to-noise ratio; `"inf"` disables noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snr(pub f64);

impl Snr {
    pub const NOISELESS: Snr = Snr(f64::INFINITY);

    pub fn is_noiseless(&self) -> bool {
        self.0.is_infinite()
    }
}

impl Serialize for Snr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Snr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct SnrVisitor;
        impl de::Visitor<'_> for SnrVisitor {
            type Value = Snr;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a positive number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Snr, E> {
                Ok(Snr(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Snr, E> {
                Ok(Snr(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Snr, E> {
                Ok(Snr(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Snr, E> {
                match v {
                    "inf" | "infinity" | "Infinity" => Ok(Snr::NOISELESS),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(SnrVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub snr: Snr,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectraSpec {
    /// Hz.
    pub fwhm: f64,
    pub grid: FrequencyGrid,
    /// Sample times for the measurement pipeline; the time grid when absent.
    pub times: Option<Vec<f64>>,
    /// Write every synthesized spectrum as a two-column text file.
    pub write_files: bool,
}

impl Default for SpectraSpec {
    fn default() -> Self {
        SpectraSpec {
            fwhm: 1.0,
            grid: FrequencyGrid::symmetric(15.0, 601),
            times: None,
            write_files: false,
        }
    }
}

/// Rate entries a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateField {
    Rho1,
    Rho2,
    Rho12,
    Sigma12,
    Delta1,
    Delta2,
}

impl RateField {
    fn parse(path: &str) -> Option<Self> {
        Some(match path {
            "rates.rho1" => RateField::Rho1,
            "rates.rho2" => RateField::Rho2,
            "rates.rho12" => RateField::Rho12,
            "rates.sigma12" => RateField::Sigma12,
            "rates.delta1" => RateField::Delta1,
            "rates.delta2" => RateField::Delta2,
            _ => return None,
        })
    }

    pub fn path(self) -> &'static str {
        match self {
            RateField::Rho1 => "rates.rho1",
            RateField::Rho2 => "rates.rho2",
            RateField::Rho12 => "rates.rho12",
            RateField::Sigma12 => "rates.sigma12",
            RateField::Delta1 => "rates.delta1",
            RateField::Delta2 => "rates.delta2",
        }
    }

    pub fn set(self, rates: &mut RelaxationRates, value: f64) {
        let slot = match self {
            RateField::Rho1 => &mut rates.rho1,
            RateField::Rho2 => &mut rates.rho2,
            RateField::Rho12 => &mut rates.rho12,
            RateField::Sigma12 => &mut rates.sigma12,
            RateField::Delta1 => &mut rates.delta1,
            RateField::Delta2 => &mut rates.delta2,
        };
        *slot = value;
    }
}

/// What a sweep varies.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    /// One rate entry set to each value.
    Rate(RateField, Vec<f64>),
    /// Both cross-correlation rates of the base scenario scaled by each value.
    DeltaScale(Vec<f64>),
    /// Explicit `(delta1, delta2)` pairs.
    DeltaPairs(Vec<[f64; 2]>),
}

impl SweepAxis {
    pub fn len(&self) -> usize {
        match self {
            SweepAxis::Rate(_, v) | SweepAxis::DeltaScale(v) => v.len(),
            SweepAxis::DeltaPairs(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn parameter(&self) -> &'static str {
        match self {
            SweepAxis::Rate(field, _) => field.path(),
            SweepAxis::DeltaScale(_) => "delta_scale",
            SweepAxis::DeltaPairs(_) => "delta_pairs",
        }
    }

    /// `(reported value, rates)` for every sweep point.
    pub fn points(&self, base: &RelaxationRates) -> Vec<(f64, RelaxationRates)> {
        match self {
            SweepAxis::Rate(field, values) => values
                .iter()
                .map(|&v| {
                    let mut r = *base;
                    field.set(&mut r, v);
                    (v, r)
                })
                .collect(),
            SweepAxis::DeltaScale(values) => values
                .iter()
                .map(|&s| (s, base.with_delta_scale(s)))
                .collect(),
            SweepAxis::DeltaPairs(pairs) => pairs
                .iter()
                .map(|&[d1, d2]| {
                    (
                        d1,
                        RelaxationRates {
                            delta1: d1,
                            delta2: d2,
                            ..*base
                        },
                    )
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    /// Time of the full-solution difference, seconds.
    pub probe_time: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            axis: SweepAxis::DeltaPairs(DEFAULT_DELTA_LADDER.to_vec()),
            probe_time: 0.5,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    parameter: String,
    values: serde_json::Value,
    #[serde(default = "default_probe")]
    probe_time: f64,
}

fn default_probe() -> f64 {
    0.5
}

impl Serialize for SweepSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let values = match &self.axis {
            SweepAxis::Rate(_, v) | SweepAxis::DeltaScale(v) => serde_json::json!(v),
            SweepAxis::DeltaPairs(v) => serde_json::json!(v),
        };
        RawSweep {
            parameter: self.axis.parameter().to_string(),
            values,
            probe_time: self.probe_time,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SweepSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawSweep::deserialize(d)?;
        let scalars = |v: serde_json::Value| -> Result<Vec<f64>, D::Error> {
            serde_json::from_value(v).map_err(|e| {
                de::Error::custom(format!("sweep.values must be a list of numbers: {e}"))
            })
        };
        let axis = match raw.parameter.as_str() {
            "delta_scale" => SweepAxis::DeltaScale(scalars(raw.values)?),
            "delta_pairs" => SweepAxis::DeltaPairs(serde_json::from_value(raw.values).map_err(
                |e| de::Error::custom(format!("sweep.values must be [delta1, delta2] pairs: {e}")),
            )?),
            path => match RateField::parse(path) {
                Some(field) => SweepAxis::Rate(field, scalars(raw.values)?),
                None => {
                    return Err(de::Error::custom(format!(
                        "sweep.parameter {path:?} is not one of rates.<rho1|rho2|rho12|sigma12|delta1|delta2>, delta_scale, delta_pairs"
                    )))
                }
            },
        };
        Ok(SweepSpec {
            axis,
            probe_time: raw.probe_time,
        })
    }
}

fn default_id() -> String {
    "scenario".to_string()
}

fn default_labels() -> Vec<PpsLabel> {
    PpsLabel::ALL.to_vec()
}

fn default_tau() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    #[serde(default = "default_id")]
    pub id: String,
    #[serde(default)]
    pub system: SpinSystem,
    pub rates: RelaxationRates,
    #[serde(default = "default_labels")]
    pub pps_labels: Vec<PpsLabel>,
    #[serde(default)]
    pub time_grid: TimeGrid,
    /// Initial-rate horizon, seconds.
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default)]
    pub readout: Readout,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub spectra: SpectraSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl Default for Scenario {
    /// The published simulation matrix with `delta1 = 0.15`, `delta2 = 0.05`,
    /// all four states, the default delta ladder as sweep and a noisy
    /// pipeline sampled at 0, 1.25 and 2.5 s.
    fn default() -> Self {
        Scenario {
            schema_version: SCHEMA_VERSION,
            id: "default".to_string(),
            system: SpinSystem::default(),
            rates: RelaxationRates::reference(0.15, 0.05),
            pps_labels: default_labels(),
            time_grid: TimeGrid::default(),
            tau: default_tau(),
            readout: Readout::Coefficients,
            noise: Some(NoiseSpec {
                snr: Snr(100.0),
                seed: 1,
            }),
            spectra: SpectraSpec {
                times: Some(vec![0.0, 1.25, 2.5]),
                ..SpectraSpec::default()
            },
            sweep: Some(SweepSpec::default()),
            output: None,
        }
    }
}

impl Scenario {
    /// Parses and validates. Returns the scenario and non-fatal warnings.
    pub fn from_json_str(text: &str) -> Result<(Scenario, Vec<String>), ConfigError> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let warnings = scenario.validate()?;
        Ok((scenario, warnings))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn times(&self) -> Vec<f64> {
        self.time_grid.times()
    }

    pub fn pipeline_times(&self) -> Vec<f64> {
        self.spectra.times.clone().unwrap_or_else(|| self.times())
    }

    pub fn validate(&self) -> Result<Vec<String>, ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::UnsupportedSchema {
                found: self.schema_version,
            });
        }
        if let Err(e) = self.system.validate() {
            let field = match e {
                crate::spin::SpinError::NonPositive { field, .. } => format!("system.{field}"),
                _ => "system".to_string(),
            };
            return Err(invalid(field, e.to_string()));
        }
        let r = &self.rates;
        for (name, v) in [
            ("rho1", r.rho1),
            ("rho2", r.rho2),
            ("rho12", r.rho12),
            ("sigma12", r.sigma12),
            ("delta1", r.delta1),
            ("delta2", r.delta2),
        ] {
            if !v.is_finite() {
                return Err(invalid(format!("rates.{name}"), "must be finite"));
            }
        }
        for (name, v) in [("rho1", r.rho1), ("rho2", r.rho2), ("rho12", r.rho12)] {
            if v <= 0.0 {
                return Err(invalid(
                    format!("rates.{name}"),
                    "self-relaxation rates must be positive",
                ));
            }
        }
        if self.pps_labels.is_empty() {
            return Err(invalid("pps_labels", "at least one label is required"));
        }
        for (i, label) in self.pps_labels.iter().enumerate() {
            if self.pps_labels[..i].contains(label) {
                return Err(invalid("pps_labels", format!("duplicate label {label}")));
            }
        }
        self.time_grid.validate()?;
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(invalid("tau", "must be finite and >= 0"));
        }
        if self.tau > self.time_grid.end {
            return Err(invalid("tau", "must not exceed time_grid.end"));
        }
        if let Some(noise) = &self.noise {
            if !(noise.snr.0 > 0.0) {
                return Err(invalid("noise.snr", "must be positive or \"inf\""));
            }
        }
        let sp = &self.spectra;
        if !(sp.fwhm.is_finite() && sp.fwhm > 0.0) {
            return Err(invalid("spectra.fwhm", "must be positive"));
        }
        if !(sp.grid.points >= 50 && sp.grid.points <= 1_000_000) {
            return Err(invalid(
                "spectra.grid.points",
                "must be between 50 and 10^6",
            ));
        }
        if let Some(times) = &sp.times {
            let ok = !times.is_empty()
                && times.iter().all(|t| t.is_finite() && *t >= 0.0)
                && times.windows(2).all(|w| w[0] < w[1]);
            if !ok {
                return Err(invalid(
                    "spectra.times",
                    "must be non-empty, non-negative and strictly increasing",
                ));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.axis.is_empty() {
                return Err(invalid("sweep.values", "must not be empty"));
            }
            if !(sweep.probe_time.is_finite() && sweep.probe_time > 0.0) {
                return Err(invalid("sweep.probe_time", "must be positive"));
            }
            let finite = match &sweep.axis {
                SweepAxis::Rate(_, v) | SweepAxis::DeltaScale(v) => v.iter().all(|x| x.is_finite()),
                SweepAxis::DeltaPairs(v) => v.iter().flatten().all(|x| x.is_finite()),
            };
            if !finite {
                return Err(invalid("sweep.values", "must be finite"));
            }
        }
        Ok(self.system.warnings())
    }
}
