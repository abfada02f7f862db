use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::estimation::EstimatorKind;
use crate::grid::SubcarrierGrid;
use crate::learning::SvmParams;
use crate::profiles::Family;
use crate::realization::ArrayConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilySelection {
    Tdl,
    Cdl,
    Both,
}

impl FamilySelection {
    pub fn families(self) -> Vec<Family> {
        match self {
            FamilySelection::Tdl => vec![Family::Tdl],
            FamilySelection::Cdl => vec![Family::Cdl],
            FamilySelection::Both => vec![Family::Tdl, Family::Cdl],
        }
    }
}

impl std::str::FromStr for FamilySelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tdl" => Ok(FamilySelection::Tdl),
            "cdl" => Ok(FamilySelection::Cdl),
            "both" => Ok(FamilySelection::Both),
            other => Err(Error::Config {
                key: "family".into(),
                message: format!("expected tdl, cdl or both, got `{other}`"),
            }),
        }
    }
}

/// How channel realizations are assigned to dataset samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelDraw {
    /// One realization per (run, profile): each class is a fixed
    /// propagation environment observed through fresh pilots and noise.
    #[default]
    PerClass,
    /// A fresh realization for every sample.
    PerSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Hz.
    pub carrier_freq: f64,
    pub subcarrier_count: usize,
    /// Hz.
    pub subcarrier_spacing: f64,
    /// Seconds.
    pub delay_spread: f64,
    pub family: FamilySelection,
    pub samples_per_class: usize,
    pub snr_list_db: Vec<f64>,
    pub split_fraction: f64,
    pub svm: SvmParams,
    pub array_config: ArrayConfig,
    pub estimator: EstimatorKind,
    pub channel_draw: ChannelDraw,
    pub master_seed: u64,
    pub repetitions: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            carrier_freq: 4e9,
            subcarrier_count: 600,
            subcarrier_spacing: 30e3,
            delay_spread: 300e-9,
            family: FamilySelection::Both,
            samples_per_class: 50,
            snr_list_db: vec![0.0, 10.0, 20.0],
            split_fraction: 0.7,
            svm: SvmParams::default(),
            array_config: ArrayConfig::default(),
            estimator: EstimatorKind::ScalarMmse,
            channel_draw: ChannelDraw::PerClass,
            master_seed: 2022,
            repetitions: 10,
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub family: Option<FamilySelection>,
    pub snr_list_db: Option<Vec<f64>>,
    pub master_seed: Option<u64>,
    pub repetitions: Option<usize>,
    pub samples_per_class: Option<usize>,
}

fn config_err(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn grid(&self) -> SubcarrierGrid {
        SubcarrierGrid {
            subcarrier_count: self.subcarrier_count,
            subcarrier_spacing: self.subcarrier_spacing,
            carrier_freq: self.carrier_freq,
        }
    }

    /// Training samples per class for the stratified split, clamped so both
    /// sides keep at least the minimum the learners need.
    pub fn train_per_class(&self) -> usize {
        let n = self.samples_per_class;
        ((n as f64 * self.split_fraction).round() as usize).clamp(2, n - 1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_freq > 0.0 && self.carrier_freq.is_finite()) {
            return Err(config_err("carrier_freq", "must be positive"));
        }
        if self.subcarrier_count < 1 {
            return Err(config_err("subcarrier_count", "must be at least 1"));
        }
        if !(self.subcarrier_spacing > 0.0 && self.subcarrier_spacing.is_finite()) {
            return Err(config_err("subcarrier_spacing", "must be positive"));
        }
        if !(self.delay_spread > 0.0 && self.delay_spread.is_finite()) {
            return Err(config_err("delay_spread", "must be positive"));
        }
        if self.samples_per_class < 4 {
            return Err(config_err("samples_per_class", "must be at least 4"));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(config_err("split_fraction", "must lie strictly between 0 and 1"));
        }
        if self.snr_list_db.is_empty() {
            return Err(config_err("snr_list_db", "must not be empty"));
        }
        if let Some(bad) = self.snr_list_db.iter().find(|s| !s.is_finite()) {
            return Err(config_err("snr_list_db", format!("non-finite SNR {bad}")));
        }
        if self.repetitions < 1 {
            return Err(config_err("repetitions", "must be at least 1"));
        }
        self.svm
            .validate()
            .map_err(|e| config_err("svm", e.to_string()))?;
        self.array_config
            .validate()
            .map_err(|e| config_err("array_config", e.to_string()))?;
        Ok(())
    }

    pub fn apply(&mut self, overrides: &ConfigOverrides) {
        if let Some(f) = overrides.family {
            self.family = f;
        }
        if let Some(s) = &overrides.snr_list_db {
            self.snr_list_db = s.clone();
        }
        if let Some(s) = overrides.master_seed {
            self.master_seed = s;
        }
        if let Some(r) = overrides.repetitions {
            self.repetitions = r;
        }
        if let Some(n) = overrides.samples_per_class {
            self.samples_per_class = n;
        }
    }

    /// Parses a JSON config document. Keys not in the schema are rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = if text.trim().is_empty() {
            Value::Object(Default::default())
        } else {
            serde_json::from_str(text).map_err(|e| config_err("<document>", e.to_string()))?
        };
        let Value::Object(map) = &value else {
            return Err(config_err("<document>", "config must be a JSON object"));
        };
        let known = serde_json::to_value(ExperimentConfig::default())?;
        check_keys(map, &known, "")?;
        serde_json::from_value(value).map_err(|e| config_err("<document>", e.to_string()))
    }
}

// Nested objects are checked too, except the tagged kernel enum whose keys
// depend on the variant.
fn check_keys(map: &serde_json::Map<String, Value>, known: &Value, prefix: &str) -> Result<()> {
    for (key, value) in map {
        let path = format!("{prefix}{key}");
        let Some(schema) = known.get(key) else {
            return Err(Error::UnknownConfigKey(path));
        };
        if key == "kernel" {
            continue;
        }
        if let (Value::Object(inner), Value::Object(_)) = (value, schema) {
            check_keys(inner, schema, &format!("{path}."))?;
        }
    }
    Ok(())
}

/// Defaults, overlaid by the config file (if any), overlaid by `overrides`.
pub fn load_config(path: Option<&Path>, overrides: &ConfigOverrides) -> Result<ExperimentConfig> {
    let mut config = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| config_err("<file>", format!("cannot read {}: {e}", p.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    config.apply(overrides);
    config.validate()?;
    Ok(config)
}
