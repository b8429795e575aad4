//! Run configuration. A JSON object with any subset of the fields below
//! overrides the defaults; command-line flags override the file.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::OSCILLATOR_PRESET;
use crate::error::{Error, Result};
use crate::observer::RecoveryVariant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantMode {
    #[default]
    Auto,
    Analytic,
    Sampled,
}

impl std::str::FromStr for ConstantMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "analytic" => Ok(Self::Analytic),
            "sampled" => Ok(Self::Sampled),
            other => Err(Error::Config(format!("unknown constant mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub preset: String,
    pub tau: f64,
    pub gamma: f64,
    pub lambdas: Vec<f64>,
    pub steps: usize,
    pub seed: u64,
    pub noise: bool,
    pub disturbance: bool,
    #[serde(with = "variant_str")]
    pub variant: RecoveryVariant,
    /// True initial state; the initial box is fixed by the preset.
    pub x0: Vec<f64>,
    /// Inclusive step range for the mean-width statistic.
    pub window: (usize, usize),
    pub constants: ConstantMode,
    pub constant_samples: usize,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub save_coeffs: Option<PathBuf>,
    pub load_coeffs: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: OSCILLATOR_PRESET.to_string(),
            tau: 0.1,
            gamma: 1.0,
            lambdas: vec![0.1, 0.2, 0.3, 0.4],
            steps: 500,
            seed: 42,
            noise: true,
            disturbance: false,
            variant: RecoveryVariant::MinMax,
            x0: vec![1.0, 0.0],
            window: (100, 500),
            constants: ConstantMode::Auto,
            constant_samples: 20_000,
            out: None,
            svg: None,
            save_coeffs: None,
            load_coeffs: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 1 {
            return Err(Error::Config("steps must be >= 1".into()));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Config(format!(
                "gamma must lie in (0, 1], got {}",
                self.gamma
            )));
        }
        if self.window.0 > self.window.1 {
            return Err(Error::Config("window start exceeds its end".into()));
        }
        if self.x0.len() != 2 {
            return Err(Error::Config("x0 must have two entries".into()));
        }
        if self.constant_samples < 2 {
            return Err(Error::Config("constant_samples must be >= 2".into()));
        }
        Ok(())
    }
}

mod variant_str {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::observer::RecoveryVariant;

    pub fn serialize<S: Serializer>(v: &RecoveryVariant, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<RecoveryVariant, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = RunConfig::from_json(r#"{"gamma": 0.7, "variant": "swapped", "noise": false}"#)
            .unwrap();
        assert_eq!(cfg.gamma, 0.7);
        assert_eq!(cfg.variant, RecoveryVariant::Swapped);
        assert!(!cfg.noise);
        assert_eq!(cfg.steps, 500);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(
            RunConfig::from_json(r#"{"gama": 0.7}"#),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = RunConfig {
            seed: 7,
            ..RunConfig::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn validation() {
        assert!(RunConfig {
            steps: 0,
            ..RunConfig::default()
        }
        .validate()
        .is_err());
        assert!(RunConfig {
            gamma: 1.5,
            ..RunConfig::default()
        }
        .validate()
        .is_err());
        assert!(RunConfig::default().validate().is_ok());
    }
}
