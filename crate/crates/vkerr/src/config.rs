//! TOML run configuration.
//!
//! ```toml
//! delta = 2.0
//! eta = 1
//! a_mt = 0.25
//! b_mt = 1.5
//! pump_E2 = 1.9
//! ```
//!
//! Laboratory units go in a `[physical]` table instead of `delta` and
//! `pump_E2`; they are normalized on load.

use std::path::Path;

use serde::{Deserialize, Serialize};
use vkerr_core::params::{normalize, LIQUID_A, LIQUID_B};
use vkerr_core::{ModelParams, PhysicalParams, Sign};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physical {
    pub gamma: f64,
    pub g: f64,
    pub omega_c: f64,
    pub omega_0: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default = "default_eta")]
    pub eta: i64,
    #[serde(default = "default_a")]
    pub a_mt: f64,
    #[serde(default = "default_b")]
    pub b_mt: f64,
    #[serde(rename = "pump_E2", default, skip_serializing_if = "Option::is_none")]
    pub pump_e2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical: Option<Physical>,
}

fn default_eta() -> i64 {
    1
}

fn default_a() -> f64 {
    LIQUID_A
}

fn default_b() -> f64 {
    LIQUID_B
}

impl Default for Config {
    fn default() -> Self {
        Config {
            delta: None,
            eta: 1,
            a_mt: LIQUID_A,
            b_mt: LIQUID_B,
            pump_e2: None,
            physical: None,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub delta: Option<f64>,
    pub eta: Option<i64>,
    pub pump_e2: Option<f64>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Applies overrides. Normalized values replace a `[physical]` table.
    pub fn with_overrides(mut self, o: &Overrides) -> Self {
        if let Some(e) = o.eta {
            self.eta = e;
        }
        if o.delta.is_some() || o.pump_e2.is_some() {
            if let Some(p) = self.physical.take() {
                // Keep whatever the table implied for the value not overridden.
                if let Ok(m) = self.normalize_physical(&p) {
                    self.delta = Some(m.delta);
                    self.pump_e2 = Some(m.pump_e2());
                }
            }
        }
        if let Some(d) = o.delta {
            self.delta = Some(d);
        }
        if let Some(e) = o.pump_e2 {
            self.pump_e2 = Some(e);
        }
        self
    }

    fn sign(&self) -> Result<Sign, CliError> {
        Sign::from_value(self.eta).ok_or_else(|| CliError::Config(format!("eta must be 1 or -1, got {}", self.eta)))
    }

    fn normalize_physical(&self, p: &Physical) -> Result<ModelParams, CliError> {
        normalize(&PhysicalParams {
            gamma: p.gamma,
            g: p.g,
            omega_c: p.omega_c,
            omega_0: p.omega_0,
            e0: p.e0,
            eta: self.sign()?,
            a_mt: self.a_mt,
            b_mt: self.b_mt,
        })
        .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn model(&self) -> Result<ModelParams, CliError> {
        let m = match &self.physical {
            Some(p) => {
                if self.delta.is_some() || self.pump_e2.is_some() {
                    return Err(CliError::Config(
                        "give either delta/pump_E2 or a [physical] table, not both".into(),
                    ));
                }
                self.normalize_physical(p)?
            }
            None => {
                let e2 = self.pump_e2.unwrap_or(0.0);
                if !(e2 >= 0.0 && e2.is_finite()) {
                    return Err(CliError::Config(format!("pump_E2 must be finite and non-negative, got {e2}")));
                }
                ModelParams {
                    delta: self.delta.unwrap_or(0.0),
                    eta: self.sign()?,
                    a_mt: self.a_mt,
                    b_mt: self.b_mt,
                    pump: e2.sqrt(),
                }
            }
        };
        m.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(m)
    }
}
