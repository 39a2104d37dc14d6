//! System configuration files (TOML or JSON, chosen by extension).
//!
//! ```toml
//! [masses]
//! M1 = 0.56
//! M2 = 0.44
//!
//! [inertia]
//! C1 = 0.6
//! C2 = 0.4
//!
//! [shape]
//! d1 = 0.0482
//! d2 = 0.0321
//! q1 = 0.2226
//! q2 = 0.1443
//!
//! [orbit]
//! a = 18.2
//! e = 0.02
//!
//! [dissipation]   # optional, defaults to 0
//! delta1 = 1e-3
//! delta2 = 2e-3
//! ```

use crate::bodies::{BodyPairParams, ParamsError};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {message}")]
    Parse { path: String, message: String },
    #[error("unsupported config extension '{0}' (expected .toml or .json)")]
    UnsupportedExtension(String),
    #[error(transparent)]
    Params(#[from] ParamsError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemConfig {
    pub masses: Masses,
    pub inertia: Inertia,
    pub shape: Shape,
    pub orbit: Orbit,
    #[serde(default)]
    pub dissipation: Dissipation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Masses {
    #[serde(rename = "M1")]
    pub m1: f64,
    #[serde(rename = "M2")]
    pub m2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Inertia {
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Shape {
    pub d1: f64,
    pub d2: f64,
    pub q1: f64,
    pub q2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Orbit {
    pub a: f64,
    pub e: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Dissipation {
    #[serde(default)]
    pub delta1: f64,
    #[serde(default)]
    pub delta2: f64,
}

impl SystemConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        match ext {
            "toml" => toml::from_str(&text).map_err(|e| ConfigError::Parse {
                path: path.display().to_string(),
                message: e.to_string(),
            }),
            "json" => serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
                path: path.display().to_string(),
                message: e.to_string(),
            }),
            other => Err(ConfigError::UnsupportedExtension(other.to_string())),
        }
    }

    /// Validated physical parameters.
    pub fn params(&self) -> Result<BodyPairParams, ParamsError> {
        BodyPairParams::new(
            self.masses.m1,
            self.masses.m2,
            self.inertia.c1,
            self.inertia.c2,
            self.shape.d1,
            self.shape.d2,
            self.shape.q1,
            self.shape.q2,
            self.orbit.a,
            self.orbit.e,
        )
    }

    /// Dissipative constants `(delta1, delta2)` from the config, zero when
    /// the section is absent.
    pub fn deltas(&self) -> (f64, f64) {
        (self.dissipation.delta1, self.dissipation.delta2)
    }

    pub fn from_params(params: &BodyPairParams, delta1: f64, delta2: f64) -> Self {
        Self {
            masses: Masses {
                m1: params.m1,
                m2: params.m2,
            },
            inertia: Inertia {
                c1: params.c1,
                c2: params.c2,
            },
            shape: Shape {
                d1: params.d1,
                d2: params.d2,
                q1: params.q1,
                q2: params.q2,
            },
            orbit: Orbit {
                a: params.a0,
                e: params.e0,
            },
            dissipation: Dissipation { delta1, delta2 },
        }
    }
}
