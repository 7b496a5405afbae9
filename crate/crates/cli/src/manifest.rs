//! Resolved run parameters, echoed verbatim into every output.

use std::path::PathBuf;

use clap::ValueEnum;
use serde::Serialize;

use rabi_core::{RabiParams, ScanConfig, ToleranceConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Subcommand-specific settings. Absent fields are omitted from the JSON.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Extras {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_fock: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub with_gfunction: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: RabiParams,
    pub cfg: ScanConfig,
    pub tolerances: ToleranceConfig,
    /// `-` means standard output.
    pub output_path: String,
    pub format: Format,
    pub extras: Extras,
}

impl RunManifest {
    pub fn output(&self) -> Option<PathBuf> {
        (self.output_path != "-").then(|| PathBuf::from(&self.output_path))
    }
}
