use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::diagnostics::ZGrid;
use crate::ensemble::{EntryDistribution, PerturbationKind, PerturbationSpec};
use crate::error::{Error, Result};

/// Environment variable overriding the dense-solve dimension cap.
pub const MAX_N_ENV: &str = "CIRCLAW_MAX_N";
pub const DEFAULT_MAX_N: usize = 2000;

pub fn default_reference_exponent() -> f64 {
    3.0
}

/// Largest admissible `n`, from `CIRCLAW_MAX_N` when set.
pub fn max_dimension() -> Result<usize> {
    match std::env::var(MAX_N_ENV) {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            Error::Validation(vec![format!("{MAX_N_ENV}={v:?} is not a positive integer")])
        }),
        Err(_) => Ok(DEFAULT_MAX_N),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub dims: Vec<usize>,
    pub distribution: EntryDistribution,
    pub perturbation: PerturbationSpec,
    #[serde(default)]
    pub z_grid: ZGrid,
    pub replicates: usize,
    pub master_seed: u64,
    #[serde(default = "default_reference_exponent")]
    pub reference_exponent_b0: f64,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Every invariant violation, not just the first.
    pub fn validation_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.name.trim().is_empty() {
            errs.push("name must not be empty".into());
        }
        if self.dims.is_empty() {
            errs.push("dims must not be empty".into());
        }
        if self.dims.contains(&0) {
            errs.push("dims must be positive".into());
        }
        if self.dims.windows(2).any(|w| w[0] >= w[1]) {
            errs.push(format!(
                "dims must be strictly increasing, got {:?}",
                self.dims
            ));
        }
        match max_dimension() {
            Ok(cap) => {
                if let Some(&big) = self.dims.iter().find(|&&n| n > cap) {
                    errs.push(format!(
                        "dimension {big} exceeds the cap {cap} (set {MAX_N_ENV} to raise it)"
                    ));
                }
            }
            Err(Error::Validation(mut e)) => errs.append(&mut e),
            Err(e) => errs.push(e.to_string()),
        }
        if self.replicates == 0 {
            errs.push("replicates must be at least 1".into());
        }
        if !(self.reference_exponent_b0.is_finite() && self.reference_exponent_b0 > 0.0) {
            errs.push(format!(
                "reference_exponent_b0 must be a positive number, got {}",
                self.reference_exponent_b0
            ));
        }
        errs.extend(self.z_grid.validation_errors());
        errs.extend(self.perturbation.validation_errors());
        if let PerturbationKind::LowRank { left, right } = &self.perturbation.kind {
            for &n in &self.dims {
                if left.iter().chain(right).any(|v| v.len() != n) {
                    errs.push(format!(
                        "low-rank factors must have length n = {n} for every configured dim"
                    ));
                }
            }
        }
        if self.output_dir.as_os_str().is_empty() {
            errs.push("output_dir must not be empty".into());
        }
        errs
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.validation_errors();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }
}

/// Parses a JSON experiment document strictly (unknown keys are rejected) and validates it.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
        what: "experiment config".into(),
        message: e.to_string(),
    })?;
    config.validate()?;
    Ok(config)
}

pub fn serialize_config(config: &ExperimentConfig) -> String {
    serde_json::to_string_pretty(config).expect("config serializes")
}
