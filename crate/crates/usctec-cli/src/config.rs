//! JSON system description consumed by every subcommand.

use std::path::Path;

use serde::Deserialize;
use usctec::field::MERSENNE31;
use usctec::model::{validate, SpeedDistribution, SystemParams, WeightedRealization};
use usctec::rational::Rat;

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(rename = "N")]
    pub machines: usize,
    #[serde(rename = "L")]
    pub recovery_threshold: usize,
    #[serde(rename = "S")]
    pub stragglers: usize,
    /// Storage caps, rational strings like "3/5".
    pub e: Vec<Rat>,
    /// Speed realizations: `{"s": [...], "prob": "1/2"}`.
    pub realizations: Vec<WeightedRealization>,
    #[serde(default)]
    pub field: FieldConfig,
    #[serde(default)]
    pub matrices: MatricesConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub prime: u64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig { prime: MERSENNE31 }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatricesConfig {
    /// Inner dimension of `A * B`.
    pub v: Option<usize>,
    /// Columns of `B`; defaults to the smallest exact value per scheme.
    pub r: Option<usize>,
    pub seed: Option<u64>,
    /// Alternative to `seed`: load `A`/`B` from CSV files of field elements.
    pub csv: Option<CsvMatrices>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvMatrices {
    pub a: String,
    pub b: String,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        let config: Config = serde_json::from_str(&text).map_err(|e| {
            CliError::validation(format!("malformed config {}: {e}", path.display()))
        })?;
        let (params, dist) = config.system();
        validate(&params, &dist).map_err(|issues| {
            let detail = issues
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; ");
            CliError::validation(format!("invalid system: {detail}"))
        })?;
        Ok(config)
    }

    pub fn system(&self) -> (SystemParams, SpeedDistribution) {
        (
            SystemParams {
                machines: self.machines,
                recovery_threshold: self.recovery_threshold,
                stragglers: self.stragglers,
                storage_caps: self.e.clone(),
            },
            SpeedDistribution {
                realizations: self.realizations.clone(),
            },
        )
    }
}

/// Parses a CSV of unsigned field elements, one matrix row per line.
pub fn load_csv_matrix(
    field: &usctec::field::PrimeField,
    path: &str,
) -> Result<usctec::field::Matrix, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read matrix csv {path}: {e}")))?;
    let mut rows: Vec<Vec<u64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<u64>, _> = line.split(',').map(|v| v.trim().parse::<u64>()).collect();
        let row = row
            .map_err(|e| CliError::validation(format!("{path} line {}: {e}", i + 1)))?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(CliError::validation(format!(
                    "{path} line {}: ragged row",
                    i + 1
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::validation(format!("{path}: empty matrix")));
    }
    Ok(usctec::field::Matrix::from_rows(field, rows))
}
