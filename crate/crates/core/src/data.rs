//! Bundled reference data, overridable through the `DRAC_DATA_DIR` environment variable.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub const DATA_DIR_ENV: &str = "DRAC_DATA_DIR";

pub const TABLE_TWO_SETTINGS: &str = "table2_settings.csv";
pub const MEASURED_TABLES: &str = "measured_tables.csv";
pub const AVERAGE_SUCCESS: &str = "average_success.csv";
pub const REFERENCE_CONSTANTS: &str = "reference_constants.json";

const BUNDLED: [(&str, &str); 4] = [
    (TABLE_TWO_SETTINGS, include_str!("../data/table2_settings.csv")),
    (MEASURED_TABLES, include_str!("../data/measured_tables.csv")),
    (AVERAGE_SUCCESS, include_str!("../data/average_success.csv")),
    (REFERENCE_CONSTANTS, include_str!("../data/reference_constants.json")),
];

/// Where a data file was read from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum DataSource {
    Bundled,
    Override(PathBuf),
}

/// Contents of a named data file: the override directory wins when set.
pub fn load(name: &str) -> std::io::Result<(String, DataSource)> {
    if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
        let path = PathBuf::from(dir).join(name);
        if path.exists() {
            return Ok((std::fs::read_to_string(&path)?, DataSource::Override(path)));
        }
    }
    bundled(name)
        .map(|s| (s.to_string(), DataSource::Bundled))
        .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::NotFound, format!("no data file {name}")))
}

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// One Table I row of published constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableOneReference {
    pub row: usize,
    pub earac: Option<f64>,
    pub earac_source: Option<String>,
    pub qrac: Option<f64>,
    pub qrac_source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConstants {
    pub dark_count_rate_hz: f64,
    pub detection_efficiency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceConstants {
    pub version: u32,
    pub note: String,
    pub table_one: Vec<TableOneReference>,
    pub classical_claim: f64,
    pub experiment: ExperimentConstants,
}

impl ReferenceConstants {
    pub fn load() -> Result<Self, DataError> {
        let (text, _) = load(REFERENCE_CONSTANTS)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn row(&self, row: usize) -> Option<&TableOneReference> {
        self.table_one.iter().find(|r| r.row == row)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("data file: {0}")]
    Io(#[from] std::io::Error),
    #[error("reference constants: {0}")]
    Json(#[from] serde_json::Error),
}
