//! Table I reproduction: classical optimum, EARAC and QRAC values for the eight tasks.

use serde::Serialize;

use crate::data::{DataError, ReferenceConstants};
use crate::protocols::{eval_earac, eval_qrac_strategy};
use crate::seesaw::{run_seesaw, DEFAULT_RESTARTS};
use crate::tasks::{classical_optimum, table_one_earac, table_one_qrac, table_one_task, table_one_transformation};
use crate::Error;

/// How a reported number was obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportValue {
    /// Exact evaluation of an explicit construction.
    Exact { value: f64 },
    /// Best value of a see-saw search.
    Seesaw { value: f64, restarts: usize, seed: u64 },
    /// Published constant, shipped as data.
    Reference { value: f64, source: String },
}

impl ReportValue {
    pub fn value(&self) -> f64 {
        match self {
            ReportValue::Exact { value } | ReportValue::Seesaw { value, .. } | ReportValue::Reference { value, .. } => {
                *value
            }
        }
    }

    pub fn annotation(&self) -> String {
        match self {
            ReportValue::Exact { .. } => "exact".to_string(),
            ReportValue::Seesaw { restarts, seed, .. } => format!("see-saw, {restarts} restarts, seed {seed}"),
            ReportValue::Reference { source, .. } => format!("[{source}] reference, not recomputed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableOneRow {
    pub row: usize,
    pub task: String,
    pub transformation: String,
    pub classical: f64,
    pub classical_successes: Option<u32>,
    pub earac: ReportValue,
    pub qrac: ReportValue,
    /// Published QRAC see-saw value for rows 1–4.
    pub qrac_reference: Option<ReportValue>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportOptions {
    pub restarts: usize,
    pub seed: u64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { restarts: DEFAULT_RESTARTS, seed: 0 }
    }
}

fn reference(value: Option<f64>, source: &Option<String>) -> Option<ReportValue> {
    Some(ReportValue::Reference { value: value?, source: source.clone().unwrap_or_default() })
}

/// One Table I row.
pub fn table_one_row(row: usize, opts: ReportOptions, refs: &ReferenceConstants) -> Result<TableOneRow, Error> {
    let task = table_one_task(row)?;
    let classical = classical_optimum(&task);
    let r = refs.row(row).ok_or_else(|| DataError::Io(std::io::Error::other(format!("no reference row {row}"))))?;
    let (earac, qrac) = if row <= 4 {
        let (t, s) = table_one_earac(row)?;
        let ss = run_seesaw(&task, opts.restarts, opts.seed)?;
        (
            ReportValue::Exact { value: eval_earac(&s, &t)? },
            ReportValue::Seesaw { value: ss.value, restarts: opts.restarts, seed: opts.seed },
        )
    } else {
        let (t, s) = table_one_qrac(row)?;
        let earac = reference(r.earac, &r.earac_source)
            .ok_or_else(|| DataError::Io(std::io::Error::other(format!("no EARAC reference for row {row}"))))?;
        (earac, ReportValue::Exact { value: eval_qrac_strategy(&s, &t)? })
    };
    Ok(TableOneRow {
        row,
        task: task.label().to_string(),
        transformation: table_one_transformation(row).unwrap_or_default().to_string(),
        classical: classical.value,
        classical_successes: classical.successes,
        earac,
        qrac,
        qrac_reference: reference(r.qrac, &r.qrac_source),
    })
}

/// All eight Table I rows.
pub fn table_one_report(opts: ReportOptions) -> Result<Vec<TableOneRow>, Error> {
    let refs = ReferenceConstants::load()?;
    (1..=8).map(|row| table_one_row(row, opts, &refs)).collect()
}
