use std::path::Path;

use serde::Deserialize;

use crate::metrics::ComparisonRecord;
use crate::network::seconds_to_ns;

use super::{AppError, Stage};

pub const CSV_COLUMNS: [&str; 11] = [
    "workload",
    "system",
    "hardware",
    "estimator",
    "split",
    "step_time_ns",
    "comp_time_ns",
    "comm_time_ns",
    "cache_hits",
    "cache_misses",
    "sim_wall_ms",
];

/// One line of the result CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub workload: String,
    pub system: String,
    pub hardware: String,
    pub estimator: String,
    pub split: String,
    pub step_time_ns: u64,
    pub comp_time_ns: u64,
    pub comm_time_ns: u64,
    pub cache_hits: u64,
    pub cache_misses: u64,
    pub sim_wall_ms: f64,
    pub reference_ns: Option<u64>,
    pub mape_pct: Option<f64>,
}

impl ResultRow {
    pub fn step_time(&self) -> f64 {
        self.step_time_ns as f64 * 1e-9
    }

    pub fn label(&self) -> String {
        format!("{}:{}", self.workload, self.hardware)
    }

    pub fn attach_reference(&mut self, reference_secs: f64) -> Result<(), AppError> {
        let rec = ComparisonRecord::new(self.label(), self.step_time(), reference_secs);
        let ape = rec.ape().map_err(|e| AppError::new(Stage::Reference, e.to_string()))?;
        self.reference_ns = Some(seconds_to_ns(reference_secs).ok_or_else(|| {
            AppError::new(Stage::Reference, format!("reference {reference_secs} s out of range"))
        })?);
        self.mape_pct = Some(ape);
        Ok(())
    }
}

/// Render rows as CSV. Reference columns appear when any row has one.
pub fn write_csv(rows: &[ResultRow]) -> Result<String, AppError> {
    let with_ref = rows.iter().any(|r| r.reference_ns.is_some());
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| AppError::new(Stage::Write, e.to_string());
    let mut header: Vec<&str> = CSV_COLUMNS.to_vec();
    if with_ref {
        header.extend(["reference_ns", "mape_pct"]);
    }
    w.write_record(&header).map_err(err)?;
    for r in rows {
        let mut rec = vec![
            r.workload.clone(),
            r.system.clone(),
            r.hardware.clone(),
            r.estimator.clone(),
            r.split.clone(),
            r.step_time_ns.to_string(),
            r.comp_time_ns.to_string(),
            r.comm_time_ns.to_string(),
            r.cache_hits.to_string(),
            r.cache_misses.to_string(),
            format!("{:.3}", r.sim_wall_ms),
        ];
        if with_ref {
            rec.push(r.reference_ns.map(|v| v.to_string()).unwrap_or_default());
            rec.push(r.mape_pct.map(|v| format!("{v:.4}")).unwrap_or_default());
        }
        w.write_record(&rec).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| AppError::new(Stage::Write, e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Reference {
    pub label: String,
    pub reference_seconds: f64,
}

/// Read a `label,reference_seconds` CSV.
pub fn load_references(path: &Path) -> Result<Vec<Reference>, AppError> {
    let err = |e: csv::Error| AppError::new(Stage::Reference, format!("{}: {e}", path.display()));
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(err)?;
    r.deserialize().collect::<Result<Vec<Reference>, _>>().map_err(err)
}

/// Match `workload:hardware`, then hardware alone, then workload alone.
/// `hardware` lists alternative spellings, tried in order.
pub fn lookup_reference(refs: &[Reference], workload: &str, hardware: &[&str]) -> Option<f64> {
    let find = |label: &str| refs.iter().find(|r| r.label == label).map(|r| r.reference_seconds);
    hardware
        .iter()
        .find_map(|h| find(&format!("{workload}:{h}")))
        .or_else(|| hardware.iter().find_map(|h| find(h)))
        .or_else(|| find(workload))
}
