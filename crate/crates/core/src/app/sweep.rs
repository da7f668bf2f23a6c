//! One workload set across several hardware configurations.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::estimate::{CacheStats, ComputeApi};
use crate::metrics::{mape, mean_absolute, speedup, speedup_error, ComparisonRecord};

use super::{
    emit_svg_bar_chart, load_references, lookup_reference, run_with_api, write_atomic, write_csv,
    AppError, ResultRow, RunSpec, Series, Stage,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Shared settings; `workload` and `hardware` are overridden per run.
    pub template: RunSpec,
    pub workloads: Vec<PathBuf>,
    pub hardware: Vec<String>,
    pub transitions_out: Option<PathBuf>,
}

/// Speedup between consecutive hardware entries for one workload.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub workload: String,
    pub from: String,
    pub to: String,
    pub speedup_sim: f64,
    pub speedup_ref: Option<f64>,
    pub speedup_error_pct: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<ResultRow>,
    /// `(workload:hardware, error)` for runs that failed.
    pub errors: Vec<(String, AppError)>,
    pub transitions: Vec<Transition>,
    pub mape_by_workload: BTreeMap<String, f64>,
    pub mape_by_hardware: BTreeMap<String, f64>,
    /// Mean |speedup error| over transitions with references.
    pub mean_abs_speedup_error: Option<f64>,
    pub cache: CacheStats,
}

pub fn transitions_csv(ts: &[Transition]) -> Result<String, AppError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| AppError::new(Stage::Write, e.to_string());
    w.write_record(["workload", "from", "to", "speedup_sim", "speedup_ref", "speedup_error_pct"])
        .map_err(err)?;
    for t in ts {
        w.write_record([
            t.workload.clone(),
            t.from.clone(),
            t.to.clone(),
            format!("{:.6}", t.speedup_sim),
            t.speedup_ref.map(|v| format!("{v:.6}")).unwrap_or_default(),
            t.speedup_error_pct.map(|v| format!("{v:.4}")).unwrap_or_default(),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| AppError::new(Stage::Write, e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Run every workload on every hardware entry, in order, sharing one
/// estimate cache. Failed runs are recorded and skipped.
pub fn sweep(spec: &SweepSpec) -> Result<SweepOutcome, AppError> {
    for (i, h) in spec.hardware.iter().enumerate() {
        if spec.hardware[..i].contains(h) {
            return Err(AppError::new(Stage::Sweep, format!("hardware `{h}` listed twice")));
        }
    }
    if spec.workloads.is_empty() || spec.hardware.is_empty() {
        return Err(AppError::new(Stage::Sweep, "need at least one workload and one hardware entry"));
    }
    let refs = match &spec.template.reference {
        Some(p) => load_references(p)?,
        None => Vec::new(),
    };
    let api = ComputeApi::new().with_runs(spec.template.runs);
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    let mut transitions = Vec::new();
    for w in &spec.workloads {
        let mut prev: Option<ResultRow> = None;
        for h in &spec.hardware {
            let run = RunSpec {
                workload: w.clone(),
                hardware: h.clone(),
                reference: None,
                ..spec.template.clone()
            };
            let mut row = match run_with_api(&run, &api) {
                Ok(out) => out.row,
                Err(e) => {
                    log::error!("{}:{h}: {e}", w.display());
                    errors.push((format!("{}:{h}", w.display()), e));
                    prev = None;
                    continue;
                }
            };
            if let Some(secs) = lookup_reference(&refs, &row.workload, &[h, &row.hardware, &row.system]) {
                row.attach_reference(secs)?;
            }
            if let Some(p) = &prev {
                transitions.push(transition(p, &row)?);
            }
            prev = Some(row.clone());
            rows.push(row);
        }
    }

    let grouped = |key: fn(&ResultRow) -> &str| -> Result<BTreeMap<String, f64>, AppError> {
        let mut groups: BTreeMap<String, Vec<ComparisonRecord>> = BTreeMap::new();
        for r in rows.iter().filter(|r| r.reference_ns.is_some()) {
            groups.entry(key(r).to_string()).or_default().push(ComparisonRecord::new(
                r.label(),
                r.step_time(),
                r.reference_ns.unwrap_or(0) as f64 * 1e-9,
            ));
        }
        groups
            .into_iter()
            .map(|(k, recs)| {
                mape(&recs)
                    .map(|m| (k, m))
                    .map_err(|e| AppError::new(Stage::Reference, e.to_string()))
            })
            .collect()
    };
    let mape_by_workload = grouped(|r| &r.workload)?;
    let mape_by_hardware = grouped(|r| &r.hardware)?;
    let errs: Vec<f64> = transitions.iter().filter_map(|t| t.speedup_error_pct).collect();
    let mean_abs_speedup_error = mean_absolute(&errs).ok();

    let t = &spec.template;
    if let Some(p) = &t.csv_out {
        write_atomic(p, write_csv(&rows)?.as_bytes())?;
    }
    if let (Some(p), false) = (&t.svg_out, rows.is_empty()) {
        let series = if spec.hardware.len() > 1 { Series::Hardware } else { Series::Estimator };
        write_atomic(p, emit_svg_bar_chart(&rows, series)?.as_bytes())?;
    }
    if let Some(p) = &spec.transitions_out {
        write_atomic(p, transitions_csv(&transitions)?.as_bytes())?;
    }
    Ok(SweepOutcome {
        rows,
        errors,
        transitions,
        mape_by_workload,
        mape_by_hardware,
        mean_abs_speedup_error,
        cache: api.cache_stats(),
    })
}

fn transition(prev: &ResultRow, next: &ResultRow) -> Result<Transition, AppError> {
    let metric = |e: crate::metrics::MetricsError| AppError::new(Stage::Sweep, e.to_string());
    let speedup_sim = speedup(prev.step_time(), next.step_time()).map_err(metric)?;
    let speedup_ref = match (prev.reference_ns, next.reference_ns) {
        (Some(a), Some(b)) => Some(speedup(a as f64, b as f64).map_err(metric)?),
        _ => None,
    };
    let speedup_error_pct = speedup_ref
        .map(|s| speedup_error(s, speedup_sim).map_err(metric))
        .transpose()?;
    Ok(Transition {
        workload: next.workload.clone(),
        from: prev.hardware.clone(),
        to: next.hardware.clone(),
        speedup_sim,
        speedup_ref,
        speedup_error_pct,
    })
}
