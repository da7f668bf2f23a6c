//! End-to-end orchestration: workload file in, trace, CSV and SVG out.

mod gen;
mod report;
mod svg;
mod sweep;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::estimate::{
    CacheStats, ComputeApi, ComputeEstimator, EstimatorResult, HardwareConfig, LatencyTable,
    RooflineEstimator, TableEstimator,
};
use crate::graph::build_graph;
use crate::ir::parse_module;
use crate::network::{simulate, SimulationResult, SystemConfig, SYSTEM_PRESETS};
use crate::slicer::{split, validate_slicing, SplitKind};
use crate::trace::{build_trace, serialize_trace, Trace};

pub use gen::{blocks_module, gemm_module, BlocksSpec, GemmCollective, GemmSpec};
pub use report::{load_references, lookup_reference, write_csv, Reference, ResultRow};
pub use svg::{emit_svg_bar_chart, Series};
pub use sweep::{sweep, transitions_csv, SweepOutcome, SweepSpec, Transition};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Load,
    Parse,
    Config,
    Slice,
    Estimate,
    Trace,
    Simulate,
    Reference,
    Write,
    Generate,
    Sweep,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Load => "load",
            Stage::Parse => "parse",
            Stage::Config => "config",
            Stage::Slice => "slice",
            Stage::Estimate => "estimate",
            Stage::Trace => "trace",
            Stage::Simulate => "simulate",
            Stage::Reference => "reference",
            Stage::Write => "write",
            Stage::Generate => "generate",
            Stage::Sweep => "sweep",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{stage}: {message}")]
pub struct AppError {
    pub stage: Stage,
    pub message: String,
}

impl AppError {
    pub fn new(stage: Stage, message: impl Into<String>) -> Self {
        Self {
            stage,
            message: message.into(),
        }
    }

    fn at(stage: Stage, path: &Path, e: impl fmt::Display) -> Self {
        Self::new(stage, format!("{}: {e}", path.display()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorChoice {
    Roofline { strict: bool },
    Table { path: PathBuf, fallback: bool },
}

impl EstimatorChoice {
    pub fn build(&self) -> Result<Box<dyn ComputeEstimator>, AppError> {
        Ok(match self {
            EstimatorChoice::Roofline { strict } => Box::new(RooflineEstimator { strict: *strict }),
            EstimatorChoice::Table { path, fallback } => Box::new(TableEstimator {
                table: LatencyTable::load(path).map_err(|e| AppError::new(Stage::Config, e.to_string()))?,
                source: path.display().to_string(),
                fallback: *fallback,
            }),
        })
    }
}

/// Everything one simulation run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub workload: PathBuf,
    /// System config file; derived from `hardware` when absent.
    pub system: Option<PathBuf>,
    /// Hardware preset name (`a100`, `a100x4`, ...) or JSON file.
    pub hardware: String,
    pub internode_gbs: Option<f64>,
    /// Multiplier on the system's intranode bandwidth.
    pub bandwidth_scale: Option<f64>,
    pub estimator: EstimatorChoice,
    pub split: SplitKind,
    pub trace_out: Option<PathBuf>,
    pub csv_out: Option<PathBuf>,
    pub svg_out: Option<PathBuf>,
    pub graph_out: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub runs: Option<u32>,
    /// Worker threads for region estimation.
    pub threads: Option<usize>,
    /// Report `sim_wall_ms` as 0 so reruns are byte-identical.
    pub stable_output: bool,
}

impl RunSpec {
    pub fn new(workload: impl Into<PathBuf>, hardware: impl Into<String>) -> Self {
        Self {
            workload: workload.into(),
            system: None,
            hardware: hardware.into(),
            internode_gbs: None,
            bandwidth_scale: None,
            estimator: EstimatorChoice::Roofline { strict: false },
            split: SplitKind::Linear,
            trace_out: None,
            csv_out: None,
            svg_out: None,
            graph_out: None,
            reference: None,
            runs: None,
            threads: None,
            stable_output: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub row: ResultRow,
    pub trace: Trace,
    pub sim: SimulationResult,
    pub regions: Vec<EstimatorResult>,
    pub cache: CacheStats,
    pub compile_args: BTreeMap<String, String>,
    pub exec_args: BTreeMap<String, String>,
    pub graph_dump: String,
}

impl RunOutcome {
    /// One-line human summary.
    pub fn summary(&self) -> String {
        let r = &self.row;
        format!(
            "{} system={} hardware={} estimator={} split={} step={:.3}us wall={:.1}ms cache_hit_ratio={:.1}%",
            r.workload,
            r.system,
            r.hardware,
            r.estimator,
            r.split,
            r.step_time_ns as f64 / 1e3,
            r.sim_wall_ms,
            self.cache.hit_ratio() * 100.0
        )
    }
}

pub fn resolve_hardware(arg: &str) -> Result<HardwareConfig, AppError> {
    let path = Path::new(arg);
    if arg.ends_with(".json") || path.is_file() {
        HardwareConfig::from_file(path).map_err(|e| AppError::new(Stage::Config, e.to_string()))
    } else {
        HardwareConfig::preset(arg).map_err(|e| AppError::new(Stage::Config, e.to_string()))
    }
}

pub fn resolve_system(spec: &RunSpec) -> Result<SystemConfig, AppError> {
    let config = |e: crate::network::NetworkError| AppError::new(Stage::Config, e.to_string());
    let mut sys = match &spec.system {
        Some(p) => SystemConfig::from_file(p).map_err(config)?,
        None => {
            let h = spec.hardware.as_str();
            let name = [h.to_string(), format!("{h}x4"), format!("{h}-8")]
                .into_iter()
                .find(|c| SYSTEM_PRESETS.contains(&c.as_str()))
                .ok_or_else(|| {
                    AppError::new(
                        Stage::Config,
                        format!("no system preset matches `{h}`; pass --system"),
                    )
                })?;
            SystemConfig::preset(&name).map_err(config)?
        }
    };
    if let Some(gbs) = spec.internode_gbs {
        sys = sys.with_internode_bandwidth(gbs * 1e9);
    }
    if let Some(f) = spec.bandwidth_scale {
        sys = sys.scale_intranode_bandwidth(f);
    }
    sys.validate().map_err(config)?;
    Ok(sys)
}

fn workload_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Run the pipeline with a caller-provided estimate cache. Writes nothing.
pub fn run_with_api(spec: &RunSpec, api: &ComputeApi) -> Result<RunOutcome, AppError> {
    let started = Instant::now();
    let text = std::fs::read_to_string(&spec.workload).map_err(|e| AppError::at(Stage::Load, &spec.workload, e))?;
    let module = parse_module(&text).map_err(|e| AppError::at(Stage::Parse, &spec.workload, e))?;
    let hw = resolve_hardware(&spec.hardware)?;
    let sys = resolve_system(spec)?;
    let est = spec.estimator.build()?;

    let graph = build_graph(&module);
    let sliced = split(&graph, spec.split);
    validate_slicing(&sliced, &graph).map_err(|e| AppError::new(Stage::Slice, e.to_string()))?;

    let estimate = || api.estimate_all(&sliced.regions, &hw, est.as_ref());
    let batch = match spec.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| AppError::new(Stage::Estimate, e.to_string()))?
            .install(estimate),
        None => estimate(),
    }
    .map_err(|e| AppError::new(Stage::Estimate, e.to_string()))?;
    let results: HashMap<usize, EstimatorResult> = batch.results.iter().cloned().enumerate().collect();

    let trace = build_trace(&sliced, &results, &graph, &sys).map_err(|e| AppError::new(Stage::Trace, e.to_string()))?;
    let sim = simulate(&trace, &sys).map_err(|e| AppError::new(Stage::Simulate, e.to_string()))?;
    let wall_ms = if spec.stable_output {
        0.0
    } else {
        started.elapsed().as_secs_f64() * 1e3
    };

    let mut row = ResultRow {
        workload: workload_name(&spec.workload),
        system: sys.name.clone(),
        hardware: hw.name.clone(),
        estimator: est.name().to_string(),
        split: spec.split.as_str().to_string(),
        step_time_ns: sim.total_ns,
        comp_time_ns: sim.comp_ns,
        comm_time_ns: sim.comm_ns,
        cache_hits: batch.hits,
        cache_misses: batch.misses,
        sim_wall_ms: wall_ms,
        reference_ns: None,
        mape_pct: None,
    };
    if let Some(path) = &spec.reference {
        let refs = load_references(path)?;
        let found = lookup_reference(&refs, &row.workload, &[&spec.hardware, &hw.name, &sys.name]);
        if let Some(secs) = found {
            row.attach_reference(secs)?;
        } else {
            log::warn!("no reference for {}:{}", row.workload, row.hardware);
        }
    }
    log::debug!(
        "{} regions, {} comm nodes, critical path {:?}",
        sliced.regions.len(),
        sliced.comm_nodes.len(),
        sim.critical_path
    );
    Ok(RunOutcome {
        cache: CacheStats {
            hits: batch.hits,
            misses: batch.misses,
            unique_keys: batch.misses,
        },
        regions: batch.results,
        compile_args: api.get_compile_args(est.as_ref()),
        exec_args: api.get_exec_args(est.as_ref()),
        graph_dump: graph.edge_list(),
        row,
        trace,
        sim,
    })
}

/// Replace `path` with `contents` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), AppError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| AppError::at(Stage::Write, path, e))?;
    tmp.write_all(contents).map_err(|e| AppError::at(Stage::Write, path, e))?;
    tmp.persist(path).map_err(|e| AppError::at(Stage::Write, path, e.error))?;
    Ok(())
}

/// Run one simulation with a fresh cache and write the requested artifacts.
pub fn run_simulation(spec: &RunSpec) -> Result<RunOutcome, AppError> {
    let api = ComputeApi::new().with_runs(spec.runs);
    let out = run_with_api(spec, &api)?;
    if let Some(p) = &spec.trace_out {
        write_atomic(p, serialize_trace(&out.trace).as_bytes())?;
    }
    if let Some(p) = &spec.csv_out {
        write_atomic(p, write_csv(std::slice::from_ref(&out.row))?.as_bytes())?;
    }
    if let Some(p) = &spec.svg_out {
        write_atomic(p, emit_svg_bar_chart(std::slice::from_ref(&out.row), Series::Estimator)?.as_bytes())?;
    }
    if let Some(p) = &spec.graph_out {
        write_atomic(p, out.graph_dump.as_bytes())?;
    }
    Ok(out)
}
