//! Command-line interface. The `hlosim` binary only calls [`main_with_args`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::app::{
    blocks_module, gemm_module, run_simulation, sweep, transitions_csv, AppError, BlocksSpec,
    EstimatorChoice, GemmCollective, GemmSpec, RunSpec, Stage, SweepSpec,
};
use crate::ir::ElementType;
use crate::slicer::SplitKind;

/// Environment variable holding the log filter (`error`, `warn`, `info`, `debug`).
pub const LOG_ENV: &str = "HLOSIM_LOG";

#[derive(Debug, Parser)]
#[command(name = "hlosim", version, about = "Training-step latency simulator for StableHLO workloads")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one workload on one system.
    Simulate(SimulateArgs),
    /// Simulate workloads across several hardware presets.
    Sweep(SweepArgs),
    /// Write a synthetic workload.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorKind {
    Roofline,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fallback {
    Roofline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Linear,
    Dependency,
}

impl From<SplitArg> for SplitKind {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Linear => SplitKind::Linear,
            SplitArg::Dependency => SplitKind::DependencyAware,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    /// System config JSON; defaults to the preset matching --hardware.
    #[arg(long)]
    pub system: Option<PathBuf>,
    /// Internode bandwidth in GB/s for hierarchical systems.
    #[arg(long)]
    pub internode_gbs: Option<f64>,
    /// Multiply the intranode bandwidth by this factor.
    #[arg(long)]
    pub bandwidth_scale: Option<f64>,
    #[arg(long, value_enum, default_value = "roofline")]
    pub estimator: EstimatorKind,
    /// Latency table for --estimator table.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Answer table misses with this estimator.
    #[arg(long, value_enum)]
    pub fallback: Option<Fallback>,
    /// Fail on ops without a FLOP rule instead of charging memory only.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, value_enum, default_value = "linear")]
    pub split: SplitArg,
    #[arg(long)]
    pub csv_out: Option<PathBuf>,
    #[arg(long)]
    pub svg_out: Option<PathBuf>,
    /// CSV with `label,reference_seconds`.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Override the recorded repetition count.
    #[arg(long)]
    pub runs: Option<u32>,
    /// Worker threads for region estimation.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Report sim_wall_ms as 0 for byte-identical reruns.
    #[arg(long)]
    pub stable_output: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub workload: PathBuf,
    /// Hardware preset (a100x4, h100, ...) or JSON file.
    #[arg(long, default_value = "a100x4")]
    pub hardware: String,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    /// Write the operation graph as an edge list.
    #[arg(long)]
    pub dump_graph: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, required = true, value_delimiter = ',')]
    pub workload: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "a100x4,h100x4,h200x4,b200x4")]
    pub hardware: Vec<String>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Per-transition speedup table.
    #[arg(long)]
    pub transitions_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Gemm,
    Blocks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CollectiveArg {
    None,
    #[value(name = "all_reduce")]
    AllReduce,
    #[value(name = "all_gather")]
    AllGather,
    #[value(name = "reduce_scatter")]
    ReduceScatter,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    #[arg(long, default_value_t = 4096)]
    pub m: u64,
    #[arg(long, default_value_t = 4096)]
    pub n: u64,
    #[arg(long, default_value_t = 4096)]
    pub k: u64,
    #[arg(long, default_value = "bf16")]
    pub dtype: String,
    #[arg(long, value_enum, default_value = "all_reduce")]
    pub collective: CollectiveArg,
    /// Collective group size used to shape gathered or scattered results.
    #[arg(long, default_value_t = 4)]
    pub group: u64,
    #[arg(long, default_value_t = 4)]
    pub layers: usize,
    #[arg(long, default_value_t = 128)]
    pub batch: u64,
    #[arg(long, default_value_t = 1024)]
    pub hidden: u64,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

fn estimator(p: &PipelineArgs) -> Result<EstimatorChoice, AppError> {
    match (p.estimator, &p.table) {
        (EstimatorKind::Roofline, None) => Ok(EstimatorChoice::Roofline { strict: p.strict }),
        (EstimatorKind::Roofline, Some(_)) => Err(AppError::new(
            Stage::Config,
            "--table is only valid with --estimator table",
        )),
        (EstimatorKind::Table, None) => Err(AppError::new(Stage::Config, "--estimator table needs --table")),
        (EstimatorKind::Table, Some(path)) => Ok(EstimatorChoice::Table {
            path: path.clone(),
            fallback: p.fallback.is_some(),
        }),
    }
}

fn run_spec(workload: PathBuf, hardware: String, p: &PipelineArgs) -> Result<RunSpec, AppError> {
    Ok(RunSpec {
        system: p.system.clone(),
        internode_gbs: p.internode_gbs,
        bandwidth_scale: p.bandwidth_scale,
        estimator: estimator(p)?,
        split: p.split.into(),
        csv_out: p.csv_out.clone(),
        svg_out: p.svg_out.clone(),
        reference: p.reference.clone(),
        runs: p.runs,
        threads: p.threads,
        stable_output: p.stable_output,
        ..RunSpec::new(workload, hardware)
    })
}

impl SimulateArgs {
    pub fn to_spec(&self) -> Result<RunSpec, AppError> {
        let mut spec = run_spec(self.workload.clone(), self.hardware.clone(), &self.pipeline)?;
        spec.trace_out = self.trace_out.clone();
        spec.graph_out = self.dump_graph.clone();
        Ok(spec)
    }
}

impl SweepArgs {
    pub fn to_spec(&self) -> Result<SweepSpec, AppError> {
        let first = self.workload.first().cloned().unwrap_or_default();
        Ok(SweepSpec {
            template: run_spec(first, String::new(), &self.pipeline)?,
            workloads: self.workload.clone(),
            hardware: self.hardware.clone(),
            transitions_out: self.transitions_out.clone(),
        })
    }
}

impl GenArgs {
    pub fn render(&self) -> Result<String, AppError> {
        let dtype = ElementType::from_keyword(&self.dtype)
            .ok_or_else(|| AppError::new(Stage::Generate, format!("unknown dtype `{}`", self.dtype)))?;
        match self.kind {
            GenKind::Gemm => gemm_module(&GemmSpec {
                m: self.m,
                n: self.n,
                k: self.k,
                dtype,
                collective: match self.collective {
                    CollectiveArg::None => GemmCollective::None,
                    CollectiveArg::AllReduce => GemmCollective::AllReduce,
                    CollectiveArg::AllGather => GemmCollective::AllGather,
                    CollectiveArg::ReduceScatter => GemmCollective::ReduceScatter,
                },
                group: self.group,
            }),
            GenKind::Blocks => blocks_module(&BlocksSpec {
                layers: self.layers,
                batch: self.batch,
                hidden: self.hidden,
                dtype,
            }),
        }
    }
}

/// Execute a parsed command. Returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Simulate(a) => a.to_spec().and_then(|s| run_simulation(&s)).map(|out| {
            println!("{}", out.summary());
            0
        }),
        Command::Sweep(a) => a.to_spec().and_then(|s| sweep(&s)).and_then(|out| {
            for r in &out.rows {
                println!(
                    "{} {} step={:.3}us comp={:.3}us comm={:.3}us",
                    r.workload,
                    r.hardware,
                    r.step_time_ns as f64 / 1e3,
                    r.comp_time_ns as f64 / 1e3,
                    r.comm_time_ns as f64 / 1e3
                );
            }
            print!("{}", transitions_csv(&out.transitions)?);
            for (w, m) in &out.mape_by_workload {
                println!("mape workload={w} {m:.2}%");
            }
            for (h, m) in &out.mape_by_hardware {
                println!("mape hardware={h} {m:.2}%");
            }
            if let Some(e) = out.mean_abs_speedup_error {
                println!("mean_abs_speedup_error {e:.2}%");
            }
            println!(
                "cache hits={} misses={} unique_keys={}",
                out.cache.hits, out.cache.misses, out.cache.unique_keys
            );
            for (label, e) in &out.errors {
                eprintln!("error: {label}: {e}");
            }
            Ok(i32::from(!out.errors.is_empty()))
        }),
        Command::Gen(a) => a.render().and_then(|text| match &a.out {
            Some(p) => crate::app::write_atomic(p, text.as_bytes()).map(|()| 0),
            None => {
                print!("{text}");
                Ok(0)
            }
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).try_init();
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}
