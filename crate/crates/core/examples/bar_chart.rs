//! Render simulated step times as an SVG bar chart.

use hlosim::app::{emit_svg_bar_chart, gemm_module, run_with_api, GemmSpec, RunSpec, Series};
use hlosim::estimate::ComputeApi;

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let workload = dir.path().join("gemm.mlir");
    std::fs::write(&workload, gemm_module(&GemmSpec::default()).unwrap()).unwrap();
    let api = ComputeApi::new();
    let rows: Vec<_> = ["a100", "h100", "h200", "b200"]
        .iter()
        .map(|hw| {
            let mut spec = RunSpec::new(&workload, *hw);
            spec.stable_output = true;
            run_with_api(&spec, &api).unwrap().row
        })
        .collect();
    let svg = emit_svg_bar_chart(&rows, Series::Hardware).unwrap();
    let out = std::env::args().nth(1).unwrap_or_else(|| "step_times.svg".into());
    std::fs::write(&out, svg).unwrap();
    println!("wrote {out}");
}
