//! Roofline latency of a square GEMM on every hardware preset.

use hlosim::app::{gemm_module, GemmCollective, GemmSpec};
use hlosim::estimate::{roofline_estimate, HardwareConfig, HARDWARE_PRESETS};
use hlosim::graph::build_graph;
use hlosim::ir::parse_module;
use hlosim::slicer::linear_split;

fn main() {
    let spec = GemmSpec { collective: GemmCollective::None, ..GemmSpec::default() };
    let graph = build_graph(&parse_module(&gemm_module(&spec).unwrap()).unwrap());
    let region = &linear_split(&graph).regions[0];
    for preset in HARDWARE_PRESETS {
        let hw = HardwareConfig::preset(preset).unwrap();
        let r = roofline_estimate(region, &hw, false).unwrap();
        println!(
            "{:<6} {:>12.4e} s  {:?}  ({} FLOP, {} B)",
            hw.name, r.latency, r.bound, r.flops, r.bytes_moved
        );
    }
}
