//! Build a COMP/COMM trace for a small matmul fixture, write it as JSON and read it back.

use std::collections::HashMap;

use hlosim::estimate::{ComputeApi, HardwareConfig, RooflineEstimator};
use hlosim::graph::build_graph;
use hlosim::ir::parse_module;
use hlosim::network::SystemConfig;
use hlosim::slicer::linear_split;
use hlosim::trace::{build_trace, parse_trace, serialize_trace};

fn main() {
    let graph = build_graph(&parse_module(include_str!("../fixtures/matmul_allreduce.mlir")).unwrap());
    let sliced = linear_split(&graph);
    let hw = HardwareConfig::preset("a100").unwrap();
    let sys = SystemConfig::preset("a100x4").unwrap();
    let batch = ComputeApi::new()
        .estimate_all(&sliced.regions, &hw, &RooflineEstimator::default())
        .unwrap();
    let results: HashMap<_, _> = batch.results.into_iter().enumerate().collect();
    let trace = build_trace(&sliced, &results, &graph, &sys).unwrap();
    let json = serialize_trace(&trace);
    print!("{json}");
    assert_eq!(parse_trace(&json).unwrap(), trace);
    println!("round trip ok: {} nodes, {} edges", trace.nodes.len(), trace.edge_count());
}
