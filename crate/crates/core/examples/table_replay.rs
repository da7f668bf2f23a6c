//! Replay measured region latencies from a table, falling back to the
//! roofline for regions that were never measured.

use hlosim::app::{blocks_module, BlocksSpec};
use hlosim::estimate::{ComputeApi, HardwareConfig, LatencyTable, TableEstimator};
use hlosim::graph::build_graph;
use hlosim::ir::parse_module;
use hlosim::slicer::dependency_aware_split;

fn main() {
    let text = blocks_module(&BlocksSpec::default()).unwrap();
    let sliced = dependency_aware_split(&build_graph(&parse_module(&text).unwrap()));

    let mut table = LatencyTable::new("bench-2026-10");
    table.insert_ns(&sliced.regions[0].canonical_key, 2_500.0).unwrap();
    let json = table.to_json();
    println!("table file:\n{json}");

    let est = TableEstimator {
        table: LatencyTable::from_json_str(&json, "inline").unwrap(),
        source: "inline".into(),
        fallback: true,
    };
    let api = ComputeApi::new();
    let hw = HardwareConfig::preset("h100").unwrap();
    let batch = api.estimate_all(&sliced.regions, &hw, &est).unwrap();
    for (region, r) in sliced.regions.iter().zip(&batch.results).take(6) {
        println!("region{:<3} {:>10.3e} s  {:?}", region.region_id, r.latency, r.provenance);
    }
    println!("hits {} misses {}", batch.hits, batch.misses);
    println!("compile args {:?}", api.get_compile_args(&est));
    println!("exec args {:?}", api.get_exec_args(&est));
}
