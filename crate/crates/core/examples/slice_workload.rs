//! Compare the linear and dependency-aware splits of a generated workload.

use hlosim::app::{blocks_module, BlocksSpec};
use hlosim::graph::build_graph;
use hlosim::ir::parse_module;
use hlosim::slicer::{split, validate_slicing, SplitKind};

fn main() {
    let text = blocks_module(&BlocksSpec { layers: 3, ..BlocksSpec::default() }).unwrap();
    let graph = build_graph(&parse_module(&text).unwrap());
    for kind in [SplitKind::Linear, SplitKind::DependencyAware] {
        let sliced = split(&graph, kind);
        validate_slicing(&sliced, &graph).unwrap();
        println!("{}: {} regions, {} collectives", kind.as_str(), sliced.regions.len(), sliced.comm_nodes.len());
        for r in &sliced.regions {
            println!("  region{} ops {:?} key {}", r.region_id, r.member_ops, r.canonical_key.short());
        }
        let order: Vec<String> = sliced.order.iter().map(|s| s.to_string()).collect();
        println!("  order {}", order.join(" -> "));
    }
}
