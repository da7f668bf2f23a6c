//! Run the full pipeline on a generated workload and report the step time.

use hlosim::app::{blocks_module, run_simulation, BlocksSpec, RunSpec};
use hlosim::slicer::SplitKind;

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let workload = dir.path().join("blocks.mlir");
    std::fs::write(&workload, blocks_module(&BlocksSpec::default()).unwrap()).unwrap();

    for split in [SplitKind::Linear, SplitKind::DependencyAware] {
        let mut spec = RunSpec::new(&workload, "a100x4");
        spec.split = split;
        let out = run_simulation(&spec).unwrap();
        println!("{}", out.summary());
        println!("  critical path {:?}", out.sim.critical_path);
        println!("  exposed communication {} ns", out.sim.exposed_comm_ns);
    }
}
