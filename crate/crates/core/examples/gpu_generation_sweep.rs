//! Sweep one workload across GPU generations and print speedups.

use hlosim::app::{blocks_module, sweep, transitions_csv, write_csv, BlocksSpec, RunSpec, SweepSpec};

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let workload = dir.path().join("blocks.mlir");
    std::fs::write(&workload, blocks_module(&BlocksSpec { layers: 8, ..BlocksSpec::default() }).unwrap()).unwrap();

    let mut template = RunSpec::new(&workload, "a100");
    template.stable_output = true;
    let out = sweep(&SweepSpec {
        template,
        workloads: vec![workload],
        hardware: ["a100", "h100", "h200", "b200"].map(String::from).to_vec(),
        transitions_out: None,
    })
    .unwrap();
    print!("{}", write_csv(&out.rows).unwrap());
    println!();
    print!("{}", transitions_csv(&out.transitions).unwrap());
    println!("cache hit ratio {:.3}", out.cache.hit_ratio());
}
