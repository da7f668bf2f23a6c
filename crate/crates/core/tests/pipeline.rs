use std::path::{Path, PathBuf};

use hlosim::app::{
    blocks_module, emit_svg_bar_chart, run_simulation, sweep, BlocksSpec, ResultRow, RunSpec, Series,
    SweepSpec,
};
use hlosim::slicer::SplitKind;

fn write_blocks(dir: &Path, layers: usize) -> PathBuf {
    let p = dir.join(format!("blocks{layers}.mlir"));
    std::fs::write(&p, blocks_module(&BlocksSpec { layers, ..BlocksSpec::default() }).unwrap()).unwrap();
    p
}

fn outputs(dir: &Path, workload: &Path, threads: Option<usize>, split: SplitKind, tag: &str) -> [Vec<u8>; 3] {
    let mut spec = RunSpec::new(workload, "h100");
    spec.split = split;
    spec.threads = threads;
    spec.stable_output = true;
    let names = ["csv", "json", "svg"].map(|ext| dir.join(format!("{tag}.{ext}")));
    spec.csv_out = Some(names[0].clone());
    spec.trace_out = Some(names[1].clone());
    spec.svg_out = Some(names[2].clone());
    run_simulation(&spec).unwrap();
    names.map(|p| std::fs::read(p).unwrap())
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let w = write_blocks(dir.path(), 16);
    for split in [SplitKind::Linear, SplitKind::DependencyAware] {
        let base = outputs(dir.path(), &w, None, split, "base");
        for (i, threads) in [None, Some(1), Some(2), Some(8)].into_iter().enumerate() {
            let again = outputs(dir.path(), &w, threads, split, &format!("run{i}"));
            assert_eq!(again, base, "{split:?} threads {threads:?}");
        }
    }
}

fn blocks_sweep(dir: &Path, scale: Option<f64>, split: SplitKind) -> Vec<ResultRow> {
    let w = write_blocks(dir, 8);
    let mut template = RunSpec::new(&w, "a100");
    template.bandwidth_scale = scale;
    template.split = split;
    template.stable_output = true;
    let out = sweep(&SweepSpec {
        template,
        workloads: vec![w],
        hardware: ["a100", "h100", "h200", "b200"].map(String::from).to_vec(),
        transitions_out: None,
    })
    .unwrap();
    assert!(out.errors.is_empty());
    assert_eq!(out.transitions.len(), 3);
    out.rows
}

#[test]
fn newer_gpus_are_strictly_faster() {
    let dir = tempfile::tempdir().unwrap();
    for split in [SplitKind::Linear, SplitKind::DependencyAware] {
        let rows = blocks_sweep(dir.path(), None, split);
        let steps: Vec<u64> = rows.iter().map(|r| r.step_time_ns).collect();
        assert!(steps.windows(2).all(|w| w[0] > w[1]), "{steps:?}");
    }
}

#[test]
fn slower_links_raise_comm_share() {
    let dir = tempfile::tempdir().unwrap();
    let base = blocks_sweep(dir.path(), None, SplitKind::Linear);
    let slow = blocks_sweep(dir.path(), Some(0.1), SplitKind::Linear);
    for (a, b) in base.iter().zip(&slow) {
        let share = |r: &ResultRow| r.comm_time_ns as f64 / r.step_time_ns as f64;
        assert!(share(b) > share(a), "{}: {} vs {}", a.hardware, share(a), share(b));
        assert_eq!(a.comp_time_ns, b.comp_time_ns);
        assert!(b.step_time_ns > a.step_time_ns);
    }
}

fn golden_rows() -> Vec<ResultRow> {
    let hw = ["a100", "h100", "h200", "b200", "tpuv3", "gh200"];
    let steps = [440_509u64, 69_449, 69_449, 30_542, 2_170_000, 71_000];
    hw.iter()
        .zip(steps)
        .enumerate()
        .map(|(i, (h, step))| ResultRow {
            workload: if i < 4 { "gemm".into() } else { "blocks<&>".into() },
            system: format!("{h}x4"),
            hardware: h.to_string(),
            estimator: "roofline".into(),
            split: "linear".into(),
            step_time_ns: step,
            comp_time_ns: step * 3 / 4,
            comm_time_ns: step / 4,
            cache_hits: 0,
            cache_misses: 1,
            sim_wall_ms: 0.0,
            reference_ns: None,
            mape_pct: None,
        })
        .collect()
}

#[test]
fn svg_matches_golden() {
    let svg = emit_svg_bar_chart(&golden_rows(), Series::Hardware).unwrap();
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/six_rows.svg");
    if std::env::var_os("HLOSIM_BLESS").is_some() {
        std::fs::write(&path, &svg).unwrap();
    }
    let golden = std::fs::read_to_string(&path).expect("golden file; rerun with HLOSIM_BLESS=1 to create");
    assert_eq!(svg, golden);
    assert!(svg.contains("blocks&lt;&amp;&gt;"));
}
