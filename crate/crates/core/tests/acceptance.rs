//! Acceptance runner: one PASS/FAIL line per criterion, with wall time
//! checked against each criterion's budget. Exits nonzero on any failure.

mod common;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hlosim::app::{
    blocks_module, gemm_module, sweep, BlocksSpec, GemmCollective, GemmSpec, RunSpec, SweepSpec,
};
use hlosim::estimate::{roofline_estimate, Bound, ComputeApi, HardwareConfig, RooflineEstimator};
use hlosim::graph::{build_graph, OpClass, WorkloadGraph};
use hlosim::ir::{parse_module, print_module, AttrValue};
use hlosim::metrics::{mape, mean_absolute, speedup_error, ComparisonRecord};
use hlosim::network::{collective_latency, node_durations, simulate, SystemConfig, Topology};
use hlosim::slicer::{dependency_aware_split, linear_split, validate_slicing, SliceId, SlicedWorkload};
use hlosim::trace::{parse_trace, serialize_trace, CollectiveKind, NodeKind, Trace, TraceError, TraceNode};
use rand::Rng;

type Check = Result<String, String>;
type Expect = (&'static str, fn(&TraceError) -> bool);
type Criterion = (&'static str, u64, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {{
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    }};
}

fn graph(text: &str) -> Result<WorkloadGraph, String> {
    parse_module(text).map(|m| build_graph(&m)).map_err(|e| e.to_string())
}

fn fragment_text() -> &'static str {
    include_str!("../fixtures/matmul_allreduce.mlir")
}

fn c1_parser() -> Check {
    let mut r = common::rng(0xacce);
    let n = 1200;
    for i in 0..n {
        let m = common::random_module(&mut r);
        let text = print_module(&m);
        let back = parse_module(&text).map_err(|e| format!("module {i}: {e}"))?;
        ensure!(back == m, "module {i} changed in round trip");
        ensure!(print_module(&back) == text, "module {i}: printing is not stable");
    }
    let m = parse_module(fragment_text()).map_err(|e| e.to_string())?;
    let body = &m.main().body;
    let names: Vec<&str> = body.iter().map(|o| o.op_name.as_str()).collect();
    ensure!(
        names == ["stablehlo.dot_general", "stablehlo.transpose", "stablehlo.all_reduce"],
        "fragment ops {names:?}"
    );
    ensure!(
        body[0].attr("lhs_contracting_dimensions") == Some(&AttrValue::IntList(vec![0]))
            && body[0].attr("rhs_contracting_dimensions") == Some(&AttrValue::IntList(vec![0]))
            && body[1].attr("permutation") == Some(&AttrValue::IntList(vec![1, 0])),
        "fragment attributes differ"
    );
    Ok(format!("{n} modules round-tripped; fragment has 3 ops"))
}

fn count(g: &WorkloadGraph, c: OpClass) -> usize {
    g.nodes_of(c).count()
}

fn linear_alternates(g: &WorkloadGraph, s: &SlicedWorkload) -> bool {
    let mut of = std::collections::HashMap::new();
    for reg in &s.regions {
        for &m in &reg.member_ops {
            of.insert(m, SliceId::Region(reg.region_id));
        }
    }
    for &c in &s.comm_nodes {
        of.insert(c, SliceId::Comm(c));
    }
    let mut seq: Vec<SliceId> = Vec::new();
    for v in hlosim::graph::topological_order(g).unwrap() {
        if let Some(&id) = of.get(&v) {
            if seq.last() != Some(&id) {
                seq.push(id);
            }
        }
    }
    let distinct: BTreeSet<_> = seq.iter().collect();
    distinct.len() == seq.len()
        && seq
            .windows(2)
            .all(|w| !(matches!(w[0], SliceId::Region(_)) && matches!(w[1], SliceId::Region(_))))
}

fn c2_slicing() -> Check {
    let mut r = common::rng(0x511ce);
    let n = 550;
    for i in 0..n {
        let g = graph(&common::random_workload(&mut r, 1 + i % 40))?;
        let compute = count(&g, OpClass::Compute);
        let comm = count(&g, OpClass::Communication);
        let lin = linear_split(&g);
        let dep = dependency_aware_split(&g);
        validate_slicing(&lin, &g).map_err(|e| format!("workload {i} linear: {e}"))?;
        validate_slicing(&dep, &g).map_err(|e| format!("workload {i} dependency: {e}"))?;
        ensure!(linear_alternates(&g, &lin), "workload {i}: linear regions not separated by collectives");
        ensure!(
            dep.regions.len() == compute && dep.regions.iter().all(|r| r.member_ops.len() == 1),
            "workload {i}: dependency split is not per-op"
        );
        for s in [&lin, &dep] {
            let members: usize = s.regions.iter().map(|r| r.member_ops.len()).sum();
            ensure!(
                members == compute && s.comm_nodes.len() == comm && s.order.len() == s.regions.len() + comm,
                "workload {i}: cardinality mismatch"
            );
        }
        ensure!(lin.regions.len() <= comm + 1, "workload {i}: too many linear regions");
    }
    Ok(format!("{n} workloads, both splits valid"))
}

fn c3_roofline() -> Check {
    let a100 = HardwareConfig::preset("a100").map_err(|e| e.to_string())?;
    let h100 = HardwareConfig::preset("h100").map_err(|e| e.to_string())?;
    let fragment = linear_split(&graph(fragment_text())?);
    let r = roofline_estimate(&fragment.regions[0], &a100, false).map_err(|e| e.to_string())?;
    ensure!((r.latency - 1.113e-10).abs() <= 1e-13, "fragment latency {:e}", r.latency);
    ensure!(r.bound == Bound::MemoryBound, "fragment should be memory-bound");

    let gemm = gemm_module(&GemmSpec { collective: GemmCollective::None, ..GemmSpec::default() })
        .map_err(|e| e.to_string())?;
    let g = linear_split(&graph(&gemm)?);
    let ta = roofline_estimate(&g.regions[0], &a100, false).map_err(|e| e.to_string())?.latency;
    let th = roofline_estimate(&g.regions[0], &h100, false).map_err(|e| e.to_string())?.latency;
    ensure!((ta / 4.405e-4 - 1.0).abs() <= 1e-3, "A100 GEMM {ta:e}");
    ensure!((th / 6.945e-5 - 1.0).abs() <= 1e-3, "H100 GEMM {th:e}");

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let w = dir.path().join("gemm.mlir");
    std::fs::write(&w, &gemm).map_err(|e| e.to_string())?;
    let mut template = RunSpec::new(&w, "a100");
    template.stable_output = true;
    let out = sweep(&SweepSpec {
        template,
        workloads: vec![w],
        hardware: vec!["a100".into(), "h100".into()],
        transitions_out: None,
    })
    .map_err(|e| e.to_string())?;
    let s = out.transitions.first().ok_or("no transition")?.speedup_sim;
    ensure!((s - 6.343).abs() <= 1e-3, "sweep speedup {s}");
    Ok(format!("fragment {:.4e} s, GEMM {ta:.4e}/{th:.4e} s, speedup {s:.4}", r.latency))
}

fn c4_fusion() -> Check {
    let hw = HardwareConfig::preset("a100").map_err(|e| e.to_string())?;
    let mut r = common::rng(0xf05e);
    let (mut checked, mut singles) = (0, 0);
    while checked < 220 {
        let g = graph(&common::random_compute_workload(&mut r, 1 + checked % 20))?;
        let lin = linear_split(&g);
        if lin.regions.len() != 1 {
            continue;
        }
        let dep = dependency_aware_split(&g);
        let fused = roofline_estimate(&lin.regions[0], &hw, false).map_err(|e| e.to_string())?.latency;
        let mut parts = 0.0;
        for reg in &dep.regions {
            parts += roofline_estimate(reg, &hw, false).map_err(|e| e.to_string())?.latency;
        }
        ensure!(fused <= parts * (1.0 + 4.0 * f64::EPSILON), "region {checked}: {fused:e} > {parts:e}");
        if dep.regions.len() == 1 {
            ensure!(fused.to_bits() == parts.to_bits(), "single-op region {checked} differs");
            singles += 1;
        }
        checked += 1;
    }
    Ok(format!("{checked} regions, {singles} single-op equalities"))
}

fn c5_cache() -> Check {
    let text = blocks_module(&BlocksSpec { layers: 32, ..BlocksSpec::default() }).map_err(|e| e.to_string())?;
    let s = dependency_aware_split(&graph(&text)?);
    let hw = HardwareConfig::preset("b200").map_err(|e| e.to_string())?;
    let est = RooflineEstimator::default();
    let api = ComputeApi::new();
    let batch = api.estimate_all(&s.regions, &hw, &est).map_err(|e| e.to_string())?;
    let distinct: BTreeSet<&str> = s.regions.iter().map(|r| r.canonical_key.as_str()).collect();
    let k = s.regions.len() / 32;
    ensure!(distinct.len() <= 4, "{} distinct keys", distinct.len());
    ensure!(
        api.estimator_invocations() == distinct.len() as u64,
        "{} invocations for {} keys",
        api.estimator_invocations(),
        distinct.len()
    );
    ensure!(batch.hits >= (32 * k - distinct.len()) as u64, "{} hits", batch.hits);
    let plain = ComputeApi::uncached().estimate_all(&s.regions, &hw, &est).map_err(|e| e.to_string())?;
    ensure!(
        batch.results.iter().zip(&plain.results).all(|(a, b)| a == b && a.latency.to_bits() == b.latency.to_bits()),
        "cached and uncached results differ"
    );
    let stats = api.cache_stats();
    Ok(format!(
        "{} regions, {} keys, {} hits, hit ratio {:.3}",
        s.regions.len(),
        distinct.len(),
        batch.hits,
        stats.hit_ratio()
    ))
}

fn flat(p: u32, beta: f64, alpha: f64) -> SystemConfig {
    SystemConfig {
        name: "flat".into(),
        device_count: p,
        devices_per_node: p,
        intranode_bandwidth: beta,
        internode_bandwidth: None,
        link_latency: alpha,
        topology: Topology::AllToAllFlat,
        note: None,
    }
}

fn c6_collectives() -> Check {
    let lat = |k, n, p, sys: &SystemConfig| collective_latency(k, n, p, sys).map_err(|e| e.to_string());
    let mut r = common::rng(0xc011);
    for i in 0..1000 {
        let n: u64 = r.gen_range(0..1 << 34);
        let p: u32 = r.gen_range(1..=1024);
        let sys = flat(p, r.gen_range(1e8..1e12), r.gen_range(0.0..1e-5));
        let ar = lat(CollectiveKind::AllReduce, n, p, &sys)?;
        let ag = lat(CollectiveKind::AllGather, n, p, &sys)?;
        let rs = lat(CollectiveKind::ReduceScatter, n, p, &sys)?;
        ensure!(ar == ag + rs, "sample {i}: {ar:e} != {ag:e} + {rs:e}");
        for kind in CollectiveKind::ALL {
            ensure!(lat(kind, n, 1, &sys)? == 0.0, "sample {i}: p = 1 costs time");
        }
    }
    let sizes = [0u64, 1, 72, 4096, 1 << 20, 1 << 30];
    let groups = [2u32, 4, 8, 16, 64];
    for kind in CollectiveKind::ALL {
        for &alpha in &[0.0, 1e-6] {
            for &beta in &[1e9, 1e11] {
                let sys = flat(64, beta, alpha);
                for &p in &groups {
                    let ts: Vec<f64> = sizes.iter().map(|&n| lat(kind, n, p, &sys)).collect::<Result<_, _>>()?;
                    ensure!(ts.windows(2).all(|w| w[0] <= w[1]), "{kind:?} not monotone in bytes");
                }
                if kind != CollectiveKind::CollectivePermute {
                    for &n in &sizes {
                        let ts: Vec<f64> = groups.iter().map(|&p| lat(kind, n, p, &sys)).collect::<Result<_, _>>()?;
                        ensure!(ts.windows(2).all(|w| w[0] <= w[1]), "{kind:?} not monotone in group size");
                    }
                }
            }
            for &n in &sizes {
                let slow = lat(kind, n, 8, &flat(8, 1e9, alpha))?;
                let fast = lat(kind, n, 8, &flat(8, 1e11, alpha))?;
                ensure!(fast <= slow, "{kind:?} not monotone in bandwidth");
            }
        }
    }
    let t = lat(CollectiveKind::AllReduce, 72, 4, &flat(4, 100e9, 0.0))?;
    ensure!(t == 1.08e-9, "72 B all-reduce took {t:e} s");
    Ok("1000 samples; 72 B all-reduce = 1.08e-9 s".into())
}

fn c7_scheduler() -> Check {
    let sys = flat(4, 50e9, 2e-7);
    let mut r = common::rng(0x5c4ed);
    let n = 320;
    for i in 0..n {
        let trace = common::random_trace(&mut r, 12);
        let d = node_durations(&trace, &sys).map_err(|e| e.to_string())?;
        let sim = simulate(&trace, &sys).map_err(|e| e.to_string())?;
        let oracle = common::tick_oracle(&trace, &d);
        ensure!(sim.total_ns == oracle, "trace {i}: simulate {} vs oracle {oracle}", sim.total_ns);
    }
    let unit = flat(2, 1e9, 0.0);
    let trace = Trace {
        version: 1,
        system_name: "unit".into(),
        nodes: vec![
            TraceNode { id: 0, name: "mm".into(), kind: NodeKind::Comp { latency_ns: 10_000 }, deps: vec![] },
            TraceNode {
                id: 1,
                name: "send".into(),
                kind: NodeKind::Comm { kind: CollectiveKind::CollectivePermute, bytes: 4_000, group_size: 2 },
                deps: vec![],
            },
            TraceNode { id: 2, name: "join".into(), kind: NodeKind::Comp { latency_ns: 1_000 }, deps: vec![0, 1] },
        ],
    };
    let total = simulate(&trace, &unit).map_err(|e| e.to_string())?.total_ns;
    ensure!(total == 11_000, "overlap fixture took {total} ns");
    Ok(format!("{n} traces match the oracle; overlap fixture 11 us"))
}

fn c8_metrics() -> Check {
    let m = mape(&[ComparisonRecord::new("a", 110.0, 100.0), ComparisonRecord::new("b", 90.0, 100.0)])
        .map_err(|e| e.to_string())?;
    ensure!((m - 10.0).abs() < 1e-9, "mape {m}");
    let e = speedup_error(2.0, 1.7).map_err(|e| e.to_string())?;
    ensure!((e - 15.0).abs() < 1e-9, "speedup error {e}");
    let a = mean_absolute(&[3.0, 7.0, -3.0]).map_err(|e| e.to_string())?;
    let b = mean_absolute(&[15.0, -7.0, 14.0]).map_err(|e| e.to_string())?;
    ensure!(format!("{a:.1}") == "4.3", "first aggregation {a}");
    ensure!(format!("{b:.1}") == "12.0", "second aggregation {b}");
    Ok(format!("mape {m:.3}, speedup error {e:+.3}, aggregations {a:.1} and {b:.1}"))
}

fn schema_path(e: &TraceError) -> Option<&str> {
    match e {
        TraceError::Schema { path, .. } => Some(path),
        _ => None,
    }
}

fn c9_trace() -> Check {
    let mut r = common::rng(0x7ace);
    let n = 550;
    for i in 0..n {
        let t = common::random_trace(&mut r, 16);
        let text = serialize_trace(&t);
        let back = parse_trace(&text).map_err(|e| format!("trace {i}: {e}"))?;
        ensure!(back == t && serialize_trace(&back) == text, "trace {i} changed in round trip");
    }
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/traces");
    let expect: &[Expect] = &[
        ("missing_latency", |e| schema_path(e) == Some("/nodes/0/latency_ns")),
        ("unknown_top_level", |e| schema_path(e) == Some("/extra")),
        ("comm_field_on_comp", |e| schema_path(e) == Some("/nodes/0/comm_bytes")),
        ("bad_node_type", |e| schema_path(e) == Some("/nodes/0/type")),
        ("unknown_comm_kind", |e| matches!(e, TraceError::UnknownCommKind { .. })),
        ("zero_group", |e| schema_path(e) == Some("/nodes/0/group_size")),
        ("negative_latency", |e| schema_path(e) == Some("/nodes/0/latency_ns")),
        ("duplicate_id", |e| schema_path(e) == Some("/nodes/1/id")),
        ("sparse_ids", |e| schema_path(e) == Some("/nodes/0/id")),
        ("unknown_dep", |e| schema_path(e) == Some("/nodes/0/deps/0")),
        ("duplicate_dep", |e| schema_path(e) == Some("/nodes/1/deps/1")),
        ("cycle", |e| matches!(e, TraceError::Cycle(_))),
        ("forward_ref", |e| schema_path(e) == Some("/nodes/0/deps/0")),
        ("bad_version", |e| schema_path(e) == Some("/version")),
        ("not_json", |e| matches!(e, TraceError::Json(_))),
    ];
    for (name, check) in expect {
        let text = std::fs::read_to_string(dir.join(format!("{name}.json"))).map_err(|e| e.to_string())?;
        match parse_trace(&text) {
            Ok(_) => return Err(format!("{name} was accepted")),
            Err(e) => ensure!(check(&e), "{name}: unexpected error {e}"),
        }
    }
    Ok(format!("{n} traces round-tripped; {} schema fixtures rejected", expect.len()))
}

fn run_outputs(dir: &Path, workload: &Path, threads: Option<usize>, tag: &str) -> Result<Vec<Vec<u8>>, String> {
    let mut spec = RunSpec::new(workload, "h100");
    spec.split = hlosim::slicer::SplitKind::DependencyAware;
    spec.threads = threads;
    spec.stable_output = true;
    let paths: Vec<_> = ["csv", "json", "svg"].iter().map(|e| dir.join(format!("{tag}.{e}"))).collect();
    spec.csv_out = Some(paths[0].clone());
    spec.trace_out = Some(paths[1].clone());
    spec.svg_out = Some(paths[2].clone());
    hlosim::app::run_simulation(&spec).map_err(|e| e.to_string())?;
    paths.iter().map(|p| std::fs::read(p).map_err(|e| e.to_string())).collect()
}

fn c10_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let w = dir.path().join("blocks.mlir");
    let text = blocks_module(&BlocksSpec { layers: 16, ..BlocksSpec::default() }).map_err(|e| e.to_string())?;
    std::fs::write(&w, text).map_err(|e| e.to_string())?;
    let base = run_outputs(dir.path(), &w, None, "base")?;
    let runs = [None, Some(1), Some(4)];
    for (i, threads) in runs.iter().enumerate() {
        let again = run_outputs(dir.path(), &w, *threads, &format!("run{i}"))?;
        ensure!(again == base, "outputs differ with threads {threads:?}");
    }
    Ok(format!("{} reruns byte-identical", runs.len()))
}

fn c11_trends() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let w = dir.path().join("blocks.mlir");
    let text = blocks_module(&BlocksSpec { layers: 8, ..BlocksSpec::default() }).map_err(|e| e.to_string())?;
    std::fs::write(&w, text).map_err(|e| e.to_string())?;
    let run = |scale: Option<f64>| -> Result<Vec<hlosim::app::ResultRow>, String> {
        let mut template = RunSpec::new(&w, "a100");
        template.bandwidth_scale = scale;
        template.stable_output = true;
        let out = sweep(&SweepSpec {
            template,
            workloads: vec![w.clone()],
            hardware: ["a100", "h100", "h200", "b200"].map(String::from).to_vec(),
            transitions_out: None,
        })
        .map_err(|e| e.to_string())?;
        ensure!(out.errors.is_empty(), "sweep errors: {:?}", out.errors);
        Ok(out.rows)
    };
    let base = run(None)?;
    let steps: Vec<u64> = base.iter().map(|r| r.step_time_ns).collect();
    ensure!(steps.windows(2).all(|w| w[0] > w[1]), "step times not strictly decreasing: {steps:?}");
    let slow = run(Some(0.1))?;
    let share = |r: &hlosim::app::ResultRow| r.comm_time_ns as f64 / r.step_time_ns as f64;
    for (a, b) in base.iter().zip(&slow) {
        ensure!(share(b) > share(a), "{}: comm share {:.3} -> {:.3}", a.hardware, share(a), share(b));
    }
    Ok(format!(
        "step ns {steps:?}; A100 comm share {:.3} -> {:.3}",
        share(&base[0]),
        share(&slow[0])
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("parser round-trip", 10, c1_parser),
        ("slicing correctness", 30, c2_slicing),
        ("roofline exactness", 5, c3_roofline),
        ("fusion inequality", 10, c4_fusion),
        ("cache behavior", 10, c5_cache),
        ("collective identities", 5, c6_collectives),
        ("scheduler oracle", 30, c7_scheduler),
        ("metrics", 1, c8_metrics),
        ("trace format", 10, c9_trace),
        ("end-to-end determinism", 10, c10_determinism),
        ("trend reproduction", 30, c11_trends),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let over = took > Duration::from_secs(*budget);
        let (status, detail) = match (&result, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over the {budget} s budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{status} {:>2} {name:<24} {:>8.3} s (limit {budget} s)  {detail}", i + 1, took.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
