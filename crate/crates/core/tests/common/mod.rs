//! Seeded random generators and reference implementations shared by the
//! integration tests and the acceptance runner.
#![allow(dead_code)]

use std::fmt::Write;

use hlosim::ir::{
    Argument, AttrValue, Attribute, ElementType, Function, HloModule, HloOperation, Region,
    TensorType,
};
use hlosim::trace::{CollectiveKind, NodeKind, Trace, TraceNode};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Modules for printer/parser round trips
// ---------------------------------------------------------------------------

pub fn random_type(r: &mut impl Rng) -> TensorType {
    let rank = r.gen_range(0..=3);
    let shape: Vec<u64> = (0..rank).map(|_| r.gen_range(0..9)).collect();
    TensorType::new(shape, *ElementType::ALL.choose(r).unwrap())
}

fn random_types(r: &mut impl Rng, n: usize) -> Vec<TensorType> {
    (0..n).map(|_| random_type(r)).collect()
}

const STR_CHARS: &[char] = &[
    'a', 'z', 'Q', '0', ' ', '"', '\\', '\n', '\t', '\u{1}', '{', '}', ',', '=', ':', 'é', '%', '<',
];

pub fn random_string(r: &mut impl Rng) -> String {
    let n = r.gen_range(0..8);
    (0..n).map(|_| *STR_CHARS.choose(r).unwrap()).collect()
}

const OPAQUE: &[&str] = &[
    "#stablehlo<comparison_direction LT>",
    "dense<1.000000e+00> : tensor<f32>",
    "dense<0.0> : tensor<2xf32>",
    "#stablehlo.dot<lhs_contracting_dimensions = [1], rhs_contracting_dimensions = [0]>",
    "array<i32: 1, 2>",
    "@callee",
    "unit",
    "#foo.bar<{a = 1, b = [2, 3]}>",
    "2.5 : f32",
];

fn random_ints(r: &mut impl Rng, max_len: usize) -> Vec<i64> {
    let n = r.gen_range(0..=max_len);
    (0..n).map(|_| r.gen_range(-50..1000)).collect()
}

pub fn random_attr_value(r: &mut impl Rng) -> AttrValue {
    match r.gen_range(0..6) {
        0 => AttrValue::Int(r.gen_range(i64::MIN / 2..i64::MAX / 2)),
        1 => AttrValue::IntList(random_ints(r, 5)),
        2 => {
            let n = r.gen_range(1..4);
            AttrValue::IntLists((0..n).map(|_| random_ints(r, 4)).collect())
        }
        3 => AttrValue::Str(random_string(r)),
        4 => AttrValue::Bool(r.gen()),
        _ => AttrValue::Opaque(OPAQUE.choose(r).unwrap().to_string()),
    }
}

const KEYS: &[&str] = &[
    "dimensions", "backend_config", "replica_groups", "weird key", "a.b", "x-y", "_p", "k9", "mhlo.sharding",
];

fn random_attrs(r: &mut impl Rng, max: usize) -> Vec<Attribute> {
    let mut keys: Vec<&str> = KEYS.to_vec();
    keys.shuffle(r);
    let n = r.gen_range(0..=max);
    keys[..n]
        .iter()
        .map(|k| Attribute::new(*k, random_attr_value(r)))
        .collect()
}

const OP_NAMES: &[&str] = &[
    "stablehlo.add", "stablehlo.tanh", "stablehlo.dot_general", "stablehlo.all_reduce",
    "stablehlo.custom_call", "mhlo.fusion", "stablehlo.constant", "vendor.op_x", "stablehlo.reduce",
];

struct Namer(usize);

impl Namer {
    fn next(&mut self) -> usize {
        self.0 += 1;
        self.0
    }
}

fn random_block(
    r: &mut impl Rng,
    names: &mut Namer,
    visible: &mut Vec<String>,
    len: usize,
    depth: usize,
) -> Vec<HloOperation> {
    let mut ops = Vec::with_capacity(len);
    for id in 0..len {
        let n_operands = if visible.is_empty() { 0 } else { r.gen_range(0..=3) };
        let operand_names: Vec<String> = (0..n_operands)
            .map(|_| visible.choose(r).unwrap().clone())
            .collect();
        let n_results = r.gen_range(0..=3);
        let base = names.next();
        let result_names: Vec<String> = match n_results {
            1 => vec![format!("%{base}")],
            n => (0..n).map(|i| format!("%{base}#{i}")).collect(),
        };
        let region = (depth < 2 && r.gen_bool(0.15)).then(|| {
            let args: Vec<(String, TensorType)> = (0..r.gen_range(0..=2))
                .map(|_| (format!("%r{}", names.next()), random_type(r)))
                .collect();
            let mut inner_visible = visible.clone();
            inner_visible.extend(args.iter().map(|(n, _)| n.clone()));
            let inner_len = r.gen_range(0..=3);
            let ops = random_block(r, names, &mut inner_visible, inner_len, depth + 1);
            let return_names = pick_some(r, &inner_visible, 2);
            let return_types = random_types(r, return_names.len());
            Region {
                args,
                ops,
                return_names,
                return_types,
            }
        });
        let op = HloOperation {
            id,
            result_names: result_names.clone(),
            op_name: OP_NAMES.choose(r).unwrap().to_string(),
            operand_types: random_types(r, operand_names.len()),
            operand_names,
            attributes: random_attrs(r, 3),
            result_types: random_types(r, n_results),
            region,
        };
        visible.extend(result_names);
        ops.push(op);
    }
    ops
}

fn pick_some(r: &mut impl Rng, from: &[String], max: usize) -> Vec<String> {
    if from.is_empty() {
        return Vec::new();
    }
    let n = r.gen_range(0..=max);
    (0..n).map(|_| from.choose(r).unwrap().clone()).collect()
}

fn random_function(r: &mut impl Rng, name: &str, names: &mut Namer) -> Function {
    let args: Vec<Argument> = (0..r.gen_range(0..=4))
        .map(|_| Argument {
            name: format!("%arg{}", names.next()),
            ty: random_type(r),
            attributes: random_attrs(r, 1),
        })
        .collect();
    let mut visible: Vec<String> = args.iter().map(|a| a.name.clone()).collect();
    let len = r.gen_range(0..=12);
    let body = random_block(r, names, &mut visible, len, 0);
    let return_names = pick_some(r, &visible, 3);
    let n_results = r.gen_range(0..=2);
    Function {
        name: name.to_string(),
        visibility: [None, Some("public"), Some("private")]
            .choose(r)
            .unwrap()
            .map(str::to_string),
        args,
        result_types: random_types(r, n_results),
        return_types: random_types(r, return_names.len()),
        body,
        return_names,
    }
}

/// A structurally valid module exercising every construct the printer emits.
pub fn random_module(r: &mut impl Rng) -> HloModule {
    let mut names = Namer(0);
    let mut functions = vec![random_function(r, "main", &mut names)];
    for k in 0..r.gen_range(0..=2) {
        functions.push(random_function(r, &format!("helper{k}"), &mut names));
    }
    functions.shuffle(r);
    HloModule {
        name: r.gen_bool(0.5).then(|| "jit_step".to_string()),
        attributes: if r.gen_bool(0.3) { random_attrs(r, 2) } else { Vec::new() },
        functions,
    }
}

// ---------------------------------------------------------------------------
// Workload DAGs with consistent types
// ---------------------------------------------------------------------------

const COMPUTE_UNARY: &[&str] = &["tanh", "exponential", "negate", "sqrt", "convert"];
const COMPUTE_BINARY: &[&str] = &["add", "multiply", "subtract", "maximum"];

pub const REDUCER: &str = "({\n  ^bb0(%p: tensor<f32>, %q: tensor<f32>):\n    %s = stablehlo.add %p, %q : tensor<f32>\n    stablehlo.return %s : tensor<f32>\n  })";

/// Random DAG of `n` operations over `tensor<16x16xf32>`: elementwise and
/// matmul compute, the four shape-preserving collectives, constants, and the
/// occasional fusion.
pub fn random_workload(r: &mut impl Rng, n: usize) -> String {
    workload_text(r, n, true)
}

/// Same shape as [`random_workload`] without collectives.
pub fn random_compute_workload(r: &mut impl Rng, n: usize) -> String {
    workload_text(r, n, false)
}

fn workload_text(r: &mut impl Rng, n: usize, comm: bool) -> String {
    let t = "tensor<16x16xf32>";
    let n_args = r.gen_range(1..=3);
    let mut visible: Vec<String> = (0..n_args).map(|i| format!("%a{i}")).collect();
    let mut out = String::new();
    let args: Vec<String> = visible.iter().map(|a| format!("{a}: {t}")).collect();
    let _ = writeln!(out, "func.func @main({}) {{", args.join(", "));
    for i in 0..n {
        let pick = |r: &mut dyn rand::RngCore, vis: &[String]| vis[r.gen_range(0..vis.len())].clone();
        let x = pick(r, &visible);
        let y = pick(r, &visible);
        let v = format!("%v{i}");
        let mut roll = r.gen_range(0..100);
        if !comm && (60..=84).contains(&roll) {
            roll -= 60;
        }
        let line = match roll {
            0..=29 => format!("{v} = stablehlo.{} {x} : {t}", COMPUTE_UNARY.choose(r).unwrap()),
            30..=49 => format!("{v} = stablehlo.{} {x}, {y} : {t}", COMPUTE_BINARY.choose(r).unwrap()),
            50..=59 => format!(
                "{v} = stablehlo.dot_general {x}, {y}, contracting_dims = [1] x [0] : ({t}, {t}) -> {t}"
            ),
            60..=74 => format!("{v} = \"stablehlo.all_reduce\"({x}) {REDUCER} : ({t}) -> {t}"),
            75..=79 => format!("{v} = \"stablehlo.all_to_all\"({x}) : ({t}) -> {t}"),
            80..=84 => format!(
                "{v} = \"stablehlo.collective_permute\"({x}) {{source_target_pairs = [[0, 1], [1, 0]]}} : ({t}) -> {t}"
            ),
            85..=92 => format!("{v} = stablehlo.constant dense<1.0> : {t}"),
            _ => format!(
                "{v} = \"xla.fusion\"({x}, {y}) ({{\n  ^bb0(%f{i}a: {t}, %f{i}b: {t}):\n    %f{i}c = stablehlo.multiply %f{i}a, %f{i}b : {t}\n    %f{i}d = stablehlo.tanh %f{i}c : {t}\n    stablehlo.return %f{i}d : {t}\n  }}) : ({t}, {t}) -> {t}"
            ),
        };
        let _ = writeln!(out, "  {line}");
        visible.push(v);
    }
    let ret = visible.last().unwrap();
    let _ = writeln!(out, "  func.return {ret} : {t}\n}}");
    out
}

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

pub fn random_trace(r: &mut impl Rng, max_nodes: usize) -> Trace {
    let n = r.gen_range(0..=max_nodes);
    let nodes = (0..n)
        .map(|id| {
            let deps: Vec<usize> = (0..id).filter(|_| r.gen_bool(0.3)).collect();
            let kind = if r.gen_bool(0.55) {
                NodeKind::Comp {
                    latency_ns: if r.gen_bool(0.1) { 0 } else { r.gen_range(1..5_000) },
                }
            } else {
                NodeKind::Comm {
                    kind: *CollectiveKind::ALL.choose(r).unwrap(),
                    bytes: r.gen_range(0..200_000),
                    group_size: r.gen_range(1..=4),
                }
            };
            TraceNode {
                id,
                name: format!("n{id}"),
                kind,
                deps,
            }
        })
        .collect();
    Trace {
        version: 1,
        system_name: "oracle".into(),
        nodes,
    }
}

/// Makespan by advancing a clock one nanosecond at a time. At every tick all
/// finishing nodes retire, then each idle resource takes its lowest-id ready
/// node; this repeats until nothing changes, so zero-length nodes chain
/// within one tick.
pub fn tick_oracle(trace: &Trace, durations: &[u64]) -> u64 {
    let n = trace.nodes.len();
    #[derive(Clone, Copy, PartialEq)]
    enum St {
        Waiting,
        Running(u64),
        Done,
    }
    let res: Vec<usize> = trace.nodes.iter().map(|x| usize::from(!x.is_comp())).collect();
    let mut st = vec![St::Waiting; n];
    let mut busy = [false; 2];
    let mut t = 0u64;
    let mut makespan = 0;
    loop {
        loop {
            let mut changed = false;
            for v in 0..n {
                if st[v] == St::Running(t) {
                    st[v] = St::Done;
                    busy[res[v]] = false;
                    makespan = t;
                    changed = true;
                }
            }
            for (which, occupied) in busy.iter_mut().enumerate() {
                if *occupied {
                    continue;
                }
                let ready = (0..n).find(|&v| {
                    res[v] == which
                        && st[v] == St::Waiting
                        && trace.nodes[v].deps.iter().all(|&d| st[d] == St::Done)
                });
                if let Some(v) = ready {
                    st[v] = St::Running(t + durations[v]);
                    *occupied = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if st.iter().all(|s| *s == St::Done) {
            return makespan;
        }
        t += 1;
    }
}

/// Longest duration-weighted path through dependency edges and same-resource
/// ordering edges, by exhaustive DFS over all paths.
pub fn longest_constraint_path(
    trace: &Trace,
    durations: &[u64],
    resource_prev: &[Option<usize>],
) -> (u64, Vec<Vec<usize>>) {
    let n = trace.nodes.len();
    let preds: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            let mut p = trace.nodes[v].deps.clone();
            p.extend(resource_prev[v]);
            p.sort_unstable();
            p.dedup();
            p
        })
        .collect();
    let mut best = 0;
    let mut best_paths = Vec::new();
    fn walk(
        v: usize,
        acc: u64,
        path: &mut Vec<usize>,
        preds: &[Vec<usize>],
        d: &[u64],
        best: &mut u64,
        best_paths: &mut Vec<Vec<usize>>,
    ) {
        let acc = acc + d[v];
        path.push(v);
        if preds[v].is_empty() {
            let mut p = path.clone();
            p.reverse();
            if acc > *best {
                *best = acc;
                best_paths.clear();
            }
            if acc == *best {
                best_paths.push(p);
            }
        }
        for &u in &preds[v] {
            walk(u, acc, path, preds, d, best, best_paths);
        }
        path.pop();
    }
    for v in 0..n {
        walk(v, 0, &mut Vec::new(), &preds, durations, &mut best, &mut best_paths);
    }
    (best, best_paths)
}
