//! COMP/COMM execution trace: construction from a sliced workload and a
//! versioned JSON encoding.
//!
//! ```json
//! {"version": 1, "system": "a100x4", "nodes": [
//!   {"id": 0, "type": "COMP", "name": "region0:1f2e..", "latency_ns": 0, "deps": []},
//!   {"id": 1, "type": "COMM", "name": "all_reduce@2", "comm_kind": "AllReduce",
//!    "comm_bytes": 72, "group_size": 4, "deps": [0]}]}
//! ```

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::estimate::EstimatorResult;
use crate::graph::{replica_group_size, topo_sort, GraphError, WorkloadGraph};
use crate::ir::{short_op_name, HloOperation, TensorType};
use crate::network::{seconds_to_ns, SystemConfig};
use crate::slicer::{SliceId, SlicedWorkload};

pub const TRACE_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CollectiveKind {
    AllReduce,
    AllGather,
    ReduceScatter,
    AllToAll,
    CollectivePermute,
}

impl CollectiveKind {
    pub const ALL: [CollectiveKind; 5] = [
        CollectiveKind::AllReduce,
        CollectiveKind::AllGather,
        CollectiveKind::ReduceScatter,
        CollectiveKind::AllToAll,
        CollectiveKind::CollectivePermute,
    ];

    pub fn op_name(self) -> &'static str {
        match self {
            CollectiveKind::AllReduce => "all_reduce",
            CollectiveKind::AllGather => "all_gather",
            CollectiveKind::ReduceScatter => "reduce_scatter",
            CollectiveKind::AllToAll => "all_to_all",
            CollectiveKind::CollectivePermute => "collective_permute",
        }
    }

    /// Exact match on the short op name (`stablehlo.` prefix optional).
    pub fn from_op_name(name: &str) -> Option<Self> {
        let short = short_op_name(name);
        Self::ALL.into_iter().find(|k| k.op_name() == short)
    }

    /// Like [`from_op_name`](Self::from_op_name) but also accepts variants such
    /// as `all_reduce_start` that embed one of the five names.
    pub fn infer(name: &str) -> Option<Self> {
        let short = short_op_name(name);
        Self::from_op_name(short).or_else(|| Self::ALL.into_iter().find(|k| short.contains(k.op_name())))
    }

    pub fn json_name(self) -> &'static str {
        match self {
            CollectiveKind::AllReduce => "AllReduce",
            CollectiveKind::AllGather => "AllGather",
            CollectiveKind::ReduceScatter => "ReduceScatter",
            CollectiveKind::AllToAll => "AllToAll",
            CollectiveKind::CollectivePermute => "CollectivePermute",
        }
    }

    pub fn from_json_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.json_name() == s)
    }
}

impl fmt::Display for CollectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.json_name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Comp {
        latency_ns: u64,
    },
    Comm {
        kind: CollectiveKind,
        bytes: u64,
        group_size: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceNode {
    pub id: usize,
    pub name: String,
    pub kind: NodeKind,
    pub deps: Vec<usize>,
}

impl TraceNode {
    pub fn is_comp(&self) -> bool {
        matches!(self.kind, NodeKind::Comp { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub version: u64,
    pub system_name: String,
    pub nodes: Vec<TraceNode>,
}

impl Trace {
    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.deps.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("{0} is not a collective")]
    NotCollective(String),
    #[error("unsupported collective {0}")]
    UnsupportedCollective(String),
    #[error("byte count overflow in {0}")]
    ByteOverflow(String),
    #[error("no latency estimate for region {0}")]
    MissingResult(usize),
    #[error("latency of region {0} does not fit in integer nanoseconds")]
    LatencyOverflow(usize),
    #[error(transparent)]
    Group(#[from] GraphError),
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("unknown comm_kind `{kind}` at {path}")]
    UnknownCommKind { path: String, kind: String },
    #[error("dependency cycle through node {0}")]
    Cycle(usize),
}

fn sum_bytes(op: &HloOperation, types: &[TensorType]) -> Result<u64, TraceError> {
    let overflow = || TraceError::ByteOverflow(op.op_name.clone());
    types.iter().try_fold(0u64, |acc, t| {
        let b = t.byte_size().map_err(|_| overflow())?;
        acc.checked_add(b).ok_or_else(overflow)
    })
}

/// Payload of a collective in bytes. All-gather is sized by its (gathered)
/// result; every other kind by its inputs. Multiple operands are summed.
pub fn comm_bytes(op: &HloOperation) -> Result<u64, TraceError> {
    match collective_kind(op)? {
        CollectiveKind::AllGather => sum_bytes(op, &op.result_types),
        _ => sum_bytes(op, &op.operand_types),
    }
}

fn collective_kind(op: &HloOperation) -> Result<CollectiveKind, TraceError> {
    use crate::graph::{classify, OpClass};
    if classify(op) != OpClass::Communication {
        return Err(TraceError::NotCollective(op.op_name.clone()));
    }
    CollectiveKind::infer(&op.op_name).ok_or_else(|| TraceError::UnsupportedCollective(op.op_name.clone()))
}

/// Map every slice to a trace node. Node ids follow `s.order`.
pub fn build_trace(
    s: &SlicedWorkload,
    results: &HashMap<usize, EstimatorResult>,
    g: &WorkloadGraph,
    sys: &SystemConfig,
) -> Result<Trace, TraceError> {
    let ids: HashMap<SliceId, usize> = s.order.iter().enumerate().map(|(i, &sl)| (sl, i)).collect();
    let mut nodes = Vec::with_capacity(s.order.len());
    for (id, &slice) in s.order.iter().enumerate() {
        let (name, kind) = match slice {
            SliceId::Region(r) => {
                let region = &s.regions[r];
                let res = results.get(&r).ok_or(TraceError::MissingResult(r))?;
                let latency_ns = seconds_to_ns(res.latency).ok_or(TraceError::LatencyOverflow(r))?;
                (
                    format!("region{r}:{}", region.canonical_key.short()),
                    NodeKind::Comp { latency_ns },
                )
            }
            SliceId::Comm(n) => {
                let op = g.op(n);
                let kind = collective_kind(op)?;
                let node = NodeKind::Comm {
                    kind,
                    bytes: comm_bytes(op)?,
                    group_size: replica_group_size(op, sys)?,
                };
                (format!("{}@{n}", op.short_name()), node)
            }
        };
        let mut deps: Vec<usize> = s.predecessors(slice).map(|p| ids[&p]).collect();
        deps.sort_unstable();
        nodes.push(TraceNode {
            id,
            name,
            kind,
            deps,
        });
    }
    Ok(Trace {
        version: TRACE_VERSION,
        system_name: sys.name.clone(),
        nodes,
    })
}

#[derive(Serialize)]
struct WireTrace<'a> {
    version: u64,
    system: &'a str,
    nodes: Vec<WireNode<'a>>,
}

#[derive(Serialize)]
struct WireNode<'a> {
    id: usize,
    #[serde(rename = "type")]
    node_type: &'static str,
    name: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    latency_ns: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comm_kind: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comm_bytes: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    group_size: Option<u32>,
    deps: &'a [usize],
}

pub fn serialize_trace(t: &Trace) -> String {
    let mut nodes: Vec<&TraceNode> = t.nodes.iter().collect();
    nodes.sort_by_key(|n| n.id);
    let wire = WireTrace {
        version: t.version,
        system: &t.system_name,
        nodes: nodes
            .into_iter()
            .map(|n| {
                let mut w = WireNode {
                    id: n.id,
                    node_type: "COMP",
                    name: &n.name,
                    latency_ns: None,
                    comm_kind: None,
                    comm_bytes: None,
                    group_size: None,
                    deps: &n.deps,
                };
                match n.kind {
                    NodeKind::Comp { latency_ns } => w.latency_ns = Some(latency_ns),
                    NodeKind::Comm {
                        kind,
                        bytes,
                        group_size,
                    } => {
                        w.node_type = "COMM";
                        w.comm_kind = Some(kind.json_name());
                        w.comm_bytes = Some(bytes);
                        w.group_size = Some(group_size);
                    }
                }
                w
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&wire).expect("trace serializes");
    out.push('\n');
    out
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> TraceError {
    TraceError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn field<'a>(
    obj: &'a serde_json::Map<String, Value>,
    base: &str,
    key: &str,
) -> Result<&'a Value, TraceError> {
    obj.get(key)
        .ok_or_else(|| schema(format!("{base}/{key}"), "missing required field"))
}

fn uint(v: &Value, path: &str) -> Result<u64, TraceError> {
    v.as_u64()
        .ok_or_else(|| schema(path, "expected a non-negative integer"))
}

fn string<'a>(v: &'a Value, path: &str) -> Result<&'a str, TraceError> {
    v.as_str().ok_or_else(|| schema(path, "expected a string"))
}

const COMP_FIELDS: [&str; 5] = ["id", "type", "name", "latency_ns", "deps"];
const COMM_FIELDS: [&str; 7] = ["id", "type", "name", "comm_kind", "comm_bytes", "group_size", "deps"];

fn parse_node(v: &Value, base: &str) -> Result<TraceNode, TraceError> {
    let obj = v.as_object().ok_or_else(|| schema(base, "expected an object"))?;
    let id = uint(field(obj, base, "id")?, &format!("{base}/id"))?;
    let id = usize::try_from(id).map_err(|_| schema(format!("{base}/id"), "id out of range"))?;
    let node_type = string(field(obj, base, "type")?, &format!("{base}/type"))?;
    let name = string(field(obj, base, "name")?, &format!("{base}/name"))?.to_string();
    let allowed: &[&str] = match node_type {
        "COMP" => &COMP_FIELDS,
        "COMM" => &COMM_FIELDS,
        other => {
            return Err(schema(
                format!("{base}/type"),
                format!("expected \"COMP\" or \"COMM\", found {other:?}"),
            ))
        }
    };
    if let Some(extra) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(schema(
            format!("{base}/{extra}"),
            format!("field not allowed on a {node_type} node"),
        ));
    }
    let kind = if node_type == "COMP" {
        let p = format!("{base}/latency_ns");
        NodeKind::Comp {
            latency_ns: uint(field(obj, base, "latency_ns")?, &p)?,
        }
    } else {
        let p = format!("{base}/comm_kind");
        let kind_str = string(field(obj, base, "comm_kind")?, &p)?;
        let kind = CollectiveKind::from_json_name(kind_str).ok_or_else(|| TraceError::UnknownCommKind {
            path: p,
            kind: kind_str.to_string(),
        })?;
        let bytes = uint(field(obj, base, "comm_bytes")?, &format!("{base}/comm_bytes"))?;
        let p = format!("{base}/group_size");
        let group = uint(field(obj, base, "group_size")?, &p)?;
        let group_size = u32::try_from(group)
            .ok()
            .filter(|&g| g >= 1)
            .ok_or_else(|| schema(p, "group_size must be between 1 and 2^32-1"))?;
        NodeKind::Comm {
            kind,
            bytes,
            group_size,
        }
    };
    let p = format!("{base}/deps");
    let deps = field(obj, base, "deps")?
        .as_array()
        .ok_or_else(|| schema(&p, "expected an array"))?
        .iter()
        .enumerate()
        .map(|(j, d)| {
            let path = format!("{p}/{j}");
            usize::try_from(uint(d, &path)?).map_err(|_| schema(path, "id out of range"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TraceNode { id, name, kind, deps })
}

/// Parse and validate a version 1 trace. Nodes are returned sorted by id.
pub fn parse_trace(text: &str) -> Result<Trace, TraceError> {
    let root: Value = serde_json::from_str(text).map_err(|e| TraceError::Json(e.to_string()))?;
    let obj = root.as_object().ok_or_else(|| schema("", "expected an object"))?;
    if let Some(extra) = obj.keys().find(|k| !["version", "system", "nodes"].contains(&k.as_str())) {
        return Err(schema(format!("/{extra}"), "unknown top-level field"));
    }
    let version = uint(field(obj, "", "version")?, "/version")?;
    if version != TRACE_VERSION {
        return Err(schema("/version", format!("unsupported version {version}")));
    }
    let system_name = string(field(obj, "", "system")?, "/system")?.to_string();
    let raw = field(obj, "", "nodes")?
        .as_array()
        .ok_or_else(|| schema("/nodes", "expected an array"))?;

    let mut nodes = raw
        .iter()
        .enumerate()
        .map(|(i, v)| parse_node(v, &format!("/nodes/{i}")))
        .collect::<Result<Vec<_>, _>>()?;
    let n = nodes.len();
    let mut position = vec![None; n];
    for (i, node) in nodes.iter().enumerate() {
        let path = format!("/nodes/{i}/id");
        match position.get_mut(node.id) {
            None => return Err(schema(path, format!("ids must be dense in 0..{n}"))),
            Some(Some(_)) => return Err(schema(path, format!("duplicate id {}", node.id))),
            Some(slot) => *slot = Some(i),
        }
    }
    let mut edges = Vec::new();
    for (i, node) in nodes.iter().enumerate() {
        for (j, &d) in node.deps.iter().enumerate() {
            let path = format!("/nodes/{i}/deps/{j}");
            if d >= n {
                return Err(schema(path, format!("unknown node id {d}")));
            }
            if node.deps[..j].contains(&d) {
                return Err(schema(path, format!("duplicate dependency {d}")));
            }
            edges.push((d, node.id));
        }
    }
    topo_sort(n, &edges).map_err(|e| match e {
        GraphError::Cycle(v) => TraceError::Cycle(v),
        other => TraceError::Group(other),
    })?;
    for (i, node) in nodes.iter().enumerate() {
        if let Some(j) = node.deps.iter().position(|&d| d > node.id) {
            return Err(schema(
                format!("/nodes/{i}/deps/{j}"),
                "dependency on a later node id",
            ));
        }
    }
    nodes.sort_by_key(|n| n.id);
    Ok(Trace {
        version,
        system_name,
        nodes,
    })
}
