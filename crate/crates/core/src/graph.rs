//! Operation dependency graph over the body of `main`.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt::Write;

use thiserror::Error;

use crate::ir::{Function, HloModule, HloOperation, TensorType};
use crate::network::SystemConfig;

pub type NodeId = usize;

pub const COLLECTIVE_OPS: [&str; 5] = [
    "all_reduce",
    "all_gather",
    "reduce_scatter",
    "all_to_all",
    "collective_permute",
];

const META_OPS: [&str; 3] = ["constant", "iota", "return"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpClass {
    Compute,
    Communication,
    Meta,
}

/// Compute / communication / meta classification of a single operation.
pub fn classify(op: &HloOperation) -> OpClass {
    let short = op.short_name();
    if COLLECTIVE_OPS.contains(&short) {
        OpClass::Communication
    } else if META_OPS.contains(&short) {
        OpClass::Meta
    } else if short.contains("collective") || short.starts_with("all_") {
        OpClass::Communication
    } else {
        OpClass::Compute
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("dependency cycle through node {0}")]
    Cycle(NodeId),
    #[error("replica groups of {op} have unequal sizes {sizes:?}")]
    RaggedReplicaGroups { op: String, sizes: Vec<usize> },
    #[error("replica group of {op} has {group} devices but the system has {devices}")]
    GroupTooLarge { op: String, group: usize, devices: u32 },
}

/// Where an SSA value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Producer {
    /// Entry argument by position.
    Arg(usize),
    /// Result `index` of node `node`.
    Node { node: NodeId, index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub value: String,
}

/// Data-dependency DAG. Node ids are the positions of the operations in
/// `main`; entry arguments act as zero-latency sources and carry no node.
#[derive(Debug, Clone)]
pub struct WorkloadGraph {
    function: Function,
    classes: Vec<OpClass>,
    edges: Vec<Edge>,
    preds: Vec<Vec<NodeId>>,
    succs: Vec<Vec<NodeId>>,
    producers: HashMap<String, Producer>,
    uses: HashMap<String, Vec<NodeId>>,
}

impl WorkloadGraph {
    pub fn len(&self) -> usize {
        self.function.body.len()
    }

    pub fn is_empty(&self) -> bool {
        self.function.body.is_empty()
    }

    pub fn op(&self, id: NodeId) -> &HloOperation {
        &self.function.body[id]
    }

    pub fn class(&self, id: NodeId) -> OpClass {
        self.classes[id]
    }

    pub fn function(&self) -> &Function {
        &self.function
    }

    /// One edge per operand reference to an in-body definition.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Distinct predecessors, ascending.
    pub fn predecessors(&self, id: NodeId) -> &[NodeId] {
        &self.preds[id]
    }

    /// Distinct successors, ascending.
    pub fn successors(&self, id: NodeId) -> &[NodeId] {
        &self.succs[id]
    }

    pub fn producer(&self, value: &str) -> Option<Producer> {
        self.producers.get(value).copied()
    }

    pub fn value_type(&self, p: Producer) -> &TensorType {
        match p {
            Producer::Arg(i) => &self.function.args[i].ty,
            Producer::Node { node, index } => &self.function.body[node].result_types[index],
        }
    }

    /// Nodes reading `value`, in body order (repeated per operand slot).
    pub fn uses(&self, value: &str) -> &[NodeId] {
        self.uses.get(value).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_returned(&self, value: &str) -> bool {
        self.function.return_names.iter().any(|r| r == value)
    }

    pub fn nodes_of(&self, class: OpClass) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.len()).filter(move |&i| self.classes[i] == class)
    }

    /// `from -> to` lines, for debugging.
    pub fn edge_list(&self) -> String {
        let mut out = String::new();
        for (i, op) in self.function.body.iter().enumerate() {
            let _ = writeln!(out, "# {i} {:?} {}", self.classes[i], op.op_name);
        }
        for e in &self.edges {
            let _ = writeln!(out, "{} -> {} {}", e.from, e.to, e.value);
        }
        out
    }
}

pub fn build_graph(m: &HloModule) -> WorkloadGraph {
    let function = m.main().clone();
    let n = function.body.len();
    let mut producers = HashMap::new();
    for (i, a) in function.args.iter().enumerate() {
        producers.insert(a.name.clone(), Producer::Arg(i));
    }
    let mut edges = Vec::new();
    let mut preds = vec![Vec::new(); n];
    let mut succs = vec![Vec::new(); n];
    let mut uses: HashMap<String, Vec<NodeId>> = HashMap::new();
    for op in &function.body {
        for v in &op.operand_names {
            uses.entry(v.clone()).or_default().push(op.id);
            if let Some(&Producer::Node { node, .. }) = producers.get(v) {
                edges.push(Edge {
                    from: node,
                    to: op.id,
                    value: v.clone(),
                });
                preds[op.id].push(node);
                succs[node].push(op.id);
            }
        }
        for (index, r) in op.result_names.iter().enumerate() {
            producers.insert(r.clone(), Producer::Node { node: op.id, index });
        }
    }
    for l in preds.iter_mut().chain(succs.iter_mut()) {
        l.sort_unstable();
        l.dedup();
    }
    let classes = function.body.iter().map(classify).collect();
    WorkloadGraph {
        function,
        classes,
        edges,
        preds,
        succs,
        producers,
        uses,
    }
}

/// Deterministic topological order: among ready nodes the smallest id goes first.
pub fn topological_order(g: &WorkloadGraph) -> Result<Vec<NodeId>, GraphError> {
    let edges: Vec<(NodeId, NodeId)> = g.edges.iter().map(|e| (e.from, e.to)).collect();
    topo_sort(g.len(), &edges)
}

/// Kahn's algorithm with a min-heap so ties break by id.
pub(crate) fn topo_sort(n: usize, edges: &[(usize, usize)]) -> Result<Vec<usize>, GraphError> {
    let mut indeg = vec![0usize; n];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in edges {
        indeg[b] += 1;
        out[a].push(b);
    }
    let mut heap: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&i| indeg[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = heap.pop() {
        order.push(v);
        for &w in &out[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                heap.push(Reverse(w));
            }
        }
    }
    if order.len() < n {
        let stuck = (0..n).find(|&i| indeg[i] > 0).unwrap_or(0);
        return Err(GraphError::Cycle(stuck));
    }
    Ok(order)
}

/// Participants per group for a collective. Channel ids and
/// `use_global_device_ids` are ignored.
pub fn replica_group_size(op: &HloOperation, sys: &SystemConfig) -> Result<u32, GraphError> {
    use crate::ir::AttrValue;
    let groups: &[Vec<i64>] = match op.attr("replica_groups") {
        Some(AttrValue::IntLists(g)) if !g.is_empty() => g,
        _ => return Ok(sys.device_count),
    };
    let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
    if sizes.iter().any(|&s| s != sizes[0]) {
        return Err(GraphError::RaggedReplicaGroups {
            op: op.op_name.clone(),
            sizes,
        });
    }
    let group = sizes[0];
    if group as u64 > u64::from(sys.device_count) {
        return Err(GraphError::GroupTooLarge {
            op: op.op_name.clone(),
            group,
            devices: sys.device_count,
        });
    }
    Ok(group.max(1) as u32)
}
