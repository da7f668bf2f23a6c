//! Partition a workload graph into compute regions and communication nodes.
//!
//! Two strategies are provided. [`linear_split`] walks the topological order
//! and closes a region at every collective, producing few large regions.
//! [`dependency_aware_split`] makes every compute operation its own region so
//! that independent work can overlap with communication.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};
use std::fmt::{self, Write};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::{topological_order, NodeId, OpClass, Producer, WorkloadGraph};
use crate::ir::{format_attr_value, HloOperation, Region, TensorType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SliceId {
    Region(usize),
    Comm(NodeId),
}

impl fmt::Display for SliceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SliceId::Region(r) => write!(f, "region{r}"),
            SliceId::Comm(n) => write!(f, "comm@{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplitKind {
    Linear,
    DependencyAware,
}

impl SplitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitKind::Linear => "linear",
            SplitKind::DependencyAware => "dependency",
        }
    }
}

/// Lowercase hex SHA-256 of a region's structural fingerprint.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegionKey(String);

impl RegionKey {
    pub fn from_hex(hex: impl Into<String>) -> Self {
        Self(hex.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn short(&self) -> &str {
        &self.0[..self.0.len().min(12)]
    }
}

impl fmt::Display for RegionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A unit of latency estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct ComputeRegion {
    pub region_id: usize,
    pub member_ops: Vec<NodeId>,
    /// Copies of the member operations, in member order.
    pub ops: Vec<HloOperation>,
    /// Values read from outside the region, by (producer, result index).
    pub boundary_inputs: Vec<TensorType>,
    /// Values consumed outside the region or returned.
    pub boundary_outputs: Vec<TensorType>,
    pub canonical_key: RegionKey,
}

impl ComputeRegion {
    pub fn from_members(g: &WorkloadGraph, region_id: usize, member_ops: Vec<NodeId>) -> Self {
        let members: HashSet<NodeId> = member_ops.iter().copied().collect();
        let ops: Vec<HloOperation> = member_ops.iter().map(|&i| g.op(i).clone()).collect();

        let mut inputs: BTreeSet<Producer> = BTreeSet::new();
        for op in &ops {
            for v in &op.operand_names {
                match g.producer(v) {
                    Some(Producer::Node { node, .. }) if members.contains(&node) => {}
                    Some(p) => {
                        inputs.insert(p);
                    }
                    None => unreachable!("parser guarantees every operand is defined"),
                }
            }
        }
        let mut outputs: Vec<(NodeId, usize)> = Vec::new();
        for op in &ops {
            for (index, r) in op.result_names.iter().enumerate() {
                let escapes = g.uses(r).iter().any(|u| !members.contains(u));
                if escapes || g.is_returned(r) {
                    outputs.push((op.id, index));
                }
            }
        }
        outputs.sort_unstable();

        let canonical_key = fingerprint(g, &ops, &inputs, &outputs);
        Self {
            region_id,
            member_ops,
            boundary_inputs: inputs.iter().map(|&p| g.value_type(p).clone()).collect(),
            boundary_outputs: outputs
                .iter()
                .map(|&(node, index)| g.op(node).result_types[index].clone())
                .collect(),
            ops,
            canonical_key,
        }
    }
}

/// Text fingerprint that ignores SSA names and region ids, hashed with SHA-256.
fn fingerprint(
    g: &WorkloadGraph,
    ops: &[HloOperation],
    inputs: &BTreeSet<Producer>,
    outputs: &[(NodeId, usize)],
) -> RegionKey {
    let mut names: HashMap<String, String> = HashMap::new();
    for (j, &p) in inputs.iter().enumerate() {
        let v = match p {
            Producer::Arg(i) => g.function().args[i].name.clone(),
            Producer::Node { node, index } => g.op(node).result_names[index].clone(),
        };
        names.insert(v, format!("in{j}"));
    }
    let position: HashMap<NodeId, usize> = ops.iter().enumerate().map(|(k, o)| (o.id, k)).collect();
    for (k, op) in ops.iter().enumerate() {
        for (i, r) in op.result_names.iter().enumerate() {
            names.insert(r.clone(), format!("op{k}.{i}"));
        }
    }
    let mut text = String::new();
    for (k, op) in ops.iter().enumerate() {
        let _ = write!(text, "op{k} ");
        canonical_op(&mut text, op, &names, 0);
    }
    text.push_str("out");
    for (node, index) in outputs {
        let _ = write!(text, " op{}.{index}", position[node]);
    }
    RegionKey(format!("{:x}", Sha256::digest(text.as_bytes())))
}

fn canonical_op(out: &mut String, op: &HloOperation, names: &HashMap<String, String>, depth: usize) {
    let _ = write!(out, "{}(", op.op_name);
    for v in &op.operand_names {
        let _ = write!(out, "{},", names.get(v).map_or("?", String::as_str));
    }
    out.push_str(") {");
    for a in &op.attributes {
        let _ = write!(out, "{}={};", a.key, format_attr_value(&a.value));
    }
    out.push_str("} (");
    for t in &op.operand_types {
        let _ = write!(out, "{t},");
    }
    out.push_str(") -> (");
    for t in &op.result_types {
        let _ = write!(out, "{t},");
    }
    out.push(')');
    if let Some(region) = &op.region {
        canonical_region(out, region, names, depth + 1);
    }
    out.push('\n');
}

fn canonical_region(
    out: &mut String,
    region: &Region,
    outer: &HashMap<String, String>,
    depth: usize,
) {
    let mut names = outer.clone();
    out.push_str(" [");
    for (i, (name, ty)) in region.args.iter().enumerate() {
        names.insert(name.clone(), format!("d{depth}a{i}"));
        let _ = write!(out, "{ty},");
    }
    out.push_str("]\n");
    for (k, op) in region.ops.iter().enumerate() {
        canonical_op(out, op, &names, depth);
        for (i, r) in op.result_names.iter().enumerate() {
            names.insert(r.clone(), format!("d{depth}r{k}.{i}"));
        }
    }
    out.push_str("ret");
    for v in &region.return_names {
        let _ = write!(out, " {}", names.get(v).map_or("?", String::as_str));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlicedWorkload {
    pub split: SplitKind,
    pub regions: Vec<ComputeRegion>,
    pub comm_nodes: Vec<NodeId>,
    /// Slice-level dependency edges, sorted and without duplicates.
    pub deps: Vec<(SliceId, SliceId)>,
    /// Topological order of all slices.
    pub order: Vec<SliceId>,
}

impl SlicedWorkload {
    pub fn slice_count(&self) -> usize {
        self.regions.len() + self.comm_nodes.len()
    }

    pub fn predecessors(&self, s: SliceId) -> impl Iterator<Item = SliceId> + '_ {
        self.deps.iter().filter(move |(_, b)| *b == s).map(|(a, _)| *a)
    }
}

/// Position-based grouping: consecutive compute operations in topological
/// order form one region; each collective closes the current region.
pub fn linear_split(g: &WorkloadGraph) -> SlicedWorkload {
    let order = topological_order(g).expect("workload graph is acyclic");
    let mut groups: Vec<Vec<NodeId>> = Vec::new();
    let mut comm_nodes = Vec::new();
    let mut current: Vec<NodeId> = Vec::new();
    for &v in &order {
        match g.class(v) {
            OpClass::Compute => current.push(v),
            OpClass::Communication => {
                if !current.is_empty() {
                    groups.push(std::mem::take(&mut current));
                }
                comm_nodes.push(v);
            }
            OpClass::Meta => {}
        }
    }
    if !current.is_empty() {
        groups.push(current);
    }
    assemble(g, SplitKind::Linear, groups, comm_nodes, &order)
}

/// One region per compute operation; slice edges are exactly the projected
/// data dependencies.
pub fn dependency_aware_split(g: &WorkloadGraph) -> SlicedWorkload {
    let order = topological_order(g).expect("workload graph is acyclic");
    let groups = order
        .iter()
        .filter(|&&v| g.class(v) == OpClass::Compute)
        .map(|&v| vec![v])
        .collect();
    let comm_nodes = order
        .iter()
        .copied()
        .filter(|&v| g.class(v) == OpClass::Communication)
        .collect();
    assemble(g, SplitKind::DependencyAware, groups, comm_nodes, &order)
}

pub fn split(g: &WorkloadGraph, kind: SplitKind) -> SlicedWorkload {
    match kind {
        SplitKind::Linear => linear_split(g),
        SplitKind::DependencyAware => dependency_aware_split(g),
    }
}

fn slice_map(regions: &[ComputeRegion], comm_nodes: &[NodeId]) -> HashMap<NodeId, SliceId> {
    let mut map = HashMap::new();
    for r in regions {
        for &m in &r.member_ops {
            map.insert(m, SliceId::Region(r.region_id));
        }
    }
    for &c in comm_nodes {
        map.insert(c, SliceId::Comm(c));
    }
    map
}

fn assemble(
    g: &WorkloadGraph,
    split: SplitKind,
    groups: Vec<Vec<NodeId>>,
    comm_nodes: Vec<NodeId>,
    topo: &[NodeId],
) -> SlicedWorkload {
    let regions: Vec<ComputeRegion> = groups
        .into_iter()
        .enumerate()
        .map(|(i, members)| ComputeRegion::from_members(g, i, members))
        .collect();
    let slice_of = slice_map(&regions, &comm_nodes);
    let deps: BTreeSet<(SliceId, SliceId)> = g
        .edges()
        .iter()
        .filter_map(|e| Some((*slice_of.get(&e.from)?, *slice_of.get(&e.to)?)))
        .filter(|(a, b)| a != b)
        .collect();
    let deps: Vec<_> = deps.into_iter().collect();

    // Slices are ordered by their earliest member in the node order.
    let rank: HashMap<NodeId, usize> = topo.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut first: HashMap<SliceId, usize> = HashMap::new();
    for (&node, &s) in &slice_of {
        let r = rank[&node];
        first.entry(s).and_modify(|x| *x = (*x).min(r)).or_insert(r);
    }
    let order = order_slices(&first, &deps).expect("slices of a DAG are acyclic");
    SlicedWorkload {
        split,
        regions,
        comm_nodes,
        deps,
        order,
    }
}

/// Kahn's algorithm over slices, ties broken by `rank`.
fn order_slices(
    rank: &HashMap<SliceId, usize>,
    deps: &[(SliceId, SliceId)],
) -> Option<Vec<SliceId>> {
    let mut indeg: HashMap<SliceId, usize> = rank.keys().map(|&s| (s, 0)).collect();
    let mut out: HashMap<SliceId, Vec<SliceId>> = HashMap::new();
    for &(a, b) in deps {
        *indeg.get_mut(&b)? += 1;
        out.entry(a).or_default().push(b);
    }
    let mut heap: BinaryHeap<Reverse<(usize, SliceId)>> = indeg
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&s, _)| Reverse((rank[&s], s)))
        .collect();
    let mut order = Vec::with_capacity(rank.len());
    while let Some(Reverse((_, s))) = heap.pop() {
        order.push(s);
        for &t in out.get(&s).map(Vec::as_slice).unwrap_or(&[]) {
            let d = indeg.get_mut(&t).unwrap();
            *d -= 1;
            if *d == 0 {
                heap.push(Reverse((rank[&t], t)));
            }
        }
    }
    (order.len() == rank.len()).then_some(order)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SliceViolation {
    #[error("duplicate membership of node {0}")]
    DuplicateMembership(NodeId),
    #[error("node {0} is not covered by any slice")]
    MissingNode(NodeId),
    #[error("node {node} of class {class:?} placed in the wrong kind of slice")]
    ClassImpurity { node: NodeId, class: OpClass },
    #[error("region {0} is empty")]
    EmptyRegion(usize),
    #[error("dependency references unknown slice {0}")]
    DanglingDependency(SliceId),
    #[error("slice dependencies contain a cycle")]
    Cycle,
    #[error("dependency lost: node {from} -> node {to}")]
    DependencyLost { from: NodeId, to: NodeId },
}

/// Check partition totality, class purity, acyclicity and dependency
/// preservation. Returns the first violation found.
pub fn validate_slicing(s: &SlicedWorkload, g: &WorkloadGraph) -> Result<(), SliceViolation> {
    let mut seen: HashMap<NodeId, SliceId> = HashMap::new();
    for r in &s.regions {
        if r.member_ops.is_empty() {
            return Err(SliceViolation::EmptyRegion(r.region_id));
        }
        for &m in &r.member_ops {
            if m >= g.len() {
                return Err(SliceViolation::MissingNode(m));
            }
            let class = g.class(m);
            if class != OpClass::Compute {
                return Err(SliceViolation::ClassImpurity { node: m, class });
            }
            if seen.insert(m, SliceId::Region(r.region_id)).is_some() {
                return Err(SliceViolation::DuplicateMembership(m));
            }
        }
    }
    for &c in &s.comm_nodes {
        if c >= g.len() {
            return Err(SliceViolation::MissingNode(c));
        }
        let class = g.class(c);
        if class != OpClass::Communication {
            return Err(SliceViolation::ClassImpurity { node: c, class });
        }
        if seen.insert(c, SliceId::Comm(c)).is_some() {
            return Err(SliceViolation::DuplicateMembership(c));
        }
    }
    for v in 0..g.len() {
        if g.class(v) != OpClass::Meta && !seen.contains_key(&v) {
            return Err(SliceViolation::MissingNode(v));
        }
    }

    let slices: HashSet<SliceId> = seen.values().copied().collect();
    for &(a, b) in &s.deps {
        for x in [a, b] {
            if !slices.contains(&x) {
                return Err(SliceViolation::DanglingDependency(x));
            }
        }
    }
    let rank: HashMap<SliceId, usize> = slices.iter().map(|&x| (x, 0)).collect();
    if order_slices(&rank, &s.deps).is_none() {
        return Err(SliceViolation::Cycle);
    }

    let dep_set: HashSet<(SliceId, SliceId)> = s.deps.iter().copied().collect();
    for e in g.edges() {
        let (Some(&a), Some(&b)) = (seen.get(&e.from), seen.get(&e.to)) else {
            continue;
        };
        if a != b && !dep_set.contains(&(a, b)) {
            return Err(SliceViolation::DependencyLost {
                from: e.from,
                to: e.to,
            });
        }
    }
    Ok(())
}
