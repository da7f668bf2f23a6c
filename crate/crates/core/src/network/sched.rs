//! List scheduler over one compute and one network resource.
//!
//! The trace is one device's program; every replica runs the same schedule,
//! so a single timeline with collective costs stands in for all of them.

use std::collections::BTreeSet;

use super::{collective_latency, NetworkError, SystemConfig};
use crate::trace::{NodeKind, Trace};

/// Seconds to integer nanoseconds, rounding half up.
pub fn seconds_to_ns(secs: f64) -> Option<u64> {
    let ns = (secs * 1e9 + 0.5).floor();
    if ns.is_finite() && ns >= 0.0 && ns < u64::MAX as f64 {
        Some(ns as u64)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeTiming {
    pub start_ns: u64,
    pub end_ns: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationResult {
    pub timings: Vec<NodeTiming>,
    /// Node that ran immediately before on the same resource.
    pub resource_prev: Vec<Option<usize>>,
    pub total_ns: u64,
    pub critical_path: Vec<usize>,
    /// Sum of COMP durations.
    pub comp_ns: u64,
    /// Sum of COMM durations.
    pub comm_ns: u64,
    /// Time during which the compute resource sits idle.
    pub exposed_comm_ns: u64,
}

impl SimulationResult {
    pub fn total_time(&self) -> f64 {
        self.total_ns as f64 * 1e-9
    }

    pub fn comp_time_total(&self) -> f64 {
        self.comp_ns as f64 * 1e-9
    }

    pub fn comm_time_total(&self) -> f64 {
        self.comm_ns as f64 * 1e-9
    }
}

/// Duration of every node in nanoseconds.
pub fn node_durations(trace: &Trace, sys: &SystemConfig) -> Result<Vec<u64>, NetworkError> {
    trace
        .nodes
        .iter()
        .map(|n| match &n.kind {
            NodeKind::Comp { latency_ns } => Ok(*latency_ns),
            NodeKind::Comm {
                kind,
                bytes,
                group_size,
            } => {
                let secs = collective_latency(*kind, *bytes, *group_size, sys)?;
                seconds_to_ns(secs).ok_or(NetworkError::LatencyOverflow(n.id))
            }
        })
        .collect()
}

fn resource(kind: &NodeKind) -> usize {
    match kind {
        NodeKind::Comp { .. } => 0,
        NodeKind::Comm { .. } => 1,
    }
}

/// Simulate one training step and return per-node timings and the makespan.
pub fn simulate(trace: &Trace, sys: &SystemConfig) -> Result<SimulationResult, NetworkError> {
    let durations = node_durations(trace, sys)?;
    let n = trace.nodes.len();
    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut remaining = vec![0usize; n];
    for node in &trace.nodes {
        let mut deps = node.deps.clone();
        deps.sort_unstable();
        deps.dedup();
        remaining[node.id] = deps.len();
        for d in deps {
            succs[d].push(node.id);
        }
    }

    let res: Vec<usize> = trace.nodes.iter().map(|n| resource(&n.kind)).collect();
    let mut ready: [BTreeSet<usize>; 2] = [BTreeSet::new(), BTreeSet::new()];
    for i in (0..n).filter(|&i| remaining[i] == 0) {
        ready[res[i]].insert(i);
    }
    let mut running: [Option<(usize, u64)>; 2] = [None, None];
    let mut last: [Option<usize>; 2] = [None, None];
    let mut timings = vec![NodeTiming { start_ns: 0, end_ns: 0 }; n];
    let mut resource_prev = vec![None; n];
    let mut done = 0usize;
    let mut now = 0u64;

    loop {
        for r in 0..2 {
            if running[r].is_none() {
                if let Some(v) = ready[r].pop_first() {
                    let end = now
                        .checked_add(durations[v])
                        .ok_or(NetworkError::LatencyOverflow(v))?;
                    timings[v] = NodeTiming { start_ns: now, end_ns: end };
                    resource_prev[v] = last[r];
                    last[r] = Some(v);
                    running[r] = Some((v, end));
                }
            }
        }
        let Some(next) = running.iter().flatten().map(|&(_, e)| e).min() else {
            break;
        };
        now = next;
        for slot in running.iter_mut() {
            if let Some((v, end)) = *slot {
                if end == now {
                    *slot = None;
                    done += 1;
                    for &s in &succs[v] {
                        remaining[s] -= 1;
                        if remaining[s] == 0 {
                            ready[res[s]].insert(s);
                        }
                    }
                }
            }
        }
    }
    if done < n {
        let stuck = (0..n).find(|&i| remaining[i] > 0).unwrap_or(0);
        return Err(NetworkError::Cycle(stuck));
    }

    let total_ns = timings.iter().map(|t| t.end_ns).max().unwrap_or(0);
    let sum = |r: usize| -> u64 { (0..n).filter(|&i| res[i] == r).map(|i| durations[i]).sum() };
    let comp_ns = sum(0);
    let comm_ns = sum(1);
    let mut result = SimulationResult {
        timings,
        resource_prev,
        total_ns,
        critical_path: Vec::new(),
        comp_ns,
        comm_ns,
        exposed_comm_ns: total_ns.saturating_sub(comp_ns),
    };
    result.critical_path = critical_path(&result, trace);
    Ok(result)
}

/// Walk back from the node that ends last through whichever predecessor
/// (data dependency or previous occupant of the resource) finished exactly
/// when the current node started. Ties go to the smaller id.
pub fn critical_path(result: &SimulationResult, trace: &Trace) -> Vec<usize> {
    let t = &result.timings;
    let Some(mut v) = (0..t.len()).max_by(|&a, &b| t[a].end_ns.cmp(&t[b].end_ns).then(b.cmp(&a)))
    else {
        return Vec::new();
    };
    let mut path = vec![v];
    loop {
        let start = t[v].start_ns;
        let prev = trace.nodes[v]
            .deps
            .iter()
            .copied()
            .chain(result.resource_prev[v])
            .filter(|&u| t[u].end_ns == start)
            .min();
        match prev {
            Some(u) => {
                path.push(u);
                v = u;
            }
            None => break,
        }
    }
    path.reverse();
    path
}
