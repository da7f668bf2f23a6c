//! Step-latency simulation for distributed training workloads written in a
//! StableHLO text subset.
//!
//! The pipeline is: [`ir::parse_module`] → [`graph::build_graph`] →
//! [`slicer`] → [`estimate::ComputeApi`] → [`trace::build_trace`] →
//! [`network::simulate`].

pub mod app;
pub mod cli;
pub mod estimate;
pub mod graph;
pub mod ir;
pub mod metrics;
pub mod network;
pub mod slicer;
pub mod trace;
