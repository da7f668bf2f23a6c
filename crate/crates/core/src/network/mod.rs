//! System interconnect model, collective cost formulas and the step scheduler.

mod collective;
mod sched;
mod system;

pub use collective::{collective_latency, effective_bandwidth};
pub use sched::{critical_path, node_durations, seconds_to_ns, simulate, NodeTiming, SimulationResult};
pub use system::{SystemConfig, Topology, SYSTEM_PRESETS};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("unknown system preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid system `{0}`: {1}")]
    InvalidSystem(String, String),
    #[error("system `{0}` spans several nodes but has no internode bandwidth")]
    MissingInternodeBandwidth(String),
    #[error("collective group of {group} devices exceeds the {devices} devices in the system")]
    GroupTooLarge { group: u32, devices: u32 },
    #[error("collective group must contain at least one device")]
    EmptyGroup,
    #[error("latency of trace node {0} overflows the nanosecond counter")]
    LatencyOverflow(usize),
    #[error("trace has a dependency cycle through node {0}")]
    Cycle(usize),
    #[error("{0}")]
    Io(String),
    #[error("malformed system file: {0}")]
    Json(String),
}
