use std::path::Path;

use serde::{Deserialize, Serialize};

use super::NetworkError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// Every device has a direct link to every other device.
    AllToAllFlat,
    /// Nodes of `devices_per_node` devices joined by a slower fabric.
    TwoLevelHierarchy,
    Mesh2D { dims: [u32; 2] },
}

/// Interconnect description. Bandwidths are bytes/s per link, latency is
/// seconds per hop.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub name: String,
    pub device_count: u32,
    pub devices_per_node: u32,
    pub intranode_bandwidth: f64,
    /// Required for hierarchies whose collectives cross node boundaries.
    pub internode_bandwidth: Option<f64>,
    pub link_latency: f64,
    pub topology: Topology,
    pub note: Option<String>,
}

const GB: f64 = 1e9;

/// Names accepted by [`SystemConfig::preset`].
pub const SYSTEM_PRESETS: [&str; 7] = [
    "a100x4", "h100x4", "h200x4", "b200x4", "tpuv3-8", "gh200-16", "gh200-128",
];

const NVLINK_NOTE: &str =
    "NVLink figure is a single per-GPU number; modeled as per-link unidirectional bandwidth";

impl SystemConfig {
    fn flat_nvlink(name: &str, gbs: f64) -> Self {
        Self {
            name: name.to_string(),
            device_count: 4,
            devices_per_node: 4,
            intranode_bandwidth: gbs * GB,
            internode_bandwidth: None,
            link_latency: 0.0,
            topology: Topology::AllToAllFlat,
            note: Some(NVLINK_NOTE.to_string()),
        }
    }

    fn gh200(name: &str, devices: u32) -> Self {
        Self {
            name: name.to_string(),
            device_count: devices,
            devices_per_node: 4,
            intranode_bandwidth: 150.0 * GB,
            internode_bandwidth: None,
            link_latency: 0.0,
            topology: Topology::TwoLevelHierarchy,
            note: Some(
                "4 GPUs per node over NVLink, dragonfly between nodes; internode bandwidth must be supplied"
                    .to_string(),
            ),
        }
    }

    pub fn preset(name: &str) -> Result<Self, NetworkError> {
        let sys = match name {
            "a100x4" => Self::flat_nvlink(name, 100.0),
            "h100x4" => Self::flat_nvlink(name, 150.0),
            "h200x4" => Self::flat_nvlink(name, 150.0),
            "b200x4" => Self::flat_nvlink(name, 300.0),
            "tpuv3-8" => Self {
                name: name.to_string(),
                device_count: 8,
                devices_per_node: 8,
                // 656 Gb/s per ICI link
                intranode_bandwidth: 656.0 / 8.0 * GB,
                internode_bandwidth: None,
                link_latency: 0.0,
                topology: Topology::Mesh2D { dims: [4, 2] },
                note: None,
            },
            "gh200-16" => Self::gh200(name, 16),
            "gh200-128" => Self::gh200(name, 128),
            other => return Err(NetworkError::UnknownPreset(other.to_string())),
        };
        Ok(sys)
    }

    pub fn with_internode_bandwidth(mut self, bytes_per_sec: f64) -> Self {
        self.internode_bandwidth = Some(bytes_per_sec);
        self
    }

    /// Copy with the intranode bandwidth multiplied by `factor`.
    pub fn scale_intranode_bandwidth(mut self, factor: f64) -> Self {
        self.intranode_bandwidth *= factor;
        self
    }

    pub fn validate(&self) -> Result<(), NetworkError> {
        let bad = |msg: String| Err(NetworkError::InvalidSystem(self.name.clone(), msg));
        if self.device_count == 0 || self.devices_per_node == 0 {
            return bad("device counts must be at least 1".into());
        }
        if !(self.intranode_bandwidth > 0.0 && self.intranode_bandwidth.is_finite()) {
            return bad("intranode bandwidth must be positive".into());
        }
        if let Some(b) = self.internode_bandwidth {
            if !(b > 0.0 && b.is_finite()) {
                return bad("internode bandwidth must be positive".into());
            }
        }
        if !(self.link_latency >= 0.0 && self.link_latency.is_finite()) {
            return bad("link latency must be non-negative".into());
        }
        match self.topology {
            Topology::TwoLevelHierarchy => {
                if !self.device_count.is_multiple_of(self.devices_per_node) {
                    return bad(format!(
                        "{} devices is not a multiple of {} per node",
                        self.device_count, self.devices_per_node
                    ));
                }
                if self.device_count > self.devices_per_node && self.internode_bandwidth.is_none() {
                    return Err(NetworkError::MissingInternodeBandwidth(self.name.clone()));
                }
            }
            Topology::Mesh2D { dims } => {
                if u64::from(dims[0]) * u64::from(dims[1]) != u64::from(self.device_count) {
                    return bad(format!(
                        "mesh {}x{} does not cover {} devices",
                        dims[0], dims[1], self.device_count
                    ));
                }
            }
            Topology::AllToAllFlat => {}
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self, NetworkError> {
        let wire: SystemFile =
            serde_json::from_str(text).map_err(|e| NetworkError::Json(e.to_string()))?;
        let topology = match (wire.topology.as_str(), wire.mesh_dims) {
            ("flat", _) => Topology::AllToAllFlat,
            ("hierarchy", _) => Topology::TwoLevelHierarchy,
            ("mesh", Some(dims)) => Topology::Mesh2D { dims },
            ("mesh", None) => {
                return Err(NetworkError::InvalidSystem(
                    wire.name,
                    "mesh topology needs mesh_dims".into(),
                ))
            }
            (other, _) => {
                return Err(NetworkError::InvalidSystem(
                    wire.name,
                    format!("unknown topology `{other}`"),
                ))
            }
        };
        let sys = Self {
            name: wire.name,
            device_count: wire.device_count,
            devices_per_node: wire.devices_per_node,
            intranode_bandwidth: wire.intranode_bandwidth_gbs * GB,
            internode_bandwidth: wire.internode_bandwidth_gbs.map(|b| b * GB),
            link_latency: wire.link_latency_us * 1e-6,
            topology,
            note: None,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn from_file(path: &Path) -> Result<Self, NetworkError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| NetworkError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> String {
        let (topology, mesh_dims) = match self.topology {
            Topology::AllToAllFlat => ("flat", None),
            Topology::TwoLevelHierarchy => ("hierarchy", None),
            Topology::Mesh2D { dims } => ("mesh", Some(dims)),
        };
        let wire = SystemFile {
            name: self.name.clone(),
            device_count: self.device_count,
            devices_per_node: self.devices_per_node,
            intranode_bandwidth_gbs: self.intranode_bandwidth / GB,
            internode_bandwidth_gbs: self.internode_bandwidth.map(|b| b / GB),
            link_latency_us: self.link_latency * 1e6,
            topology: topology.to_string(),
            mesh_dims,
        };
        serde_json::to_string_pretty(&wire).expect("system config serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    name: String,
    device_count: u32,
    devices_per_node: u32,
    intranode_bandwidth_gbs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    internode_bandwidth_gbs: Option<f64>,
    #[serde(default)]
    link_latency_us: f64,
    topology: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mesh_dims: Option<[u32; 2]>,
}
