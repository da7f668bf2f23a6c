use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EstimateError;

/// Per-device compute and memory roofs. `peak_compute` is FLOP/s,
/// `memory_bandwidth` bytes/s.
#[derive(Debug, Clone, PartialEq)]
pub struct HardwareConfig {
    pub name: String,
    pub peak_compute: f64,
    pub memory_bandwidth: f64,
    /// Compilation toolchain label, part of the cache key.
    pub toolchain_tag: String,
    pub note: Option<String>,
}

/// Names accepted by [`HardwareConfig::preset`]. A `x4`/`-8`/`-N` system
/// suffix is also accepted, so `a100x4` resolves to `a100`.
pub const HARDWARE_PRESETS: [&str; 6] = ["a100", "h100", "h200", "b200", "tpuv3", "gh200"];

const PEAK_NOTE: &str = "single dense peak per device; the datatype context of the figure is not stated";

impl HardwareConfig {
    pub fn new(name: &str, tflops: f64, gbs: f64) -> Self {
        Self {
            name: name.to_string(),
            peak_compute: tflops * 1e12,
            memory_bandwidth: gbs * 1e9,
            toolchain_tag: "raw".to_string(),
            note: None,
        }
    }

    pub fn preset(name: &str) -> Result<Self, EstimateError> {
        let base = HARDWARE_PRESETS
            .iter()
            .find(|p| name == **p || name.strip_prefix(**p).is_some_and(|rest| rest.starts_with('x') || rest.starts_with('-')))
            .ok_or_else(|| EstimateError::UnknownHardware(name.to_string()))?;
        let mut hw = match *base {
            "a100" => Self::new("a100", 312.0, 1940.0),
            "h100" => Self::new("h100", 1979.0, 3350.0),
            "h200" => Self::new("h200", 1979.0, 4800.0),
            "b200" => Self::new("b200", 4500.0, 7700.0),
            "tpuv3" => Self::new("tpuv3", 63.3, 429.2),
            "gh200" => {
                let mut hw = Self::new("gh200", 1979.0, 3350.0);
                hw.note = Some("Hopper roofs borrowed from the h100 preset".to_string());
                return Ok(hw);
            }
            _ => unreachable!(),
        };
        hw.note = Some(PEAK_NOTE.to_string());
        Ok(hw)
    }

    pub fn with_toolchain(mut self, tag: impl Into<String>) -> Self {
        self.toolchain_tag = tag.into();
        self
    }

    pub fn validate(&self) -> Result<(), EstimateError> {
        let ok = |x: f64| x > 0.0 && x.is_finite();
        if !ok(self.peak_compute) || !ok(self.memory_bandwidth) {
            return Err(EstimateError::InvalidHardware(format!(
                "{}: peak compute and memory bandwidth must be positive",
                self.name
            )));
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self, EstimateError> {
        let wire: HardwareFile =
            serde_json::from_str(text).map_err(|e| EstimateError::InvalidHardware(e.to_string()))?;
        let hw = Self {
            name: wire.name,
            peak_compute: wire.peak_compute_tflops * 1e12,
            memory_bandwidth: wire.memory_bandwidth_gbs * 1e9,
            toolchain_tag: wire.toolchain_tag,
            note: None,
        };
        hw.validate()?;
        Ok(hw)
    }

    pub fn from_file(path: &Path) -> Result<Self, EstimateError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| EstimateError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> String {
        let wire = HardwareFile {
            name: self.name.clone(),
            peak_compute_tflops: self.peak_compute / 1e12,
            memory_bandwidth_gbs: self.memory_bandwidth / 1e9,
            toolchain_tag: self.toolchain_tag.clone(),
        };
        serde_json::to_string_pretty(&wire).expect("hardware config serializes")
    }
}

fn default_toolchain() -> String {
    "raw".to_string()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HardwareFile {
    name: String,
    peak_compute_tflops: f64,
    memory_bandwidth_gbs: f64,
    #[serde(default = "default_toolchain")]
    toolchain_tag: String,
}
