use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::slicer::{ComputeRegion, RegionKey};

use super::{
    boundary_bytes, region_flops, roofline, roofline_estimate, ComputeEstimator, EstimateError,
    EstimatorResult, HardwareConfig, Provenance,
};

/// Measured region latencies keyed by canonical region key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LatencyTable {
    /// Nanoseconds, as stored on disk.
    entries: BTreeMap<String, f64>,
    /// Where the numbers came from.
    pub provenance: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    version: u32,
    entries: BTreeMap<String, f64>,
}

fn is_key(s: &str) -> bool {
    s.len() == 64 && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

impl LatencyTable {
    pub fn new(provenance: impl Into<String>) -> Self {
        Self {
            entries: BTreeMap::new(),
            provenance: provenance.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Latency in seconds.
    pub fn get(&self, key: &RegionKey) -> Option<f64> {
        self.entries.get(key.as_str()).map(|ns| ns / 1e9)
    }

    pub fn insert_ns(&mut self, key: &RegionKey, ns: f64) -> Result<(), EstimateError> {
        if !(ns >= 0.0 && ns.is_finite()) {
            return Err(EstimateError::InvalidTable(format!("negative or non-finite latency for {key}")));
        }
        self.entries.insert(key.as_str().to_string(), ns);
        Ok(())
    }

    pub fn insert_seconds(&mut self, key: &RegionKey, secs: f64) -> Result<(), EstimateError> {
        self.insert_ns(key, secs * 1e9)
    }

    pub fn from_json_str(text: &str, provenance: impl Into<String>) -> Result<Self, EstimateError> {
        let file: TableFile =
            serde_json::from_str(text).map_err(|e| EstimateError::InvalidTable(e.to_string()))?;
        if file.version != 1 {
            return Err(EstimateError::InvalidTable(format!("unsupported version {}", file.version)));
        }
        let mut table = Self::new(provenance);
        for (k, ns) in file.entries {
            if !is_key(&k) {
                return Err(EstimateError::InvalidTable(format!(
                    "`{k}` is not a 64-digit lowercase hex key"
                )));
            }
            table.insert_ns(&RegionKey::from_hex(k), ns)?;
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, EstimateError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| EstimateError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text, path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        let file = TableFile {
            version: 1,
            entries: self.entries.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("table serializes");
        s.push('\n');
        s
    }
}

/// Look up a region's measured latency. FLOPs and bytes are still counted
/// for reporting and to tag the bound.
pub fn table_lookup_estimate(
    region: &ComputeRegion,
    table: &LatencyTable,
    hw: &HardwareConfig,
) -> Result<EstimatorResult, EstimateError> {
    let latency = table
        .get(&region.canonical_key)
        .ok_or_else(|| EstimateError::MissingLatency {
            region: region.region_id,
            key: region.canonical_key.to_string(),
        })?;
    let flops = region_flops(region, false)?;
    let bytes_moved = boundary_bytes(region)?;
    let (_, bound) = roofline(flops, bytes_moved, hw);
    Ok(EstimatorResult {
        latency,
        flops,
        bytes_moved,
        bound,
        provenance: Provenance::Table,
    })
}

/// Replays a [`LatencyTable`], optionally falling back to the roofline on a miss.
#[derive(Debug, Clone)]
pub struct TableEstimator {
    pub table: LatencyTable,
    pub source: String,
    pub fallback: bool,
}

impl ComputeEstimator for TableEstimator {
    fn name(&self) -> &str {
        "table"
    }

    fn identity(&self) -> String {
        format!("table:{}:{}", self.source, if self.fallback { "fallback" } else { "strict" })
    }

    fn estimate(&self, region: &ComputeRegion, hw: &HardwareConfig) -> Result<EstimatorResult, EstimateError> {
        match table_lookup_estimate(region, &self.table, hw) {
            Err(EstimateError::MissingLatency { .. }) if self.fallback => {
                let mut r = roofline_estimate(region, hw, false)?;
                r.provenance = Provenance::Fallback;
                Ok(r)
            }
            other => other,
        }
    }

    fn compile_args(&self) -> Vec<(String, String)> {
        vec![
            ("toolchain".into(), "profiled".into()),
            ("source".into(), self.source.clone()),
        ]
    }

    fn default_runs(&self) -> u32 {
        5
    }
}
