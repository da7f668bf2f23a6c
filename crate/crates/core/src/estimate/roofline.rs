use crate::slicer::ComputeRegion;

use super::{op_flops, Bound, ComputeEstimator, EstimateError, EstimatorResult, HardwareConfig, Provenance};

/// Sum of member FLOPs, including fused bodies. Unknown ops count as zero
/// (with a warning) unless `strict`.
pub fn region_flops(region: &ComputeRegion, strict: bool) -> Result<u64, EstimateError> {
    let mut total = 0u64;
    for op in &region.ops {
        let f = match op_flops(op) {
            Err(EstimateError::UnknownOp(name)) if !strict => {
                log::warn!("no FLOP rule for {name}; charging memory traffic only");
                0
            }
            other => other?,
        };
        total = total
            .checked_add(f)
            .ok_or_else(|| EstimateError::FlopOverflow(format!("region {}", region.region_id)))?;
    }
    Ok(total)
}

/// Bytes crossing the region boundary. Internal values are free.
pub fn boundary_bytes(region: &ComputeRegion) -> Result<u64, EstimateError> {
    let overflow = || EstimateError::ByteOverflow(format!("region {}", region.region_id));
    region
        .boundary_inputs
        .iter()
        .chain(&region.boundary_outputs)
        .try_fold(0u64, |acc, t| {
            acc.checked_add(t.byte_size().map_err(|_| overflow())?)
                .ok_or_else(overflow)
        })
}

/// `(latency, bound)` for the given work on the given roofs.
pub fn roofline(flops: u64, bytes: u64, hw: &HardwareConfig) -> (f64, Bound) {
    let compute = flops as f64 / hw.peak_compute;
    let memory = bytes as f64 / hw.memory_bandwidth;
    if compute > memory {
        (compute, Bound::ComputeBound)
    } else {
        (memory, Bound::MemoryBound)
    }
}

pub fn roofline_estimate(
    region: &ComputeRegion,
    hw: &HardwareConfig,
    strict: bool,
) -> Result<EstimatorResult, EstimateError> {
    let flops = region_flops(region, strict)?;
    let bytes_moved = boundary_bytes(region)?;
    let (latency, bound) = roofline(flops, bytes_moved, hw);
    Ok(EstimatorResult {
        latency,
        flops,
        bytes_moved,
        bound,
        provenance: Provenance::Roofline,
    })
}

/// Analytical per-region roofline.
#[derive(Debug, Clone, Default)]
pub struct RooflineEstimator {
    /// Reject regions containing ops without a FLOP rule.
    pub strict: bool,
}

impl ComputeEstimator for RooflineEstimator {
    fn name(&self) -> &str {
        "roofline"
    }

    fn identity(&self) -> String {
        if self.strict {
            "roofline:strict".into()
        } else {
            "roofline".into()
        }
    }

    fn estimate(&self, region: &ComputeRegion, hw: &HardwareConfig) -> Result<EstimatorResult, EstimateError> {
        roofline_estimate(region, hw, self.strict)
    }

    fn compile_args(&self) -> Vec<(String, String)> {
        vec![("toolchain".into(), "raw".into())]
    }
}
