//! Closed-form ring collective costs (alpha-beta model).

use super::{NetworkError, SystemConfig, Topology};
use crate::trace::CollectiveKind;

/// Per-link bandwidth a ring over `group` devices sees. In a two-level
/// hierarchy a ring that leaves the node is limited by the internode links.
pub fn effective_bandwidth(group: u32, sys: &SystemConfig) -> Result<f64, NetworkError> {
    match sys.topology {
        Topology::AllToAllFlat | Topology::Mesh2D { .. } => Ok(sys.intranode_bandwidth),
        Topology::TwoLevelHierarchy if group <= sys.devices_per_node => Ok(sys.intranode_bandwidth),
        Topology::TwoLevelHierarchy => sys
            .internode_bandwidth
            .ok_or_else(|| NetworkError::MissingInternodeBandwidth(sys.name.clone())),
    }
}

/// Latency in seconds of one collective moving `bytes` among `group` devices.
///
/// With `p` the group size, `β` the effective bandwidth and `α` the link
/// latency, one ring pass costs `(p-1)/p · n/β + (p-1)·α`. All-gather,
/// reduce-scatter and all-to-all take one pass, all-reduce two, and a
/// permute sends the whole buffer over a single hop.
pub fn collective_latency(
    kind: CollectiveKind,
    bytes: u64,
    group: u32,
    sys: &SystemConfig,
) -> Result<f64, NetworkError> {
    if group == 0 {
        return Err(NetworkError::EmptyGroup);
    }
    if group > sys.device_count {
        return Err(NetworkError::GroupTooLarge {
            group,
            devices: sys.device_count,
        });
    }
    if group == 1 {
        return Ok(0.0);
    }
    let beta = effective_bandwidth(group, sys)?;
    let alpha = sys.link_latency;
    let n = bytes as f64;
    let steps = f64::from(group - 1);
    let ring_pass = steps / f64::from(group) * n / beta + steps * alpha;
    Ok(match kind {
        CollectiveKind::AllReduce => 2.0 * ring_pass,
        CollectiveKind::AllGather | CollectiveKind::ReduceScatter | CollectiveKind::AllToAll => {
            ring_pass
        }
        CollectiveKind::CollectivePermute => n / beta + alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(beta: f64, alpha: f64, p: u32) -> SystemConfig {
        SystemConfig {
            name: "t".into(),
            device_count: p,
            devices_per_node: p,
            intranode_bandwidth: beta,
            internode_bandwidth: None,
            link_latency: alpha,
            topology: Topology::AllToAllFlat,
            note: None,
        }
    }

    #[test]
    fn all_reduce_example() {
        let sys = SystemConfig::preset("a100x4").unwrap();
        let t = collective_latency(CollectiveKind::AllReduce, 72, 4, &sys).unwrap();
        assert_eq!(t, 1.08e-9);
    }

    #[test]
    fn all_gather_example() {
        let t = collective_latency(CollectiveKind::AllGather, 4_000_000, 4, &flat(1e11, 0.0, 4))
            .unwrap();
        assert!((t - 3.0e-5).abs() < 1e-18);
    }

    #[test]
    fn singleton_group_is_free() {
        let sys = flat(1e9, 1e-6, 4);
        for k in CollectiveKind::ALL {
            assert_eq!(collective_latency(k, 1 << 20, 1, &sys).unwrap(), 0.0);
        }
    }

    #[test]
    fn group_errors() {
        let sys = flat(1e9, 0.0, 4);
        assert!(matches!(
            collective_latency(CollectiveKind::AllReduce, 8, 5, &sys),
            Err(NetworkError::GroupTooLarge { .. })
        ));
        assert_eq!(
            collective_latency(CollectiveKind::AllReduce, 8, 0, &sys),
            Err(NetworkError::EmptyGroup)
        );
    }

    #[test]
    fn hierarchy_bandwidth() {
        let sys = SystemConfig::preset("gh200-16")
            .unwrap()
            .with_internode_bandwidth(25e9);
        assert_eq!(effective_bandwidth(4, &sys).unwrap(), 150e9);
        assert_eq!(effective_bandwidth(16, &sys).unwrap(), 25e9);
        let flat_sys = flat(7e9, 0.0, 64);
        assert_eq!(effective_bandwidth(64, &flat_sys).unwrap(), 7e9);
        let bare = SystemConfig::preset("gh200-128").unwrap();
        assert!(matches!(
            effective_bandwidth(8, &bare),
            Err(NetworkError::MissingInternodeBandwidth(_))
        ));
    }

    #[test]
    fn permute_is_single_hop() {
        let sys = flat(1e9, 2e-6, 8);
        let t = collective_latency(CollectiveKind::CollectivePermute, 1000, 8, &sys).unwrap();
        assert!((t - (1e-6 + 2e-6)).abs() < 1e-18);
    }
}
