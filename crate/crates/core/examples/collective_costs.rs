//! Ring collective latencies across message sizes and group sizes.

use hlosim::network::{collective_latency, SystemConfig};
use hlosim::trace::CollectiveKind;

fn main() {
    let sys = SystemConfig::preset("gh200-16").unwrap().with_internode_bandwidth(25e9);
    println!("system {} ({} devices)", sys.name, sys.device_count);
    for bytes in [72u64, 1 << 20, 256 << 20] {
        for group in [2u32, 4, 16] {
            let row: Vec<String> = CollectiveKind::ALL
                .iter()
                .map(|&k| {
                    let t = collective_latency(k, bytes, group, &sys).unwrap();
                    format!("{}={t:.3e}", k.json_name())
                })
                .collect();
            println!("{bytes:>10} B  p={group}  {}", row.join("  "));
        }
    }
}
