//! Picks snapshot receivers for a sender: viable candidates are ordered by
//! reliability and the smallest prefix whose combined failure probability
//! meets the threshold wins.

use std::collections::BTreeSet;

use adhoc_cloud::domain::{HostId, Liveness};
use adhoc_cloud::placement::{filter_receivers, select_receivers, CandidateView, PlacementConfig};

fn candidate(id: &str, reliability: f64, in_use: bool) -> CandidateView {
    CandidateView {
        host_id: HostId::from(id),
        reliability,
        failure_probability: (100.0 - reliability) / 100.0,
        liveness: Liveness::Up,
        in_use,
        storage_free: 10_000_000_000,
        cloudlets: BTreeSet::new(),
    }
}

fn main() {
    let sender = HostId::from("hA");
    let candidates = vec![
        candidate("hB", 90.0, false),
        candidate("hC", 70.0, false),
        candidate("hD", 95.0, false),
        candidate("hE", 94.0, false),
        candidate("hF", 60.0, true), // busy, filtered out
        candidate("hG", 50.0, false),
    ];
    for config in [
        PlacementConfig::default(),
        PlacementConfig {
            min_replicas: 3,
            ..PlacementConfig::default()
        },
    ] {
        let ordered = filter_receivers(&sender, &BTreeSet::new(), &candidates, 1_000_000_000, &config);
        let decision = select_receivers(&ordered, &config);
        let receivers: Vec<&str> = decision.receivers.iter().map(|h| h.as_str()).collect();
        println!(
            "threshold={} min_replicas={} -> receivers=[{}] p_all_fail={:.4} degraded={}",
            config.threshold,
            config.min_replicas,
            receivers.join(", "),
            decision.combined_failure_probability,
            decision.degraded
        );
    }
}
