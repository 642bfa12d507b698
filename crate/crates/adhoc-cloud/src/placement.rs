//! Snapshot receiver selection.
//!
//! Candidates are filtered (no sender, no busy or unreachable hosts, enough
//! storage headroom), grouped same-cloudlet-first, ordered by descending
//! reliability, and the smallest prefix whose combined failure probability
//! meets the threshold becomes the receiver set.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::domain::{CloudletId, HostId, Liveness};

/// Peer host attributes the placement filter decides on. Built from the
/// available-host list the server returns in poll responses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateView {
    pub host_id: HostId,
    pub reliability: f64,
    pub failure_probability: f64,
    pub liveness: Liveness,
    pub in_use: bool,
    pub storage_free: u64,
    pub cloudlets: BTreeSet<CloudletId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementConfig {
    /// Maximum acceptable probability that every receiver fails.
    pub threshold: f64,
    /// Lower bound on the receiver count when enough candidates exist.
    pub min_replicas: usize,
    /// Restrict receivers to the sender's cloudlets instead of merely
    /// preferring them.
    pub strict_cloudlet: bool,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        Self {
            threshold: 0.05,
            min_replicas: 1,
            strict_cloudlet: false,
        }
    }
}

/// Outcome of receiver selection for one snapshot round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementDecision {
    pub receivers: Vec<HostId>,
    pub combined_failure_probability: f64,
    /// The threshold could not be met with the candidates at hand.
    pub degraded: bool,
}

/// Orders the viable receiver candidates for a sender.
///
/// Excludes the sender itself, busy hosts, hosts not up, and hosts without
/// headroom for `snapshot_size`. Same-cloudlet candidates come first, each
/// partition sorted by reliability descending with identifier tie-break.
pub fn filter_receivers(
    sender: &HostId,
    sender_cloudlets: &BTreeSet<CloudletId>,
    candidates: &[CandidateView],
    snapshot_size: u64,
    config: &PlacementConfig,
) -> Vec<CandidateView> {
    let mut same: Vec<CandidateView> = Vec::new();
    let mut other: Vec<CandidateView> = Vec::new();
    for c in candidates {
        if &c.host_id == sender
            || c.in_use
            || c.liveness != Liveness::Up
            || c.storage_free < snapshot_size
        {
            continue;
        }
        let shared = !sender_cloudlets.is_disjoint(&c.cloudlets);
        if shared {
            same.push(c.clone());
        } else if !config.strict_cloudlet {
            other.push(c.clone());
        }
    }
    let by_reliability = |a: &CandidateView, b: &CandidateView| {
        b.reliability
            .total_cmp(&a.reliability)
            .then_with(|| a.host_id.cmp(&b.host_id))
    };
    same.sort_by(by_reliability);
    other.sort_by(by_reliability);
    same.extend(other);
    same
}

/// Takes the smallest candidate prefix whose failure-probability product is
/// within the threshold (and at least `min_replicas` long). If no prefix
/// qualifies, every candidate is taken and the decision is marked degraded.
pub fn select_receivers(
    ordered_candidates: &[CandidateView],
    config: &PlacementConfig,
) -> PlacementDecision {
    let mut product = 1.0f64;
    for (i, c) in ordered_candidates.iter().enumerate() {
        product *= c.failure_probability;
        if product <= config.threshold && i + 1 >= config.min_replicas {
            return PlacementDecision {
                receivers: ordered_candidates[..=i]
                    .iter()
                    .map(|c| c.host_id.clone())
                    .collect(),
                combined_failure_probability: product,
                degraded: false,
            };
        }
    }
    PlacementDecision {
        receivers: ordered_candidates
            .iter()
            .map(|c| c.host_id.clone())
            .collect(),
        combined_failure_probability: product,
        degraded: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(id: &str, rel: f64, p: f64) -> CandidateView {
        CandidateView {
            host_id: HostId::from(id),
            reliability: rel,
            failure_probability: p,
            liveness: Liveness::Up,
            in_use: false,
            storage_free: 1 << 30,
            cloudlets: BTreeSet::new(),
        }
    }

    // Reference selection: exhaustive prefix enumeration.
    fn brute_force(probs: &[f64], cfg: &PlacementConfig) -> (usize, f64, bool) {
        let mut best: Option<(usize, f64)> = None;
        for n in 1..=probs.len() {
            let product: f64 = probs[..n].iter().product();
            if product <= cfg.threshold && n >= cfg.min_replicas {
                best = Some((n, product));
                break;
            }
        }
        match best {
            Some((n, p)) => (n, p, false),
            None => (probs.len(), probs.iter().product(), true),
        }
    }

    fn check_against_oracle(probs: &[f64], cfg: &PlacementConfig) {
        let cands: Vec<CandidateView> = probs
            .iter()
            .enumerate()
            .map(|(i, &p)| cand(&format!("h{i:02}"), 100.0 * (1.0 - p), p))
            .collect();
        let d = select_receivers(&cands, cfg);
        let (n, product, degraded) = brute_force(probs, cfg);
        assert_eq!(d.receivers.len(), n);
        assert!((d.combined_failure_probability - product).abs() < 1e-12);
        assert_eq!(d.degraded, degraded);
    }

    #[test]
    fn three_needed_for_threshold() {
        // Prefix products 0.3, 0.06, 0.03; only the full prefix qualifies.
        let cfg = PlacementConfig::default();
        check_against_oracle(&[0.3, 0.2, 0.5], &cfg);
        let cands = [cand("hA", 70.0, 0.3), cand("hB", 80.0, 0.2), cand("hC", 50.0, 0.5)];
        let d = select_receivers(&cands, &cfg);
        assert_eq!(d.receivers.len(), 3);
        assert!((d.combined_failure_probability - 0.03).abs() < 1e-12);
        assert!(!d.degraded);
    }

    #[test]
    fn single_host_under_threshold() {
        let cfg = PlacementConfig::default();
        let d = select_receivers(&[cand("hA", 96.0, 0.04)], &cfg);
        assert_eq!(d.receivers.len(), 1);
        assert!((d.combined_failure_probability - 0.04).abs() < 1e-12);
        assert!(!d.degraded);
    }

    #[test]
    fn minimal_prefix_stops_at_two() {
        // 0.10 * 0.10 = 0.01 already meets the threshold, so the third
        // candidate is not taken under minimal-prefix semantics.
        let cfg = PlacementConfig::default();
        let cands = [cand("hA", 90.0, 0.10), cand("hB", 90.0, 0.10), cand("hC", 97.0, 0.03)];
        let d = select_receivers(&cands, &cfg);
        assert_eq!(d.receivers.len(), 2);
        assert!((d.combined_failure_probability - 0.01).abs() < 1e-12);
    }

    #[test]
    fn min_replicas_forces_wider_fanout() {
        let cfg = PlacementConfig {
            min_replicas: 3,
            ..PlacementConfig::default()
        };
        let cands = [cand("hA", 90.0, 0.10), cand("hB", 90.0, 0.10), cand("hC", 97.0, 0.03)];
        let d = select_receivers(&cands, &cfg);
        assert_eq!(d.receivers.len(), 3);
        assert!((d.combined_failure_probability - 0.0003).abs() < 1e-12);
        assert!(!d.degraded);
    }

    #[test]
    fn empty_candidates_degraded() {
        let d = select_receivers(&[], &PlacementConfig::default());
        assert!(d.receivers.is_empty());
        assert!(d.degraded);
    }

    #[test]
    fn unreachable_threshold_takes_all() {
        let cfg = PlacementConfig::default();
        let d = select_receivers(&[cand("hA", 20.0, 0.8), cand("hB", 30.0, 0.7)], &cfg);
        assert_eq!(d.receivers.len(), 2);
        assert!(d.degraded);
        assert!((d.combined_failure_probability - 0.56).abs() < 1e-12);
    }

    fn cloudlets(ids: &[&str]) -> BTreeSet<CloudletId> {
        ids.iter().map(|s| CloudletId::from(*s)).collect()
    }

    #[test]
    fn filter_partitions_same_cloudlet_first() {
        let sender = HostId::from("hA");
        let mut busy = cand("hB", 99.0, 0.01);
        busy.in_use = true;
        let mut same = cand("hC", 90.0, 0.10);
        same.cloudlets = cloudlets(&["c1"]);
        let mut other = cand("hD", 95.0, 0.05);
        other.cloudlets = cloudlets(&["c2"]);
        let out = filter_receivers(
            &sender,
            &cloudlets(&["c1"]),
            &[busy, same, other],
            100,
            &PlacementConfig::default(),
        );
        let ids: Vec<&str> = out.iter().map(|c| c.host_id.as_str()).collect();
        assert_eq!(ids, vec!["hC", "hD"]);
    }

    #[test]
    fn filter_drops_down_hosts_and_sender() {
        let sender = HostId::from("hA");
        let mut down = cand("hB", 90.0, 0.10);
        down.liveness = Liveness::Down;
        let me = cand("hA", 90.0, 0.10);
        assert!(filter_receivers(
            &sender,
            &BTreeSet::new(),
            &[down, me],
            100,
            &PlacementConfig::default()
        )
        .is_empty());
    }

    #[test]
    fn filter_respects_storage_headroom() {
        let sender = HostId::from("hA");
        let mut small = cand("hB", 90.0, 0.10);
        small.storage_free = 50;
        let out = filter_receivers(
            &sender,
            &BTreeSet::new(),
            &[small.clone()],
            100,
            &PlacementConfig::default(),
        );
        assert!(out.is_empty());
        let out = filter_receivers(
            &sender,
            &BTreeSet::new(),
            &[small],
            50,
            &PlacementConfig::default(),
        );
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn strict_cloudlet_excludes_outsiders() {
        let sender = HostId::from("hA");
        let mut other = cand("hD", 95.0, 0.05);
        other.cloudlets = cloudlets(&["c2"]);
        let cfg = PlacementConfig {
            strict_cloudlet: true,
            ..PlacementConfig::default()
        };
        assert!(filter_receivers(&sender, &cloudlets(&["c1"]), &[other], 100, &cfg).is_empty());
    }
}
