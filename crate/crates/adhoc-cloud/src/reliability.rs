//! Host reliability scoring and ranking.
//!
//! Reliability is a percentage derived from three per-host counters: jobs
//! assigned (CA), jobs completed (CC) and failures (NF). The score is 0 when
//! every assigned job ended in failure, 100 while the host has never failed,
//! and the completion ratio otherwise. A linear complement, clamped to the
//! open unit interval, turns the score into the per-host failure probability
//! used by snapshot placement.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{GuestState, HostId, HostRecord, Liveness};

#[derive(Debug, Error, PartialEq)]
pub enum ReliabilityError {
    #[error("counter precondition violated: CA={ca} CC={cc} NF={nf}")]
    BadCounters { ca: u64, cc: u64, nf: u64 },
    #[error("reliability {0} outside [0, 100]")]
    OutOfRange(f64),
    #[error("{0} event would break a counter invariant")]
    IllegalEvent(&'static str),
}

/// Reliability derived for one host, alongside its failure probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityView {
    pub host_id: HostId,
    pub reliability: f64,
    pub failure_probability: f64,
}

/// Counter events that update a host's reliability bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HostEvent {
    JobAssigned,
    JobCompleted,
    HostFailure,
    GuestFailure,
}

/// Piecewise reliability percentage from the (CA, CC, NF) counters.
///
/// The all-failed branch is checked before the no-failure branch, with an
/// explicit guard so a brand-new host (CA = 0) scores 100.
pub fn host_reliability(ca: u64, cc: u64, nf: u64) -> Result<f64, ReliabilityError> {
    if cc > ca || nf > ca {
        return Err(ReliabilityError::BadCounters { ca, cc, nf });
    }
    Ok(if ca > 0 && nf == ca {
        0.0
    } else if nf == 0 {
        100.0
    } else {
        (cc as f64 / ca as f64) * 100.0
    })
}

/// Linear complement of the reliability percentage, clamped inside (0, 1) so
/// no host claims certain survival or certain failure in placement products.
pub fn failure_probability(reliability: f64) -> Result<f64, ReliabilityError> {
    if !(0.0..=100.0).contains(&reliability) {
        return Err(ReliabilityError::OutOfRange(reliability));
    }
    Ok(((100.0 - reliability) / 100.0).clamp(0.01, 0.99))
}

/// Reliability view of a host record. `new_host_reliability` substitutes for
/// the formula on hosts that were never assigned a job (100 by default, 50
/// under the optimistic-prior configuration).
pub fn view_for(host: &HostRecord, new_host_reliability: f64) -> ReliabilityView {
    let reliability = if host.jobs_assigned == 0 {
        new_host_reliability
    } else {
        host_reliability(host.jobs_assigned, host.jobs_completed, host.failures)
            .expect("host record counters satisfy domain invariants")
    };
    ReliabilityView {
        host_id: host.host_id.clone(),
        reliability,
        failure_probability: failure_probability(reliability)
            .expect("reliability within range"),
    }
}

/// Candidate view used when ranking hosts for job scheduling.
#[derive(Debug, Clone, PartialEq)]
pub struct HostView {
    pub host_id: HostId,
    pub reliability: f64,
    pub liveness: Liveness,
    pub in_use: bool,
    pub guest_state: GuestState,
}

/// Hosts ready to take a job, most reliable first; ties broken by ascending
/// host identifier so the order is a pure function of the input set.
pub fn rank_ready_hosts(hosts: &[HostView]) -> Vec<HostId> {
    let mut ready: Vec<&HostView> = hosts
        .iter()
        .filter(|h| {
            h.liveness == Liveness::Up && !h.in_use && h.guest_state == GuestState::Stopped
        })
        .collect();
    ready.sort_by(|a, b| {
        b.reliability
            .total_cmp(&a.reliability)
            .then_with(|| a.host_id.cmp(&b.host_id))
    });
    ready.into_iter().map(|h| h.host_id.clone()).collect()
}

/// Applies a counter event to the host record.
///
/// Failures count toward NF only while a job is assigned and not yet
/// completed on the host (`in_use`), which keeps NF bounded by CA. Returns
/// the recomputed view for the events after which reliability is recalculated
/// (completion and both failure kinds), `None` after a plain assignment.
pub fn record_event(
    host: &mut HostRecord,
    event: HostEvent,
    new_host_reliability: f64,
) -> Result<Option<ReliabilityView>, ReliabilityError> {
    match event {
        HostEvent::JobAssigned => {
            host.jobs_assigned += 1;
            Ok(None)
        }
        HostEvent::JobCompleted => {
            if host.jobs_completed + 1 > host.jobs_assigned {
                return Err(ReliabilityError::IllegalEvent("JobCompleted"));
            }
            host.jobs_completed += 1;
            Ok(Some(view_for(host, new_host_reliability)))
        }
        HostEvent::HostFailure | HostEvent::GuestFailure => {
            if host.in_use {
                if host.failures + 1 > host.jobs_assigned {
                    return Err(ReliabilityError::IllegalEvent("failure"));
                }
                host.failures += 1;
            }
            Ok(Some(view_for(host, new_host_reliability)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::HostId;

    #[test]
    fn all_failed_scores_zero() {
        assert_eq!(host_reliability(5, 0, 5).unwrap(), 0.0);
    }

    #[test]
    fn no_failures_scores_hundred() {
        assert_eq!(host_reliability(7, 7, 0).unwrap(), 100.0);
    }

    #[test]
    fn general_case_is_completion_ratio() {
        assert_eq!(host_reliability(4, 3, 1).unwrap(), 75.0);
    }

    #[test]
    fn fresh_host_scores_hundred() {
        assert_eq!(host_reliability(0, 0, 0).unwrap(), 100.0);
    }

    #[test]
    fn bad_counters_rejected() {
        assert!(host_reliability(2, 3, 0).is_err());
        assert!(host_reliability(2, 0, 3).is_err());
    }

    #[test]
    fn failure_probability_clamps() {
        // Exhaustive sweep over integer percentages: clamped complement.
        for r in 0..=100u32 {
            let p = failure_probability(r as f64).unwrap();
            let expected = ((100.0 - r as f64) / 100.0).clamp(0.01, 0.99);
            assert_eq!(p, expected);
        }
        assert_eq!(failure_probability(100.0).unwrap(), 0.01);
        assert_eq!(failure_probability(75.0).unwrap(), 0.25);
        assert_eq!(failure_probability(0.0).unwrap(), 0.99);
        assert!(failure_probability(101.0).is_err());
        assert!(failure_probability(-1.0).is_err());
    }

    fn view(id: &str, rel: f64, live: Liveness, in_use: bool, guest: GuestState) -> HostView {
        HostView {
            host_id: HostId::from(id),
            reliability: rel,
            liveness: live,
            in_use,
            guest_state: guest,
        }
    }

    #[test]
    fn ranking_filters_and_orders() {
        let hosts = vec![
            view("hA", 90.0, Liveness::Up, false, GuestState::Stopped),
            view("hB", 95.0, Liveness::Up, false, GuestState::Stopped),
            view("hC", 99.0, Liveness::Down, false, GuestState::Stopped),
        ];
        assert_eq!(
            rank_ready_hosts(&hosts),
            vec![HostId::from("hB"), HostId::from("hA")]
        );
    }

    #[test]
    fn ranking_tie_breaks_by_id() {
        let hosts = vec![
            view("hB", 80.0, Liveness::Up, false, GuestState::Stopped),
            view("hA", 80.0, Liveness::Up, false, GuestState::Stopped),
        ];
        assert_eq!(
            rank_ready_hosts(&hosts),
            vec![HostId::from("hA"), HostId::from("hB")]
        );
    }

    #[test]
    fn ranking_empty() {
        assert!(rank_ready_hosts(&[]).is_empty());
    }

    fn host(ca: u64, cc: u64, nf: u64, in_use: bool) -> HostRecord {
        HostRecord {
            jobs_assigned: ca,
            jobs_completed: cc,
            failures: nf,
            in_use,
            ..HostRecord::new(HostId::from("h0"), 0)
        }
    }

    #[test]
    fn completion_recomputes_reliability() {
        let mut h = host(1, 0, 0, true);
        let v = record_event(&mut h, HostEvent::JobCompleted, 100.0)
            .unwrap()
            .unwrap();
        assert_eq!((h.jobs_assigned, h.jobs_completed, h.failures), (1, 1, 0));
        assert_eq!(v.reliability, 100.0);
    }

    #[test]
    fn host_failure_with_outstanding_job_counts() {
        let mut h = host(1, 0, 0, true);
        let v = record_event(&mut h, HostEvent::HostFailure, 100.0)
            .unwrap()
            .unwrap();
        assert_eq!(h.failures, 1);
        assert_eq!(v.reliability, 0.0);
    }

    #[test]
    fn guest_failure_midway() {
        let mut h = host(2, 1, 0, true);
        let v = record_event(&mut h, HostEvent::GuestFailure, 100.0)
            .unwrap()
            .unwrap();
        assert_eq!(h.failures, 1);
        assert_eq!(v.reliability, 50.0);
    }

    #[test]
    fn idle_failure_does_not_count() {
        let mut h = host(3, 3, 0, false);
        record_event(&mut h, HostEvent::HostFailure, 100.0).unwrap();
        assert_eq!(h.failures, 0);
    }

    #[test]
    fn assignment_does_not_recompute() {
        let mut h = host(0, 0, 0, false);
        assert!(record_event(&mut h, HostEvent::JobAssigned, 100.0)
            .unwrap()
            .is_none());
        assert_eq!(h.jobs_assigned, 1);
    }
}
