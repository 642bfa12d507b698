//! Line-delimited simulation event log with a stable field order, suitable
//! for golden-file comparison and for folding into metrics.

use crate::domain::{GuestId, GuestState, HostId, JobId, SnapshotId};

/// One logged simulation event. Rendering is the external contract: field
/// order and float precision never change for a given variant.
#[derive(Debug, Clone, PartialEq)]
pub enum LogEvent {
    HostUp {
        t: f64,
        host: HostId,
    },
    HostDown {
        t: f64,
        host: HostId,
        running_job: Option<JobId>,
        progress_at_down: Option<f64>,
    },
    Poll {
        t: f64,
        host: HostId,
        guest_state: GuestState,
        peers: usize,
    },
    JobSubmitted {
        t: f64,
        job: JobId,
        total_work: f64,
    },
    JobScheduled {
        t: f64,
        job: JobId,
        host: HostId,
    },
    JobCompleted {
        t: f64,
        job: JobId,
        host: HostId,
    },
    JobFailedPermanent {
        t: f64,
        job: JobId,
    },
    HostDeclaredFailed {
        t: f64,
        host: HostId,
        latency: Option<f64>,
        running_job: Option<JobId>,
    },
    GuestFailureReported {
        t: f64,
        host: HostId,
        guest: GuestId,
    },
    SnapshotCaptured {
        t: f64,
        guest: GuestId,
        job: JobId,
        snapshot: SnapshotId,
        sequence: u64,
        progress: f64,
        size: u64,
    },
    TransferComplete {
        t: f64,
        snapshot: SnapshotId,
        from: HostId,
        to: HostId,
        bytes: u64,
    },
    SnapshotRegistered {
        t: f64,
        guest: GuestId,
        snapshot: SnapshotId,
        locations: Vec<HostId>,
        combined_failure_probability: f64,
    },
    DegradedPlacement {
        t: f64,
        guest: GuestId,
        receivers: usize,
        combined_failure_probability: f64,
    },
    SnapshotDeleted {
        t: f64,
        host: HostId,
        snapshot: SnapshotId,
    },
    SnapshotCopiesLost {
        t: f64,
        host: HostId,
        count: usize,
    },
    RestoreIssued {
        t: f64,
        job: JobId,
        snapshot: SnapshotId,
        target: HostId,
        captured_progress: f64,
    },
    RestoreComplete {
        t: f64,
        job: JobId,
        host: HostId,
        progress: f64,
        lost_progress: f64,
    },
    ContinuityLoss {
        t: f64,
        job: JobId,
    },
    JobRequeued {
        t: f64,
        job: JobId,
    },
    GuestSuspended {
        t: f64,
        host: HostId,
    },
    GuestResumed {
        t: f64,
        host: HostId,
    },
    ReliabilityUpdated {
        t: f64,
        host: HostId,
        reliability: f64,
    },
}

impl LogEvent {
    pub fn time(&self) -> f64 {
        use LogEvent::*;
        match self {
            HostUp { t, .. }
            | HostDown { t, .. }
            | Poll { t, .. }
            | JobSubmitted { t, .. }
            | JobScheduled { t, .. }
            | JobCompleted { t, .. }
            | JobFailedPermanent { t, .. }
            | HostDeclaredFailed { t, .. }
            | GuestFailureReported { t, .. }
            | SnapshotCaptured { t, .. }
            | TransferComplete { t, .. }
            | SnapshotRegistered { t, .. }
            | DegradedPlacement { t, .. }
            | SnapshotDeleted { t, .. }
            | SnapshotCopiesLost { t, .. }
            | RestoreIssued { t, .. }
            | RestoreComplete { t, .. }
            | ContinuityLoss { t, .. }
            | JobRequeued { t, .. }
            | GuestSuspended { t, .. }
            | GuestResumed { t, .. }
            | ReliabilityUpdated { t, .. } => *t,
        }
    }

    /// One stable log line, without trailing newline.
    pub fn render(&self) -> String {
        use LogEvent::*;
        match self {
            HostUp { t, host } => format!("t={t:.3} host_up host={host}"),
            HostDown {
                t,
                host,
                running_job,
                progress_at_down,
            } => {
                let mut s = format!("t={t:.3} host_down host={host}");
                if let Some(j) = running_job {
                    s.push_str(&format!(" job={j}"));
                }
                if let Some(p) = progress_at_down {
                    s.push_str(&format!(" progress={p:.3}"));
                }
                s
            }
            Poll {
                t,
                host,
                guest_state,
                peers,
            } => format!("t={t:.3} poll host={host} guest={guest_state} peers={peers}"),
            JobSubmitted { t, job, total_work } => {
                format!("t={t:.3} job_submitted job={job} work={total_work:.3}")
            }
            JobScheduled { t, job, host } => {
                format!("t={t:.3} job_scheduled job={job} host={host}")
            }
            JobCompleted { t, job, host } => {
                format!("t={t:.3} job_completed job={job} host={host}")
            }
            JobFailedPermanent { t, job } => {
                format!("t={t:.3} job_failed_permanent job={job}")
            }
            HostDeclaredFailed {
                t,
                host,
                latency,
                running_job,
            } => {
                let mut s = format!("t={t:.3} host_declared_failed host={host}");
                if let Some(l) = latency {
                    s.push_str(&format!(" latency={l:.3}"));
                }
                if let Some(j) = running_job {
                    s.push_str(&format!(" job={j}"));
                }
                s
            }
            GuestFailureReported { t, host, guest } => {
                format!("t={t:.3} guest_failure host={host} guest={guest}")
            }
            SnapshotCaptured {
                t,
                guest,
                job,
                snapshot,
                sequence,
                progress,
                size,
            } => format!(
                "t={t:.3} snapshot_captured guest={guest} job={job} snapshot={snapshot} seq={sequence} progress={progress:.3} size={size}"
            ),
            TransferComplete {
                t,
                snapshot,
                from,
                to,
                bytes,
            } => format!(
                "t={t:.3} transfer_complete snapshot={snapshot} from={from} to={to} bytes={bytes}"
            ),
            SnapshotRegistered {
                t,
                guest,
                snapshot,
                locations,
                combined_failure_probability,
            } => {
                let locs: Vec<&str> = locations.iter().map(|h| h.as_str()).collect();
                format!(
                    "t={t:.3} snapshot_registered guest={guest} snapshot={snapshot} locations={} p_all_fail={combined_failure_probability:.6}",
                    locs.join(",")
                )
            }
            DegradedPlacement {
                t,
                guest,
                receivers,
                combined_failure_probability,
            } => format!(
                "t={t:.3} degraded_placement guest={guest} receivers={receivers} p_all_fail={combined_failure_probability:.6}"
            ),
            SnapshotDeleted { t, host, snapshot } => {
                format!("t={t:.3} snapshot_deleted host={host} snapshot={snapshot}")
            }
            SnapshotCopiesLost { t, host, count } => {
                format!("t={t:.3} snapshot_copies_lost host={host} count={count}")
            }
            RestoreIssued {
                t,
                job,
                snapshot,
                target,
                captured_progress,
            } => format!(
                "t={t:.3} restore_issued job={job} snapshot={snapshot} target={target} captured_progress={captured_progress:.3}"
            ),
            RestoreComplete {
                t,
                job,
                host,
                progress,
                lost_progress,
            } => format!(
                "t={t:.3} restore_complete job={job} host={host} progress={progress:.3} lost_progress={lost_progress:.3}"
            ),
            ContinuityLoss { t, job } => format!("t={t:.3} continuity_loss job={job}"),
            JobRequeued { t, job } => format!("t={t:.3} job_requeued job={job}"),
            GuestSuspended { t, host } => format!("t={t:.3} guest_suspended host={host}"),
            GuestResumed { t, host } => format!("t={t:.3} guest_resumed host={host}"),
            ReliabilityUpdated {
                t,
                host,
                reliability,
            } => format!("t={t:.3} reliability host={host} value={reliability:.3}"),
        }
    }
}

/// Renders a full log, one line per event, trailing newline included.
pub fn render_log(events: &[LogEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&e.render());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_rendering() {
        let e = LogEvent::RestoreIssued {
            t: 4.0,
            job: JobId::from("j00"),
            snapshot: SnapshotId::from("s01"),
            target: HostId::from("hD"),
            captured_progress: 120.0,
        };
        assert_eq!(
            e.render(),
            "t=4.000 restore_issued job=j00 snapshot=s01 target=hD captured_progress=120.000"
        );
    }
}
