//! Aggregation of the simulation event log into per-run statistics.
//!
//! The fold is a pure function of the log order, so folding a whole log
//! equals folding a prefix and then the suffix.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::HostId;
use crate::eventlog::LogEvent;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("mismatched workloads: {0} vs {1} jobs submitted")]
    MismatchedWorkloads(u64, u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityPoint {
    pub time: f64,
    pub host_id: HostId,
    pub reliability: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsReport {
    pub jobs_submitted: u64,
    pub jobs_completed: u64,
    pub completion_rate: f64,
    pub restores: u64,
    pub continuity_losses: u64,
    pub degraded_placements: u64,
    pub snapshot_bytes_transferred: u64,
    pub mean_detection_latency: Option<f64>,
    /// Time of the last job completion, if any job completed.
    pub makespan: Option<f64>,
    /// Relative slowdown of the makespan versus a failure-free baseline run
    /// of the same workload; filled in by the experiment driver.
    pub makespan_overhead: Option<f64>,
    pub per_host_reliability_series: Vec<ReliabilityPoint>,
    #[serde(skip)]
    detection_latencies: Vec<f64>,
}

impl MetricsReport {
    pub fn fold_event(&mut self, event: &LogEvent) {
        match event {
            LogEvent::JobSubmitted { .. } => self.jobs_submitted += 1,
            LogEvent::JobCompleted { t, .. } => {
                self.jobs_completed += 1;
                self.makespan = Some(self.makespan.unwrap_or(0.0).max(*t));
            }
            LogEvent::RestoreIssued { .. } => self.restores += 1,
            LogEvent::ContinuityLoss { .. } => self.continuity_losses += 1,
            LogEvent::DegradedPlacement { .. } => self.degraded_placements += 1,
            LogEvent::TransferComplete { bytes, .. } => {
                self.snapshot_bytes_transferred += bytes;
            }
            LogEvent::HostDeclaredFailed {
                latency: Some(l), ..
            } => self.detection_latencies.push(*l),
            LogEvent::ReliabilityUpdated {
                t,
                host,
                reliability,
            } => self.per_host_reliability_series.push(ReliabilityPoint {
                time: *t,
                host_id: host.clone(),
                reliability: *reliability,
            }),
            _ => {}
        }
        self.completion_rate = if self.jobs_submitted == 0 {
            0.0
        } else {
            self.jobs_completed as f64 / self.jobs_submitted as f64
        };
        self.mean_detection_latency = if self.detection_latencies.is_empty() {
            None
        } else {
            Some(self.detection_latencies.iter().sum::<f64>() / self.detection_latencies.len() as f64)
        };
    }

    pub fn from_log(log: &[LogEvent]) -> Self {
        let mut report = Self::default();
        for e in log {
            report.fold_event(e);
        }
        report
    }

    /// Human-readable summary table.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let mut row = |k: &str, v: String| {
            out.push_str(&format!("{k:<28} {v}\n"));
        };
        row("jobs_submitted", self.jobs_submitted.to_string());
        row("jobs_completed", self.jobs_completed.to_string());
        row("completion_rate", format!("{:.4}", self.completion_rate));
        row("restores", self.restores.to_string());
        row("continuity_losses", self.continuity_losses.to_string());
        row("degraded_placements", self.degraded_placements.to_string());
        row(
            "snapshot_bytes_transferred",
            self.snapshot_bytes_transferred.to_string(),
        );
        row(
            "mean_detection_latency",
            match self.mean_detection_latency {
                Some(l) => format!("{l:.3}"),
                None => "n/a".into(),
            },
        );
        row(
            "makespan",
            match self.makespan {
                Some(m) => format!("{m:.3}"),
                None => "n/a".into(),
            },
        );
        row(
            "makespan_overhead",
            match self.makespan_overhead {
                Some(o) => format!("{o:.4}"),
                None => "n/a".into(),
            },
        );
        out
    }
}

/// Deltas between two runs of the same workload (e.g. replication on vs off).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaSummary {
    pub completion_rate_delta: f64,
    pub restores_delta: i64,
    pub continuity_losses_delta: i64,
    pub makespan_delta: Option<f64>,
}

pub fn compare(a: &MetricsReport, b: &MetricsReport) -> Result<DeltaSummary, MetricsError> {
    if a.jobs_submitted != b.jobs_submitted {
        return Err(MetricsError::MismatchedWorkloads(
            a.jobs_submitted,
            b.jobs_submitted,
        ));
    }
    Ok(DeltaSummary {
        completion_rate_delta: a.completion_rate - b.completion_rate,
        restores_delta: a.restores as i64 - b.restores as i64,
        continuity_losses_delta: a.continuity_losses as i64 - b.continuity_losses as i64,
        makespan_delta: match (a.makespan, b.makespan) {
            (Some(x), Some(y)) => Some(x - y),
            _ => None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::JobId;

    fn submitted(t: f64, n: u64) -> LogEvent {
        LogEvent::JobSubmitted {
            t,
            job: JobId::from(format!("j{n}").as_str()),
            total_work: 100.0,
        }
    }

    fn completed(t: f64, n: u64) -> LogEvent {
        LogEvent::JobCompleted {
            t,
            job: JobId::from(format!("j{n}").as_str()),
            host: HostId::from("h00"),
        }
    }

    #[test]
    fn empty_log_zeroed() {
        let r = MetricsReport::from_log(&[]);
        assert_eq!(r.jobs_submitted, 0);
        assert_eq!(r.completion_rate, 0.0);
    }

    #[test]
    fn counts_and_rate() {
        let log = vec![submitted(0.0, 0), submitted(0.0, 1), completed(50.0, 0)];
        let r = MetricsReport::from_log(&log);
        assert_eq!(r.jobs_completed, 1);
        assert_eq!(r.completion_rate, 0.5);
        assert_eq!(r.makespan, Some(50.0));
    }

    #[test]
    fn prefix_plus_suffix_equals_whole() {
        let log = vec![
            submitted(0.0, 0),
            submitted(0.0, 1),
            completed(10.0, 0),
            completed(20.0, 1),
        ];
        let whole = MetricsReport::from_log(&log);
        let mut split = MetricsReport::from_log(&log[..2]);
        for e in &log[2..] {
            split.fold_event(e);
        }
        assert_eq!(whole, split);
    }

    #[test]
    fn compare_identical_runs_zero_delta() {
        let log = vec![submitted(0.0, 0), completed(10.0, 0)];
        let a = MetricsReport::from_log(&log);
        let d = compare(&a, &a.clone()).unwrap();
        assert_eq!(d.completion_rate_delta, 0.0);
        assert_eq!(d.restores_delta, 0);
    }

    #[test]
    fn compare_rejects_mismatched_workloads() {
        let a = MetricsReport::from_log(&[submitted(0.0, 0)]);
        let b = MetricsReport::from_log(&[]);
        assert!(compare(&a, &b).is_err());
    }
}
