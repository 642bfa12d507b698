//! Core entity records shared by every other module: hosts, guests, jobs,
//! snapshots and cloudlets, plus stateless invariant checks.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! id_type {
    ($name:ident, $prefix:expr) => {
        #[derive(
            Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                Self(s.into())
            }

            pub fn numbered(n: usize) -> Self {
                Self(format!(concat!($prefix, "{:02}"), n))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }
    };
}

id_type!(HostId, "h");
id_type!(GuestId, "g");
id_type!(JobId, "j");
id_type!(SnapshotId, "s");
id_type!(CloudletId, "c");

/// Server-side view of whether a host is reachable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Liveness {
    Up,
    Down,
    FailedDeclared,
}

impl fmt::Display for Liveness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Liveness::Up => "up",
            Liveness::Down => "down",
            Liveness::FailedDeclared => "failed-declared",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GuestState {
    Stopped,
    Running,
    Suspended,
    Failed,
}

impl fmt::Display for GuestState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GuestState::Stopped => "stopped",
            GuestState::Running => "running",
            GuestState::Suspended => "suspended",
            GuestState::Failed => "failed",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JobStatus {
    Submitted,
    Scheduled,
    Running,
    Completed,
    FailedPermanent,
}

impl fmt::Display for JobStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            JobStatus::Submitted => "submitted",
            JobStatus::Scheduled => "scheduled",
            JobStatus::Running => "running",
            JobStatus::Completed => "completed",
            JobStatus::FailedPermanent => "failed-permanent",
        };
        f.write_str(s)
    }
}

/// A participating machine with its reliability counters and storage budget.
///
/// The counter fields follow the bookkeeping the scheduler ranks on:
/// `jobs_assigned` (CA), `jobs_completed` (CC) and `failures` (NF).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HostRecord {
    pub host_id: HostId,
    pub jobs_assigned: u64,
    pub jobs_completed: u64,
    pub failures: u64,
    pub liveness: Liveness,
    pub last_poll_time: f64,
    pub storage_capacity: u64,
    pub storage_used: u64,
    pub in_use: bool,
    pub cloudlets: BTreeSet<CloudletId>,
}

impl HostRecord {
    pub fn new(host_id: HostId, storage_capacity: u64) -> Self {
        Self {
            host_id,
            jobs_assigned: 0,
            jobs_completed: 0,
            failures: 0,
            liveness: Liveness::Up,
            last_poll_time: 0.0,
            storage_capacity,
            storage_used: 0,
            in_use: false,
            cloudlets: BTreeSet::new(),
        }
    }

    pub fn storage_free(&self) -> u64 {
        self.storage_capacity.saturating_sub(self.storage_used)
    }

    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.jobs_completed > self.jobs_assigned {
            v.push(format!(
                "host {}: jobs_completed ({}) exceeds jobs_assigned ({})",
                self.host_id, self.jobs_completed, self.jobs_assigned
            ));
        }
        if self.failures > self.jobs_assigned {
            v.push(format!(
                "host {}: failures ({}) exceeds jobs_assigned ({})",
                self.host_id, self.failures, self.jobs_assigned
            ));
        }
        if self.storage_used > self.storage_capacity {
            v.push(format!(
                "host {}: storage_used ({}) exceeds storage_capacity ({})",
                self.host_id, self.storage_used, self.storage_capacity
            ));
        }
        v
    }
}

/// The abstract checkpointable virtual machine bound to a host; executes at
/// most one job at a time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuestRecord {
    pub guest_id: GuestId,
    pub host_id: HostId,
    pub state: GuestState,
    pub job_id: Option<JobId>,
    pub cloudlet_id: Option<CloudletId>,
}

impl GuestRecord {
    pub fn new(guest_id: GuestId, host_id: HostId) -> Self {
        Self {
            guest_id,
            host_id,
            state: GuestState::Stopped,
            job_id: None,
            cloudlet_id: None,
        }
    }

    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if matches!(self.state, GuestState::Running | GuestState::Suspended)
            && self.job_id.is_none()
        {
            v.push(format!(
                "guest {}: state {} with no job attached",
                self.guest_id, self.state
            ));
        }
        v
    }
}

/// A unit of cloud work, abstracted as a work counter advanced one unit per
/// simulated second of running time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub job_id: JobId,
    pub total_work: f64,
    pub progress: f64,
    pub status: JobStatus,
    pub current_guest: Option<GuestId>,
    pub restore_count: u32,
    /// Size of this job's guest checkpoint, bytes.
    pub snapshot_size: u64,
    pub cloudlet: Option<CloudletId>,
}

impl JobRecord {
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.progress < 0.0 || self.progress > self.total_work {
            v.push(format!(
                "job {}: progress {} outside [0, {}]",
                self.job_id, self.progress, self.total_work
            ));
        }
        let done = (self.progress - self.total_work).abs() < 1e-9;
        if (self.status == JobStatus::Completed) != done
            && self.status != JobStatus::FailedPermanent
        {
            v.push(format!(
                "job {}: status {} inconsistent with progress {}/{}",
                self.job_id, self.status, self.progress, self.total_work
            ));
        }
        v
    }
}

/// A point-in-time guest checkpoint together with the hosts storing it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub snapshot_id: SnapshotId,
    pub guest_id: GuestId,
    pub job_id: JobId,
    pub sequence: u64,
    pub captured_at: f64,
    pub captured_progress: f64,
    pub size: u64,
    pub locations: BTreeSet<HostId>,
}

impl SnapshotRecord {
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.captured_progress < 0.0 {
            v.push(format!(
                "snapshot {}: negative captured_progress",
                self.snapshot_id
            ));
        }
        v
    }
}

/// A named group of guests offering one service or environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cloudlet {
    pub cloudlet_id: CloudletId,
    pub member_guests: BTreeSet<GuestId>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn host(ca: u64, cc: u64, nf: u64) -> HostRecord {
        HostRecord {
            jobs_assigned: ca,
            jobs_completed: cc,
            failures: nf,
            ..HostRecord::new(HostId::from("hA"), 1000)
        }
    }

    #[test]
    fn valid_host_passes() {
        assert!(host(4, 3, 1).validate().is_empty());
    }

    #[test]
    fn completed_above_assigned_flagged() {
        let v = host(2, 3, 0).validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("jobs_completed"));
    }

    #[test]
    fn storage_overflow_flagged() {
        let mut h = host(0, 0, 0);
        h.storage_used = 2000;
        assert!(h.validate().iter().any(|m| m.contains("storage_used")));
    }

    #[test]
    fn completed_job_consistent() {
        let j = JobRecord {
            job_id: JobId::from("j0"),
            total_work: 100.0,
            progress: 100.0,
            status: JobStatus::Completed,
            current_guest: None,
            restore_count: 0,
            snapshot_size: 0,
            cloudlet: None,
        };
        assert!(j.validate().is_empty());
    }

    #[test]
    fn running_guest_needs_job() {
        let mut g = GuestRecord::new(GuestId::from("g0"), HostId::from("h0"));
        g.state = GuestState::Running;
        assert_eq!(g.validate().len(), 1);
    }
}
