//! The per-host agent as a deterministic state machine: it owns the local
//! guest, anchors job progress to the virtual clock, watches resource usage
//! with a sustained-breach window, captures and distributes snapshots one
//! round at a time, and executes server commands as guest transitions.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::domain::{
    GuestId, GuestRecord, GuestState, HostId, JobId, SnapshotId, SnapshotRecord,
};
use crate::placement::PlacementDecision;
use crate::server::{PeerInfo, PollReport};

#[derive(Debug, Error, PartialEq)]
#[error("illegal guest transition: {action} while {state}")]
pub struct TransitionError {
    pub action: &'static str,
    pub state: GuestState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonitorAction {
    Suspend,
    Resume,
}

/// Progress anchor for the running job: progress at time `t` is
/// `anchor_progress + rate * (t - anchor_time)` while the guest runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecAnchor {
    pub job_id: JobId,
    pub total_work: f64,
    pub anchor_time: f64,
    pub anchor_progress: f64,
}

/// One in-flight snapshot distribution round.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferRound {
    pub snapshot: SnapshotRecord,
    pub decision: PlacementDecision,
    pub outstanding: BTreeSet<HostId>,
    pub succeeded: BTreeSet<HostId>,
}

#[derive(Debug, Clone)]
pub struct ClientState {
    pub host_id: HostId,
    pub guest: GuestRecord,
    pub resource_limit: f64,
    pub monitor_window: usize,
    pub work_rate: f64,
    pub recent_samples: VecDeque<f64>,
    pub known_peers: Vec<PeerInfo>,
    pub exec: Option<ExecAnchor>,
    /// Local checkpoint copies (own guest), snapshot id -> size.
    pub local_snapshots: BTreeMap<SnapshotId, u64>,
    /// Most recent local snapshot id, kept for same-host resume.
    pub last_snapshot: Option<SnapshotId>,
    /// Copies received from peers, snapshot id -> size.
    pub held_copies: BTreeMap<SnapshotId, u64>,
    pub round: Option<TransferRound>,
    pub snapshot_seq: u64,
    /// Size the next snapshot will have; set when a job is attached.
    pub pending_snapshot_size: Option<u64>,
    monitor_suspended: bool,
    failure_reported: bool,
}

impl ClientState {
    pub fn new(host_id: HostId, resource_limit: f64, monitor_window: usize, work_rate: f64) -> Self {
        let guest = GuestRecord::new(GuestId::new(format!("g-{host_id}")), host_id.clone());
        Self {
            host_id,
            guest,
            resource_limit,
            monitor_window,
            work_rate,
            recent_samples: VecDeque::new(),
            known_peers: Vec::new(),
            exec: None,
            local_snapshots: BTreeMap::new(),
            last_snapshot: None,
            held_copies: BTreeMap::new(),
            round: None,
            snapshot_seq: 0,
            pending_snapshot_size: None,
            monitor_suspended: false,
            failure_reported: false,
        }
    }

    pub fn storage_used(&self) -> u64 {
        self.local_snapshots.values().sum::<u64>() + self.held_copies.values().sum::<u64>()
    }

    /// Job progress at `now`, while a job is attached.
    pub fn current_progress(&self, now: f64) -> Option<f64> {
        let anchor = self.exec.as_ref()?;
        let p = match self.guest.state {
            GuestState::Running => {
                anchor.anchor_progress + self.work_rate * (now - anchor.anchor_time)
            }
            _ => anchor.anchor_progress,
        };
        Some(p.min(anchor.total_work))
    }

    /// Absolute completion time of the running job, if it keeps running.
    pub fn projected_completion(&self, now: f64) -> Option<f64> {
        let anchor = self.exec.as_ref()?;
        if self.guest.state != GuestState::Running {
            return None;
        }
        let remaining = anchor.total_work - self.current_progress(now)?;
        Some(now + remaining / self.work_rate)
    }

    // --- heartbeat --------------------------------------------------------

    pub fn build_poll_report(&self) -> PollReport {
        PollReport {
            guest_state: self.guest.state,
            load: self.recent_samples.back().copied().unwrap_or(0.0),
        }
    }

    /// The returned peer list replaces the previous one wholesale.
    pub fn accept_peers(&mut self, peers: Vec<PeerInfo>) {
        self.known_peers = peers;
    }

    // --- guest probing ----------------------------------------------------

    /// Emits a failure report exactly once per guest failure.
    pub fn guest_probe(&mut self) -> Option<GuestId> {
        if self.guest.state == GuestState::Failed && !self.failure_reported {
            self.failure_reported = true;
            Some(self.guest.guest_id.clone())
        } else {
            None
        }
    }

    // --- resource monitoring ----------------------------------------------

    /// Feeds one usage sample. Suspends after `monitor_window` consecutive
    /// breaching samples, resumes after the same count of compliant ones.
    pub fn resource_monitor(&mut self, sample: f64, now: f64) -> Option<MonitorAction> {
        self.recent_samples.push_back(sample);
        while self.recent_samples.len() > self.monitor_window {
            self.recent_samples.pop_front();
        }
        if self.recent_samples.len() < self.monitor_window {
            return None;
        }
        let all_over = self.recent_samples.iter().all(|s| *s > self.resource_limit);
        let all_under = self
            .recent_samples
            .iter()
            .all(|s| *s <= self.resource_limit);
        if all_over && self.guest.state == GuestState::Running {
            self.freeze_progress(now);
            self.guest.state = GuestState::Suspended;
            self.monitor_suspended = true;
            Some(MonitorAction::Suspend)
        } else if all_under && self.monitor_suspended && self.guest.state == GuestState::Suspended
        {
            self.guest.state = GuestState::Running;
            self.monitor_suspended = false;
            self.reanchor(now);
            Some(MonitorAction::Resume)
        } else {
            None
        }
    }

    fn freeze_progress(&mut self, now: f64) {
        if let Some(p) = self.current_progress(now) {
            let anchor = self.exec.as_mut().expect("progress implies anchor");
            anchor.anchor_progress = p;
            anchor.anchor_time = now;
        }
    }

    fn reanchor(&mut self, now: f64) {
        if let Some(anchor) = self.exec.as_mut() {
            anchor.anchor_time = now;
        }
    }

    // --- snapshot rounds ---------------------------------------------------

    /// Captures a checkpoint of the running guest. Skipped (None) while the
    /// guest is not running, a previous round is still in flight, or local
    /// storage lacks headroom for the checkpoint.
    pub fn capture_snapshot(
        &mut self,
        snapshot_id: SnapshotId,
        now: f64,
        capacity: u64,
    ) -> Option<SnapshotRecord> {
        if self.guest.state != GuestState::Running || self.round.is_some() {
            return None;
        }
        let anchor = self.exec.as_ref()?;
        let progress = self.current_progress(now)?;
        let job_id = anchor.job_id.clone();
        let size = self.pending_snapshot_size?;
        if self.storage_used() + size > capacity {
            return None;
        }
        self.snapshot_seq += 1;
        let record = SnapshotRecord {
            snapshot_id: snapshot_id.clone(),
            guest_id: self.guest.guest_id.clone(),
            job_id,
            sequence: self.snapshot_seq,
            captured_at: now,
            captured_progress: progress,
            size,
            locations: BTreeSet::new(),
        };
        self.local_snapshots.insert(snapshot_id, size);
        Some(record)
    }

    /// Opens a distribution round for a captured snapshot.
    pub fn begin_round(
        &mut self,
        snapshot: SnapshotRecord,
        decision: PlacementDecision,
    ) {
        debug_assert!(self.round.is_none());
        self.round = Some(TransferRound {
            outstanding: decision.receivers.iter().cloned().collect(),
            succeeded: BTreeSet::new(),
            snapshot,
            decision,
        });
    }

    /// Resolves one transfer of the open round. Returns the finished round
    /// once the last transfer resolved; the previous local snapshot is
    /// dropped at that point (most-recent-only).
    pub fn resolve_transfer(&mut self, receiver: &HostId, success: bool) -> Option<TransferRound> {
        let round = self.round.as_mut()?;
        if !round.outstanding.remove(receiver) {
            return None;
        }
        if success {
            round.succeeded.insert(receiver.clone());
        }
        if round.outstanding.is_empty() {
            let finished = self.round.take().expect("round open");
            let new_id = finished.snapshot.snapshot_id.clone();
            let old = self.last_snapshot.replace(new_id.clone());
            if let Some(old_id) = old {
                if old_id != new_id {
                    self.local_snapshots.remove(&old_id);
                }
            }
            Some(finished)
        } else {
            None
        }
    }

    // --- command execution -------------------------------------------------

    pub fn start_guest(
        &mut self,
        job_id: JobId,
        total_work: f64,
        snapshot_size: u64,
        now: f64,
    ) -> Result<(), TransitionError> {
        if self.guest.state != GuestState::Stopped {
            return Err(TransitionError {
                action: "start",
                state: self.guest.state,
            });
        }
        self.guest.state = GuestState::Running;
        self.guest.job_id = Some(job_id.clone());
        self.exec = Some(ExecAnchor {
            job_id,
            total_work,
            anchor_time: now,
            anchor_progress: 0.0,
        });
        self.pending_snapshot_size = Some(snapshot_size);
        self.snapshot_seq = 0;
        Ok(())
    }

    /// Restores a held snapshot copy: the guest runs the job from the
    /// snapshot's recorded progress, and the copy becomes the local one.
    pub fn restore_snapshot(
        &mut self,
        snapshot: &SnapshotRecord,
        now: f64,
    ) -> Result<(), TransitionError> {
        if self.guest.state != GuestState::Stopped {
            return Err(TransitionError {
                action: "restore",
                state: self.guest.state,
            });
        }
        let size = self
            .held_copies
            .remove(&snapshot.snapshot_id)
            .unwrap_or(snapshot.size);
        self.local_snapshots.insert(snapshot.snapshot_id.clone(), size);
        self.last_snapshot = Some(snapshot.snapshot_id.clone());
        self.guest.state = GuestState::Running;
        self.guest.job_id = Some(snapshot.job_id.clone());
        self.exec = Some(ExecAnchor {
            job_id: snapshot.job_id.clone(),
            total_work: f64::MAX, // adjusted by the caller
            anchor_time: now,
            anchor_progress: snapshot.captured_progress,
        });
        self.pending_snapshot_size = Some(size);
        self.snapshot_seq = snapshot.sequence;
        Ok(())
    }

    pub fn set_total_work(&mut self, total_work: f64) {
        if let Some(a) = self.exec.as_mut() {
            a.total_work = total_work;
        }
    }

    pub fn suspend(&mut self, now: f64) -> Result<(), TransitionError> {
        if self.guest.state != GuestState::Running {
            return Err(TransitionError {
                action: "suspend",
                state: self.guest.state,
            });
        }
        self.freeze_progress(now);
        self.guest.state = GuestState::Suspended;
        Ok(())
    }

    pub fn resume(&mut self, now: f64) -> Result<(), TransitionError> {
        if self.guest.state != GuestState::Suspended {
            return Err(TransitionError {
                action: "resume",
                state: self.guest.state,
            });
        }
        self.guest.state = GuestState::Running;
        self.reanchor(now);
        Ok(())
    }

    pub fn stop_guest(&mut self) {
        self.guest.state = GuestState::Stopped;
        self.guest.job_id = None;
        self.exec = None;
        self.pending_snapshot_size = None;
        // Local checkpoints of the finished job are dropped.
        self.local_snapshots.clear();
        self.last_snapshot = None;
        self.round = None;
    }

    /// Stores an inbound snapshot copy. Fails when headroom is gone.
    pub fn store_copy(&mut self, snapshot_id: SnapshotId, size: u64, capacity: u64) -> bool {
        if self.storage_used() + size > capacity {
            return false;
        }
        self.held_copies.insert(snapshot_id, size);
        true
    }

    /// Drops a copy (deletion command); returns the freed size.
    pub fn delete_copy(&mut self, snapshot_id: &SnapshotId) -> Option<u64> {
        if let Some(size) = self.held_copies.remove(snapshot_id) {
            return Some(size);
        }
        if let Some(size) = self.local_snapshots.remove(snapshot_id) {
            if self.last_snapshot.as_ref() == Some(snapshot_id) {
                self.last_snapshot = None;
            }
            return Some(size);
        }
        None
    }

    /// Abrupt outage: everything volatile and on disk is lost.
    pub fn reset_for_outage(&mut self) {
        if matches!(
            self.guest.state,
            GuestState::Running | GuestState::Suspended
        ) {
            self.guest.state = GuestState::Failed;
        }
        self.exec = None;
        self.round = None;
        self.local_snapshots.clear();
        self.last_snapshot = None;
        self.held_copies.clear();
        self.known_peers.clear();
        self.recent_samples.clear();
        self.monitor_suspended = false;
        self.pending_snapshot_size = None;
    }

    /// The host returns: a fresh idle guest.
    pub fn reset_fresh(&mut self) {
        self.guest.state = GuestState::Stopped;
        self.guest.job_id = None;
        self.failure_reported = false;
        self.exec = None;
        self.snapshot_seq = 0;
    }
}
