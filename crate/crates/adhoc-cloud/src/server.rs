//! The central coordinator as a deterministic state machine: job intake,
//! reliability scheduling, availability sweeping, poll handling, snapshot
//! registry upkeep and restore orchestration.
//!
//! All mutation happens through the operation methods below; the state after
//! any call is a pure function of the initial state and the call sequence.
//! Side effects toward clients are expressed as [`Command`]s queued on
//! `outbound_commands`, and noteworthy transitions are appended to `log`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    CloudletId, GuestId, GuestRecord, GuestState, HostId, HostRecord, JobId, JobRecord,
    JobStatus, Liveness, SnapshotRecord,
};
use crate::eventlog::LogEvent;
use crate::placement::PlacementConfig;
use crate::reliability::{self, HostEvent, HostView, ReliabilityError};

/// Control-plane timing constants, in simulated seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimingConfig {
    pub poll_interval: f64,
    pub failure_timeout: f64,
    pub guest_probe_interval: f64,
    pub snapshot_interval: f64,
    pub sweep_interval: f64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            poll_interval: 60.0,
            failure_timeout: 120.0,
            guest_probe_interval: 10.0,
            snapshot_interval: 300.0,
            sweep_interval: 10.0,
        }
    }
}

impl TimingConfig {
    /// Non-fatal configuration smells.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.failure_timeout < 2.0 * self.poll_interval {
            w.push(format!(
                "failure_timeout ({}) below twice poll_interval ({}); hosts may be declared failed after a single missed poll",
                self.failure_timeout, self.poll_interval
            ));
        }
        w
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("poll_interval", self.poll_interval),
            ("failure_timeout", self.failure_timeout),
            ("guest_probe_interval", self.guest_probe_interval),
            ("snapshot_interval", self.snapshot_interval),
            ("sweep_interval", self.sweep_interval),
        ] {
            if v <= 0.0 {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CommandKind {
    StartGuest { job_id: JobId },
    SuspendGuest,
    ResumeGuest,
    RestoreSnapshot { snapshot_id: SnapshotId, job_id: JobId },
    DeleteSnapshot { snapshot_id: SnapshotId },
    TransferSnapshot { snapshot_id: SnapshotId, receivers: Vec<HostId> },
}

use crate::domain::SnapshotId;

#[derive(Debug, Clone, PartialEq)]
pub struct Command {
    pub target_host: HostId,
    pub kind: CommandKind,
    pub issued_at: f64,
}

/// One peer entry of the available-host list returned to a polling client.
#[derive(Debug, Clone, PartialEq)]
pub struct PeerInfo {
    pub host_id: HostId,
    /// Opaque address surrogate; the simulation has no network layer.
    pub address: String,
    pub reliability: f64,
    pub failure_probability: f64,
    pub in_use: bool,
    pub storage_free: u64,
    pub cloudlets: BTreeSet<CloudletId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PollReport {
    pub guest_state: GuestState,
    pub load: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PollResponse {
    pub peers: Vec<PeerInfo>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobSpec {
    pub total_work: f64,
    pub snapshot_size: u64,
    pub cloudlet: Option<CloudletId>,
}

#[derive(Debug, Error)]
pub enum ServerError {
    #[error("unknown host {0}")]
    UnknownHost(HostId),
    #[error("unknown guest {0}")]
    UnknownGuest(GuestId),
    #[error("unknown job {0}")]
    UnknownJob(JobId),
    #[error("rejected: {0}")]
    Rejected(String),
    #[error(transparent)]
    Reliability(#[from] ReliabilityError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServerConfig {
    pub timing: TimingConfig,
    pub placement: PlacementConfig,
    pub new_host_reliability: f64,
    /// Combined restore + restart attempts allowed per job before it is
    /// marked permanently failed.
    pub retry_budget: u32,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            timing: TimingConfig::default(),
            placement: PlacementConfig::default(),
            new_host_reliability: 100.0,
            retry_budget: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ServerState {
    pub hosts: BTreeMap<HostId, HostRecord>,
    pub guests: BTreeMap<GuestId, GuestRecord>,
    pub jobs: BTreeMap<JobId, JobRecord>,
    pub snapshot_registry: BTreeMap<GuestId, SnapshotRecord>,
    pub pending_jobs: VecDeque<JobId>,
    /// Jobs whose snapshot survives but whose restore is waiting for a free
    /// location host.
    pub pending_restores: VecDeque<JobId>,
    pub outbound_commands: VecDeque<Command>,
    pub clock: f64,
    pub config: ServerConfig,
    /// Per-job restore target currently awaiting execution.
    restoring_on: BTreeMap<JobId, HostId>,
    /// Restore + restart attempts consumed per job.
    recovery_attempts: BTreeMap<JobId, u32>,
    resident_guest: BTreeMap<HostId, GuestId>,
    next_job: u64,
    pub log: Vec<LogEvent>,
}

impl ServerState {
    pub fn new(config: ServerConfig) -> Self {
        Self {
            hosts: BTreeMap::new(),
            guests: BTreeMap::new(),
            jobs: BTreeMap::new(),
            snapshot_registry: BTreeMap::new(),
            pending_jobs: VecDeque::new(),
            pending_restores: VecDeque::new(),
            outbound_commands: VecDeque::new(),
            clock: 0.0,
            config,
            restoring_on: BTreeMap::new(),
            recovery_attempts: BTreeMap::new(),
            resident_guest: BTreeMap::new(),
            next_job: 0,
            log: Vec::new(),
        }
    }

    pub fn drain_log(&mut self) -> Vec<LogEvent> {
        std::mem::take(&mut self.log)
    }

    pub fn drain_commands(&mut self) -> Vec<Command> {
        self.outbound_commands.drain(..).collect()
    }

    pub fn register_host(
        &mut self,
        host_id: HostId,
        storage_capacity: u64,
        cloudlets: BTreeSet<CloudletId>,
        now: f64,
    ) -> GuestId {
        self.clock = now;
        let guest_id = GuestId::new(format!("g-{host_id}"));
        let mut host = HostRecord::new(host_id.clone(), storage_capacity);
        host.last_poll_time = now;
        host.cloudlets = cloudlets;
        self.hosts.insert(host_id.clone(), host);
        self.guests
            .insert(guest_id.clone(), GuestRecord::new(guest_id.clone(), host_id.clone()));
        self.resident_guest.insert(host_id, guest_id.clone());
        guest_id
    }

    pub fn resident_guest_of(&self, host: &HostId) -> Option<&GuestId> {
        self.resident_guest.get(host)
    }

    fn host_view(&self, host: &HostRecord) -> HostView {
        let guest_state = self
            .resident_guest
            .get(&host.host_id)
            .and_then(|g| self.guests.get(g))
            .map(|g| g.state)
            .unwrap_or(GuestState::Failed);
        HostView {
            host_id: host.host_id.clone(),
            reliability: reliability::view_for(host, self.config.new_host_reliability)
                .reliability,
            liveness: host.liveness,
            in_use: host.in_use,
            guest_state,
        }
    }

    fn record_host_event(&mut self, host_id: &HostId, event: HostEvent, now: f64) {
        let prior = self.config.new_host_reliability;
        let host = self.hosts.get_mut(host_id).expect("host exists");
        if let Some(view) =
            reliability::record_event(host, event, prior).expect("counter invariants hold")
        {
            self.log.push(LogEvent::ReliabilityUpdated {
                t: now,
                host: host_id.clone(),
                reliability: view.reliability,
            });
        }
    }

    // --- job intake -------------------------------------------------------

    pub fn submit_job(&mut self, spec: JobSpec, now: f64) -> Result<JobId, ServerError> {
        if spec.total_work <= 0.0 {
            return Err(ServerError::Rejected(format!(
                "total_work must be positive, got {}",
                spec.total_work
            )));
        }
        self.clock = now;
        let job_id = JobId::new(format!("j{:03}", self.next_job));
        self.next_job += 1;
        self.jobs.insert(
            job_id.clone(),
            JobRecord {
                job_id: job_id.clone(),
                total_work: spec.total_work,
                progress: 0.0,
                status: JobStatus::Submitted,
                current_guest: None,
                restore_count: 0,
                snapshot_size: spec.snapshot_size,
                cloudlet: spec.cloudlet,
            },
        );
        self.pending_jobs.push_back(job_id.clone());
        self.log.push(LogEvent::JobSubmitted {
            t: now,
            job: job_id.clone(),
            total_work: spec.total_work,
        });
        Ok(job_id)
    }

    // --- scheduling -------------------------------------------------------

    /// Assigns pending jobs, in FIFO order, to the most reliable ready hosts.
    pub fn schedule_pending(&mut self, now: f64) {
        self.clock = now;
        let views: Vec<HostView> = self.hosts.values().map(|h| self.host_view(h)).collect();
        let mut ranked: VecDeque<HostId> = reliability::rank_ready_hosts(&views).into();
        let mut unplaced = VecDeque::new();
        while let Some(job_id) = self.pending_jobs.pop_front() {
            let Some(target) = ranked.pop_front() else {
                unplaced.push_back(job_id);
                continue;
            };
            self.assign_job(&job_id, &target, now);
        }
        self.pending_jobs = unplaced;
    }

    fn assign_job(&mut self, job_id: &JobId, target: &HostId, now: f64) {
        let guest_id = self.resident_guest[target].clone();
        {
            let job = self.jobs.get_mut(job_id).expect("pending job exists");
            job.status = JobStatus::Scheduled;
            job.current_guest = Some(guest_id.clone());
        }
        self.guests.get_mut(&guest_id).expect("guest exists").job_id = Some(job_id.clone());
        self.hosts.get_mut(target).expect("host exists").in_use = true;
        self.record_host_event(target, HostEvent::JobAssigned, now);
        self.outbound_commands.push_back(Command {
            target_host: target.clone(),
            kind: CommandKind::StartGuest {
                job_id: job_id.clone(),
            },
            issued_at: now,
        });
        self.log.push(LogEvent::JobScheduled {
            t: now,
            job: job_id.clone(),
            host: target.clone(),
        });
    }

    /// Marks a scheduled job as running once its start or restore command
    /// executed on the client.
    pub fn mark_job_running(&mut self, job_id: &JobId, now: f64) -> Result<(), ServerError> {
        self.clock = now;
        let job = self
            .jobs
            .get_mut(job_id)
            .ok_or_else(|| ServerError::UnknownJob(job_id.clone()))?;
        job.status = JobStatus::Running;
        if let Some(g) = job.current_guest.clone() {
            if let Some(guest) = self.guests.get_mut(&g) {
                guest.state = GuestState::Running;
            }
        }
        Ok(())
    }

    // --- polling ----------------------------------------------------------

    pub fn on_poll(
        &mut self,
        host_id: &HostId,
        report: &PollReport,
        now: f64,
    ) -> Result<PollResponse, ServerError> {
        self.clock = now;
        if !self.hosts.contains_key(host_id) {
            return Err(ServerError::UnknownHost(host_id.clone()));
        }
        let prior = self.config.new_host_reliability;
        {
            let host = self.hosts.get_mut(host_id).expect("checked above");
            debug_assert!(now >= host.last_poll_time);
            host.last_poll_time = now;
            if host.liveness != Liveness::Up {
                // Re-registration after a declared failure keeps the
                // reliability counters accumulated so far.
                host.liveness = Liveness::Up;
                host.in_use = false;
                let guest_id = self.resident_guest[host_id].clone();
                let guest = self.guests.get_mut(&guest_id).expect("guest exists");
                guest.state = GuestState::Stopped;
                guest.job_id = None;
            }
        }
        // A host reporting an idle guest while the server still has a job
        // attached lost that guest silently (an outage shorter than the
        // failure timeout); treat it as a guest failure.
        let guest_id = self.resident_guest[host_id].clone();
        if report.guest_state == GuestState::Stopped && self.guests[&guest_id].job_id.is_some() {
            self.on_guest_failure_report(host_id, &guest_id, now)?;
        }
        // Once an idle client reports a healthy stopped guest, a previously
        // failed server-side guest record is healed and the host becomes
        // schedulable again.
        {
            let guest = self.guests.get_mut(&guest_id).expect("guest exists");
            if guest.job_id.is_none()
                && guest.state == GuestState::Failed
                && report.guest_state == GuestState::Stopped
            {
                guest.state = GuestState::Stopped;
            }
        }
        let peers = self
            .hosts
            .values()
            .filter(|h| {
                &h.host_id != host_id && h.liveness == Liveness::Up && h.storage_free() > 0
            })
            .map(|h| {
                let view = reliability::view_for(h, prior);
                PeerInfo {
                    host_id: h.host_id.clone(),
                    address: format!("addr:{}", h.host_id),
                    reliability: view.reliability,
                    failure_probability: view.failure_probability,
                    in_use: h.in_use,
                    storage_free: h.storage_free(),
                    cloudlets: h.cloudlets.clone(),
                }
            })
            .collect();
        self.log.push(LogEvent::Poll {
            t: now,
            host: host_id.clone(),
            guest_state: report.guest_state,
            peers: self
                .hosts
                .values()
                .filter(|h| {
                    &h.host_id != host_id && h.liveness == Liveness::Up && h.storage_free() > 0
                })
                .count(),
        });
        Ok(PollResponse { peers })
    }

    // --- failure detection ------------------------------------------------

    /// Declares every up host silent for longer than the failure timeout
    /// (strictly) as failed, counts the failure against hosts with an
    /// outstanding job, and begins restore orchestration for their jobs.
    ///
    /// `down_since` carries ground-truth outage start times for latency
    /// accounting in the log; pass an empty map when unknown.
    pub fn availability_sweep(
        &mut self,
        now: f64,
        down_since: &BTreeMap<HostId, f64>,
    ) -> Vec<HostId> {
        self.clock = now;
        let timeout = self.config.timing.failure_timeout;
        let newly_failed: Vec<HostId> = self
            .hosts
            .values()
            .filter(|h| h.liveness == Liveness::Up && now - h.last_poll_time > timeout)
            .map(|h| h.host_id.clone())
            .collect();
        for host_id in &newly_failed {
            let guest_id = self.resident_guest[host_id].clone();
            let running_job = self.guests[&guest_id].job_id.clone();
            self.log.push(LogEvent::HostDeclaredFailed {
                t: now,
                host: host_id.clone(),
                latency: down_since.get(host_id).map(|d| now - d),
                running_job: running_job.clone(),
            });
            self.hosts.get_mut(host_id).expect("host exists").liveness =
                Liveness::FailedDeclared;
            if let Some(job_id) = running_job {
                self.record_host_event(host_id, HostEvent::HostFailure, now);
                let host = self.hosts.get_mut(host_id).expect("host exists");
                host.in_use = false;
                let guest = self.guests.get_mut(&guest_id).expect("guest exists");
                guest.state = GuestState::Failed;
                guest.job_id = None;
                self.restoring_on.remove(&job_id);
                self.orchestrate_restore(&job_id, Some(&guest_id), now);
            } else {
                // Idle host: declared failed, nothing to restore and no
                // failure counted against the reliability score.
                self.record_host_event(host_id, HostEvent::HostFailure, now);
            }
        }
        newly_failed
    }

    // --- restore orchestration --------------------------------------------

    /// Picks the most reliable surviving, free snapshot location and issues
    /// a restore there. Falls back to requeueing the job from zero when no
    /// copy survives, or parks the restore when every surviving location is
    /// busy.
    ///
    /// `failed_guest` is the guest whose registry entry holds the snapshot;
    /// when `None` the entry is found by job id.
    pub fn orchestrate_restore(
        &mut self,
        job_id: &JobId,
        failed_guest: Option<&GuestId>,
        now: f64,
    ) {
        self.clock = now;
        let entry_guest = match failed_guest {
            Some(g) if self.snapshot_registry.contains_key(g) => Some(g.clone()),
            _ => self
                .snapshot_registry
                .iter()
                .find(|(_, s)| &s.job_id == job_id)
                .map(|(g, _)| g.clone()),
        };
        let Some(entry_guest) = entry_guest else {
            self.requeue_from_zero(job_id, now);
            return;
        };
        let snapshot = self.snapshot_registry[&entry_guest].clone();
        let surviving: Vec<&HostRecord> = snapshot
            .locations
            .iter()
            .filter_map(|h| self.hosts.get(h))
            .filter(|h| h.liveness == Liveness::Up)
            .collect();
        if surviving.is_empty() {
            self.snapshot_registry.remove(&entry_guest);
            self.requeue_from_zero(job_id, now);
            return;
        }
        let views: Vec<HostView> = surviving.iter().map(|h| self.host_view(h)).collect();
        let ranked = reliability::rank_ready_hosts(&views);
        let Some(target) = ranked.first().cloned() else {
            // Copies survive but every holder is busy; retry at the next
            // scheduling trigger.
            if !self.pending_restores.contains(job_id) {
                self.pending_restores.push_back(job_id.clone());
            }
            return;
        };
        if !self.consume_recovery_attempt(job_id, now) {
            return;
        }
        let target_guest = self.resident_guest[&target].clone();
        {
            let job = self.jobs.get_mut(job_id).expect("job exists");
            job.status = JobStatus::Scheduled;
            job.current_guest = Some(target_guest.clone());
            job.restore_count += 1;
        }
        self.guests
            .get_mut(&target_guest)
            .expect("guest exists")
            .job_id = Some(job_id.clone());
        self.hosts.get_mut(&target).expect("host exists").in_use = true;
        self.record_host_event(&target, HostEvent::JobAssigned, now);
        self.restoring_on.insert(job_id.clone(), target.clone());
        self.outbound_commands.push_back(Command {
            target_host: target.clone(),
            kind: CommandKind::RestoreSnapshot {
                snapshot_id: snapshot.snapshot_id.clone(),
                job_id: job_id.clone(),
            },
            issued_at: now,
        });
        self.log.push(LogEvent::RestoreIssued {
            t: now,
            job: job_id.clone(),
            snapshot: snapshot.snapshot_id.clone(),
            target,
            captured_progress: snapshot.captured_progress,
        });
    }

    /// Retries restores that were waiting for a free location host.
    pub fn try_pending_restores(&mut self, now: f64) {
        let parked: Vec<JobId> = self.pending_restores.drain(..).collect();
        for job_id in parked {
            let status = self.jobs.get(&job_id).map(|j| j.status);
            if status == Some(JobStatus::Submitted) || status == Some(JobStatus::Scheduled) {
                self.orchestrate_restore(&job_id, None, now);
            }
        }
    }

    /// Restore or restart consumes one attempt from the retry budget; a job
    /// over budget becomes permanently failed.
    fn consume_recovery_attempt(&mut self, job_id: &JobId, now: f64) -> bool {
        let attempts = self.recovery_attempts.entry(job_id.clone()).or_insert(0);
        *attempts += 1;
        if *attempts > self.config.retry_budget {
            let job = self.jobs.get_mut(job_id).expect("job exists");
            job.status = JobStatus::FailedPermanent;
            job.current_guest = None;
            self.log.push(LogEvent::JobFailedPermanent {
                t: now,
                job: job_id.clone(),
            });
            false
        } else {
            true
        }
    }

    /// Continuity loss: every replica is gone, the job restarts from zero.
    fn requeue_from_zero(&mut self, job_id: &JobId, now: f64) {
        self.log.push(LogEvent::ContinuityLoss {
            t: now,
            job: job_id.clone(),
        });
        if !self.consume_recovery_attempt(job_id, now) {
            return;
        }
        let job = self.jobs.get_mut(job_id).expect("job exists");
        job.progress = 0.0;
        job.status = JobStatus::Submitted;
        job.current_guest = None;
        self.pending_jobs.push_back(job_id.clone());
        self.log.push(LogEvent::JobRequeued {
            t: now,
            job: job_id.clone(),
        });
    }

    /// Completes the restore handshake once the target client executed it:
    /// the job runs at the snapshot's progress and every other holder of the
    /// restored snapshot is told to delete its copy.
    pub fn mark_restore_complete(
        &mut self,
        job_id: &JobId,
        now: f64,
    ) -> Result<(), ServerError> {
        self.clock = now;
        let target = self
            .restoring_on
            .remove(job_id)
            .ok_or_else(|| ServerError::Rejected(format!("job {job_id} is not restoring")))?;
        let entry_guest = self
            .snapshot_registry
            .iter()
            .find(|(_, s)| &s.job_id == job_id)
            .map(|(g, _)| g.clone())
            .ok_or_else(|| ServerError::Rejected(format!("no snapshot for job {job_id}")))?;
        let snapshot = self
            .snapshot_registry
            .remove(&entry_guest)
            .expect("entry found above");
        {
            let job = self.jobs.get_mut(job_id).expect("job exists");
            job.progress = snapshot.captured_progress;
            job.status = JobStatus::Running;
        }
        if let Some(g) = self.jobs[job_id].current_guest.clone() {
            self.guests.get_mut(&g).expect("guest exists").state = GuestState::Running;
        }
        for holder in snapshot.locations.iter().filter(|h| **h != target) {
            self.outbound_commands.push_back(Command {
                target_host: holder.clone(),
                kind: CommandKind::DeleteSnapshot {
                    snapshot_id: snapshot.snapshot_id.clone(),
                },
                issued_at: now,
            });
        }
        Ok(())
    }

    // --- guest failures ---------------------------------------------------

    pub fn on_guest_failure_report(
        &mut self,
        host_id: &HostId,
        guest_id: &GuestId,
        now: f64,
    ) -> Result<(), ServerError> {
        self.clock = now;
        let guest = self
            .guests
            .get(guest_id)
            .ok_or_else(|| ServerError::UnknownGuest(guest_id.clone()))?;
        if guest.state == GuestState::Failed {
            return Ok(()); // duplicate report
        }
        let job_id = guest.job_id.clone();
        self.log.push(LogEvent::GuestFailureReported {
            t: now,
            host: host_id.clone(),
            guest: guest_id.clone(),
        });
        self.record_host_event(host_id, HostEvent::GuestFailure, now);
        let guest = self.guests.get_mut(guest_id).expect("guest exists");
        guest.state = GuestState::Failed;
        guest.job_id = None;
        self.hosts.get_mut(host_id).expect("host exists").in_use = false;
        if let Some(job_id) = job_id {
            self.restoring_on.remove(&job_id);
            self.orchestrate_restore(&job_id, Some(guest_id), now);
        }
        Ok(())
    }

    // --- completion -------------------------------------------------------

    pub fn on_job_complete(&mut self, job_id: &JobId, now: f64) -> Result<(), ServerError> {
        self.clock = now;
        let job = self
            .jobs
            .get(job_id)
            .ok_or_else(|| ServerError::UnknownJob(job_id.clone()))?;
        if job.status != JobStatus::Running {
            return Err(ServerError::Rejected(format!(
                "job {job_id} is {} and cannot complete",
                job.status
            )));
        }
        let guest_id = job
            .current_guest
            .clone()
            .ok_or_else(|| ServerError::Rejected(format!("job {job_id} has no guest")))?;
        let host_id = self.guests[&guest_id].host_id.clone();
        {
            let job = self.jobs.get_mut(job_id).expect("job exists");
            job.progress = job.total_work;
            job.status = JobStatus::Completed;
            job.current_guest = None;
        }
        let guest = self.guests.get_mut(&guest_id).expect("guest exists");
        guest.state = GuestState::Stopped;
        guest.job_id = None;
        self.hosts.get_mut(&host_id).expect("host exists").in_use = false;
        self.record_host_event(&host_id, HostEvent::JobCompleted, now);
        self.log.push(LogEvent::JobCompleted {
            t: now,
            job: job_id.clone(),
            host: host_id,
        });
        if let Some(snapshot) = self.snapshot_registry.remove(&guest_id) {
            for holder in &snapshot.locations {
                self.outbound_commands.push_back(Command {
                    target_host: holder.clone(),
                    kind: CommandKind::DeleteSnapshot {
                        snapshot_id: snapshot.snapshot_id.clone(),
                    },
                    issued_at: now,
                });
            }
        }
        Ok(())
    }

    // --- snapshot registry ------------------------------------------------

    /// Records the latest snapshot of a guest; the previous entry (if any)
    /// is superseded and deletion commands go to every host holding it.
    pub fn register_snapshot(
        &mut self,
        guest_id: &GuestId,
        snapshot: SnapshotRecord,
        combined_failure_probability: f64,
        now: f64,
    ) -> Result<(), ServerError> {
        self.clock = now;
        if !self.guests.contains_key(guest_id) {
            return Err(ServerError::UnknownGuest(guest_id.clone()));
        }
        if let Some(previous) = self.snapshot_registry.remove(guest_id) {
            for holder in previous.locations.difference(&snapshot.locations) {
                self.outbound_commands.push_back(Command {
                    target_host: holder.clone(),
                    kind: CommandKind::DeleteSnapshot {
                        snapshot_id: previous.snapshot_id.clone(),
                    },
                    issued_at: now,
                });
            }
            // A holder of both the old and new snapshot still drops the
            // superseded copy locally; most-recent-only retention.
            for holder in previous.locations.intersection(&snapshot.locations) {
                self.outbound_commands.push_back(Command {
                    target_host: holder.clone(),
                    kind: CommandKind::DeleteSnapshot {
                        snapshot_id: previous.snapshot_id.clone(),
                    },
                    issued_at: now,
                });
            }
        }
        self.log.push(LogEvent::SnapshotRegistered {
            t: now,
            guest: guest_id.clone(),
            snapshot: snapshot.snapshot_id.clone(),
            locations: snapshot.locations.iter().cloned().collect(),
            combined_failure_probability,
        });
        self.snapshot_registry.insert(guest_id.clone(), snapshot);
        Ok(())
    }

    /// Storage bookkeeping callbacks from executed transfers and deletions.
    pub fn on_copy_stored(&mut self, host_id: &HostId, size: u64) {
        if let Some(h) = self.hosts.get_mut(host_id) {
            h.storage_used = h.storage_used.saturating_add(size);
        }
    }

    pub fn on_copy_deleted(&mut self, host_id: &HostId, size: u64) {
        if let Some(h) = self.hosts.get_mut(host_id) {
            h.storage_used = h.storage_used.saturating_sub(size);
        }
    }

    /// Physical loss of every snapshot copy a host held (abrupt outage).
    pub fn purge_host_copies(&mut self, host_id: &HostId, now: f64) {
        self.clock = now;
        let mut lost = 0usize;
        for snapshot in self.snapshot_registry.values_mut() {
            if snapshot.locations.remove(host_id) {
                lost += 1;
            }
        }
        if let Some(h) = self.hosts.get_mut(host_id) {
            h.storage_used = 0;
        }
        if lost > 0 {
            self.log.push(LogEvent::SnapshotCopiesLost {
                t: now,
                host: host_id.clone(),
                count: lost,
            });
        }
    }

    /// Hosts whose restore target failed before executing the restore; the
    /// sweep re-runs orchestration for them.
    pub fn jobs_restoring_on(&self, host_id: &HostId) -> Vec<JobId> {
        self.restoring_on
            .iter()
            .filter(|(_, h)| *h == host_id)
            .map(|(j, _)| j.clone())
            .collect()
    }

    /// Referential-integrity and record-invariant check over the whole state.
    pub fn check_integrity(&self) -> Vec<String> {
        let mut violations = Vec::new();
        for h in self.hosts.values() {
            violations.extend(h.validate());
        }
        for g in self.guests.values() {
            violations.extend(g.validate());
            if !self.hosts.contains_key(&g.host_id) {
                violations.push(format!("guest {} references unknown host", g.guest_id));
            }
            if let Some(j) = &g.job_id {
                if !self.jobs.contains_key(j) {
                    violations.push(format!("guest {} references unknown job", g.guest_id));
                }
            }
        }
        for j in self.jobs.values() {
            violations.extend(j.validate());
            if let Some(g) = &j.current_guest {
                if !self.guests.contains_key(g) {
                    violations.push(format!("job {} references unknown guest", j.job_id));
                }
            }
        }
        for (g, s) in &self.snapshot_registry {
            if !self.guests.contains_key(g) {
                violations.push(format!("snapshot {} under unknown guest", s.snapshot_id));
            }
            for l in &s.locations {
                if !self.hosts.contains_key(l) {
                    violations.push(format!(
                        "snapshot {} stored on unknown host {l}",
                        s.snapshot_id
                    ));
                }
            }
        }
        violations
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn server_with_hosts(specs: &[(&str, u64, u64, u64)]) -> ServerState {
        let mut s = ServerState::new(ServerConfig::default());
        for (id, ca, cc, nf) in specs {
            s.register_host(HostId::from(*id), 1 << 40, BTreeSet::new(), 0.0);
            let h = s.hosts.get_mut(&HostId::from(*id)).unwrap();
            h.jobs_assigned = *ca;
            h.jobs_completed = *cc;
            h.failures = *nf;
        }
        s
    }

    fn spec(work: f64) -> JobSpec {
        JobSpec {
            total_work: work,
            snapshot_size: 1_000_000_000,
            cloudlet: None,
        }
    }

    #[test]
    fn submit_creates_pending_job() {
        let mut s = server_with_hosts(&[]);
        let id = s.submit_job(spec(600.0), 0.0).unwrap();
        assert_eq!(s.jobs[&id].status, JobStatus::Submitted);
        assert_eq!(s.pending_jobs.len(), 1);
    }

    #[test]
    fn submissions_keep_fifo_order() {
        let mut s = server_with_hosts(&[]);
        let a = s.submit_job(spec(1.0), 0.0).unwrap();
        let b = s.submit_job(spec(1.0), 0.0).unwrap();
        assert_eq!(s.pending_jobs, VecDeque::from(vec![a, b]));
    }

    #[test]
    fn zero_work_rejected() {
        let mut s = server_with_hosts(&[]);
        assert!(s.submit_job(spec(0.0), 0.0).is_err());
    }

    #[test]
    fn schedules_to_most_reliable_ready_host() {
        // hA: 90%, hB: 95% reliability.
        let mut s = server_with_hosts(&[("hA", 10, 9, 1), ("hB", 20, 19, 1)]);
        s.submit_job(spec(100.0), 0.0).unwrap();
        s.schedule_pending(0.0);
        let cmds = s.drain_commands();
        assert_eq!(cmds.len(), 1);
        assert_eq!(cmds[0].target_host, HostId::from("hB"));
        assert!(s.hosts[&HostId::from("hB")].in_use);
        assert_eq!(s.hosts[&HostId::from("hB")].jobs_assigned, 21);
    }

    #[test]
    fn second_job_waits_when_one_host_ready() {
        let mut s = server_with_hosts(&[("hA", 0, 0, 0)]);
        s.submit_job(spec(1.0), 0.0).unwrap();
        s.submit_job(spec(1.0), 0.0).unwrap();
        s.schedule_pending(0.0);
        assert_eq!(s.pending_jobs.len(), 1);
        assert_eq!(s.drain_commands().len(), 1);
    }

    #[test]
    fn no_ready_host_leaves_queue_unchanged() {
        let mut s = server_with_hosts(&[]);
        s.submit_job(spec(1.0), 0.0).unwrap();
        s.schedule_pending(0.0);
        assert_eq!(s.pending_jobs.len(), 1);
        assert!(s.drain_commands().is_empty());
    }

    #[test]
    fn poll_lists_only_other_up_hosts_with_headroom() {
        let mut s = server_with_hosts(&[("hA", 0, 0, 0), ("hB", 0, 0, 0), ("hC", 0, 0, 0), ("hD", 0, 0, 0)]);
        s.hosts.get_mut(&HostId::from("hD")).unwrap().liveness = Liveness::FailedDeclared;
        let resp = s
            .on_poll(
                &HostId::from("hA"),
                &PollReport {
                    guest_state: GuestState::Stopped,
                    load: 0.0,
                },
                5.0,
            )
            .unwrap();
        let ids: Vec<&str> = resp.peers.iter().map(|p| p.host_id.as_str()).collect();
        assert_eq!(ids, vec!["hB", "hC"]);
        assert_eq!(s.hosts[&HostId::from("hA")].last_poll_time, 5.0);
    }

    #[test]
    fn storage_full_host_hidden_from_polls() {
        let mut s = server_with_hosts(&[("hA", 0, 0, 0), ("hB", 0, 0, 0), ("hC", 0, 0, 0)]);
        let b = s.hosts.get_mut(&HostId::from("hB")).unwrap();
        b.storage_used = b.storage_capacity;
        let resp = s
            .on_poll(
                &HostId::from("hA"),
                &PollReport {
                    guest_state: GuestState::Stopped,
                    load: 0.0,
                },
                5.0,
            )
            .unwrap();
        let ids: Vec<&str> = resp.peers.iter().map(|p| p.host_id.as_str()).collect();
        assert_eq!(ids, vec!["hC"]);
    }

    #[test]
    fn unknown_host_poll_rejected() {
        let mut s = server_with_hosts(&[]);
        assert!(s
            .on_poll(
                &HostId::from("hZ"),
                &PollReport {
                    guest_state: GuestState::Stopped,
                    load: 0.0
                },
                0.0
            )
            .is_err());
    }

    #[test]
    fn sweep_uses_strict_timeout() {
        let mut s = server_with_hosts(&[("hA", 0, 0, 0)]);
        assert!(s.availability_sweep(120.0, &BTreeMap::new()).is_empty());
        let failed = s.availability_sweep(121.0, &BTreeMap::new());
        assert_eq!(failed, vec![HostId::from("hA")]);
        assert_eq!(
            s.hosts[&HostId::from("hA")].liveness,
            Liveness::FailedDeclared
        );
    }

    #[test]
    fn idle_failure_leaves_counters_alone() {
        let mut s = server_with_hosts(&[("hA", 3, 3, 0)]);
        s.availability_sweep(200.0, &BTreeMap::new());
        assert_eq!(s.hosts[&HostId::from("hA")].failures, 0);
        assert!(s.drain_commands().is_empty());
    }

    fn registry_snapshot(s: &mut ServerState, guest: &GuestId, job: &JobId, locations: &[&str]) {
        let snap = SnapshotRecord {
            snapshot_id: SnapshotId::from("s01"),
            guest_id: guest.clone(),
            job_id: job.clone(),
            sequence: 1,
            captured_at: 0.0,
            captured_progress: 40.0,
            size: 100,
            locations: locations.iter().map(|h| HostId::from(*h)).collect(),
        };
        s.register_snapshot(guest, snap, 0.01, 0.0).unwrap();
    }

    /// Failure of a running host restores on the most reliable surviving
    /// location, then deletion goes to the remaining holders.
    #[test]
    fn restore_targets_best_surviving_location() {
        let mut s = server_with_hosts(&[
            ("hA", 10, 8, 2),
            ("hB", 10, 9, 1),  // 90
            ("hD", 20, 19, 1), // 95
            ("hE", 10, 8, 2),  // 80
        ]);
        let job = s.submit_job(spec(100.0), 0.0).unwrap();
        // Force the job onto hA.
        s.hosts.get_mut(&HostId::from("hB")).unwrap().in_use = true;
        s.hosts.get_mut(&HostId::from("hD")).unwrap().in_use = true;
        s.hosts.get_mut(&HostId::from("hE")).unwrap().in_use = true;
        s.schedule_pending(0.0);
        s.mark_job_running(&job, 1.0).unwrap();
        let guest = s.jobs[&job].current_guest.clone().unwrap();
        registry_snapshot(&mut s, &guest, &job, &["hB", "hD", "hE"]);
        for h in ["hB", "hD", "hE"] {
            s.hosts.get_mut(&HostId::from(h)).unwrap().in_use = false;
        }
        s.drain_commands();
        // hA goes silent.
        for h in ["hB", "hD", "hE"] {
            s.hosts.get_mut(&HostId::from(h)).unwrap().last_poll_time = 200.0;
        }
        s.availability_sweep(200.0, &BTreeMap::new());
        let cmds = s.drain_commands();
        let restore = cmds
            .iter()
            .find(|c| matches!(c.kind, CommandKind::RestoreSnapshot { .. }))
            .expect("restore issued");
        assert_eq!(restore.target_host, HostId::from("hD"));
        s.mark_restore_complete(&job, 205.0).unwrap();
        assert_eq!(s.jobs[&job].progress, 40.0);
        assert_eq!(s.jobs[&job].restore_count, 1);
        let deletes: Vec<HostId> = s
            .drain_commands()
            .into_iter()
            .filter(|c| matches!(c.kind, CommandKind::DeleteSnapshot { .. }))
            .map(|c| c.target_host)
            .collect();
        assert_eq!(deletes, vec![HostId::from("hB"), HostId::from("hE")]);
        assert!(s.snapshot_registry.is_empty());
    }

    #[test]
    fn no_surviving_location_restarts_from_zero() {
        let mut s = server_with_hosts(&[("hA", 0, 0, 0), ("hB", 0, 0, 0)]);
        let job = s.submit_job(spec(100.0), 0.0).unwrap();
        s.hosts.get_mut(&HostId::from("hB")).unwrap().in_use = true;
        s.schedule_pending(0.0);
        s.mark_job_running(&job, 1.0).unwrap();
        s.jobs.get_mut(&job).unwrap().progress = 40.0;
        let guest = s.jobs[&job].current_guest.clone().unwrap();
        registry_snapshot(&mut s, &guest, &job, &["hB"]);
        s.hosts.get_mut(&HostId::from("hB")).unwrap().in_use = false;
        // Both hosts go silent; the only copy dies with hB.
        s.availability_sweep(300.0, &BTreeMap::new());
        assert_eq!(s.jobs[&job].progress, 0.0);
        assert_eq!(s.jobs[&job].status, JobStatus::Submitted);
        assert!(s.pending_jobs.contains(&job));
        assert!(s
            .log
            .iter()
            .any(|e| matches!(e, LogEvent::ContinuityLoss { .. })));
    }

    #[test]
    fn guest_failure_report_counts_and_restores() {
        let mut s = server_with_hosts(&[("hA", 0, 0, 0)]);
        let job = s.submit_job(spec(100.0), 0.0).unwrap();
        s.schedule_pending(0.0);
        s.mark_job_running(&job, 1.0).unwrap();
        let guest = s.jobs[&job].current_guest.clone().unwrap();
        s.on_guest_failure_report(&HostId::from("hA"), &guest, 50.0)
            .unwrap();
        assert_eq!(s.hosts[&HostId::from("hA")].failures, 1);
        // No snapshot: the job requeues from zero.
        assert!(s.pending_jobs.contains(&job));
        // Duplicate report is a no-op.
        let failures_before = s.hosts[&HostId::from("hA")].failures;
        s.on_guest_failure_report(&HostId::from("hA"), &guest, 51.0)
            .unwrap();
        assert_eq!(s.hosts[&HostId::from("hA")].failures, failures_before);
    }

    #[test]
    fn unknown_guest_failure_rejected() {
        let mut s = server_with_hosts(&[("hA", 0, 0, 0)]);
        assert!(s
            .on_guest_failure_report(&HostId::from("hA"), &GuestId::from("nope"), 0.0)
            .is_err());
    }

    #[test]
    fn completion_updates_counters_and_cleans_registry() {
        let mut s = server_with_hosts(&[("hA", 0, 0, 0), ("hB", 0, 0, 0)]);
        let job = s.submit_job(spec(100.0), 0.0).unwrap();
        s.hosts.get_mut(&HostId::from("hB")).unwrap().in_use = true;
        s.schedule_pending(0.0);
        s.mark_job_running(&job, 1.0).unwrap();
        let guest = s.jobs[&job].current_guest.clone().unwrap();
        registry_snapshot(&mut s, &guest, &job, &["hB"]);
        s.drain_commands();
        s.on_job_complete(&job, 100.0).unwrap();
        assert_eq!(s.jobs[&job].status, JobStatus::Completed);
        let host = &s.hosts[&HostId::from("hA")];
        assert_eq!(host.jobs_completed, 1);
        assert!(!host.in_use);
        // Reliability after first completion with no failures: 100.
        assert!(s.log.iter().any(|e| matches!(
            e,
            LogEvent::ReliabilityUpdated { reliability, .. } if *reliability == 100.0
        )));
        assert!(s.snapshot_registry.is_empty());
        assert!(s
            .drain_commands()
            .iter()
            .any(|c| matches!(c.kind, CommandKind::DeleteSnapshot { .. })));
        // Completing again is rejected.
        assert!(s.on_job_complete(&job, 101.0).is_err());
    }

    #[test]
    fn register_snapshot_supersedes_previous() {
        let mut s = server_with_hosts(&[("hA", 0, 0, 0), ("hB", 0, 0, 0), ("hD", 0, 0, 0)]);
        let guest = s.resident_guest_of(&HostId::from("hA")).unwrap().clone();
        let job = JobId::from("j000");
        let snap = |id: &str, seq, locs: &[&str]| SnapshotRecord {
            snapshot_id: SnapshotId::from(id),
            guest_id: guest.clone(),
            job_id: job.clone(),
            sequence: seq,
            captured_at: 0.0,
            captured_progress: 0.0,
            size: 10,
            locations: locs.iter().map(|h| HostId::from(*h)).collect(),
        };
        s.register_snapshot(&guest, snap("s01", 1, &["hB", "hD"]), 0.01, 0.0)
            .unwrap();
        s.drain_commands();
        s.register_snapshot(&guest, snap("s02", 2, &["hB"]), 0.02, 300.0)
            .unwrap();
        assert_eq!(
            s.snapshot_registry[&guest].snapshot_id,
            SnapshotId::from("s02")
        );
        let deletes: Vec<HostId> = s
            .drain_commands()
            .into_iter()
            .map(|c| c.target_host)
            .collect();
        assert_eq!(deletes, vec![HostId::from("hD"), HostId::from("hB")]);
    }

    #[test]
    fn register_snapshot_unknown_guest_rejected() {
        let mut s = server_with_hosts(&[]);
        let snap = SnapshotRecord {
            snapshot_id: SnapshotId::from("s01"),
            guest_id: GuestId::from("nope"),
            job_id: JobId::from("j000"),
            sequence: 1,
            captured_at: 0.0,
            captured_progress: 0.0,
            size: 10,
            locations: BTreeSet::new(),
        };
        assert!(s
            .register_snapshot(&GuestId::from("nope"), snap, 0.01, 0.0)
            .is_err());
    }

    #[test]
    fn failed_host_reregisters_with_counters_kept() {
        let mut s = server_with_hosts(&[("hA", 4, 3, 1)]);
        s.availability_sweep(300.0, &BTreeMap::new());
        assert_eq!(
            s.hosts[&HostId::from("hA")].liveness,
            Liveness::FailedDeclared
        );
        s.on_poll(
            &HostId::from("hA"),
            &PollReport {
                guest_state: GuestState::Stopped,
                load: 0.0,
            },
            400.0,
        )
        .unwrap();
        let h = &s.hosts[&HostId::from("hA")];
        assert_eq!(h.liveness, Liveness::Up);
        assert_eq!((h.jobs_assigned, h.jobs_completed, h.failures), (4, 3, 1));
    }
}
