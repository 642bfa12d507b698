//! Deterministic discrete-event engine: a virtual clock, a total-ordered
//! event queue (time, then enqueue sequence), churn injection from a trace,
//! lazy job-progress accounting and a fair-share transfer model.
//!
//! The engine owns one [`ServerState`] and one [`ClientState`] per host and
//! serializes every state mutation; identical inputs (config, trace, seed)
//! produce byte-identical event logs.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::client::{ClientState, MonitorAction};
use crate::config::{ConfigError, ExperimentConfig};
use crate::domain::{GuestState, HostId, JobId, SnapshotId, SnapshotRecord};
use crate::eventlog::LogEvent;
use crate::metrics::MetricsReport;
use crate::placement::{self, CandidateView};
use crate::server::{Command, CommandKind, JobSpec, ServerConfig, ServerState};
use crate::trace::{self, ChurnTrace, HostState, TraceError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

#[derive(Debug, Clone, PartialEq)]
enum EventKind {
    HostUp(HostId),
    HostDown(HostId),
    Heartbeat { host: HostId, epoch: u64 },
    GuestProbe { host: HostId, epoch: u64 },
    SnapshotTick { host: HostId, epoch: u64 },
    Sweep,
    TransferComplete {
        sender: HostId,
        receiver: HostId,
        snapshot: SnapshotId,
        epoch: u64,
    },
    CompletionCheck { job: JobId, generation: u64 },
    CommandDelivery(Command),
    SubmitJobs,
}

#[derive(Debug, Clone)]
struct QueuedEvent {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for QueuedEvent {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.seq == other.seq
    }
}
impl Eq for QueuedEvent {}
impl PartialOrd for QueuedEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for QueuedEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed so the BinaryHeap pops the earliest (time, seq) first.
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Result of one simulation run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub log: Vec<LogEvent>,
    pub metrics: MetricsReport,
}

pub struct Simulation {
    config: ExperimentConfig,
    trace: ChurnTrace,
    clock: f64,
    queue: BinaryHeap<QueuedEvent>,
    next_seq: u64,
    pub server: ServerState,
    pub clients: BTreeMap<HostId, ClientState>,
    phys_up: BTreeMap<HostId, bool>,
    down_since: BTreeMap<HostId, f64>,
    epoch: BTreeMap<HostId, u64>,
    completion_gen: BTreeMap<JobId, u64>,
    progress_at_failure: BTreeMap<JobId, f64>,
    snapshots: BTreeMap<SnapshotId, SnapshotRecord>,
    next_snapshot: u64,
    rng: ChaCha8Rng,
    log: Vec<LogEvent>,
}

impl Simulation {
    /// Builds a simulation from a config, loading or generating the churn
    /// trace it references.
    pub fn new(config: ExperimentConfig) -> Result<Self, SimError> {
        config.validate()?;
        let trace = match &config.churn.trace_path {
            Some(path) => trace::load_trace(path)?,
            None => trace::generate_trace(
                config.hosts.count,
                config.run.horizon,
                config.churn.mtbf,
                config.churn.mttr,
                config.run.seed,
            )?,
        };
        Ok(Self::with_trace(config, trace))
    }

    /// Builds a simulation over an explicit trace (the trace's host set is
    /// the host population).
    pub fn with_trace(config: ExperimentConfig, trace: ChurnTrace) -> Self {
        let seed = config.run.seed;
        let server_config = ServerConfig {
            timing: config.timing.clone(),
            placement: config.placement.clone(),
            new_host_reliability: config.reliability.new_host_reliability,
            retry_budget: config.run.retry_budget,
        };
        let mut sim = Self {
            server: ServerState::new(server_config),
            clients: BTreeMap::new(),
            phys_up: BTreeMap::new(),
            down_since: BTreeMap::new(),
            epoch: BTreeMap::new(),
            completion_gen: BTreeMap::new(),
            progress_at_failure: BTreeMap::new(),
            snapshots: BTreeMap::new(),
            next_snapshot: 0,
            clock: trace.window.0,
            queue: BinaryHeap::new(),
            next_seq: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            log: Vec::new(),
            config,
            trace,
        };
        sim.bootstrap();
        sim
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    fn horizon(&self) -> f64 {
        self.trace.window.0 + self.config.run.horizon
    }

    fn bootstrap(&mut self) {
        let start = self.trace.window.0;
        let hosts = self.trace.hosts.clone();
        for host in &hosts {
            self.server.register_host(
                host.clone(),
                self.config.hosts.storage_capacity,
                Default::default(),
                start,
            );
            self.clients.insert(
                host.clone(),
                ClientState::new(
                    host.clone(),
                    self.config.hosts.resource_limit,
                    self.config.hosts.monitor_window,
                    self.config.progress.work_rate,
                ),
            );
            self.phys_up.insert(host.clone(), true);
            self.epoch.insert(host.clone(), 0);
            self.schedule_host_ticks(host.clone(), start);
        }
        self.schedule(
            self.next_boundary(start, self.config.timing.sweep_interval),
            EventKind::Sweep,
        );
        self.schedule(
            start + self.config.workload.submit_time,
            EventKind::SubmitJobs,
        );
        for e in self.trace.events.clone() {
            let kind = match e.state {
                HostState::Up => EventKind::HostUp(e.host_id),
                HostState::Down => EventKind::HostDown(e.host_id),
            };
            self.schedule(e.timestamp, kind);
        }
    }

    fn schedule(&mut self, time: f64, kind: EventKind) {
        if time > self.horizon() {
            return;
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(QueuedEvent { time, seq, kind });
    }

    /// First multiple of `interval` strictly after `now`.
    fn next_boundary(&self, now: f64, interval: f64) -> f64 {
        let k = (now / interval).floor() as u64 + 1;
        k as f64 * interval
    }

    /// First multiple of `interval` at or after `now`.
    fn boundary_at_or_after(&self, now: f64, interval: f64) -> f64 {
        let k = (now / interval).ceil() as u64;
        let t = k as f64 * interval;
        if t < now {
            t + interval
        } else {
            t
        }
    }

    fn schedule_host_ticks(&mut self, host: HostId, now: f64) {
        let epoch = self.epoch[&host];
        let t = &self.config.timing;
        let hb = self.next_boundary(now, t.poll_interval);
        let probe = self.next_boundary(now, t.guest_probe_interval);
        let snap = self.next_boundary(now, t.snapshot_interval);
        self.schedule(hb, EventKind::Heartbeat { host: host.clone(), epoch });
        self.schedule(probe, EventKind::GuestProbe { host: host.clone(), epoch });
        self.schedule(snap, EventKind::SnapshotTick { host, epoch });
    }

    fn flush_server(&mut self, now: f64) {
        self.log.extend(self.server.drain_log());
        for cmd in self.server.drain_commands() {
            self.schedule(now, EventKind::CommandDelivery(cmd));
        }
    }

    /// Keeps the server's storage bookkeeping equal to the client's
    /// physically stored bytes.
    fn sync_storage(&mut self, host: &HostId) {
        let used = self.clients[host].storage_used();
        if let Some(h) = self.server.hosts.get_mut(host) {
            h.storage_used = used;
        }
    }

    fn is_stale(&self, host: &HostId, epoch: u64) -> bool {
        !self.phys_up[host] || self.epoch[host] != epoch
    }

    fn bump_completion_gen(&mut self, job: &JobId) -> u64 {
        let gen = self.completion_gen.entry(job.clone()).or_insert(0);
        *gen += 1;
        *gen
    }

    fn schedule_completion(&mut self, host: &HostId, now: f64) {
        let client = &self.clients[host];
        if let (Some(anchor), Some(done_at)) =
            (client.exec.clone(), client.projected_completion(now))
        {
            let gen = self.bump_completion_gen(&anchor.job_id);
            self.schedule(
                done_at,
                EventKind::CompletionCheck {
                    job: anchor.job_id,
                    generation: gen,
                },
            );
        }
    }

    /// Runs the event loop to the horizon and folds the log into metrics.
    pub fn run(mut self) -> RunOutput {
        while let Some(event) = self.queue.pop() {
            debug_assert!(event.time + 1e-9 >= self.clock, "causality violated");
            self.clock = event.time;
            self.dispatch(event);
        }
        self.log.extend(self.server.drain_log());
        debug_assert!(
            self.server.check_integrity().is_empty(),
            "end of run: {:?}",
            self.server.check_integrity()
        );
        let metrics = MetricsReport::from_log(&self.log);
        RunOutput {
            log: self.log,
            metrics,
        }
    }

    fn dispatch(&mut self, event: QueuedEvent) {
        let now = event.time;
        match event.kind {
            EventKind::HostDown(host) => self.on_host_down(&host, now),
            EventKind::HostUp(host) => self.on_host_up(&host, now),
            EventKind::Heartbeat { host, epoch } => self.on_heartbeat(&host, epoch, now),
            EventKind::GuestProbe { host, epoch } => self.on_guest_probe(&host, epoch, now),
            EventKind::SnapshotTick { host, epoch } => self.on_snapshot_tick(&host, epoch, now),
            EventKind::Sweep => self.on_sweep(now),
            EventKind::TransferComplete {
                sender,
                receiver,
                snapshot,
                epoch,
            } => self.on_transfer_complete(&sender, &receiver, &snapshot, epoch, now),
            EventKind::CompletionCheck { job, generation } => {
                self.on_completion_check(&job, generation, now)
            }
            EventKind::CommandDelivery(cmd) => self.on_command(cmd, now),
            EventKind::SubmitJobs => self.on_submit_jobs(now),
        }
    }

    // --- churn -------------------------------------------------------------

    fn on_host_down(&mut self, host: &HostId, now: f64) {
        self.phys_up.insert(host.clone(), false);
        self.down_since.insert(host.clone(), now);
        *self.epoch.get_mut(host).expect("known host") += 1;
        let client = self.clients.get_mut(host).expect("known host");
        let mut running_job = None;
        let mut progress = None;
        if let Some(anchor) = client.exec.clone() {
            if matches!(
                client.guest.state,
                GuestState::Running | GuestState::Suspended
            ) {
                let p = client.current_progress(now).expect("anchored");
                running_job = Some(anchor.job_id.clone());
                progress = Some(p);
                self.progress_at_failure.insert(anchor.job_id.clone(), p);
            }
        }
        self.log.push(LogEvent::HostDown {
            t: now,
            host: host.clone(),
            running_job: running_job.clone(),
            progress_at_down: progress,
        });
        if let Some(job) = running_job {
            self.bump_completion_gen(&job);
        }
        self.clients
            .get_mut(host)
            .expect("known host")
            .reset_for_outage();
        // Abrupt outage: every snapshot copy on this host is gone.
        self.server.purge_host_copies(host, now);
        self.flush_server(now);
    }

    fn on_host_up(&mut self, host: &HostId, now: f64) {
        self.phys_up.insert(host.clone(), true);
        self.down_since.remove(host);
        *self.epoch.get_mut(host).expect("known host") += 1;
        self.clients
            .get_mut(host)
            .expect("known host")
            .reset_fresh();
        self.log.push(LogEvent::HostUp {
            t: now,
            host: host.clone(),
        });
        let epoch = self.epoch[host];
        let t = &self.config.timing;
        let hb = self.boundary_at_or_after(now, t.poll_interval);
        let probe = self.boundary_at_or_after(now, t.guest_probe_interval);
        let snap = self.boundary_at_or_after(now, t.snapshot_interval);
        self.schedule(hb, EventKind::Heartbeat { host: host.clone(), epoch });
        self.schedule(probe, EventKind::GuestProbe { host: host.clone(), epoch });
        self.schedule(snap, EventKind::SnapshotTick { host: host.clone(), epoch });
    }

    // --- client ticks ------------------------------------------------------

    fn on_heartbeat(&mut self, host: &HostId, epoch: u64, now: f64) {
        if self.is_stale(host, epoch) {
            return;
        }
        let report = self.clients[host].build_poll_report();
        match self.server.on_poll(host, &report, now) {
            Ok(response) => {
                self.clients
                    .get_mut(host)
                    .expect("known host")
                    .accept_peers(response.peers);
            }
            Err(_) => {
                // Unknown host: nothing a simulated client can do.
            }
        }
        self.flush_server(now);
        self.server.try_pending_restores(now);
        self.server.schedule_pending(now);
        self.flush_server(now);
        self.schedule(
            self.next_boundary(now, self.config.timing.poll_interval),
            EventKind::Heartbeat {
                host: host.clone(),
                epoch,
            },
        );
    }

    fn on_guest_probe(&mut self, host: &HostId, epoch: u64, now: f64) {
        if self.is_stale(host, epoch) {
            return;
        }
        let sample = (self.rng.random::<f64>() * 2.0 * self.config.hosts.mean_load).clamp(0.0, 1.0);
        let action = self
            .clients
            .get_mut(host)
            .expect("known host")
            .resource_monitor(sample, now);
        match action {
            Some(MonitorAction::Suspend) => {
                self.log.push(LogEvent::GuestSuspended {
                    t: now,
                    host: host.clone(),
                });
                if let Some(anchor) = self.clients[host].exec.clone() {
                    self.bump_completion_gen(&anchor.job_id);
                }
            }
            Some(MonitorAction::Resume) => {
                self.log.push(LogEvent::GuestResumed {
                    t: now,
                    host: host.clone(),
                });
                self.schedule_completion(host, now);
            }
            None => {}
        }
        if let Some(guest) = self.clients.get_mut(host).expect("known host").guest_probe() {
            let _ = self.server.on_guest_failure_report(host, &guest, now);
            self.flush_server(now);
        }
        self.schedule(
            self.next_boundary(now, self.config.timing.guest_probe_interval),
            EventKind::GuestProbe {
                host: host.clone(),
                epoch,
            },
        );
    }

    fn on_snapshot_tick(&mut self, host: &HostId, epoch: u64, now: f64) {
        if self.is_stale(host, epoch) {
            return;
        }
        self.schedule(
            self.next_boundary(now, self.config.timing.snapshot_interval),
            EventKind::SnapshotTick {
                host: host.clone(),
                epoch,
            },
        );
        if !self.config.run.replication {
            return;
        }
        let snapshot_id = SnapshotId::new(format!("s{:04}", self.next_snapshot));
        let Some(record) = self
            .clients
            .get_mut(host)
            .expect("known host")
            .capture_snapshot(snapshot_id.clone(), now, self.config.hosts.storage_capacity)
        else {
            return;
        };
        self.next_snapshot += 1;
        self.log.push(LogEvent::SnapshotCaptured {
            t: now,
            guest: record.guest_id.clone(),
            job: record.job_id.clone(),
            snapshot: record.snapshot_id.clone(),
            sequence: record.sequence,
            progress: record.captured_progress,
            size: record.size,
        });
        self.sync_storage(host);
        self.snapshots.insert(snapshot_id, record.clone());

        let client = &self.clients[host];
        let sender_cloudlets = self
            .server
            .hosts
            .get(host)
            .map(|h| h.cloudlets.clone())
            .unwrap_or_default();
        let candidates: Vec<CandidateView> = client
            .known_peers
            .iter()
            .map(|p| CandidateView {
                host_id: p.host_id.clone(),
                reliability: p.reliability,
                failure_probability: p.failure_probability,
                liveness: crate::domain::Liveness::Up,
                in_use: p.in_use,
                storage_free: p.storage_free,
                cloudlets: p.cloudlets.clone(),
            })
            .collect();
        let ordered = placement::filter_receivers(
            host,
            &sender_cloudlets,
            &candidates,
            record.size,
            &self.config.placement,
        );
        let decision = placement::select_receivers(&ordered, &self.config.placement);
        if decision.degraded {
            self.log.push(LogEvent::DegradedPlacement {
                t: now,
                guest: record.guest_id.clone(),
                receivers: decision.receivers.len(),
                combined_failure_probability: decision.combined_failure_probability,
            });
        }
        let receivers = decision.receivers.clone();
        self.clients
            .get_mut(host)
            .expect("known host")
            .begin_round(record.clone(), decision);
        if receivers.is_empty() {
            // Nothing to send; the round is trivially complete and the
            // snapshot stays local-only.
            let round = self
                .clients
                .get_mut(host)
                .expect("known host")
                .round
                .take()
                .expect("round just opened");
            self.finalize_round(host, round, now);
            self.sync_storage(host);
            return;
        }
        let duration = self
            .config
            .transfer
            .duration(record.size, receivers.len());
        let epoch = self.epoch[host];
        for receiver in receivers {
            self.schedule(
                now + duration,
                EventKind::TransferComplete {
                    sender: host.clone(),
                    receiver,
                    snapshot: record.snapshot_id.clone(),
                    epoch,
                },
            );
        }
    }

    fn on_transfer_complete(
        &mut self,
        sender: &HostId,
        receiver: &HostId,
        snapshot: &SnapshotId,
        epoch: u64,
        now: f64,
    ) {
        if self.is_stale(sender, epoch) {
            return; // sender died mid-round; partial copies are voided
        }
        let size = self.snapshots[snapshot].size;
        let capacity = self.config.hosts.storage_capacity;
        let success = self.phys_up[receiver]
            && self
                .clients
                .get_mut(receiver)
                .expect("known host")
                .store_copy(snapshot.clone(), size, capacity);
        if success {
            self.log.push(LogEvent::TransferComplete {
                t: now,
                snapshot: snapshot.clone(),
                from: sender.clone(),
                to: receiver.clone(),
                bytes: size,
            });
            self.sync_storage(receiver);
        }
        if let Some(round) = self
            .clients
            .get_mut(sender)
            .expect("known host")
            .resolve_transfer(receiver, success)
        {
            self.finalize_round(sender, round, now);
            self.sync_storage(sender);
        }
    }

    fn finalize_round(&mut self, sender: &HostId, round: crate::client::TransferRound, now: f64) {
        if round.succeeded.is_empty() {
            // No remote copy made it; any previously registered snapshot
            // stays authoritative for restores.
            return;
        }
        let mut registered = round.snapshot.clone();
        registered.locations = round.succeeded.clone();
        self.snapshots
            .insert(registered.snapshot_id.clone(), registered.clone());
        let guest = registered.guest_id.clone();
        let _ = self.server.register_snapshot(
            &guest,
            registered,
            round.decision.combined_failure_probability,
            now,
        );
        self.flush_server(now);
        let _ = sender;
    }

    // --- server ticks ------------------------------------------------------

    fn on_sweep(&mut self, now: f64) {
        self.server.availability_sweep(now, &self.down_since);
        self.flush_server(now);
        self.server.try_pending_restores(now);
        self.server.schedule_pending(now);
        self.flush_server(now);
        debug_assert!(
            self.server.check_integrity().is_empty(),
            "t={now}: {:?}",
            self.server.check_integrity()
        );
        self.schedule(
            self.next_boundary(now, self.config.timing.sweep_interval),
            EventKind::Sweep,
        );
    }

    fn on_submit_jobs(&mut self, now: f64) {
        for _ in 0..self.config.workload.jobs {
            let _ = self.server.submit_job(
                JobSpec {
                    total_work: self.config.workload.total_work,
                    snapshot_size: self.config.workload.snapshot_size,
                    cloudlet: None,
                },
                now,
            );
        }
        self.flush_server(now);
        self.server.try_pending_restores(now);
        self.server.schedule_pending(now);
        self.flush_server(now);
    }

    fn on_completion_check(&mut self, job: &JobId, generation: u64, now: f64) {
        if self.completion_gen.get(job).copied().unwrap_or(0) != generation {
            return;
        }
        let Some(record) = self.server.jobs.get(job) else {
            return;
        };
        if record.status != crate::domain::JobStatus::Running {
            return;
        }
        let Some(guest) = record.current_guest.clone() else {
            return;
        };
        let host = self.server.guests[&guest].host_id.clone();
        if self.server.on_job_complete(job, now).is_ok() {
            self.progress_at_failure.remove(job);
            self.clients
                .get_mut(&host)
                .expect("known host")
                .stop_guest();
            self.sync_storage(&host);
            self.flush_server(now);
            self.server.try_pending_restores(now);
            self.server.schedule_pending(now);
            self.flush_server(now);
        }
    }

    // --- command execution -------------------------------------------------

    fn on_command(&mut self, cmd: Command, now: f64) {
        let host = cmd.target_host.clone();
        if !self.phys_up[&host] {
            return; // lost; the sweep recovers the job if one was involved
        }
        match cmd.kind {
            CommandKind::StartGuest { job_id } => {
                let Some(job) = self.server.jobs.get(&job_id) else {
                    return;
                };
                let (work, size) = (job.total_work, job.snapshot_size);
                let result = self
                    .clients
                    .get_mut(&host)
                    .expect("known host")
                    .start_guest(job_id.clone(), work, size, now);
                match result {
                    Ok(()) => {
                        let _ = self.server.mark_job_running(&job_id, now);
                        self.flush_server(now);
                        self.schedule_completion(&host, now);
                    }
                    Err(_) => self.negative_ack(&host, now),
                }
            }
            CommandKind::RestoreSnapshot { snapshot_id, job_id } => {
                let Some(record) = self.snapshots.get(&snapshot_id).cloned() else {
                    return;
                };
                let Some(job) = self.server.jobs.get(&job_id) else {
                    return;
                };
                let total_work = job.total_work;
                let previous_progress = self
                    .progress_at_failure
                    .get(&job_id)
                    .copied()
                    .unwrap_or(record.captured_progress);
                let result = self
                    .clients
                    .get_mut(&host)
                    .expect("known host")
                    .restore_snapshot(&record, now);
                match result {
                    Ok(()) => {
                        self.clients
                            .get_mut(&host)
                            .expect("known host")
                            .set_total_work(total_work);
                        if self.server.mark_restore_complete(&job_id, now).is_ok() {
                            self.log.push(LogEvent::RestoreComplete {
                                t: now,
                                job: job_id.clone(),
                                host: host.clone(),
                                progress: record.captured_progress,
                                lost_progress: (previous_progress - record.captured_progress)
                                    .max(0.0),
                            });
                            self.flush_server(now);
                            self.sync_storage(&host);
                            self.schedule_completion(&host, now);
                        }
                    }
                    Err(_) => self.negative_ack(&host, now),
                }
            }
            CommandKind::SuspendGuest => {
                let result = self
                    .clients
                    .get_mut(&host)
                    .expect("known host")
                    .suspend(now);
                match result {
                    Ok(()) => {
                        self.log.push(LogEvent::GuestSuspended {
                            t: now,
                            host: host.clone(),
                        });
                        if let Some(anchor) = self.clients[&host].exec.clone() {
                            self.bump_completion_gen(&anchor.job_id);
                        }
                    }
                    Err(_) => self.negative_ack(&host, now),
                }
            }
            CommandKind::ResumeGuest => {
                let result = self.clients.get_mut(&host).expect("known host").resume(now);
                match result {
                    Ok(()) => {
                        self.log.push(LogEvent::GuestResumed {
                            t: now,
                            host: host.clone(),
                        });
                        self.schedule_completion(&host, now);
                    }
                    Err(_) => self.negative_ack(&host, now),
                }
            }
            CommandKind::DeleteSnapshot { snapshot_id } => {
                if self
                    .clients
                    .get_mut(&host)
                    .expect("known host")
                    .delete_copy(&snapshot_id)
                    .is_some()
                {
                    self.log.push(LogEvent::SnapshotDeleted {
                        t: now,
                        host: host.clone(),
                        snapshot: snapshot_id,
                    });
                    self.sync_storage(&host);
                }
            }
            CommandKind::TransferSnapshot { .. } => {
                // Transfers are initiated client-side in this model.
            }
        }
    }

    fn negative_ack(&mut self, host: &HostId, now: f64) {
        let Some(guest) = self.server.resident_guest_of(host).cloned() else {
            return;
        };
        let _ = self.server.on_guest_failure_report(host, &guest, now);
        self.flush_server(now);
    }
}

/// Convenience wrapper: build from config and run to completion.
pub fn run_experiment(config: ExperimentConfig) -> Result<RunOutput, SimError> {
    Ok(Simulation::new(config)?.run())
}
