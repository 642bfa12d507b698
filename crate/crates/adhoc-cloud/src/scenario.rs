//! A small scripted scenario with a fully hand-checkable timeline, used by
//! the golden-log test and the `restore_timeline` example.
//!
//! Seven hosts with fixed track records run one job on the perfect-score
//! host. Snapshots fan out to the three most reliable peers (combined
//! failure probability 0.05 * 0.06 * 0.10 = 0.0003). The worker dies mid-run,
//! the sweep declares it, and the job restores on the best surviving copy
//! holder while the remaining holders drop theirs.

use crate::config::ExperimentConfig;
use crate::domain::HostId;
use crate::sim::{RunOutput, Simulation};
use crate::trace::{ChurnTrace, HostState, TraceEvent};

/// Track record (assigned, completed, failures) per host; hA scores 100 and
/// receives the job, then hD 95, hE 94, hB 90, hC 70, hF 60, hG 50.
pub const TRACK_RECORDS: [(&str, u64, u64, u64); 7] = [
    ("hA", 20, 20, 0),
    ("hB", 10, 9, 1),
    ("hC", 10, 7, 3),
    ("hD", 20, 19, 1),
    ("hE", 50, 47, 3),
    ("hF", 10, 6, 4),
    ("hG", 10, 5, 5),
];

/// Time at which the worker host drops out.
pub const WORKER_DOWN_AT: f64 = 12.0;

/// Scaled-down control-plane timing so the whole story fits in 40 seconds:
/// poll every 1 s, failure timeout 2 s, sweep every 1 s, snapshot every 5 s.
pub fn restore_timeline_config() -> ExperimentConfig {
    let mut config = ExperimentConfig::default();
    config.timing.poll_interval = 1.0;
    config.timing.failure_timeout = 2.0;
    config.timing.sweep_interval = 1.0;
    config.timing.snapshot_interval = 5.0;
    config.timing.guest_probe_interval = 10.0;
    config.placement.min_replicas = 3;
    config.hosts.mean_load = 0.0; // keep the resource monitor quiet
    config.hosts.storage_capacity = 1_000_000;
    config.transfer.bandwidth = 1_000_000.0;
    config.transfer.latency = 0.5;
    config.workload.jobs = 1;
    config.workload.total_work = 30.0;
    config.workload.snapshot_size = 1_000;
    config.run.horizon = 40.0;
    config.run.seed = 1;
    config
}

pub fn restore_timeline_trace() -> ChurnTrace {
    ChurnTrace {
        hosts: TRACK_RECORDS.iter().map(|(id, ..)| HostId::from(*id)).collect(),
        events: vec![TraceEvent {
            timestamp: WORKER_DOWN_AT,
            host_id: HostId::from("hA"),
            state: HostState::Down,
        }],
        window: (0.0, 40.0),
    }
}

/// Builds the scenario with the hosts' track records pre-seeded and runs it.
pub fn run_restore_timeline() -> RunOutput {
    let mut sim = Simulation::with_trace(restore_timeline_config(), restore_timeline_trace());
    for (id, assigned, completed, failures) in TRACK_RECORDS {
        let host = sim.server.hosts.get_mut(&HostId::from(id)).expect("registered");
        host.jobs_assigned = assigned;
        host.jobs_completed = completed;
        host.failures = failures;
    }
    sim.run()
}
