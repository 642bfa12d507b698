//! Simulation of an ad hoc cloud control plane: a central server schedules
//! jobs onto sporadically available hosts by reliability, clients checkpoint
//! running guests and replicate snapshots peer-to-peer, and failed jobs are
//! restored from the most reliable surviving copy.
//!
//! The crate is organized around deterministic state machines ([`server`],
//! [`client`]) driven by a discrete-event engine ([`sim`]) that replays
//! host-churn traces ([`trace`]) and folds the resulting event log into
//! completion-rate metrics ([`metrics`]).
//!
//! See the `examples/` directory for runnable entry points per capability;
//! the `adhoc-cloud` binary exposes `simulate`, `sweep` and `gen-trace`
//! subcommands over the same library surface.

pub mod cli;
pub mod client;
pub mod config;
pub mod domain;
pub mod eventlog;
pub mod metrics;
pub mod placement;
pub mod reliability;
pub mod scenario;
pub mod server;
pub mod sim;
pub mod trace;

pub use config::ExperimentConfig;
pub use metrics::MetricsReport;
pub use sim::Simulation;
