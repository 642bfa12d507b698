//! Experiment configuration: a single TOML document from which a run is
//! fully reproducible together with its seed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::placement::PlacementConfig;
use crate::server::TimingConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
}

/// Snapshot transfer cost model: duration = latency + size / share, where a
/// sender's bandwidth is split fairly across its concurrent transfers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransferModel {
    /// Outbound bytes/second per sender.
    pub bandwidth: f64,
    /// Fixed per-transfer latency, seconds.
    pub latency: f64,
}

impl Default for TransferModel {
    fn default() -> Self {
        Self {
            bandwidth: 100_000_000.0,
            latency: 0.5,
        }
    }
}

impl TransferModel {
    /// Duration of one transfer in a round of `concurrent` parallel pushes.
    pub fn duration(&self, size: u64, concurrent: usize) -> f64 {
        let share = self.bandwidth / concurrent.max(1) as f64;
        self.latency + size as f64 / share
    }
}

/// Work units per simulated second while a guest runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProgressModel {
    pub work_rate: f64,
}

impl Default for ProgressModel {
    fn default() -> Self {
        Self { work_rate: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReliabilityConfig {
    /// Score assumed for hosts that were never assigned a job; 100 follows
    /// the scoring formula literally, 50 is the optimistic-prior variant.
    pub new_host_reliability: f64,
}

impl Default for ReliabilityConfig {
    fn default() -> Self {
        Self {
            new_host_reliability: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HostConfig {
    /// Host count when churn is generated; a trace file overrides this.
    pub count: usize,
    pub storage_capacity: u64,
    /// Fraction of host resources the guest may use before the monitor
    /// suspends it.
    pub resource_limit: f64,
    /// Consecutive breaching samples required to suspend (and compliant
    /// samples to resume).
    pub monitor_window: usize,
    /// Mean of the synthetic per-probe host load samples, in [0, 1].
    pub mean_load: f64,
}

impl Default for HostConfig {
    fn default() -> Self {
        Self {
            count: 30,
            storage_capacity: 20_000_000_000,
            resource_limit: 1.0,
            monitor_window: 3,
            mean_load: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChurnConfig {
    /// Replay this trace file instead of generating churn.
    pub trace_path: Option<PathBuf>,
    /// Mean up-time, seconds (generated churn).
    pub mtbf: f64,
    /// Mean down-time, seconds (generated churn).
    pub mttr: f64,
}

impl Default for ChurnConfig {
    fn default() -> Self {
        Self {
            trace_path: None,
            mtbf: 7200.0,
            mttr: 300.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorkloadConfig {
    pub jobs: usize,
    pub total_work: f64,
    pub snapshot_size: u64,
    /// Submission time of every job.
    pub submit_time: f64,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        Self {
            jobs: 30,
            total_work: 1800.0,
            snapshot_size: 1_000_000_000,
            submit_time: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub horizon: f64,
    pub seed: u64,
    /// Snapshot replication on, or the restart-only baseline.
    pub replication: bool,
    /// Restore/restart attempts allowed per job.
    pub retry_budget: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            horizon: 3600.0,
            seed: 1,
            replication: true,
            retry_budget: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub timing: TimingConfig,
    pub transfer: TransferModel,
    pub progress: ProgressModel,
    pub placement: PlacementConfig,
    pub reliability: ReliabilityConfig,
    pub hosts: HostConfig,
    pub churn: ChurnConfig,
    pub workload: WorkloadConfig,
    pub run: RunConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
        let config: Self = toml::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.timing.validate().map_err(ConfigError::Invalid)?;
        if self.run.horizon <= 0.0 {
            return Err(ConfigError::Invalid("horizon must be positive".into()));
        }
        if self.workload.total_work <= 0.0 {
            return Err(ConfigError::Invalid("total_work must be positive".into()));
        }
        if self.progress.work_rate <= 0.0 {
            return Err(ConfigError::Invalid("work_rate must be positive".into()));
        }
        if self.transfer.bandwidth <= 0.0 || self.transfer.latency < 0.0 {
            return Err(ConfigError::Invalid(
                "transfer bandwidth must be positive and latency non-negative".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.placement.threshold) {
            return Err(ConfigError::Invalid(
                "placement threshold must lie in [0, 1]".into(),
            ));
        }
        if self.churn.trace_path.is_none() && (self.churn.mtbf <= 0.0 || self.churn.mttr <= 0.0) {
            return Err(ConfigError::Invalid(
                "churn mtbf and mttr must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.hosts.mean_load) {
            return Err(ConfigError::Invalid("mean_load must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_carry_control_plane_constants() {
        let c = ExperimentConfig::default();
        assert_eq!(c.timing.poll_interval, 60.0);
        assert_eq!(c.timing.failure_timeout, 120.0);
        assert_eq!(c.timing.guest_probe_interval, 10.0);
        assert_eq!(c.placement.threshold, 0.05);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn toml_round_trip() {
        let c = ExperimentConfig::default();
        let text = c.to_toml();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn rejects_bad_horizon() {
        let mut c = ExperimentConfig::default();
        c.run.horizon = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn fair_share_transfer_duration() {
        let m = TransferModel {
            bandwidth: 100.0,
            latency: 1.0,
        };
        assert_eq!(m.duration(200, 1), 3.0);
        // Two concurrent transfers halve the share.
        assert_eq!(m.duration(200, 2), 5.0);
    }
}
