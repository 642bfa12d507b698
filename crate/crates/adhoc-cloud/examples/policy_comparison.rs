//! Replays the same churn trace with snapshot replication on and off and
//! compares completion rates across a few seeds.

use adhoc_cloud::metrics::compare;
use adhoc_cloud::sim::Simulation;
use adhoc_cloud::trace::generate_trace;
use adhoc_cloud::ExperimentConfig;

fn main() {
    println!(
        "{:<6} {:>12} {:>12} {:>8}",
        "seed", "replication", "baseline", "delta"
    );
    for seed in 0..5u64 {
        let trace = generate_trace(30, 3600.0, 3600.0, 600.0, seed).unwrap();
        let mut config = ExperimentConfig::default();
        config.run.seed = seed;
        config.churn.mtbf = 3600.0;
        config.churn.mttr = 600.0;

        let with = Simulation::with_trace(config.clone(), trace.clone()).run();
        config.run.replication = false;
        let without = Simulation::with_trace(config, trace).run();

        let delta = compare(&with.metrics, &without.metrics).unwrap();
        println!(
            "{seed:<6} {:>12.4} {:>12.4} {:>+8.4}",
            with.metrics.completion_rate,
            without.metrics.completion_rate,
            delta.completion_rate_delta
        );
    }
}
