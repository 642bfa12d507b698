//! Runs one experiment with the default configuration (30 hosts, 30 jobs,
//! generated churn) and prints the resulting metrics.

use adhoc_cloud::sim::run_experiment;
use adhoc_cloud::ExperimentConfig;

fn main() {
    let config = ExperimentConfig::default();
    println!(
        "{} hosts, {} jobs of {:.0} s work, horizon {:.0} s, seed {}",
        config.hosts.count,
        config.workload.jobs,
        config.workload.total_work,
        config.run.horizon,
        config.run.seed
    );
    let output = run_experiment(config).unwrap();
    println!("{} log events\n", output.log.len());
    print!("{}", output.metrics.render_table());
}
