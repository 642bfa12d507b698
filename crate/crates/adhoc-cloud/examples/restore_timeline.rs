//! Prints the full event log of the scripted seven-host restore scenario:
//! one job on the best-scoring host, snapshot fan-out to the three most
//! reliable peers, worker death, declared failure, restore on the best
//! surviving copy.

use adhoc_cloud::eventlog::render_log;
use adhoc_cloud::scenario::run_restore_timeline;

fn main() {
    let output = run_restore_timeline();
    print!("{}", render_log(&output.log));
    println!("---");
    print!("{}", output.metrics.render_table());
}
