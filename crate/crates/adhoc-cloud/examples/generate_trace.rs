//! Generates a synthetic host-churn trace and reports its headline numbers,
//! including the busiest one-hour window.

use adhoc_cloud::trace::{busiest_window, generate_trace, HostState};

fn main() {
    let (hosts, horizon, mtbf, mttr, seed) = (30, 4.0 * 3600.0, 7200.0, 300.0, 7);
    let trace = generate_trace(hosts, horizon, mtbf, mttr, seed).unwrap();
    let downs = trace
        .events
        .iter()
        .filter(|e| e.state == HostState::Down)
        .count();
    println!(
        "{} hosts over {:.0} s (mtbf {:.0} s, mttr {:.0} s, seed {seed})",
        trace.hosts.len(),
        horizon,
        mtbf,
        mttr
    );
    println!("{} events, {} outages", trace.events.len(), downs);
    let (start, end) = busiest_window(&trace, 3600.0).unwrap();
    println!("busiest hour: [{start:.0}, {end:.0}]");
    println!("\nfirst lines of the serialized trace:");
    for line in trace.serialize().lines().take(8) {
        println!("  {line}");
    }
}
