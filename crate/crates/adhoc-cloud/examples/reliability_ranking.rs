//! Scores a handful of hosts from their job track records and ranks them
//! the way the scheduler would.

use adhoc_cloud::domain::{GuestState, HostId, Liveness};
use adhoc_cloud::reliability::{failure_probability, host_reliability, rank_ready_hosts, HostView};

fn main() {
    let records: [(&str, u64, u64, u64); 6] = [
        ("hA", 20, 20, 0), // perfect record
        ("hB", 10, 9, 1),
        ("hC", 10, 7, 3),
        ("hD", 20, 19, 1),
        ("hE", 0, 0, 0), // never used
        ("hF", 5, 0, 5), // always fails
    ];
    println!("{:<6} {:>8} {:>10} {:>8} {:>12}", "host", "assigned", "completed", "score", "p(failure)");
    let mut views = Vec::new();
    for (id, ca, cc, nf) in records {
        let score = host_reliability(ca, cc, nf).unwrap();
        let p = failure_probability(score).unwrap();
        println!("{id:<6} {ca:>8} {cc:>10} {score:>8.1} {p:>12.3}");
        views.push(HostView {
            host_id: HostId::from(id),
            reliability: score,
            liveness: Liveness::Up,
            in_use: false,
            guest_state: GuestState::Stopped,
        });
    }
    let ranked = rank_ready_hosts(&views);
    let order: Vec<&str> = ranked.iter().map(|h| h.as_str()).collect();
    println!("\nscheduling order: {}", order.join(" > "));
}
