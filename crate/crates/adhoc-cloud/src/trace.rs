//! Host availability traces: parsing, byte-stable serialization, synthetic
//! churn generation and high-activity window selection.
//!
//! File format (line-delimited, space-separated):
//!
//! ```text
//! #churn-trace v1
//! #window 0.000 3600.000
//! #hosts h00 h01 h02
//! 12.500 h01 DOWN
//! 310.250 h01 UP
//! ```
//!
//! Timestamps carry exactly three decimals so serialization is byte-identical
//! for identical traces. Per-host events must alternate UP/DOWN and be
//! globally time-ordered.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use thiserror::Error;

use crate::domain::HostId;

pub const TRACE_HEADER: &str = "#churn-trace v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HostState {
    Up,
    Down,
}

impl HostState {
    fn as_str(self) -> &'static str {
        match self {
            HostState::Up => "UP",
            HostState::Down => "DOWN",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub timestamp: f64,
    pub host_id: HostId,
    pub state: HostState,
}

/// Time-ordered UP/DOWN events for a fixed host population. All hosts start
/// up at `window.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChurnTrace {
    pub hosts: Vec<HostId>,
    pub events: Vec<TraceEvent>,
    pub window: (f64, f64),
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("host {0}: consecutive {1} events (states must alternate)")]
    NonAlternating(HostId, &'static str),
    #[error("trace window [{0}, {1}] shorter than requested {2} s")]
    WindowTooShort(f64, f64, f64),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ChurnTrace {
    /// Validates ordering, alternation and window containment.
    pub fn validate(&self) -> Result<(), TraceError> {
        let mut last_state: BTreeMap<&HostId, HostState> = BTreeMap::new();
        let mut prev_t = self.window.0;
        for (i, e) in self.events.iter().enumerate() {
            if e.timestamp < prev_t {
                return Err(TraceError::Parse {
                    line: i + 1,
                    message: format!("timestamp {} out of order", e.timestamp),
                });
            }
            prev_t = e.timestamp;
            if e.timestamp > self.window.1 {
                return Err(TraceError::Parse {
                    line: i + 1,
                    message: format!("timestamp {} outside window", e.timestamp),
                });
            }
            if !self.hosts.contains(&e.host_id) {
                return Err(TraceError::Parse {
                    line: i + 1,
                    message: format!("unknown host {}", e.host_id),
                });
            }
            let prev = last_state.insert(&e.host_id, e.state);
            let expected_prev = match e.state {
                HostState::Down => HostState::Up,
                HostState::Up => HostState::Down,
            };
            if prev.unwrap_or(HostState::Up) != expected_prev {
                return Err(TraceError::NonAlternating(
                    e.host_id.clone(),
                    e.state.as_str(),
                ));
            }
        }
        Ok(())
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{TRACE_HEADER}");
        let _ = writeln!(out, "#window {:.3} {:.3}", self.window.0, self.window.1);
        let mut hosts_line = String::from("#hosts");
        for h in &self.hosts {
            hosts_line.push(' ');
            hosts_line.push_str(h.as_str());
        }
        let _ = writeln!(out, "{hosts_line}");
        for e in &self.events {
            let _ = writeln!(out, "{:.3} {} {}", e.timestamp, e.host_id, e.state.as_str());
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, TraceError> {
        let mut lines = text.lines().enumerate();
        let (_, first) = lines.next().ok_or(TraceError::Parse {
            line: 1,
            message: "empty file".into(),
        })?;
        if first.trim() != TRACE_HEADER {
            return Err(TraceError::Parse {
                line: 1,
                message: format!("expected header `{TRACE_HEADER}`"),
            });
        }
        let mut window = None;
        let mut hosts: Vec<HostId> = Vec::new();
        let mut events = Vec::new();
        for (idx, raw) in lines {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("#window ") {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 2 {
                    return Err(TraceError::Parse {
                        line: line_no,
                        message: "expected `#window <start> <end>`".into(),
                    });
                }
                let start: f64 = parts[0].parse().map_err(|e| TraceError::Parse {
                    line: line_no,
                    message: format!("bad window start: {e}"),
                })?;
                let end: f64 = parts[1].parse().map_err(|e| TraceError::Parse {
                    line: line_no,
                    message: format!("bad window end: {e}"),
                })?;
                window = Some((start, end));
                continue;
            }
            if let Some(rest) = line.strip_prefix("#hosts") {
                hosts = rest.split_whitespace().map(HostId::from).collect();
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split(' ').collect();
            if parts.len() != 3 {
                return Err(TraceError::Parse {
                    line: line_no,
                    message: "expected `timestamp host UP|DOWN`".into(),
                });
            }
            let timestamp: f64 = parts[0].parse().map_err(|e| TraceError::Parse {
                line: line_no,
                message: format!("bad timestamp: {e}"),
            })?;
            let state = match parts[2] {
                "UP" => HostState::Up,
                "DOWN" => HostState::Down,
                other => {
                    return Err(TraceError::Parse {
                        line: line_no,
                        message: format!("bad state `{other}`"),
                    })
                }
            };
            events.push(TraceEvent {
                timestamp,
                host_id: HostId::from(parts[1]),
                state,
            });
        }
        if hosts.is_empty() {
            // Derive the population from the events when no #hosts line exists.
            let mut set: Vec<HostId> = events.iter().map(|e| e.host_id.clone()).collect();
            set.sort();
            set.dedup();
            hosts = set;
        }
        let window = window.unwrap_or_else(|| {
            let end = events.iter().map(|e| e.timestamp).fold(0.0, f64::max);
            (0.0, end)
        });
        let trace = ChurnTrace {
            hosts,
            events,
            window,
        };
        trace.validate()?;
        Ok(trace)
    }
}

pub fn load_trace(path: &Path) -> Result<ChurnTrace, TraceError> {
    let text = fs::read_to_string(path)?;
    ChurnTrace::parse(&text)
}

pub fn save_trace(trace: &ChurnTrace, path: &Path) -> Result<(), TraceError> {
    fs::write(path, trace.serialize())?;
    Ok(())
}

fn round_ms(t: f64) -> f64 {
    (t * 1000.0).round() / 1000.0
}

/// Per-host alternating renewal churn: exponential up-times (mean `mtbf`)
/// and down-times (mean `mttr`), deterministic for a given seed. Timestamps
/// are rounded to milliseconds to keep serialization byte-stable.
pub fn generate_trace(
    n_hosts: usize,
    horizon: f64,
    mtbf: f64,
    mttr: f64,
    seed: u64,
) -> Result<ChurnTrace, TraceError> {
    if n_hosts == 0 || horizon <= 0.0 || mtbf <= 0.0 || mttr <= 0.0 {
        return Err(TraceError::BadParameter(format!(
            "n_hosts={n_hosts} horizon={horizon} mtbf={mtbf} mttr={mttr} (all must be positive)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let up_dist = Exp::new(1.0 / mtbf).expect("positive rate");
    let down_dist = Exp::new(1.0 / mttr).expect("positive rate");
    let hosts: Vec<HostId> = (0..n_hosts).map(HostId::numbered).collect();
    let mut events = Vec::new();
    for host in &hosts {
        let mut t = 0.0f64;
        let mut state = HostState::Up;
        loop {
            let dwell = match state {
                HostState::Up => up_dist.sample(&mut rng),
                HostState::Down => down_dist.sample(&mut rng),
            };
            let next = round_ms(t + dwell.max(0.001));
            if next >= horizon {
                break;
            }
            t = if next > t { next } else { round_ms(t + 0.001) };
            state = match state {
                HostState::Up => HostState::Down,
                HostState::Down => HostState::Up,
            };
            events.push(TraceEvent {
                timestamp: t,
                host_id: host.clone(),
                state,
            });
        }
    }
    events.sort_by(|a, b| {
        a.timestamp
            .total_cmp(&b.timestamp)
            .then_with(|| a.host_id.cmp(&b.host_id))
    });
    let trace = ChurnTrace {
        hosts,
        events,
        window: (0.0, horizon),
    };
    trace.validate()?;
    Ok(trace)
}

/// The window of `window_length` seconds containing the most state-change
/// events; ties resolve to the earliest start. Candidate starts are the
/// trace start and each event timestamp.
pub fn busiest_window(trace: &ChurnTrace, window_length: f64) -> Result<(f64, f64), TraceError> {
    let (start, end) = trace.window;
    if end - start < window_length {
        return Err(TraceError::WindowTooShort(start, end, window_length));
    }
    let mut candidates: Vec<f64> = vec![start];
    candidates.extend(trace.events.iter().map(|e| e.timestamp));
    let mut best_start = start;
    let mut best_count = usize::MIN;
    for s in candidates {
        let s = s.min(end - window_length);
        let count = trace
            .events
            .iter()
            .filter(|e| e.timestamp >= s && e.timestamp <= s + window_length)
            .count();
        if count > best_count || (count == best_count && s < best_start) {
            best_count = count;
            best_start = s;
        }
    }
    Ok((best_start, best_start + window_length))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_well_formed() {
        let text = "#churn-trace v1\n#window 0.000 100.000\n#hosts h00 h01\n\
                    10.000 h00 DOWN\n20.000 h00 UP\n30.000 h01 DOWN\n";
        let t = ChurnTrace::parse(text).unwrap();
        assert_eq!(t.events.len(), 3);
        assert_eq!(t.hosts.len(), 2);
    }

    #[test]
    fn parse_rejects_out_of_order() {
        let text = "#churn-trace v1\n#hosts h00\n20.000 h00 DOWN\n10.000 h00 UP\n";
        let err = ChurnTrace::parse(text).unwrap_err();
        assert!(err.to_string().contains("out of order"), "{err}");
    }

    #[test]
    fn parse_rejects_consecutive_downs() {
        let text = "#churn-trace v1\n#hosts h00\n10.000 h00 DOWN\n20.000 h00 DOWN\n";
        let err = ChurnTrace::parse(text).unwrap_err();
        assert!(matches!(err, TraceError::NonAlternating(_, "DOWN")));
    }

    #[test]
    fn round_trip_identity() {
        let t = generate_trace(5, 1000.0, 300.0, 60.0, 42).unwrap();
        let text = t.serialize();
        let t2 = ChurnTrace::parse(&text).unwrap();
        assert_eq!(t, t2);
        assert_eq!(t2.serialize(), text);
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let a = generate_trace(10, 3600.0, 600.0, 120.0, 7).unwrap();
        let b = generate_trace(10, 3600.0, 600.0, 120.0, 7).unwrap();
        assert_eq!(a, b);
        let c = generate_trace(10, 3600.0, 600.0, 120.0, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn huge_mtbf_yields_no_events() {
        let t = generate_trace(5, 1000.0, 1e15, 60.0, 1).unwrap();
        assert!(t.events.is_empty());
    }

    #[test]
    fn generated_up_fraction_matches_renewal_theory() {
        // Mean up-fraction over many seeds should approach mtbf/(mtbf+mttr).
        let (mtbf, mttr, horizon) = (7200.0, 300.0, 3600.0);
        let mut total_up = 0.0;
        let mut total_time = 0.0;
        for seed in 0..120 {
            let t = generate_trace(30, horizon, mtbf, mttr, seed).unwrap();
            for host in &t.hosts {
                let mut up_since = Some(0.0);
                let mut up_time = 0.0;
                for e in t.events.iter().filter(|e| &e.host_id == host) {
                    match e.state {
                        HostState::Down => {
                            up_time += e.timestamp - up_since.take().unwrap();
                        }
                        HostState::Up => up_since = Some(e.timestamp),
                    }
                }
                if let Some(s) = up_since {
                    up_time += horizon - s;
                }
                total_up += up_time;
                total_time += horizon;
            }
        }
        let frac = total_up / total_time;
        let expected = mtbf / (mtbf + mttr);
        assert!(
            (frac - expected).abs() < 0.01,
            "up fraction {frac} vs expected {expected}"
        );
    }

    #[test]
    fn busiest_window_finds_cluster() {
        let mk = |ts: f64, st| TraceEvent {
            timestamp: ts,
            host_id: HostId::from("h00"),
            state: st,
        };
        let trace = ChurnTrace {
            hosts: vec![HostId::from("h00")],
            events: vec![
                mk(100.0, HostState::Down),
                mk(4000.0, HostState::Up),
                mk(4100.0, HostState::Down),
                mk(4200.0, HostState::Up),
            ],
            window: (0.0, 10800.0),
        };
        let (s, e) = busiest_window(&trace, 3600.0).unwrap();
        assert!(s <= 4000.0 && e >= 4200.0, "window ({s}, {e})");
    }

    #[test]
    fn busiest_window_ties_break_earliest() {
        let trace = ChurnTrace {
            hosts: vec![HostId::from("h00")],
            events: vec![],
            window: (0.0, 7200.0),
        };
        let (s, e) = busiest_window(&trace, 3600.0).unwrap();
        assert_eq!((s, e), (0.0, 3600.0));
    }

    #[test]
    fn busiest_window_rejects_short_trace() {
        let trace = ChurnTrace {
            hosts: vec![],
            events: vec![],
            window: (0.0, 100.0),
        };
        assert!(busiest_window(&trace, 3600.0).is_err());
    }
}
