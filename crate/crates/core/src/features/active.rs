use crate::session_log::{Event, PageVisit};

/// Seconds of `[enter, exit]` covered by the union of activity windows
/// `[e, e + window]`, one opened by the page load itself and one per
/// interaction timestamp `e`.
pub fn active_seconds(enter_ms: u64, exit_ms: u64, interactions_ms: &[u64], window_s: f64) -> f64 {
    if exit_ms <= enter_ms {
        return 0.0;
    }
    let window_ms = window_s * 1000.0;
    let (enter, exit) = (enter_ms as f64, exit_ms as f64);
    let mut starts: Vec<f64> =
        interactions_ms.iter().filter(|&&t| t >= enter_ms && t <= exit_ms).map(|&t| t as f64).collect();
    starts.push(enter);
    starts.sort_by(f64::total_cmp);

    let mut covered = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for s in starts {
        let e = (s + window_ms).min(exit);
        cur = match cur {
            Some((a, b)) if s <= b => Some((a, b.max(e))),
            Some((a, b)) => {
                covered += b - a;
                Some((s, e))
            }
            None => Some((s, e)),
        };
    }
    if let Some((a, b)) = cur {
        covered += b - a;
    }
    covered / 1000.0
}

/// Active seconds of one visit given the session's events.
pub fn active_time(visit: &PageVisit, events: &[Event], window_s: f64) -> f64 {
    let stamps: Vec<u64> = events.iter().filter(|e| e.payload.is_interaction()).map(|e| e.timestamp).collect();
    active_seconds(visit.enter_ms, visit.exit_ms, &stamps, window_s)
}
