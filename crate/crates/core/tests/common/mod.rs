//! Test-only helpers: fixture paths, a pipeline shortcut, and a naive
//! feature oracle that works straight from raw events.

#![allow(dead_code)]

use std::path::PathBuf;

use sessionlens_core::features::{extract_matrix, AoaLexicon};
use sessionlens_core::knowledge::LabelRow;
use sessionlens_core::selection::Target;
use sessionlens_core::session_log::{assemble_sessions, filter_sessions, Event, EventPayload, SessionConfig};
use sessionlens_core::synth::{generate, GeneratorSpec, SyntheticData};
use sessionlens_core::{label_dataset, Dataset, Grouping};

pub const SERP_PREFIX: &str = "https://searchwell.example/search";
pub const WINDOW_MS: u64 = 30_000;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

/// Generated data run through assemble, filter, label and extract.
pub fn dataset_from(data: &SyntheticData, target: Target, grouping: Grouping) -> Dataset {
    let sessions = assemble_sessions(data.events.clone(), &SessionConfig::default()).unwrap();
    let mut records = data.knowledge.records().unwrap();
    let (kept, rejected) = filter_sessions(sessions, &records);
    assert!(rejected.is_empty(), "{rejected:?}");
    label_dataset(&mut records, grouping).unwrap();
    let labels: Vec<LabelRow> = records.iter().map(|r| LabelRow::from_record(r).unwrap()).collect();
    let matrix = extract_matrix(&kept, &AoaLexicon::sample()).unwrap();
    Dataset::from_labels(matrix, &labels, target).unwrap()
}

pub fn planted_dataset(n: usize, seed: u64, feature: &str, effect: f64, grouping: Grouping) -> Dataset {
    let spec = GeneratorSpec { n_sessions: n, seed, ..GeneratorSpec::default() }.with_effect(feature, effect, 0.0);
    dataset_from(&generate(&spec).unwrap(), Target::Gain, grouping)
}

/// Hand-derived values for the two-query fixture session.
pub fn s1_expected() -> Vec<(&'static str, f64)> {
    vec![
        ("s_duration", 200.0),
        ("s_duration_per_q", 100.0),
        ("q_num", 2.0),
        ("q_term_max", 4.0),
        ("q_term_min", 3.0),
        ("q_term_avg", 3.5),
        ("q_term_total", 7.0),
        ("q_uniq_term_max", 4.0),
        ("q_uniq_term_min", 3.0),
        ("q_uniq_term_avg", 3.5),
        ("q_uniq_term_total", 5.0),
        ("q_uniq_term_ratio", 5.0 / 7.0),
        ("q_len_first", 3.0),
        ("q_len_last", 4.0),
        ("q_uniq_term_first", 3.0),
        ("q_uniq_term_last", 4.0),
        ("q_complexity_max", 10.1),
        ("q_complexity_min", 10.1),
        ("q_complexity_avg", 10.1),
        ("q_complexity_max_diff", 0.0),
        ("SERP_click", 2.0),
        ("SERP_click_rank_highest", 1.0),
        ("SERP_click_rank_lowest", 3.0),
        ("SERP_click_rank_avg", 2.0),
        ("SERP_click_interval", 85.0),
        ("SERP_click_per_query", 1.0),
        ("SERP_no_click_query_num", 0.0),
        ("SERP_no_click_query_pct", 0.0),
        ("SERP_time_total", 0.0),
        ("SERP_time_avg", 0.0),
        ("SERP_time_max", 0.0),
        ("SERP_avg_time_to_first_click", 12.5),
        ("b_num", 2.0),
        ("b_uniq_num", 2.0),
        ("b_num_per_q", 1.0),
        ("b_uniq_num_per_q", 1.0),
        ("b_time_total", 90.0),
        ("b_time_avg_per_q", 45.0),
        ("b_time_max_per_page", 60.0),
        ("b_time_avg_per_page", 45.0),
        ("b_revisited_ratio", 0.0),
        ("b_num_from_SERP", 2.0),
        ("b_pct_from_SERP", 1.0),
        ("b_num_from_non_SERP", 0.0),
        ("b_pct_from_non_SERP", 0.0),
        ("b_distinct_domain_num", 2.0),
        ("b_ttl_len_max", 33.0),
        ("b_ttl_len_min", 29.0),
        ("b_ttl_len_avg", 31.0),
        ("b_ttl_len_total", 62.0),
        ("b_page_size_max", 50000.0),
        ("b_page_size_min", 30000.0),
        ("b_page_size_avg", 40000.0),
        ("b_page_size_total", 80000.0),
        ("b_ttl_q_overlap_max", 0.75),
        ("b_ttl_q_overlap_min", 2.0 / 3.0),
        ("b_ttl_q_overlap_avg", 17.0 / 24.0),
        ("b_ttl_q_overlap_total", 17.0 / 12.0),
        ("b_url_q_overlap_max", 2.0 / 3.0),
        ("b_url_q_overlap_min", 0.5),
        ("b_url_q_overlap_avg", 7.0 / 12.0),
        ("b_url_q_overlap_total", 7.0 / 6.0),
        ("m_num", 1.0),
        ("m_num_per_q", 0.5),
        ("m_rank_max", 2.0),
        ("m_rank_max_per_q", 1.0),
        ("m_scroll_dist", 550.0),
        ("m_scroll_dist_per_q", 275.0),
        ("m_scroll_max_pos", 400.0),
        ("m_scroll_max_pos_per_q", 200.0),
    ]
}

// ---------------------------------------------------------------------
// Naive oracle. Everything below is recomputed by direct scans over the
// raw event list; nothing is shared with the library besides the event
// types and the lexicon lookup.

fn words(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            cur.extend(ch.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn distinct(xs: &[String]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for x in xs {
        if !out.iter().any(|o| o == x) {
            out.push(x.clone());
        }
    }
    out
}

fn host_domain(url: &str) -> String {
    let Some(rest) = url.split_once("://").map(|(_, r)| r) else { return String::new() };
    let host = rest.split(['/', '?', '#']).next().unwrap_or("");
    let host = host.rsplit('@').next().unwrap().split(':').next().unwrap().to_lowercase();
    let labels: Vec<&str> = host.split('.').filter(|l| !l.is_empty()).collect();
    let n = labels.len();
    if n <= 2 {
        return labels.join(".");
    }
    let generic = ["co", "com", "org", "net", "ac", "gov", "edu", "or"];
    let keep = if labels[n - 1].len() == 2 && generic.contains(&labels[n - 2]) { 3 } else { 2 };
    labels[n - keep..].join(".")
}

/// Milliseconds of `[a, b]` covered by windows `[s, s + w]`, by checking
/// every elementary interval between window boundaries.
fn covered_ms(a: u64, b: u64, starts: &[u64]) -> u64 {
    if b <= a {
        return 0;
    }
    let mut cuts = vec![a, b];
    for &s in starts {
        for c in [s, s + WINDOW_MS] {
            if c > a && c < b {
                cuts.push(c);
            }
        }
    }
    cuts.sort();
    cuts.dedup();
    let mut total = 0;
    for pair in cuts.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if starts.iter().any(|&s| s <= lo && hi <= s + WINDOW_MS) {
            total += hi - lo;
        }
    }
    total
}

fn total(xs: &[f64]) -> f64 {
    let mut s = 0.0;
    for x in xs {
        s += x;
    }
    s
}

fn stats4(xs: &[f64]) -> [f64; 4] {
    if xs.is_empty() {
        return [0.0; 4];
    }
    let mut mx = xs[0];
    let mut mn = xs[0];
    for &x in xs {
        if x > mx {
            mx = x;
        }
        if x < mn {
            mn = x;
        }
    }
    let t = total(xs);
    [mx, mn, t / xs.len() as f64, t]
}

fn div(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

fn overlap(query: &[String], target: &str) -> f64 {
    let q = distinct(query);
    if q.is_empty() {
        return 0.0;
    }
    let t = words(target);
    let hits = q.iter().filter(|w| t.contains(w)).count();
    hits as f64 / q.len() as f64
}

struct Visit {
    url: String,
    title: String,
    size: u64,
    enter: u64,
    exit: u64,
    query: Option<usize>,
    from_serp: bool,
    is_serp: bool,
}

/// All 70 features of one session's raw events, in canonical order.
pub fn oracle_features(raw: &[Event], lexicon: &AoaLexicon) -> Vec<f64> {
    // Insertion sort keeps equal timestamps in input order.
    let mut ev: Vec<&Event> = Vec::new();
    for e in raw {
        let pos = ev.iter().position(|x| x.timestamp > e.timestamp).unwrap_or(ev.len());
        ev.insert(pos, e);
    }
    let queries_before = |i: usize| ev[..i].iter().filter(|e| matches!(e.payload, EventPayload::Query { .. })).count();

    let mut queries: Vec<(Vec<String>, u64)> = Vec::new();
    for e in &ev {
        if let EventPayload::Query { text } = &e.payload {
            queries.push((words(text), e.timestamp));
        }
    }
    let qn = queries.len() as f64;
    let duration = (ev[ev.len() - 1].timestamp - ev[0].timestamp) as f64 / 1000.0;
    let mut out = vec![duration, duration / qn];

    let lens: Vec<f64> = queries.iter().map(|q| q.0.len() as f64).collect();
    let uniq: Vec<f64> = queries.iter().map(|q| distinct(&q.0).len() as f64).collect();
    let all_terms: Vec<String> = queries.iter().flat_map(|q| q.0.clone()).collect();
    let vocab = distinct(&all_terms).len() as f64;
    let comp: Vec<f64> =
        queries.iter().map(|q| q.0.iter().filter_map(|t| lexicon.get(t)).fold(0.0, f64::max)).collect();
    let l = stats4(&lens);
    let u = stats4(&uniq);
    let c = stats4(&comp);
    out.extend([qn, l[0], l[1], l[2], l[3], u[0], u[1], u[2], vocab, div(vocab, l[3])]);
    out.extend([lens[0], lens[lens.len() - 1], uniq[0], uniq[uniq.len() - 1], c[0], c[1], c[2], c[0] - c[1]]);

    // Clicks belong to the query of the latest preceding render.
    let mut clicks: Vec<(usize, u64, u32)> = Vec::new();
    for (i, e) in ev.iter().enumerate() {
        if let EventPayload::SerpClick { rank, .. } = &e.payload {
            let q = ev[..i]
                .iter()
                .rev()
                .find_map(|p| match &p.payload {
                    EventPayload::SerpRender { query_index, .. } => Some(*query_index),
                    _ => None,
                })
                .unwrap();
            clicks.push((q, e.timestamp, *rank));
        }
    }
    let ranks: Vec<f64> = clicks.iter().map(|c| c.2 as f64).collect();
    let r = stats4(&ranks);
    let mut gaps = Vec::new();
    for i in 1..clicks.len() {
        gaps.push((clicks[i].1 - clicks[i - 1].1) as f64 / 1000.0);
    }
    let mut no_click = 0.0;
    let mut to_first = Vec::new();
    for (qi, q) in queries.iter().enumerate() {
        match clicks.iter().find(|c| c.0 == qi) {
            None => no_click += 1.0,
            Some(c) => {
                let shown = ev
                    .iter()
                    .find_map(|e| match &e.payload {
                        EventPayload::SerpRender { query_index, .. } if *query_index == qi => Some(e.timestamp),
                        _ => None,
                    })
                    .unwrap_or(q.1);
                to_first.push(c.1.saturating_sub(shown) as f64 / 1000.0);
            }
        }
    }

    // Visits: a leave closes the latest still-open load of the same URL.
    let end = ev[ev.len() - 1].timestamp;
    let mut visits: Vec<Visit> = Vec::new();
    let mut open: Vec<bool> = Vec::new();
    for (i, e) in ev.iter().enumerate() {
        match &e.payload {
            EventPayload::PageLoad { url, title, size_bytes, referrer_url } => {
                visits.push(Visit {
                    url: url.clone(),
                    title: title.clone(),
                    size: *size_bytes,
                    enter: e.timestamp,
                    exit: end,
                    query: queries_before(i).checked_sub(1),
                    from_serp: referrer_url.starts_with(SERP_PREFIX),
                    is_serp: url.starts_with(SERP_PREFIX),
                });
                open.push(true);
            }
            EventPayload::PageLeave { url } => {
                if let Some(k) = (0..visits.len()).rev().find(|&k| open[k] && visits[k].url == *url) {
                    visits[k].exit = e.timestamp;
                    open[k] = false;
                }
            }
            _ => {}
        }
    }
    let serp_dwell: Vec<f64> =
        visits.iter().filter(|v| v.is_serp).map(|v| (v.exit - v.enter) as f64 / 1000.0).collect();
    let sd = stats4(&serp_dwell);
    let mean_gap = if gaps.is_empty() { 0.0 } else { total(&gaps) / gaps.len() as f64 };
    let mean_first = if to_first.is_empty() { 0.0 } else { total(&to_first) / to_first.len() as f64 };
    out.extend([
        clicks.len() as f64,
        r[1],
        r[0],
        r[2],
        mean_gap,
        clicks.len() as f64 / qn,
        no_click,
        no_click / qn,
        sd[3],
        sd[3] / qn,
        sd[0],
        mean_first,
    ]);

    let pages: Vec<&Visit> = visits.iter().filter(|v| !v.is_serp).collect();
    let b_num = pages.len() as f64;
    let mut seen: Vec<&str> = Vec::new();
    let mut domains: Vec<String> = Vec::new();
    for p in &pages {
        if !seen.contains(&p.url.as_str()) {
            seen.push(&p.url);
        }
        let d = host_domain(&p.url);
        if !d.is_empty() && !domains.contains(&d) {
            domains.push(d);
        }
    }
    let b_uniq = seen.len() as f64;
    let active: Vec<f64> = pages
        .iter()
        .map(|p| {
            let mut starts = vec![p.enter];
            for e in &ev {
                let interaction = matches!(
                    e.payload,
                    EventPayload::Mouseover { .. }
                        | EventPayload::Scroll { .. }
                        | EventPayload::Keypress {}
                        | EventPayload::SerpClick { .. }
                );
                if interaction && e.timestamp >= p.enter && e.timestamp <= p.exit {
                    starts.push(e.timestamp);
                }
            }
            covered_ms(p.enter, p.exit, &starts) as f64 / 1000.0
        })
        .collect();
    let a = stats4(&active);
    let from_serp = pages.iter().filter(|p| p.from_serp).count() as f64;
    out.extend([
        b_num,
        b_uniq,
        b_num / qn,
        b_uniq / qn,
        a[3],
        a[3] / qn,
        a[0],
        a[2],
        div(b_num - b_uniq, b_num),
        from_serp,
        div(from_serp, b_num),
        b_num - from_serp,
        div(b_num - from_serp, b_num),
        domains.len() as f64,
    ]);
    let query_terms = |p: &Visit| p.query.map(|q| queries[q].0.clone());
    let ttl: Vec<f64> = pages.iter().map(|p| p.title.chars().count() as f64).collect();
    let size: Vec<f64> = pages.iter().map(|p| p.size as f64).collect();
    let t_ov: Vec<f64> = pages.iter().map(|p| query_terms(p).map_or(0.0, |q| overlap(&q, &p.title))).collect();
    let u_ov: Vec<f64> = pages.iter().map(|p| query_terms(p).map_or(0.0, |q| overlap(&q, &p.url))).collect();
    for xs in [&ttl, &size, &t_ov, &u_ov] {
        out.extend(stats4(xs));
    }

    let mut hovers = 0.0;
    let mut hover_max = 0u32;
    let mut dist = 0u64;
    let mut pos_max = 0u64;
    let mut q_rank = vec![0u32; queries.len()];
    let mut q_pos = vec![0u64; queries.len()];
    for (i, e) in ev.iter().enumerate() {
        let q = queries_before(i).checked_sub(1);
        match &e.payload {
            EventPayload::Mouseover { rank } => {
                hovers += 1.0;
                hover_max = hover_max.max(*rank);
                if let Some(q) = q {
                    q_rank[q] = q_rank[q].max(*rank);
                }
            }
            EventPayload::Scroll { delta_px, position_px } => {
                dist += delta_px.unsigned_abs();
                pos_max = pos_max.max(*position_px);
                if let Some(q) = q {
                    q_pos[q] = q_pos[q].max(*position_px);
                }
            }
            _ => {}
        }
    }
    let rank_sum = total(&q_rank.iter().map(|&r| r as f64).collect::<Vec<_>>());
    let pos_sum = total(&q_pos.iter().map(|&p| p as f64).collect::<Vec<_>>());
    out.extend([
        hovers,
        hovers / qn,
        hover_max as f64,
        rank_sum / qn,
        dist as f64,
        dist as f64 / qn,
        pos_max as f64,
        pos_sum / qn,
    ]);
    out
}
