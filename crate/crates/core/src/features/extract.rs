use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::lexicon::{query_complexity, AoaLexicon};
use super::names::{feature_index, FEATURE_NAMES, N_FEATURES};
use super::text::{term_overlap, tokenize};
use crate::session_log::{EventPayload, PageVisit, Session};
use crate::stats::{mean, summary};
use crate::{Error, Result};

/// Feature values of one session in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn names(&self) -> &'static [&'static str] {
        &FEATURE_NAMES
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        feature_index(name).map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        FEATURE_NAMES.iter().copied().zip(self.values.iter().copied())
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn overlap_with_query(session: &Session, page: &PageVisit, target: &str) -> f64 {
    match page.query_index.and_then(|i| session.queries.get(i)) {
        Some(q) => {
            let terms: HashSet<String> = tokenize(target).into_iter().collect();
            term_overlap(&q.unique_terms, &terms)
        }
        None => 0.0,
    }
}

/// Compute the feature vector of a session with at least one query.
pub fn extract(session: &Session, lexicon: &AoaLexicon) -> Result<FeatureVector> {
    let queries = &session.queries;
    if queries.is_empty() {
        return Err(Error::Validation {
            session_id: session.session_id.clone(),
            message: "feature extraction needs at least one query".into(),
        });
    }
    let qn = queries.len() as f64;
    let mut v: Vec<f64> = Vec::with_capacity(N_FEATURES);

    // session
    let duration = session.duration_s();
    v.extend([duration, duration / qn]);

    // query
    let term_counts: Vec<f64> = queries.iter().map(|q| q.terms.len() as f64).collect();
    let uniq_counts: Vec<f64> = queries.iter().map(|q| q.unique_terms.len() as f64).collect();
    let (t_max, t_min, t_avg, t_total) = summary(&term_counts);
    let (u_max, u_min, u_avg, _) = summary(&uniq_counts);
    let vocabulary: HashSet<&str> = queries.iter().flat_map(|q| q.unique_terms.iter().map(String::as_str)).collect();
    let u_total = vocabulary.len() as f64;
    let complexity: Vec<f64> = queries.iter().map(|q| query_complexity(&q.terms, lexicon)).collect();
    let (c_max, c_min, c_avg, _) = summary(&complexity);
    v.extend([
        qn,
        t_max,
        t_min,
        t_avg,
        t_total,
        u_max,
        u_min,
        u_avg,
        u_total,
        ratio(u_total, t_total),
        term_counts[0],
        term_counts[term_counts.len() - 1],
        uniq_counts[0],
        uniq_counts[uniq_counts.len() - 1],
        c_max,
        c_min,
        c_avg,
        c_max - c_min,
    ]);

    // SERP
    let clicks = &session.clicks;
    let n_clicks = clicks.len() as f64;
    let ranks: Vec<f64> = clicks.iter().map(|c| f64::from(c.rank)).collect();
    let (rank_lowest, rank_highest, rank_avg, _) = summary(&ranks);
    let gaps: Vec<f64> = clicks.windows(2).map(|w| (w[1].timestamp_ms - w[0].timestamp_ms) as f64 / 1000.0).collect();
    let mut first_click: HashMap<usize, u64> = HashMap::new();
    for c in clicks {
        first_click.entry(c.query_index).or_insert(c.timestamp_ms);
    }
    let no_click = (0..queries.len()).filter(|i| !first_click.contains_key(i)).count() as f64;
    let mut to_first_click: Vec<f64> = Vec::new();
    for q in 0..queries.len() {
        if let Some(&t_click) = first_click.get(&q) {
            let shown =
                session.serps.iter().find(|s| s.query_index == q).map_or(queries[q].timestamp_ms, |s| s.timestamp_ms);
            to_first_click.push(t_click.saturating_sub(shown) as f64 / 1000.0);
        }
    }
    let serp_dwell: Vec<f64> = session.page_visits.iter().filter(|p| p.is_serp).map(|p| p.dwell_s).collect();
    let (serp_max, _, _, serp_total) = summary(&serp_dwell);
    v.extend([
        n_clicks,
        rank_highest,
        rank_lowest,
        rank_avg,
        mean(&gaps),
        n_clicks / qn,
        no_click,
        no_click / qn,
        serp_total,
        serp_total / qn,
        serp_max,
        mean(&to_first_click),
    ]);

    // browsing
    let pages: Vec<&PageVisit> = session.page_visits.iter().filter(|p| !p.is_serp).collect();
    let b_num = pages.len() as f64;
    let b_uniq = pages.iter().map(|p| p.url.as_str()).collect::<HashSet<_>>().len() as f64;
    let active: Vec<f64> = pages.iter().map(|p| p.active_s).collect();
    let (a_max, _, a_avg, a_total) = summary(&active);
    let from_serp = pages.iter().filter(|p| p.from_serp).count() as f64;
    let non_serp = b_num - from_serp;
    let domains =
        pages.iter().filter(|p| !p.domain.is_empty()).map(|p| p.domain.as_str()).collect::<HashSet<_>>().len() as f64;
    let title_len: Vec<f64> = pages.iter().map(|p| p.title.chars().count() as f64).collect();
    let size: Vec<f64> = pages.iter().map(|p| p.size_bytes as f64).collect();
    let ttl_overlap: Vec<f64> = pages.iter().map(|p| overlap_with_query(session, p, &p.title)).collect();
    let url_overlap: Vec<f64> = pages.iter().map(|p| overlap_with_query(session, p, &p.url)).collect();
    v.extend([
        b_num,
        b_uniq,
        b_num / qn,
        b_uniq / qn,
        a_total,
        a_total / qn,
        a_max,
        a_avg,
        ratio(b_num - b_uniq, b_num),
        from_serp,
        ratio(from_serp, b_num),
        non_serp,
        ratio(non_serp, b_num),
        domains,
    ]);
    for xs in [&title_len, &size, &ttl_overlap, &url_overlap] {
        let (mx, mn, avg, total) = summary(xs);
        v.extend([mx, mn, avg, total]);
    }

    // mouse
    let mut hover_count = 0usize;
    let mut hover_rank_max = 0u32;
    let mut scroll_dist = 0u64;
    let mut scroll_max = 0u64;
    let mut per_query_rank = vec![0u32; queries.len()];
    let mut per_query_pos = vec![0u64; queries.len()];
    let mut current: Option<usize> = None;
    for e in &session.events {
        match &e.payload {
            EventPayload::Query { .. } => current = Some(current.map_or(0, |c| c + 1)),
            EventPayload::Mouseover { rank } => {
                hover_count += 1;
                hover_rank_max = hover_rank_max.max(*rank);
                if let Some(q) = current {
                    per_query_rank[q] = per_query_rank[q].max(*rank);
                }
            }
            EventPayload::Scroll { delta_px, position_px } => {
                scroll_dist += delta_px.unsigned_abs();
                scroll_max = scroll_max.max(*position_px);
                if let Some(q) = current {
                    per_query_pos[q] = per_query_pos[q].max(*position_px);
                }
            }
            _ => {}
        }
    }
    let rank_sum: f64 = per_query_rank.iter().map(|&r| f64::from(r)).sum();
    let pos_sum: f64 = per_query_pos.iter().map(|&p| p as f64).sum();
    v.extend([
        hover_count as f64,
        hover_count as f64 / qn,
        f64::from(hover_rank_max),
        rank_sum / qn,
        scroll_dist as f64,
        scroll_dist as f64 / qn,
        scroll_max as f64,
        pos_sum / qn,
    ]);

    debug_assert_eq!(v.len(), N_FEATURES);
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::Validation {
            session_id: session.session_id.clone(),
            message: format!("feature {} is not finite", FEATURE_NAMES[i]),
        });
    }
    Ok(FeatureVector { values: v })
}
