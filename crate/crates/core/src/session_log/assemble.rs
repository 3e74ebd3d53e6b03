use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::event::{Event, EventPayload};
use super::DEFAULT_SERP_PREFIX;
use crate::features::{active_seconds, tokenize};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    /// URL prefix that marks a page as a search result page.
    pub serp_prefix: String,
    /// Length in seconds of the activity window opened by each interaction.
    pub idle_window_s: f64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig { serp_prefix: DEFAULT_SERP_PREFIX.to_string(), idle_window_s: 30.0 }
    }
}

impl SessionConfig {
    pub fn is_serp_url(&self, url: &str) -> bool {
        !self.serp_prefix.is_empty() && url.starts_with(&self.serp_prefix)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub text: String,
    pub terms: Vec<String>,
    /// Distinct terms in first-occurrence order.
    pub unique_terms: Vec<String>,
    pub timestamp_ms: u64,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerpView {
    pub query_index: usize,
    pub timestamp_ms: u64,
    pub result_count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerpClick {
    pub query_index: usize,
    pub timestamp_ms: u64,
    pub rank: u32,
    pub url: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageVisit {
    pub url: String,
    pub title: String,
    pub size_bytes: u64,
    pub domain: String,
    pub enter_ms: u64,
    pub exit_ms: u64,
    pub dwell_s: f64,
    pub active_s: f64,
    pub from_serp: bool,
    pub is_serp: bool,
    /// Most recent query issued before the page was loaded.
    pub query_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub user_id: String,
    pub topic_id: String,
    #[serde(skip)]
    pub events: Vec<Event>,
    pub queries: Vec<Query>,
    pub serps: Vec<SerpView>,
    pub clicks: Vec<SerpClick>,
    pub page_visits: Vec<PageVisit>,
    pub start_ms: u64,
    pub end_ms: u64,
}

impl Session {
    pub fn duration_s(&self) -> f64 {
        (self.end_ms - self.start_ms) as f64 / 1000.0
    }
}

/// Group events by session, order them in time and derive queries, SERP
/// views, clicks and page visits. Output is ordered by `session_id`.
pub fn assemble_sessions(events: Vec<Event>, config: &SessionConfig) -> Result<Vec<Session>> {
    let mut groups: BTreeMap<String, Vec<Event>> = BTreeMap::new();
    for e in events {
        groups.entry(e.session_id.clone()).or_default().push(e);
    }
    groups.into_par_iter().map(|(id, evs)| assemble_one(id, evs, config)).collect()
}

fn assemble_one(session_id: String, mut events: Vec<Event>, config: &SessionConfig) -> Result<Session> {
    // Stable: events sharing a timestamp keep input order.
    events.sort_by_key(|e| e.timestamp);
    let invalid = |message: String| Error::Validation { session_id: session_id.clone(), message };

    let user_id = events.iter().find_map(|e| e.user_id.clone()).unwrap_or_else(|| session_id.clone());
    let topic_id = events.iter().find_map(|e| e.topic_id.clone()).unwrap_or_default();

    let mut queries: Vec<Query> = Vec::new();
    let mut serps: Vec<SerpView> = Vec::new();
    let mut clicks: Vec<SerpClick> = Vec::new();
    let mut visits: Vec<(PageVisit, bool)> = Vec::new(); // (visit, still open)

    for e in &events {
        let t = e.timestamp;
        match &e.payload {
            EventPayload::Query { text } => {
                let terms = tokenize(text);
                if terms.is_empty() {
                    return Err(invalid(format!("query at {t} ms has no terms: {text:?}")));
                }
                let mut unique_terms: Vec<String> = Vec::with_capacity(terms.len());
                for term in &terms {
                    if !unique_terms.contains(term) {
                        unique_terms.push(term.clone());
                    }
                }
                queries.push(Query { text: text.clone(), terms, unique_terms, timestamp_ms: t, index: queries.len() });
            }
            EventPayload::SerpRender { query_index, result_count, .. } => {
                if *query_index >= queries.len() {
                    return Err(invalid(format!(
                        "serp_render at {t} ms refers to query {query_index} but only {} queries precede it",
                        queries.len()
                    )));
                }
                serps.push(SerpView { query_index: *query_index, timestamp_ms: t, result_count: *result_count });
            }
            EventPayload::SerpClick { rank, url } => {
                let Some(serp) = serps.last() else {
                    return Err(invalid(format!("serp_click at {t} ms has no preceding serp_render")));
                };
                if *rank > serp.result_count {
                    return Err(invalid(format!(
                        "serp_click at {t} ms on rank {rank} exceeds result_count {}",
                        serp.result_count
                    )));
                }
                clicks.push(SerpClick {
                    query_index: serp.query_index,
                    timestamp_ms: t,
                    rank: *rank,
                    url: url.clone(),
                });
            }
            EventPayload::PageLoad { url, title, size_bytes, referrer_url } => {
                visits.push((
                    PageVisit {
                        url: url.clone(),
                        title: title.clone(),
                        size_bytes: *size_bytes,
                        domain: registrable_domain(url),
                        enter_ms: t,
                        exit_ms: t,
                        dwell_s: 0.0,
                        active_s: 0.0,
                        from_serp: config.is_serp_url(referrer_url),
                        is_serp: config.is_serp_url(url),
                        query_index: queries.len().checked_sub(1),
                    },
                    true,
                ));
            }
            EventPayload::PageLeave { url } => match visits.iter_mut().rev().find(|(v, open)| *open && &v.url == url) {
                Some((v, open)) => {
                    v.exit_ms = t;
                    *open = false;
                }
                None => log::warn!("session {session_id}: page_leave at {t} ms for {url} without open page_load"),
            },
            EventPayload::Mouseover { .. } | EventPayload::Scroll { .. } | EventPayload::Keypress {} => {}
        }
    }

    let start_ms = events.first().map_or(0, |e| e.timestamp);
    let end_ms = events.last().map_or(0, |e| e.timestamp);

    let interactions: Vec<u64> = events.iter().filter(|e| e.payload.is_interaction()).map(|e| e.timestamp).collect();

    let page_visits = visits
        .into_iter()
        .map(|(mut v, open)| {
            if open {
                v.exit_ms = end_ms;
            }
            v.dwell_s = (v.exit_ms - v.enter_ms) as f64 / 1000.0;
            let inside: Vec<u64> =
                interactions.iter().copied().filter(|&ts| ts >= v.enter_ms && ts <= v.exit_ms).collect();
            v.active_s = active_seconds(v.enter_ms, v.exit_ms, &inside, config.idle_window_s);
            v
        })
        .collect();

    Ok(Session { session_id, user_id, topic_id, events, queries, serps, clicks, page_visits, start_ms, end_ms })
}

/// Registrable part of a URL's host: `en.wikipedia.org` → `wikipedia.org`,
/// `news.bbc.co.uk` → `bbc.co.uk`. Unparseable URLs map to the empty string.
pub(crate) fn registrable_domain(raw: &str) -> String {
    let host = match url::Url::parse(raw) {
        Ok(u) => match u.host() {
            Some(url::Host::Domain(d)) => d.to_ascii_lowercase(),
            Some(other) => return other.to_string(),
            None => return String::new(),
        },
        Err(_) => return String::new(),
    };
    let labels: Vec<&str> = host.trim_end_matches('.').split('.').collect();
    let n = labels.len();
    if n <= 2 {
        return labels.join(".");
    }
    const GENERIC_SLD: [&str; 8] = ["co", "com", "org", "net", "ac", "gov", "edu", "or"];
    let keep = if labels[n - 1].len() == 2 && GENERIC_SLD.contains(&labels[n - 2]) { 3 } else { 2 };
    labels[n - keep..].join(".")
}
