//! Deterministic synthetic search sessions and knowledge tests.
//!
//! Behavior is drawn per session from moment-matched distributions:
//! query and page counts are Gamma-Poisson mixtures, session length is
//! lognormal. Features are then extracted from the generated log, the
//! planted columns are z-scored, and gains and post-test scores are built
//! as linear functions of them plus unit Gaussian noise, rescaled to the
//! configured mean and SD. Scores become test answers by marking
//! `round(s * m)` items correct and the rest IDK, so scoring the answers
//! recovers `s` within `1 / (2m)`.

use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;
use rand_distr::{Distribution, Gamma, LogNormal, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::{extract_matrix, feature_index, AoaLexicon};
use crate::knowledge::{Answer, ItemAnswer, KeyItem, KnowledgeFile, KnowledgeRecord, Truth};
use crate::seed::{mix64, rng, Rng};
use crate::session_log::{
    assemble_sessions, write_event_stream, Event, EventPayload, SessionConfig, DEFAULT_SERP_PREFIX,
};
use crate::stats::{mean, sample_sd};
use crate::{Error, Result};

/// Planted effect of one standardized feature on the latent gain and
/// knowledge-state variables.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Effect {
    pub gain: f64,
    pub state: f64,
}

/// First and second moments of the simulated behavior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Behavior {
    pub session_minutes_mean: f64,
    pub session_minutes_sd: f64,
    pub pages_mean: f64,
    pub pages_sd: f64,
    /// Queries per session; at least one is always issued.
    pub queries_mean: f64,
    pub queries_sd: f64,
    /// Terms per query; at least one.
    pub query_len_mean: f64,
    pub query_len_sd: f64,
}

impl Default for Behavior {
    fn default() -> Self {
        Behavior {
            session_minutes_mean: 4.82,
            session_minutes_sd: 5.20,
            pages_mean: 5.46,
            pages_sd: 3.41,
            queries_mean: 2.20,
            queries_sd: 2.18,
            query_len_mean: 4.56,
            query_len_sd: 2.63,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorSpec {
    pub n_sessions: usize,
    pub n_topics: usize,
    pub seed: u64,
    pub items_per_topic: usize,
    pub effects: BTreeMap<String, Effect>,
    pub gain_mean: f64,
    pub gain_sd: f64,
    pub state_mean: f64,
    pub state_sd: f64,
    pub behavior: Behavior,
    pub serp_prefix: String,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            n_sessions: 300,
            n_topics: 10,
            seed: 0,
            items_per_topic: 40,
            effects: BTreeMap::new(),
            gain_mean: 0.193,
            gain_sd: 0.231,
            state_mean: 0.618,
            state_sd: 0.191,
            behavior: Behavior::default(),
            serp_prefix: DEFAULT_SERP_PREFIX.to_string(),
        }
    }
}

impl GeneratorSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: GeneratorSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_effect(mut self, feature: &str, gain: f64, state: f64) -> Self {
        self.effects.insert(feature.to_string(), Effect { gain, state });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sessions == 0 {
            return Err(Error::InvalidInput("n_sessions must be at least 1".into()));
        }
        if self.n_topics == 0 || self.n_topics > TOPICS.len() {
            return Err(Error::InvalidInput(format!("n_topics must lie in 1..={}", TOPICS.len())));
        }
        if self.items_per_topic < 2 {
            return Err(Error::InvalidInput("items_per_topic must be at least 2".into()));
        }
        for (name, e) in &self.effects {
            if feature_index(name).is_none() {
                return Err(Error::UnknownFeature(name.clone()));
            }
            if !e.gain.is_finite() || !e.state.is_finite() {
                return Err(Error::InvalidInput(format!("effect on {name} is not finite")));
            }
        }
        let b = &self.behavior;
        let pos = [b.session_minutes_mean, b.pages_mean + 1.0, b.queries_mean, b.query_len_mean];
        let sds = [b.session_minutes_sd, b.pages_sd, b.queries_sd, b.query_len_sd, self.gain_sd, self.state_sd];
        if pos.iter().any(|v| !(v.is_finite() && *v > 0.0)) || sds.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput("behavior moments must be finite, means positive, SDs nonnegative".into()));
        }
        if b.queries_mean < 1.0 || b.query_len_mean < 1.0 {
            return Err(Error::InvalidInput("queries and query length have means of at least 1".into()));
        }
        Ok(())
    }
}

/// Generated log plus the knowledge-test file that goes with it.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub events: Vec<Event>,
    pub knowledge: KnowledgeFile,
}

impl SyntheticData {
    pub fn events_jsonl(&self) -> String {
        write_event_stream(&self.events)
    }
}

const TOPICS: [&[&str]; 10] = [
    &["altitude", "sickness", "symptoms", "prevention", "mountain", "oxygen", "headache", "climbing"],
    &["american", "revolutionary", "war", "independence", "colonies", "battle"],
    &["carpenter", "bees", "nest", "wood", "sting"],
    &["evolution", "species", "darwin", "selection", "natural", "fossil"],
    &["nasa", "interplanetary", "missions", "mars", "spacecraft", "planet", "probe"],
    &["orcas", "island", "whale", "ferry", "washington"],
    &["sangre", "cristo", "mountains", "colorado", "range"],
    &["sun", "tzu", "art", "war", "strategy", "chinese", "general"],
    &["tornado", "storm", "weather", "wind", "funnel"],
    &["hiv", "aids", "transmission", "infection", "virus", "immune", "medication"],
];
const GENERIC: [&str; 7] = ["history", "facts", "causes", "effects", "treatment", "what", "how"];
const DOMAINS: [&str; 8] = [
    "en.wikipedia.org",
    "www.healthline.com",
    "www.britannica.com",
    "www.nationalgeographic.com",
    "www.history.com",
    "www.nasa.gov",
    "www.cdc.gov",
    "www.bbc.co.uk",
];

/// Gamma-Poisson draw with the given mean and SD. Falls back to Poisson when
/// the variance does not exceed the mean.
fn count(r: &mut Rng, mean: f64, sd: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let var = sd * sd;
    let lambda = if var > mean {
        let shape = mean * mean / (var - mean);
        Gamma::new(shape, mean / shape).expect("positive gamma parameters").sample(r)
    } else {
        mean
    };
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).map_or(0, |p| p.sample(r) as u64)
}

/// Lognormal draw with the given mean and SD.
fn lognormal(r: &mut Rng, mean: f64, sd: f64) -> f64 {
    let s2 = (1.0 + (sd / mean).powi(2)).ln();
    LogNormal::new(mean.ln() - s2 / 2.0, s2.sqrt()).expect("finite lognormal").sample(r)
}

fn words(r: &mut Rng, topic: &[&str], n: usize) -> Vec<String> {
    (0..n)
        .map(|_| {
            if r.random_bool(0.8) {
                topic.choose(r).unwrap().to_string()
            } else {
                GENERIC.choose(r).unwrap().to_string()
            }
        })
        .collect()
}

fn click_rank(r: &mut Rng) -> u32 {
    // Roughly position-biased: rank k with weight 1/k.
    let weights: Vec<f64> = (1..=10).map(|k| 1.0 / k as f64).collect();
    let total: f64 = weights.iter().sum();
    let mut u = r.random_range(0.0..total);
    for (k, w) in weights.iter().enumerate() {
        if u < *w {
            return k as u32 + 1;
        }
        u -= w;
    }
    10
}

struct Emitter {
    session_id: String,
    user_id: String,
    topic_id: String,
    base: u64,
    events: Vec<Event>,
}

impl Emitter {
    fn push(&mut self, t: u64, payload: EventPayload) {
        let e = Event::new(self.session_id.clone(), self.base + t, payload).with_owner(&self.user_id, &self.topic_id);
        self.events.push(e);
    }
}

/// Scrolls and mouseovers spread over `(start, end)`, in time order.
fn interactions(r: &mut Rng, start: u64, end: u64, on_serp: bool) -> Vec<(u64, EventPayload)> {
    let span = end.saturating_sub(start);
    let mut out = Vec::new();
    if span == 0 {
        return out;
    }
    let n = Poisson::new(span as f64 / 15_000.0 + 0.5).map_or(0, |p| p.sample(r) as u64);
    let mut pos: i64 = 0;
    let mut times: Vec<u64> = (0..n).map(|_| r.random_range(start..=end)).collect();
    times.sort_unstable();
    let step = Normal::new(350.0f64, 250.0).unwrap();
    for t in times {
        if on_serp {
            out.push((t, EventPayload::Mouseover { rank: r.random_range(1..=10) }));
        } else {
            let mut delta = step.sample(r).round() as i64;
            if r.random_bool(0.25) {
                delta = -delta.abs();
            }
            let next = (pos + delta).max(0);
            out.push((t, EventPayload::Scroll { delta_px: next - pos, position_px: next as u64 }));
            pos = next;
        }
    }
    out
}

fn session_events(spec: &GeneratorSpec, i: usize, topic: usize) -> Vec<Event> {
    let mut r = rng(mix64(spec.seed, i as u64));
    let b = &spec.behavior;
    let vocab = TOPICS[topic];
    let n_queries = 1 + count(&mut r, b.queries_mean - 1.0, b.queries_sd) as usize;
    let n_pages = count(&mut r, b.pages_mean, b.pages_sd) as usize;
    let minutes = if b.session_minutes_sd > 0.0 {
        lognormal(&mut r, b.session_minutes_mean, b.session_minutes_sd)
    } else {
        b.session_minutes_mean
    };
    let duration = ((minutes * 60_000.0).round() as u64).max(1);

    // Action order: a query first, then the remaining queries and page
    // visits shuffled; actions start at sorted uniform times.
    let mut kinds: Vec<bool> =
        std::iter::repeat_n(true, n_queries - 1).chain(std::iter::repeat_n(false, n_pages)).collect();
    kinds.shuffle(&mut r);
    kinds.insert(0, true);
    let mut starts: Vec<u64> = (1..kinds.len()).map(|_| r.random_range(0..duration)).collect();
    starts.sort_unstable();
    starts.insert(0, 0);

    let mut em = Emitter {
        session_id: format!("s{i:05}"),
        user_id: format!("u{i:05}"),
        topic_id: format!("t{topic:02}"),
        base: 1_600_000_000_000 + i as u64 * 86_400_000,
        events: Vec::new(),
    };
    let mut q_index = 0;
    let mut serp_url = String::new();
    let mut visited: Vec<(String, String)> = Vec::new();
    for (a, &is_query) in kinds.iter().enumerate() {
        let t = starts[a];
        let end = starts.get(a + 1).copied().unwrap_or(duration);
        if is_query {
            let len = 1 + count(&mut r, b.query_len_mean - 1.0, b.query_len_sd) as usize;
            let text = words(&mut r, vocab, len).join(" ");
            serp_url = format!("{}?q={}", spec.serp_prefix, text.replace(' ', "+"));
            em.push(t, EventPayload::Query { text });
            em.push(t, EventPayload::SerpRender { query_index: q_index, result_count: 10, results: Vec::new() });
            q_index += 1;
            em.push(
                t,
                EventPayload::PageLoad {
                    url: serp_url.clone(),
                    title: "Search results".into(),
                    size_bytes: 20_000,
                    referrer_url: String::new(),
                },
            );
            for (ti, p) in interactions(&mut r, t, end, true) {
                em.push(ti, p);
            }
            em.push(end, EventPayload::PageLeave { url: serp_url.clone() });
        } else {
            let revisit = !visited.is_empty() && r.random_bool(0.1);
            let (url, title, referrer) = if revisit {
                let (u, ti) = visited.choose(&mut r).unwrap().clone();
                (u, ti, String::new())
            } else {
                let rank = click_rank(&mut r);
                let n_title = r.random_range(2..=8);
                let title = words(&mut r, vocab, n_title).join(" ");
                let n_slug = r.random_range(1..=4);
                let slug = words(&mut r, vocab, n_slug).join("-");
                let url = format!("https://{}/{}/{}", DOMAINS.choose(&mut r).unwrap(), slug, r.random_range(1..1000));
                em.push(t, EventPayload::SerpClick { rank, url: url.clone() });
                visited.push((url.clone(), title.clone()));
                (url, title, serp_url.clone())
            };
            let size = lognormal(&mut r, 40_000.0, 25_000.0).round() as u64;
            em.push(t, EventPayload::PageLoad { url: url.clone(), title, size_bytes: size, referrer_url: referrer });
            for (ti, p) in interactions(&mut r, t, end, false) {
                em.push(ti, p);
            }
            em.push(end, EventPayload::PageLeave { url });
        }
    }
    // Emission order already respects time within an action; a stable sort
    // keeps it when neighbouring actions share a timestamp.
    em.events.sort_by_key(|e| e.timestamp);
    em.events
}

fn answer_key(seed: u64, topic: usize, m: usize) -> Vec<KeyItem> {
    let mut truths: Vec<Truth> = (0..m).map(|j| if j % 2 == 0 { Truth::True } else { Truth::False }).collect();
    truths.shuffle(&mut rng(mix64(seed ^ 0x6b65_7973, topic as u64)));
    truths.into_iter().enumerate().map(|(j, truth)| KeyItem { item_id: format!("q{j:02}"), truth }).collect()
}

/// Answers scoring `round(score * m) / m` against `key`: a random subset of
/// items answered correctly, the rest IDK.
fn answers_for(r: &mut Rng, key: &[KeyItem], score: f64) -> Vec<ItemAnswer> {
    let m = key.len();
    let k = ((score.clamp(0.0, 1.0) * m as f64).round() as usize).min(m);
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(r);
    let mut correct = vec![false; m];
    order[..k].iter().for_each(|&j| correct[j] = true);
    key.iter()
        .zip(correct)
        .map(|(item, ok)| ItemAnswer {
            item_id: item.item_id.clone(),
            answer: match (ok, item.truth) {
                (false, _) => Answer::Idk,
                (true, Truth::True) => Answer::True,
                (true, Truth::False) => Answer::False,
            },
        })
        .collect()
}

/// Linear combination of z-scored planted columns plus unit noise,
/// rescaled so the result has the requested mean and SD in expectation.
fn latent(z: &[(f64, Vec<f64>)], i: usize, noise: f64, mean: f64, sd: f64) -> f64 {
    let norm = (z.iter().map(|(e, _)| e * e).sum::<f64>() + 1.0).sqrt();
    let signal: f64 = z.iter().map(|(e, col)| e * col[i]).sum();
    mean + sd * (signal + noise) / norm
}

/// Generate a session log and matching knowledge file.
pub fn generate(spec: &GeneratorSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let topics: Vec<usize> = (0..spec.n_sessions).map(|i| i % spec.n_topics).collect();
    let per_session: Vec<Vec<Event>> =
        (0..spec.n_sessions).into_par_iter().map(|i| session_events(spec, i, topics[i])).collect();
    let events: Vec<Event> = per_session.into_iter().flatten().collect();

    // Planted columns, z-scored over all sessions.
    let mut z_gain = Vec::new();
    let mut z_state = Vec::new();
    if !spec.effects.is_empty() {
        let config = SessionConfig { serp_prefix: spec.serp_prefix.clone(), ..SessionConfig::default() };
        let sessions = assemble_sessions(events.clone(), &config)?;
        let mut matrix = extract_matrix(&sessions, &AoaLexicon::sample())?;
        // extract_matrix orders rows by (topic, user); restore session order.
        let mut order: Vec<usize> = (0..matrix.n_rows()).collect();
        order.sort_by(|&a, &b| matrix.keys[a].user_id.cmp(&matrix.keys[b].user_id));
        matrix.rows = order.iter().map(|&k| matrix.rows[k].clone()).collect();
        for (name, e) in &spec.effects {
            let j = matrix.column_index(name).ok_or_else(|| Error::UnknownFeature(name.clone()))?;
            let col = matrix.column(j);
            let (m, s) = (mean(&col), sample_sd(&col));
            if s <= 0.0 {
                return Err(Error::Degenerate(format!("planted feature {name} is constant in the generated sessions")));
            }
            let z: Vec<f64> = col.iter().map(|v| (v - m) / s).collect();
            if e.gain != 0.0 {
                z_gain.push((e.gain, z.clone()));
            }
            if e.state != 0.0 {
                z_state.push((e.state, z));
            }
        }
    }

    let m = spec.items_per_topic;
    let mut keys = BTreeMap::new();
    for t in 0..spec.n_topics {
        keys.insert(format!("t{t:02}"), answer_key(spec.seed, t, m));
    }
    let state_planted = !z_state.is_empty();
    let users: Vec<KnowledgeRecord> = (0..spec.n_sessions)
        .into_par_iter()
        .map(|i| {
            let mut r = rng(mix64(mix64(spec.seed, i as u64), 0x7465_7374));
            let unit = Normal::new(0.0, 1.0).unwrap();
            let gain = latent(&z_gain, i, unit.sample(&mut r), spec.gain_mean, spec.gain_sd).clamp(-1.0, 1.0);
            let state_noise = unit.sample(&mut r);
            let (pre, post) = if state_planted {
                let post = latent(&z_state, i, state_noise, spec.state_mean, spec.state_sd).clamp(0.0, 1.0);
                (post - gain, post)
            } else {
                // Any pre score that keeps post inside [0, 1].
                let lo = (-gain).max(0.0);
                let hi = (1.0 - gain).min(1.0);
                let pre = lo + (hi - lo) * r.random::<f64>();
                (pre, pre + gain)
            };
            let pre = pre.clamp(0.0, 1.0);
            let topic_id = format!("t{:02}", topics[i]);
            let key = &keys[&topic_id];
            let pre_answers = answers_for(&mut r, key, pre);
            let post_answers = answers_for(&mut r, key, post);
            KnowledgeRecord::new(format!("u{i:05}"), topic_id, pre_answers, Some(post_answers))
        })
        .collect();
    Ok(SyntheticData { events, knowledge: KnowledgeFile { topics: keys, users } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selection::pearson;
    use crate::session_log::{filter_sessions, parse_event_stream};

    #[test]
    fn single_session_survives_the_pipeline() {
        let spec = GeneratorSpec { n_sessions: 1, ..GeneratorSpec::default() };
        let data = generate(&spec).unwrap();
        let events = parse_event_stream(&data.events_jsonl()).unwrap();
        let sessions = assemble_sessions(events, &SessionConfig::default()).unwrap();
        let records = data.knowledge.records().unwrap();
        let (kept, rejected) = filter_sessions(sessions, &records);
        assert_eq!((kept.len(), rejected.len()), (1, 0));
    }

    #[test]
    fn same_spec_same_bytes() {
        let spec = GeneratorSpec { n_sessions: 20, seed: 9, ..GeneratorSpec::default() }.with_effect("q_num", 1.0, 0.0);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.events_jsonl(), b.events_jsonl());
        assert_eq!(a.knowledge.to_json().unwrap(), b.knowledge.to_json().unwrap());
    }

    #[test]
    fn unknown_effect_rejected() {
        let spec = GeneratorSpec::default().with_effect("dwell_magic", 1.0, 0.0);
        assert!(matches!(generate(&spec), Err(Error::UnknownFeature(_))));
    }

    #[test]
    fn answers_round_trip_scores() {
        let key = answer_key(1, 0, 40);
        let mut r = rng(2);
        for s in [0.0, 0.01, 0.33, 0.5, 0.987, 1.0] {
            let got = crate::knowledge::score_test(&answers_for(&mut r, &key, s), &key).unwrap();
            assert!((got - s).abs() <= 0.5 / 40.0 + 1e-12, "{s} -> {got}");
        }
    }

    #[test]
    fn planted_effect_shows_in_gain_correlation() {
        let spec = GeneratorSpec { n_sessions: 300, seed: 4, ..GeneratorSpec::default() }.with_effect(
            "b_time_max_per_page",
            3.0,
            0.0,
        );
        let data = generate(&spec).unwrap();
        let sessions = assemble_sessions(data.events.clone(), &SessionConfig::default()).unwrap();
        let records = data.knowledge.records().unwrap();
        let gains: std::collections::HashMap<String, f64> =
            records.iter().map(|r| (r.user_id.clone(), r.gain.unwrap())).collect();
        let matrix = extract_matrix(&sessions, &AoaLexicon::sample()).unwrap();
        let j = matrix.column_index("b_time_max_per_page").unwrap();
        let y: Vec<f64> = matrix.keys.iter().map(|k| gains[&k.user_id]).collect();
        assert!(pearson(&matrix.column(j), &y).unwrap() >= 0.5);
    }
}
