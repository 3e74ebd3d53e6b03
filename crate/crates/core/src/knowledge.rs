//! Knowledge tests: scoring, gain, per-topic z-standardization and
//! Low/Moderate/High binning, plus descriptive statistics.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::stats::{mean, sample_sd, sample_variance};
use crate::{Error, Result};

/// A test response. `IDK` ("I don't know") always scores as incorrect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Answer {
    #[serde(rename = "TRUE")]
    True,
    #[serde(rename = "FALSE")]
    False,
    #[serde(rename = "IDK", alias = "I DON'T KNOW")]
    Idk,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemAnswer {
    pub item_id: String,
    pub answer: Answer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Truth {
    #[serde(rename = "TRUE")]
    True,
    #[serde(rename = "FALSE")]
    False,
}

impl Truth {
    fn matches(self, a: Answer) -> bool {
        matches!((self, a), (Truth::True, Answer::True) | (Truth::False, Answer::False))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyItem {
    pub item_id: String,
    pub truth: Truth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum KnowledgeClass {
    Low = 0,
    Moderate = 1,
    High = 2,
}

impl KnowledgeClass {
    pub const ALL: [KnowledgeClass; 3] = [KnowledgeClass::Low, KnowledgeClass::Moderate, KnowledgeClass::High];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            KnowledgeClass::Low => "Low",
            KnowledgeClass::Moderate => "Moderate",
            KnowledgeClass::High => "High",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "low" | "0" => Some(KnowledgeClass::Low),
            "moderate" | "1" => Some(KnowledgeClass::Moderate),
            "high" | "2" => Some(KnowledgeClass::High),
            _ => None,
        }
    }
}

impl fmt::Display for KnowledgeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One participant's pre/post test on one topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeRecord {
    pub user_id: String,
    pub topic_id: String,
    pub pre_answers: Vec<ItemAnswer>,
    /// `None` when the post-session test was not completed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_answers: Option<Vec<ItemAnswer>>,
    /// Filled from the topic's key when loaded from a [`KnowledgeFile`].
    #[serde(skip)]
    pub answer_key: Vec<KeyItem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pre_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_class: Option<KnowledgeClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain_class: Option<KnowledgeClass>,
}

impl KnowledgeRecord {
    pub fn new(
        user_id: impl Into<String>,
        topic_id: impl Into<String>,
        pre_answers: Vec<ItemAnswer>,
        post_answers: Option<Vec<ItemAnswer>>,
    ) -> Self {
        KnowledgeRecord {
            user_id: user_id.into(),
            topic_id: topic_id.into(),
            pre_answers,
            post_answers,
            answer_key: Vec::new(),
            pre_score: None,
            post_score: None,
            gain: None,
            state_class: None,
            gain_class: None,
        }
    }

    pub fn has_post_test(&self) -> bool {
        self.post_answers.as_ref().is_some_and(|p| !p.is_empty())
    }

    /// Score both tests against the attached key and set `gain`.
    pub fn compute_scores(&mut self) -> Result<()> {
        let pre = score_test(&self.pre_answers, &self.answer_key)
            .map_err(|e| Error::InvalidInput(format!("user {} topic {}: {e}", self.user_id, self.topic_id)))?;
        self.pre_score = Some(pre);
        if let Some(post_answers) = self.post_answers.as_ref().filter(|p| !p.is_empty()) {
            let post = score_test(post_answers, &self.answer_key)
                .map_err(|e| Error::InvalidInput(format!("user {} topic {}: {e}", self.user_id, self.topic_id)))?;
            self.post_score = Some(post);
            self.gain = Some(knowledge_gain(pre, post));
        }
        Ok(())
    }
}

/// On-disk layout: answer keys per topic plus one entry per participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeFile {
    pub topics: BTreeMap<String, Vec<KeyItem>>,
    pub users: Vec<KnowledgeRecord>,
}

impl KnowledgeFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Records with their topic key attached and scores computed.
    pub fn records(&self) -> Result<Vec<KnowledgeRecord>> {
        self.users
            .iter()
            .map(|u| {
                let key = self.topics.get(&u.topic_id).ok_or_else(|| {
                    Error::InvalidInput(format!("user {}: no answer key for topic `{}`", u.user_id, u.topic_id))
                })?;
                let mut r = u.clone();
                r.answer_key = key.clone();
                r.compute_scores()?;
                Ok(r)
            })
            .collect()
    }
}

/// Fraction of key items answered correctly. IDK and unanswered items count
/// as incorrect.
pub fn score_test(answers: &[ItemAnswer], key: &[KeyItem]) -> Result<f64> {
    if key.is_empty() {
        return Err(Error::InvalidInput("answer key is empty".into()));
    }
    let truth: HashMap<&str, Truth> = key.iter().map(|k| (k.item_id.as_str(), k.truth)).collect();
    let mut correct = 0usize;
    for a in answers {
        let t = truth
            .get(a.item_id.as_str())
            .ok_or_else(|| Error::InvalidInput(format!("answer to unknown item `{}`", a.item_id)))?;
        if t.matches(a.answer) {
            correct += 1;
        }
    }
    Ok(correct as f64 / key.len() as f64)
}

pub fn knowledge_gain(pre: f64, post: f64) -> f64 {
    post - pre
}

/// Z-scores with the sample (n − 1) standard deviation.
pub fn standardize(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::Degenerate(format!("need at least 2 values, got {}", values.len())));
    }
    let m = mean(values);
    let sd = sample_sd(values);
    if sd == 0.0 || !sd.is_finite() {
        return Err(Error::Degenerate("zero variance".into()));
    }
    Ok(values.iter().map(|x| (x - m) / sd).collect())
}

/// Low below −0.5 SD, High above +0.5 SD, Moderate in between (inclusive).
pub fn bin_class(z: f64) -> KnowledgeClass {
    if z < -0.5 {
        KnowledgeClass::Low
    } else if z > 0.5 {
        KnowledgeClass::High
    } else {
        KnowledgeClass::Moderate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    #[default]
    PerTopic,
    Global,
}

impl std::str::FromStr for Grouping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_topic" | "per-topic" => Ok(Grouping::PerTopic),
            "global" => Ok(Grouping::Global),
            other => Err(Error::InvalidInput(format!("unknown grouping `{other}`"))),
        }
    }
}

/// Mean, SD and class counts of one standardized quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub mean: f64,
    pub sd: f64,
    pub counts: [usize; 3],
}

/// Set `state_class` (from the post score) and `gain_class` (from the gain)
/// by z-standardizing within each grouping cell. Scores are computed from the
/// attached key when missing.
pub fn label_dataset(records: &mut [KnowledgeRecord], grouping: Grouping) -> Result<()> {
    for r in records.iter_mut() {
        if r.post_score.is_none() || r.pre_score.is_none() {
            r.compute_scores()?;
        }
        if r.post_score.is_none() {
            return Err(Error::InvalidInput(format!(
                "user {} topic {}: no post-session test to label",
                r.user_id, r.topic_id
            )));
        }
    }
    let mut cells: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        let cell = match grouping {
            Grouping::PerTopic => r.topic_id.clone(),
            Grouping::Global => String::new(),
        };
        cells.entry(cell).or_default().push(i);
    }
    for (cell, idx) in cells {
        let name = if cell.is_empty() && grouping == Grouping::Global { "<global>".to_string() } else { cell };
        let post: Vec<f64> = idx.iter().map(|&i| records[i].post_score.unwrap()).collect();
        let gain: Vec<f64> = idx.iter().map(|&i| records[i].gain.unwrap()).collect();
        let zs = standardize(&post).map_err(|e| Error::Degenerate(format!("topic {name}, post scores: {e}")))?;
        let zg = standardize(&gain).map_err(|e| Error::Degenerate(format!("topic {name}, gains: {e}")))?;
        for (k, &i) in idx.iter().enumerate() {
            records[i].state_class = Some(bin_class(zs[k]));
            records[i].gain_class = Some(bin_class(zg[k]));
        }
    }
    Ok(())
}

/// One labeled participant-topic pair, as written by the `label` step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRow {
    pub user_id: String,
    pub topic_id: String,
    pub pre_score: f64,
    pub post_score: f64,
    pub gain: f64,
    pub state_class: KnowledgeClass,
    pub gain_class: KnowledgeClass,
}

impl LabelRow {
    pub fn from_record(r: &KnowledgeRecord) -> Result<Self> {
        let missing = || Error::InvalidInput(format!("user {} topic {}: record is not labeled", r.user_id, r.topic_id));
        Ok(LabelRow {
            user_id: r.user_id.clone(),
            topic_id: r.topic_id.clone(),
            pre_score: r.pre_score.ok_or_else(missing)?,
            post_score: r.post_score.ok_or_else(missing)?,
            gain: r.gain.ok_or_else(missing)?,
            state_class: r.state_class.ok_or_else(missing)?,
            gain_class: r.gain_class.ok_or_else(missing)?,
        })
    }
}

pub fn write_labels_csv<W: std::io::Write>(rows: &[LabelRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_labels_csv<R: std::io::Read>(input: R) -> Result<Vec<LabelRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in rd.deserialize() {
        let row: LabelRow = row?;
        if ![row.pre_score, row.post_score, row.gain].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput(format!("labels for user {} are not finite", row.user_id)));
        }
        out.push(row);
    }
    Ok(out)
}

/// Mean/SD of a raw quantity and the class counts produced by labeling.
pub fn class_stats(values: &[f64], classes: &[KnowledgeClass]) -> ClassStats {
    let mut counts = [0; 3];
    for c in classes {
        counts[c.index()] += 1;
    }
    ClassStats { mean: mean(values), sd: sample_sd(values), counts }
}

/// Cronbach's α of a users × items matrix of 0/1 correctness scores.
pub fn cronbach_alpha(items: &[Vec<f64>]) -> Result<f64> {
    let n_users = items.len();
    if n_users < 2 {
        return Err(Error::Degenerate(format!("need at least 2 users, got {n_users}")));
    }
    let k = items[0].len();
    if k < 2 {
        return Err(Error::Degenerate(format!("need at least 2 items, got {k}")));
    }
    if items.iter().any(|row| row.len() != k) {
        return Err(Error::InvalidInput("ragged item matrix".into()));
    }
    let item_var_sum: f64 = (0..k).map(|j| sample_variance(&items.iter().map(|row| row[j]).collect::<Vec<_>>())).sum();
    let totals: Vec<f64> = items.iter().map(|row| row.iter().sum()).collect();
    let total_var = sample_variance(&totals);
    if total_var == 0.0 {
        return Err(Error::Degenerate("total-score variance is zero".into()));
    }
    let k = k as f64;
    Ok(k / (k - 1.0) * (1.0 - item_var_sum / total_var))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicRow {
    pub topic_id: String,
    pub n: usize,
    pub pre_mean: f64,
    pub pre_sd: f64,
    pub post_mean: f64,
    pub post_sd: f64,
    pub gain_mean: f64,
    pub gain_sd: f64,
    pub alpha_pre: Option<f64>,
    pub alpha_post: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicTable {
    /// Ordered by ascending mean gain.
    pub rows: Vec<TopicRow>,
    pub overall: TopicRow,
    /// Pearson r between per-topic mean pre score and mean gain.
    pub familiarity_r: Option<f64>,
}

impl TopicTable {
    /// Percentages as `mean±sd`, one topic per line.
    pub fn render(&self) -> String {
        let cell = |m: f64, s: f64| format!("{:.2}±{:.2}", m * 100.0, s * 100.0);
        let alpha = |a: Option<f64>| a.map_or("-".to_string(), |v| format!("{v:.2}"));
        let mut out = String::from("topic\tN\tcalibration_%\tpost_%\tgain_%\talpha_pre\talpha_post\n");
        for r in self.rows.iter().chain(std::iter::once(&self.overall)) {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                r.topic_id,
                r.n,
                cell(r.pre_mean, r.pre_sd),
                cell(r.post_mean, r.post_sd),
                cell(r.gain_mean, r.gain_sd),
                alpha(r.alpha_pre),
                alpha(r.alpha_post),
            ));
        }
        if let Some(r) = self.familiarity_r {
            out.push_str(&format!("familiarity_r\t{r:.3}\n"));
        }
        out
    }
}

fn correctness_matrix(records: &[&KnowledgeRecord], post: bool) -> Option<Vec<Vec<f64>>> {
    let key = &records.first()?.answer_key;
    if key.is_empty() {
        return None;
    }
    let rows = records
        .iter()
        .map(|r| {
            let answers = if post { r.post_answers.as_deref().unwrap_or(&[]) } else { &r.pre_answers };
            let given: HashMap<&str, Answer> = answers.iter().map(|a| (a.item_id.as_str(), a.answer)).collect();
            key.iter()
                .map(|k| given.get(k.item_id.as_str()).map_or(0.0, |&a| f64::from(u8::from(k.truth.matches(a)))))
                .collect()
        })
        .collect();
    Some(rows)
}

fn topic_row(topic_id: String, records: &[&KnowledgeRecord]) -> TopicRow {
    let pre: Vec<f64> = records.iter().filter_map(|r| r.pre_score).collect();
    let post: Vec<f64> = records.iter().filter_map(|r| r.post_score).collect();
    let gain: Vec<f64> = records.iter().filter_map(|r| r.gain).collect();
    let alpha = |post| correctness_matrix(records, post).and_then(|m| cronbach_alpha(&m).ok());
    TopicRow {
        topic_id,
        n: records.len(),
        pre_mean: mean(&pre),
        pre_sd: sample_sd(&pre),
        post_mean: mean(&post),
        post_sd: sample_sd(&post),
        gain_mean: mean(&gain),
        gain_sd: sample_sd(&gain),
        alpha_pre: alpha(false),
        alpha_post: alpha(true),
    }
}

/// Per-topic and overall pre/post/gain statistics of scored records.
pub fn describe_topics(records: &[KnowledgeRecord]) -> Result<TopicTable> {
    if records.is_empty() {
        return Err(Error::InvalidInput("no records to describe".into()));
    }
    let mut by_topic: BTreeMap<&str, Vec<&KnowledgeRecord>> = BTreeMap::new();
    for r in records {
        by_topic.entry(r.topic_id.as_str()).or_default().push(r);
    }
    let mut rows: Vec<TopicRow> = by_topic.iter().map(|(t, rs)| topic_row(t.to_string(), rs)).collect();
    rows.sort_by(|a, b| a.gain_mean.total_cmp(&b.gain_mean).then_with(|| a.topic_id.cmp(&b.topic_id)));
    let all: Vec<&KnowledgeRecord> = records.iter().collect();
    let mut overall = topic_row("Overall".to_string(), &all);
    overall.alpha_pre = None;
    overall.alpha_post = None;
    let pre_means: Vec<f64> = rows.iter().map(|r| r.pre_mean).collect();
    let gain_means: Vec<f64> = rows.iter().map(|r| r.gain_mean).collect();
    let familiarity_r = crate::selection::pearson(&pre_means, &gain_means).ok();
    Ok(TopicTable { rows, overall, familiarity_r })
}
