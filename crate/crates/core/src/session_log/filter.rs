use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::assemble::Session;
use crate::knowledge::{Answer, KnowledgeRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    NoQueries,
    StraightLining,
    IncompletePostTest,
    MissingRecord,
}

impl RejectReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            RejectReason::NoQueries => "no_queries",
            RejectReason::StraightLining => "straight_lining",
            RejectReason::IncompletePostTest => "incomplete_post_test",
            RejectReason::MissingRecord => "missing_record",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Same TRUE (or same FALSE) on every item of a test with at least two answers.
fn straight_lined(answers: &[crate::knowledge::ItemAnswer]) -> bool {
    if answers.len() < 2 {
        return false;
    }
    let first = answers[0].answer;
    first != Answer::Idk && answers.iter().all(|a| a.answer == first)
}

fn reject_reason(session: &Session, record: Option<&KnowledgeRecord>) -> Option<RejectReason> {
    let Some(record) = record else {
        return Some(RejectReason::MissingRecord);
    };
    if session.queries.is_empty() {
        return Some(RejectReason::NoQueries);
    }
    let post = match &record.post_answers {
        Some(p) if !p.is_empty() => p,
        _ => return Some(RejectReason::IncompletePostTest),
    };
    if straight_lined(&record.pre_answers) || straight_lined(post) {
        return Some(RejectReason::StraightLining);
    }
    None
}

/// Apply the participant-quality rules. Sessions are matched to records by
/// `(user_id, topic_id)`.
pub fn filter_sessions(
    sessions: Vec<Session>,
    records: &[KnowledgeRecord],
) -> (Vec<Session>, Vec<(String, RejectReason)>) {
    let index: HashMap<(&str, &str), &KnowledgeRecord> =
        records.iter().map(|r| ((r.user_id.as_str(), r.topic_id.as_str()), r)).collect();
    let mut kept = Vec::new();
    let mut rejected = Vec::new();
    for s in sessions {
        let record = index.get(&(s.user_id.as_str(), s.topic_id.as_str())).copied();
        match reject_reason(&s, record) {
            None => kept.push(s),
            Some(reason) => rejected.push((s.session_id.clone(), reason)),
        }
    }
    (kept, rejected)
}
