//! Behavioral analytics for informational search sessions.
//!
//! The pipeline turns a raw interaction log into labeled sessions and a
//! 70-column feature matrix, then evaluates classifiers that predict a
//! user's knowledge state and knowledge gain:
//!
//! ```text
//! events.jsonl ─▶ session_log ─▶ features ─▶ selection ─▶ models ─▶ evaluation
//!                        ▲                                  ▲
//! records.json ─▶ knowledge (scores, z-binning) ────────────┘
//! ```
//!
//! `synth` generates deterministic event logs and knowledge records with
//! planted feature effects for testing the whole chain.

// Index loops read closer to the math in the numeric kernels.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod evaluation;
pub mod features;
pub mod knowledge;
pub mod models;
pub mod seed;
pub mod selection;
pub mod session_log;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use evaluation::{
    grid_search, mda_importance, metrics, repeated_cv, stratified_kfold, CvConfig, EvalReport, FoldPlan, GridResult,
    ImportanceReport, Metrics, SelectionConfig, SelectionScope,
};
pub use features::{extract, extract_matrix, AoaLexicon, FeatureMatrix, FeatureVector, FEATURE_NAMES, N_FEATURES};
pub use knowledge::{
    bin_class, cronbach_alpha, describe_topics, knowledge_gain, label_dataset, score_test, standardize, Answer,
    Grouping, KnowledgeClass, KnowledgeFile, KnowledgeRecord, LabelRow,
};
pub use models::{fit, ks_zhang_classify, ks_zhang_score, Dataset, ModelKind, ModelSpec, TrainedModel};
pub use selection::{pearson, redundancy_prune, relevance_filter, FeatureSubset, RelevanceTable, Target};
pub use session_log::{
    assemble_sessions, filter_sessions, parse_event_stream, Event, EventPayload, PageVisit, Query, RejectReason,
    Session, SessionConfig,
};
pub use synth::{generate, GeneratorSpec, SyntheticData};
