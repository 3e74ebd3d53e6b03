//! The 70 behavioral features of a search session.
//!
//! Bindings that the feature names alone leave open:
//!
//! * times are in seconds; page active time uses interaction-anchored
//!   windows (see [`active_seconds`]);
//! * "highest" click rank is the numerically smallest rank (top of the SERP);
//! * per-query averages are session totals divided by `q_num`; "average max
//!   per query" features average each query's maximum (0 for queries without
//!   events);
//! * missing statistics (no clicks, one click, no pages, all query terms out
//!   of vocabulary) fall back to 0;
//! * title length counts characters, page size is the logged byte count;
//! * title/URL overlap compares each page against the most recent query
//!   issued before it was loaded.

mod active;
mod extract;
mod lexicon;
mod matrix;
mod names;
mod text;

pub use active::{active_seconds, active_time};
pub use extract::{extract, FeatureVector};
pub use lexicon::{query_complexity, AoaLexicon};
pub use matrix::{extract_matrix, format_sig, FeatureMatrix, RowKey};
pub use names::{feature_category, feature_index, FEATURE_NAMES, N_FEATURES};
pub use text::{term_overlap, tokenize};
