//! Repeated stratified cross-validation, classification metrics, grid
//! search and permutation importance.

mod cv;
mod folds;
mod importance;
mod metrics;

pub use crate::models::Dataset;
pub use cv::{grid_search, repeated_cv, CvConfig, EvalReport, GridResult, SelectionConfig, SelectionScope, CSV_HEADER};
pub use folds::{stratified_kfold, FoldPlan};
pub use importance::{mda_importance, ImportanceEntry, ImportanceReport};
pub use metrics::{metrics, Metrics};
