use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::extract::extract;
use super::lexicon::AoaLexicon;
use super::names::FEATURE_NAMES;
use crate::session_log::Session;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RowKey {
    pub topic_id: String,
    pub user_id: String,
}

/// One row per session, columns in canonical order (or a subset thereof).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub columns: Vec<String>,
    pub keys: Vec<RowKey>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn empty() -> Self {
        FeatureMatrix {
            columns: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            keys: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// CSV with `user_id,topic_id` followed by the feature columns. Values
    /// use the shortest text that parses back to the same `f64`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["user_id".to_string(), "topic_id".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for (key, row) in self.keys.iter().zip(&self.rows) {
            let mut rec = vec![key.user_id.clone(), key.topic_id.clone()];
            rec.extend(row.iter().map(|x| x.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(input);
        let headers = reader.headers()?.clone();
        if headers.get(0) != Some("user_id") || headers.get(1) != Some("topic_id") {
            return Err(Error::InvalidInput("feature CSV must start with user_id,topic_id".into()));
        }
        let columns: Vec<String> = headers.iter().skip(2).map(str::to_string).collect();
        let mut keys = Vec::new();
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            keys.push(RowKey { user_id: rec[0].to_string(), topic_id: rec[1].to_string() });
            let row =
                rec.iter()
                    .skip(2)
                    .map(|s| {
                        s.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                            Error::InvalidInput(format!("row {}: non-finite feature value `{s}`", i + 1))
                        })
                    })
                    .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(FeatureMatrix { columns, keys, rows })
    }
}

/// `x` rounded to `digits` significant digits, printed in shortest form.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{}", if x == 0.0 { 0.0 } else { x });
    }
    let rounded: f64 = format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x);
    format!("{rounded}")
}

/// Feature matrix of all sessions, rows ordered by `(topic_id, user_id)`.
pub fn extract_matrix(sessions: &[Session], lexicon: &AoaLexicon) -> Result<FeatureMatrix> {
    let mut rows: Vec<(RowKey, Vec<f64>)> = sessions
        .par_iter()
        .map(|s| {
            let v = extract(s, lexicon).map_err(|e| match e {
                Error::Validation { .. } => e,
                other => Error::Validation { session_id: s.session_id.clone(), message: other.to_string() },
            })?;
            Ok((RowKey { topic_id: s.topic_id.clone(), user_id: s.user_id.clone() }, v.values))
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    let mut m = FeatureMatrix::empty();
    for (k, r) in rows {
        m.keys.push(k);
        m.rows.push(r);
    }
    Ok(m)
}
