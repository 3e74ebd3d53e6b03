use std::collections::HashMap;

use crate::{Error, Result};

/// Age-of-acquisition norms: word → typical age (years) at which it is learned.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AoaLexicon {
    ages: HashMap<String, f64>,
}

const SAMPLE_CSV: &str = include_str!("../../../../fixtures/aoa_sample.csv");

impl AoaLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: &str, age: f64) {
        self.ages.insert(normalize(word), age);
    }

    /// Parse a `word,aoa` CSV with a header row. Rows whose age is not a
    /// positive number (e.g. `NA`) are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = reader.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
        let (w, a) = match (col("word"), col("aoa")) {
            (Some(w), Some(a)) => (w, a),
            _ => return Err(Error::InvalidInput("lexicon CSV needs `word` and `aoa` columns".into())),
        };
        let mut lex = AoaLexicon::new();
        for record in reader.records() {
            let record = record?;
            let (Some(word), Some(age)) = (record.get(w), record.get(a)) else { continue };
            match age.parse::<f64>() {
                Ok(v) if v > 0.0 && v.is_finite() && !word.is_empty() => lex.insert(word, v),
                _ => {}
            }
        }
        Ok(lex)
    }

    /// Small bundled lexicon covering the synthetic generator's vocabulary.
    pub fn sample() -> Self {
        Self::from_csv(SAMPLE_CSV).expect("bundled lexicon parses")
    }

    pub fn get(&self, term: &str) -> Option<f64> {
        self.ages.get(&normalize(term)).copied()
    }

    pub fn len(&self) -> usize {
        self.ages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ages.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = (&str, f64)> {
        self.ages.iter().map(|(w, a)| (w.as_str(), *a))
    }
}

fn normalize(word: &str) -> String {
    word.trim().to_lowercase()
}

/// Highest age of acquisition among in-vocabulary terms; 0 when none is known.
pub fn query_complexity<S: AsRef<str>>(terms: &[S], lexicon: &AoaLexicon) -> f64 {
    terms.iter().filter_map(|t| lexicon.get(t.as_ref())).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> AoaLexicon {
        AoaLexicon::from_csv(
            "word,aoa\naltitude,10.1\nsickness,6.0\nsymptoms,8.3\nprevention,9.2\nmedication,7.9\nbogus,NA\n",
        )
        .unwrap()
    }

    #[test]
    fn complexity_examples() {
        let lex = fixture();
        assert_eq!(lex.len(), 5);
        assert_eq!(query_complexity(&["altitude", "sickness", "symptoms"], &lex), 10.1);
        assert_eq!(query_complexity(&["medication"], &lex), 7.9);
        assert_eq!(query_complexity(&["zzz", "qqq"], &lex), 0.0);
    }

    #[test]
    fn lookup_is_case_insensitive() {
        let lex = fixture();
        assert_eq!(lex.get("Altitude"), Some(10.1));
        assert_eq!(lex.get("ALTITUDE "), Some(10.1));
    }

    #[test]
    fn missing_columns_error() {
        assert!(AoaLexicon::from_csv("term,age\nx,1\n").is_err());
    }

    #[test]
    fn bundled_sample_loads() {
        let lex = AoaLexicon::sample();
        assert!(lex.len() >= 50);
        assert_eq!(lex.get("altitude"), Some(10.1));
    }
}
