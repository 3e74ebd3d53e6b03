use std::collections::HashSet;

/// Lowercase and split on every maximal run of non-alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}

/// Share of query terms that also occur in the target; 0 for an empty query.
pub fn term_overlap<S: AsRef<str>>(query_terms: &[S], target_terms: &HashSet<String>) -> f64 {
    let distinct: HashSet<&str> = query_terms.iter().map(AsRef::as_ref).collect();
    if distinct.is_empty() {
        return 0.0;
    }
    let hits = distinct.iter().filter(|t| target_terms.contains(**t)).count();
    hits as f64 / distinct.len() as f64
}
