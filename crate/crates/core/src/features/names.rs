/// Number of per-session features.
pub const N_FEATURES: usize = 70;

/// Canonical column order: session (2), query (18), SERP (12), browsing (30),
/// mouse (8).
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    // session
    "s_duration",
    "s_duration_per_q",
    // query
    "q_num",
    "q_term_max",
    "q_term_min",
    "q_term_avg",
    "q_term_total",
    "q_uniq_term_max",
    "q_uniq_term_min",
    "q_uniq_term_avg",
    "q_uniq_term_total",
    "q_uniq_term_ratio",
    "q_len_first",
    "q_len_last",
    "q_uniq_term_first",
    "q_uniq_term_last",
    "q_complexity_max",
    "q_complexity_min",
    "q_complexity_avg",
    "q_complexity_max_diff",
    // SERP
    "SERP_click",
    "SERP_click_rank_highest",
    "SERP_click_rank_lowest",
    "SERP_click_rank_avg",
    "SERP_click_interval",
    "SERP_click_per_query",
    "SERP_no_click_query_num",
    "SERP_no_click_query_pct",
    "SERP_time_total",
    "SERP_time_avg",
    "SERP_time_max",
    "SERP_avg_time_to_first_click",
    // browsing
    "b_num",
    "b_uniq_num",
    "b_num_per_q",
    "b_uniq_num_per_q",
    "b_time_total",
    "b_time_avg_per_q",
    "b_time_max_per_page",
    "b_time_avg_per_page",
    "b_revisited_ratio",
    "b_num_from_SERP",
    "b_pct_from_SERP",
    "b_num_from_non_SERP",
    "b_pct_from_non_SERP",
    "b_distinct_domain_num",
    "b_ttl_len_max",
    "b_ttl_len_min",
    "b_ttl_len_avg",
    "b_ttl_len_total",
    "b_page_size_max",
    "b_page_size_min",
    "b_page_size_avg",
    "b_page_size_total",
    "b_ttl_q_overlap_max",
    "b_ttl_q_overlap_min",
    "b_ttl_q_overlap_avg",
    "b_ttl_q_overlap_total",
    "b_url_q_overlap_max",
    "b_url_q_overlap_min",
    "b_url_q_overlap_avg",
    "b_url_q_overlap_total",
    // mouse
    "m_num",
    "m_num_per_q",
    "m_rank_max",
    "m_rank_max_per_q",
    "m_scroll_dist",
    "m_scroll_dist_per_q",
    "m_scroll_max_pos",
    "m_scroll_max_pos_per_q",
];

/// Position of a feature in the canonical order.
pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|n| *n == name)
}

/// Broad category a feature belongs to, by its name prefix.
pub fn feature_category(name: &str) -> &'static str {
    match name.split('_').next() {
        Some("s") => "session",
        Some("q") => "query",
        Some("SERP") => "serp",
        Some("b") => "browsing",
        Some("m") => "mouse",
        _ => "unknown",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn names_are_unique_and_grouped() {
        let set: HashSet<_> = FEATURE_NAMES.iter().collect();
        assert_eq!(set.len(), N_FEATURES);
        let count = |c: &str| FEATURE_NAMES.iter().filter(|n| feature_category(n) == c).count();
        assert_eq!(
            [count("session"), count("query"), count("serp"), count("browsing"), count("mouse")],
            [2, 18, 12, 30, 8]
        );
    }
}
