use sessionlens_core::features::{extract_matrix, AoaLexicon};
use sessionlens_core::session_log::{assemble_sessions, filter_sessions, parse_event_stream, SessionConfig};
use sessionlens_core::stats::{mean, sample_sd};
use sessionlens_core::synth::{generate, GeneratorSpec};

#[test]
fn feature_means_match_configured_moments() {
    let spec = GeneratorSpec { n_sessions: 5000, seed: 31, ..GeneratorSpec::default() };
    let data = generate(&spec).unwrap();
    let sessions = assemble_sessions(data.events, &SessionConfig::default()).unwrap();
    let m = extract_matrix(&sessions, &AoaLexicon::sample()).unwrap();
    let b = &spec.behavior;
    let checks = [
        ("s_duration", 60.0, b.session_minutes_mean),
        ("q_num", 1.0, b.queries_mean),
        ("b_num", 1.0, b.pages_mean),
        ("q_term_avg", 1.0, b.query_len_mean),
    ];
    for (name, scale, want) in checks {
        let col: Vec<f64> = m.column(m.column_index(name).unwrap()).iter().map(|v| v / scale).collect();
        let se = sample_sd(&col) / (col.len() as f64).sqrt();
        let got = mean(&col);
        assert!((got - want).abs() <= 3.0 * se, "{name}: mean {got}, expected {want} +- {}", 3.0 * se);
    }
}

#[test]
fn generated_logs_pass_the_pipeline_without_rejects() {
    for seed in 0..5 {
        let spec = GeneratorSpec { n_sessions: 60, seed, ..GeneratorSpec::default() }.with_effect("q_num", 1.0, 1.0);
        let data = generate(&spec).unwrap();
        let events = parse_event_stream(&data.events_jsonl()).unwrap();
        assert_eq!(events, data.events);
        let sessions = assemble_sessions(events, &SessionConfig::default()).unwrap();
        let (kept, rejected) = filter_sessions(sessions, &data.knowledge.records().unwrap());
        assert_eq!((kept.len(), rejected.len()), (60, 0));
    }
}

#[test]
fn knowledge_file_round_trips_and_scores_stay_in_range() {
    let spec = GeneratorSpec { n_sessions: 50, seed: 1, ..GeneratorSpec::default() }.with_effect("m_num", 2.0, 0.5);
    let data = generate(&spec).unwrap();
    let text = data.knowledge.to_json().unwrap();
    let back = sessionlens_core::KnowledgeFile::from_json(&text).unwrap();
    assert_eq!(back, data.knowledge);
    for r in back.records().unwrap() {
        let (pre, post, gain) = (r.pre_score.unwrap(), r.post_score.unwrap(), r.gain.unwrap());
        assert!((0.0..=1.0).contains(&pre) && (0.0..=1.0).contains(&post));
        assert!((-1.0..=1.0).contains(&gain));
    }
}
