//! Shared inputs for the pipeline benchmarks.

use sessionlens_core::{
    assemble_sessions, extract_matrix, generate, label_dataset, AoaLexicon, Dataset, GeneratorSpec, Grouping, LabelRow,
    Session, SessionConfig, Target,
};

/// Assembled sessions and the labeled gain dataset for `n` synthetic
/// sessions with signal planted in one browsing feature.
pub struct Inputs {
    pub sessions: Vec<Session>,
    pub lexicon: AoaLexicon,
    pub data: Dataset,
}

pub fn inputs(n: usize, seed: u64) -> Inputs {
    let spec =
        GeneratorSpec { n_sessions: n, seed, ..GeneratorSpec::default() }.with_effect("b_time_max_per_page", 8.0, 0.0);
    let synth = generate(&spec).expect("valid generator spec");
    let sessions = assemble_sessions(synth.events, &SessionConfig::default()).expect("generated log assembles");
    let mut records = synth.knowledge.records().expect("generated records parse");
    label_dataset(&mut records, Grouping::Global).expect("labels");
    let labels: Vec<LabelRow> = records.iter().map(|r| LabelRow::from_record(r).expect("labeled")).collect();
    let lexicon = AoaLexicon::sample();
    let matrix = extract_matrix(&sessions, &lexicon).expect("features");
    let data = Dataset::from_labels(matrix, &labels, Target::Gain).expect("join");
    Inputs { sessions, lexicon, data }
}
