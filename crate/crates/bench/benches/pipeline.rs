use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use sessionlens_bench::inputs;
use sessionlens_core::{
    extract_matrix, fit, mda_importance, repeated_cv, CvConfig, ModelKind, ModelSpec, SelectionConfig, Target,
};

fn features(c: &mut Criterion) {
    let inp = inputs(300, 1);
    c.bench_function("extract_300_sessions", |b| {
        b.iter(|| extract_matrix(black_box(&inp.sessions), &inp.lexicon).unwrap())
    });
    let rows: Vec<usize> = (0..inp.data.len()).collect();
    let sel = SelectionConfig::new(Target::Gain, 0.05, 0.85);
    c.bench_function("select_beta05_tau085", |b| b.iter(|| sel.choose(black_box(&inp.data), &rows).unwrap()));
}

fn models(c: &mut Criterion) {
    let inp = inputs(300, 2);
    let mut g = c.benchmark_group("fit_300x70");
    g.sample_size(10);
    for kind in ModelKind::LEARNED {
        let spec = ModelSpec::new(kind, 3);
        g.bench_function(kind.as_str(), |b| b.iter(|| fit(&spec, black_box(&inp.data)).unwrap()));
    }
    g.finish();
}

fn evaluation(c: &mut Criterion) {
    let inp = inputs(300, 3);
    let mut g = c.benchmark_group("evaluation");
    g.sample_size(10);
    let sel = SelectionConfig::new(Target::Gain, 0.0, 1.0);
    let cv = CvConfig { k: 10, reps: 1, seed: 0 };
    g.bench_function("cv_rf_k10", |b| {
        b.iter(|| repeated_cv(&inp.data, &ModelSpec::new(ModelKind::Rf, 1), &sel, &cv).unwrap())
    });
    g.bench_function("cv_nb_k10", |b| {
        b.iter(|| repeated_cv(&inp.data, &ModelSpec::new(ModelKind::Nb, 1), &sel, &cv).unwrap())
    });
    g.bench_function("mda_rf", |b| b.iter(|| mda_importance(&inp.data, &ModelSpec::new(ModelKind::Rf, 1), 5).unwrap()));
    g.finish();
}

criterion_group!(benches, features, models, evaluation);
criterion_main!(benches);
