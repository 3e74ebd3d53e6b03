//! Acceptance gate. Runs without the libtest harness so every criterion
//! prints one PASS/FAIL line; exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use common::{oracle_features, read_fixture, s1_expected};
use sessionlens_core::evaluation::{mda_importance, metrics, repeated_cv, CvConfig, Metrics, SelectionConfig};
use sessionlens_core::features::{extract, AoaLexicon, FEATURE_NAMES};
use sessionlens_core::knowledge::{bin_class, standardize, KnowledgeClass};
use sessionlens_core::models::{ks_zhang_score, LogisticRegression, Mlp, ModelKind, ModelSpec, Standardizer};
use sessionlens_core::selection::{relevance_filter, RelevanceTable, Target};
use sessionlens_core::session_log::{assemble_sessions, parse_event_stream, Event, SessionConfig};
use sessionlens_core::synth::{generate, GeneratorSpec};
use sessionlens_core::Grouping;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, ok: impl Into<String>, bad: impl Into<String>) -> Outcome {
    if cond {
        Ok(ok.into())
    } else {
        Err(bad.into())
    }
}

fn feature_counts() -> Outcome {
    let t0 = Instant::now();
    let table =
        RelevanceTable::read_csv(read_fixture("paper_correlations.csv").as_bytes()).map_err(|e| e.to_string())?;
    let kg: Vec<usize> = [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3]
        .iter()
        .map(|&b| relevance_filter(&table, Target::Gain, b).len())
        .collect();
    let ks: Vec<usize> =
        [0.0, 0.05, 0.1, 0.15].iter().map(|&g| relevance_filter(&table, Target::State, g).len()).collect();
    let secs = t0.elapsed().as_secs_f64();
    let ok = kg == [70, 43, 16, 6, 4, 2, 1] && ks == [70, 41, 11, 0] && secs < 1.0;
    check(ok, format!("KG {kg:?}, KS {ks:?} in {secs:.3}s"), format!("KG {kg:?}, KS {ks:?} in {secs:.3}s"))
}

fn binning() -> Outcome {
    let got: Vec<KnowledgeClass> = [0.40, 0.10, -0.05].iter().map(|g| bin_class((g - 0.193) / 0.231)).collect();
    let want = [KnowledgeClass::High, KnowledgeClass::Moderate, KnowledgeClass::Low];
    check(got == want, format!("{got:?}"), format!("got {got:?}"))
}

fn baseline_score() -> Outcome {
    let a = ks_zhang_score(0.0, 0.0, 0.0);
    let b = ks_zhang_score(2.0, 4.0, 3.0);
    check(a == -1.466 && (b + 0.410).abs() <= 1e-12, format!("{a}, {b}"), format!("score(0,0,0)={a}, score(2,4,3)={b}"))
}

fn fixture_oracle() -> Outcome {
    let lexicon = AoaLexicon::from_csv(&read_fixture("s1_lexicon.csv")).map_err(|e| e.to_string())?;
    let events = parse_event_stream(&read_fixture("s1_events.jsonl")).map_err(|e| e.to_string())?;
    let sessions = assemble_sessions(events.clone(), &SessionConfig::default()).map_err(|e| e.to_string())?;
    let v = extract(&sessions[0], &lexicon).map_err(|e| e.to_string())?.values;
    for (i, (name, want)) in s1_expected().iter().enumerate() {
        if FEATURE_NAMES[i] != *name {
            return Err(format!("hand table out of order at {name}"));
        }
        let tol =
            if name.contains("time") || name.contains("duration") || name.contains("interval") { 1e-9 } else { 1e-12 };
        if (v[i] - want).abs() > tol {
            return Err(format!("S1 {name}: got {}, want {want}", v[i]));
        }
    }
    if v != oracle_features(&events, &lexicon) {
        return Err("S1 differs from the naive oracle".into());
    }

    let data = generate(&GeneratorSpec { n_sessions: 200, seed: 77, ..GeneratorSpec::default() })
        .map_err(|e| e.to_string())?;
    let lexicon = AoaLexicon::sample();
    let sessions = assemble_sessions(data.events.clone(), &SessionConfig::default()).map_err(|e| e.to_string())?;
    let mut raw: BTreeMap<&str, Vec<Event>> = BTreeMap::new();
    for e in &data.events {
        raw.entry(e.session_id.as_str()).or_default().push(e.clone());
    }
    for s in &sessions {
        let lib = extract(s, &lexicon).map_err(|e| e.to_string())?.values;
        if lib != oracle_features(&raw[s.session_id.as_str()], &lexicon) {
            return Err(format!("session {} differs from the naive oracle", s.session_id));
        }
    }
    Ok(format!("S1 matches 70 hand values; {} synthetic sessions match the oracle exactly", sessions.len()))
}

fn metrics_oracle() -> Outcome {
    let m = Metrics::from_confusion([[5, 0, 0], [0, 0, 5], [0, 0, 5]]);
    let truth: Vec<usize> = (0..30).map(|i| i % 3).collect();
    let p = metrics(&truth, &truth);
    let perfect = [p.accuracy, p.macro_precision, p.macro_recall, p.macro_f1]
        .into_iter()
        .chain(p.precision)
        .chain(p.recall)
        .chain(p.f1)
        .all(|v| v == 1.0);
    let ok = (m.accuracy - 10.0 / 15.0).abs() <= 1e-12 && m.recall[1] == 0.0 && perfect;
    check(
        ok,
        format!("accuracy {:.4}, recall[Moderate] {}, perfect run all 1.0", m.accuracy, m.recall[1]),
        format!("accuracy {}, recall[1] {}, perfect {perfect}", m.accuracy, m.recall[1]),
    )
}

fn synthetic_benchmark() -> Outcome {
    const PLANTED: &str = "b_time_max_per_page";
    let t0 = Instant::now();
    let data = common::planted_dataset(300, 42, PLANTED, 8.0, Grouping::Global);
    let spec = ModelSpec::new(ModelKind::Rf, 42);
    let sel = SelectionConfig::new(Target::Gain, 0.0, 1.0);
    let cv = CvConfig { k: 10, reps: 10, seed: 42 };
    let mut a = repeated_cv(&data, &spec, &sel, &cv).map_err(|e| e.to_string())?;
    let imp = mda_importance(&data, &spec, 42).map_err(|e| e.to_string())?;
    let secs = t0.elapsed().as_secs_f64();
    let rank = imp.rank_of(PLANTED).unwrap_or(usize::MAX);

    let mut b = repeated_cv(&data, &spec, &sel, &cv).map_err(|e| e.to_string())?;
    let imp2 = mda_importance(&data, &spec, 42).map_err(|e| e.to_string())?;
    a.runtime_ms = 0;
    b.runtime_ms = 0;
    let same = a.to_json().ok() == b.to_json().ok() && imp == imp2;

    let msg = format!("accuracy {:.4}, MDA rank {rank}/70, {secs:.1}s, deterministic {same}", a.metrics.accuracy);
    check(a.metrics.accuracy >= 0.80 && rank <= 3 && secs < 60.0 && same, msg.clone(), msg)
}

fn numerical_checks() -> Outcome {
    // Backprop against central differences on five samples.
    let x: Vec<Vec<f64>> =
        (0..5).map(|i| vec![(i as f64).sin(), (i as f64 * 1.7).cos(), i as f64 / 5.0, 0.3]).collect();
    let y = vec![0, 1, 2, 1, 0];
    let m = Mlp::init(4, 6, 3);
    let analytic = m.loss_and_grad(&x, &y).1.params();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for (i, a) in analytic.iter().enumerate() {
        let (mut p, mut q) = (m.clone(), m.clone());
        *p.params_mut()[i] += h;
        *q.params_mut()[i] -= h;
        let num = (p.loss_and_grad(&x, &y).0 - q.loss_and_grad(&x, &y).0) / (2.0 * h);
        worst = worst.max((a - num).abs() / a.abs().max(num.abs()).max(1e-8));
    }

    // Separable classes along the first axis.
    let lx: Vec<Vec<f64>> =
        (0..30).map(|i| vec![(i % 3) as f64 * 2.0 + (i as f64 * 0.1).sin() * 0.3, (i as f64).cos()]).collect();
    let ly: Vec<usize> = (0..30).map(|i| i % 3).collect();
    let scaler = Standardizer::fit(&lx);
    let lx: Vec<Vec<f64>> = lx.iter().map(|r| scaler.transform(r)).collect();
    let (_, trace) = LogisticRegression::fit(&lx, &ly, 0.01, 500, 1.0);
    let monotone = trace.losses.windows(2).all(|w| w[1] <= w[0]);

    let col: Vec<f64> = (0..50).map(|i| (i as f64 * 0.77).sin() * 13.0 + 4.0).collect();
    let z = standardize(&col).map_err(|e| e.to_string())?;
    let rows: Vec<Vec<f64>> = col.iter().map(|&v| vec![v]).collect();
    let s = Standardizer::fit(&rows);
    let z2: Vec<f64> = rows.iter().map(|r| s.transform(r)[0]).collect();
    let moments = |v: &[f64]| {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let sd = (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)).sqrt();
        m.abs() <= 1e-9 && (sd - 1.0).abs() <= 1e-9
    };
    let ok = worst < 1e-4 && monotone && trace.grad_norm < 1e-3 && moments(&z) && moments(&z2);
    let msg = format!(
        "MP max rel err {worst:.2e}; LR monotone {monotone}, grad norm {:.1e}; standardize moments ok {}",
        trace.grad_norm,
        moments(&z) && moments(&z2)
    );
    check(ok, msg.clone(), msg)
}

/// Needs the original 468-session dataset in canonical form under the
/// directory named by SESSIONLENS_ORIGINAL_DATA (events.jsonl,
/// records.json, lexicon.csv).
fn original_dataset() -> Option<Outcome> {
    let dir = std::path::PathBuf::from(std::env::var_os("SESSIONLENS_ORIGINAL_DATA")?);
    Some(run_original(&dir))
}

fn run_original(dir: &std::path::Path) -> Outcome {
    use sessionlens_core::features::extract_matrix;
    use sessionlens_core::knowledge::LabelRow;
    use sessionlens_core::session_log::filter_sessions;
    use sessionlens_core::{label_dataset, Dataset, KnowledgeFile};

    let read = |name: &str| std::fs::read_to_string(dir.join(name)).map_err(|e| format!("{name}: {e}"));
    let err = |e: sessionlens_core::Error| e.to_string();
    let events = parse_event_stream(&read("events.jsonl")?).map_err(err)?;
    let lexicon = AoaLexicon::from_csv(&read("lexicon.csv")?).map_err(err)?;
    let mut records = KnowledgeFile::from_json(&read("records.json")?).map_err(err)?.records().map_err(err)?;
    let sessions = assemble_sessions(events, &SessionConfig::default()).map_err(err)?;
    let (kept, _) = filter_sessions(sessions, &records);
    label_dataset(&mut records, Grouping::PerTopic).map_err(err)?;
    let labels: Vec<LabelRow> = records.iter().filter_map(|r| LabelRow::from_record(r).ok()).collect();
    let matrix = extract_matrix(&kept, &lexicon).map_err(err)?;
    let cv = CvConfig::default();
    let acc = |target: Target, kind: ModelKind| -> Result<f64, String> {
        let d = Dataset::from_labels(matrix.clone(), &labels, target).map_err(err)?;
        let sel = SelectionConfig::new(target, 0.0, 1.0);
        Ok(repeated_cv(&d, &ModelSpec::new(kind, 0), &sel, &cv).map_err(err)?.metrics.accuracy)
    };
    let rf_kg = acc(Target::Gain, ModelKind::Rf)?;
    let base = acc(Target::State, ModelKind::KsZhang)?;
    let mut others = Vec::new();
    for kind in ModelKind::LEARNED {
        others.push(acc(Target::State, kind)?);
    }
    let below = others.iter().all(|&a| base < a);
    let msg = format!("RF KG accuracy {rf_kg:.3}; KS baseline {base:.3} vs classifiers {others:.3?}");
    check((rf_kg - 0.475).abs() <= 0.05 && below, msg.clone(), msg)
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("feature counts from published correlations", feature_counts),
        ("gain binning against published stats", binning),
        ("baseline linear score", baseline_score),
        ("fixture session and naive oracle", fixture_oracle),
        ("metrics on hand-counted confusion", metrics_oracle),
        ("synthetic end-to-end benchmark", synthetic_benchmark),
        ("numerical gradient and scaling checks", numerical_checks),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    match original_dataset() {
        None => println!(
            "criterion 8: SKIP  original-dataset accuracies and importance rankings are not reproducible without the \
             468-session study data; set SESSIONLENS_ORIGINAL_DATA to run them"
        ),
        Some(Ok(detail)) => println!("criterion 8: PASS  original dataset: {detail}"),
        Some(Err(detail)) => {
            failed += 1;
            println!("criterion 8: FAIL  original dataset: {detail}");
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
