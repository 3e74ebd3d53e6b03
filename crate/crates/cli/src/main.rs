//! `sessionlens`: batch pipeline from raw search logs to knowledge
//! prediction reports.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use sessionlens_core::evaluation::CSV_HEADER;
use sessionlens_core::knowledge::{read_labels_csv, write_labels_csv, LabelRow};
use sessionlens_core::models::{default_grid, KS_ZHANG_QLEN, KS_ZHANG_RELMEAN};
use sessionlens_core::selection::select;
use sessionlens_core::{
    assemble_sessions, describe_topics, extract_matrix, filter_sessions, grid_search, label_dataset, mda_importance,
    parse_event_stream, repeated_cv, AoaLexicon, CvConfig, Dataset, EvalReport, FeatureMatrix, GeneratorSpec, Grouping,
    KnowledgeFile, KnowledgeRecord, ModelKind, ModelSpec, RelevanceTable, SelectionConfig, SelectionScope,
    SessionConfig, Target,
};

/// Misuse of the command line, as opposed to bad data. Exits with 1.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Parser, Debug)]
#[command(name = "sessionlens", version, about = "Predict knowledge gain and knowledge state from search sessions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Assemble sessions from an event log and summarize them.
    Ingest {
        #[arg(long)]
        events: PathBuf,
        #[command(flatten)]
        session: SessionArgs,
        /// Knowledge records; adds kept/rejected counts.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Score knowledge tests and write class labels as CSV.
    Label {
        #[arg(long)]
        records: PathBuf,
        /// per_topic or global.
        #[arg(long, default_value = "per_topic")]
        grouping: Grouping,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract the feature matrix for sessions that pass filtering.
    Extract {
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        records: PathBuf,
        /// CSV with header word,aoa.
        #[arg(long)]
        lexicon: PathBuf,
        #[command(flatten)]
        session: SessionArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the features kept by relevance filtering and redundancy pruning.
    Select {
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Precomputed correlations (feature,corr_gain,corr_state).
        #[arg(long)]
        correlations: Option<PathBuf>,
        /// gain or state.
        #[arg(long)]
        task: Target,
        #[command(flatten)]
        threshold: ThresholdArgs,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
    },
    /// Repeated stratified cross-validation of one classifier.
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        /// nb, lr, svm, rf, mp or ks_zhang.
        #[arg(long)]
        classifier: ModelKind,
        #[arg(long)]
        seed: u64,
        /// Hyperparameter override, e.g. --hyper n_trees=200. Repeatable.
        #[arg(long, value_name = "NAME=VALUE")]
        hyper: Vec<String>,
        #[command(flatten)]
        threshold: ThresholdArgs,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[command(flatten)]
        cv: CvArgs,
        /// Also write the report as a one-row CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Evaluate every classifier, hyperparameter, tau and threshold cell.
    Gridsearch {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        seed: u64,
        /// Classifiers to search; defaults to all learned ones.
        #[arg(long, value_delimiter = ',')]
        classifier: Vec<ModelKind>,
        /// Relevance thresholds for the gain task.
        #[arg(long, value_delimiter = ',')]
        beta: Vec<f64>,
        /// Relevance thresholds for the state task.
        #[arg(long, value_delimiter = ',')]
        gamma: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.95, 0.9, 0.85, 0.8, 0.75, 0.7])]
        tau: Vec<f64>,
        #[command(flatten)]
        cv: CvArgs,
        /// Write every report plus the best index as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Mean decrease accuracy of every feature under a random forest.
    Importance {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_name = "NAME=VALUE")]
        hyper: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validate the fixed-coefficient state baseline.
    BaselineKs {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[command(flatten)]
        cv: CvArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Generate a synthetic event log and knowledge records.
    Synth {
        /// Generator spec as JSON; omitted fields take defaults.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Receives events.jsonl and records.json.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Per-topic score table.
    Describe {
        #[arg(long)]
        records: PathBuf,
    },
}

#[derive(Args, Debug)]
struct SessionArgs {
    /// URL prefix of search result pages.
    #[arg(long)]
    serp_prefix: Option<String>,
    /// Seconds of activity credited to each interaction.
    #[arg(long)]
    idle_window: Option<f64>,
}

impl SessionArgs {
    fn config(&self) -> Result<SessionConfig> {
        let mut c = SessionConfig::default();
        if let Some(p) = &self.serp_prefix {
            c.serp_prefix = p.clone();
        }
        if let Some(w) = self.idle_window {
            if !(w > 0.0 && w.is_finite()) {
                return Err(usage(format!("--idle-window must be positive, got {w}")));
            }
            c.idle_window_s = w;
        }
        Ok(c)
    }
}

#[derive(Args, Debug)]
struct DataArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    /// gain or state.
    #[arg(long)]
    task: Target,
}

#[derive(Args, Debug)]
struct ThresholdArgs {
    /// Relevance threshold for the gain task.
    #[arg(long)]
    beta: Option<f64>,
    /// Relevance threshold for the state task.
    #[arg(long)]
    gamma: Option<f64>,
}

impl ThresholdArgs {
    fn resolve(&self, task: Target) -> Result<f64> {
        match (task, self.beta, self.gamma) {
            (Target::Gain, _, Some(_)) => Err(usage("--gamma applies to the state task; use --beta")),
            (Target::State, Some(_), _) => Err(usage("--beta applies to the gain task; use --gamma")),
            (Target::Gain, b, None) => Ok(b.unwrap_or(0.0)),
            (Target::State, None, g) => Ok(g.unwrap_or(0.0)),
        }
    }
}

#[derive(Args, Debug)]
struct CvArgs {
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    /// per_fold or global.
    #[arg(long, default_value = "per_fold")]
    selection_scope: SelectionScope,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: &mut impl Write, dest: Option<&Path>, text: &str) -> Result<()> {
    match dest {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn load_records(path: &Path) -> Result<Vec<KnowledgeRecord>> {
    Ok(KnowledgeFile::from_json(&read(path)?)?.records()?)
}

fn load_matrix(path: &Path) -> Result<FeatureMatrix> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(FeatureMatrix::read_csv(f)?)
}

fn load_labels(path: &Path) -> Result<Vec<LabelRow>> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_labels_csv(f)?)
}

fn load_dataset(features: &Path, labels: &Path, task: Target) -> Result<Dataset> {
    Ok(Dataset::from_labels(load_matrix(features)?, &load_labels(labels)?, task)?)
}

fn cv_config(cv: &CvArgs, seed: u64) -> CvConfig {
    CvConfig { k: cv.folds, reps: cv.reps, seed }
}

fn report_csv(report: &EvalReport) -> String {
    format!("{CSV_HEADER}\n{}\n", report.csv_row())
}

fn write_report(out: &mut impl Write, report: &EvalReport, csv: Option<&Path>) -> Result<()> {
    if let Some(p) = csv {
        fs::write(p, report_csv(report)).with_context(|| format!("writing {}", p.display()))?;
    }
    writeln!(out, "{}", report.to_json()?)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Ingest { events, session, records } => {
            let raw = parse_event_stream(&read(&events)?)?;
            let n_events = raw.len();
            let sessions = assemble_sessions(raw, &session.config()?)?;
            let queries: usize = sessions.iter().map(|s| s.queries.len()).sum();
            let pages: usize = sessions.iter().map(|s| s.page_visits.len()).sum();
            writeln!(out, "events: {n_events}")?;
            writeln!(out, "sessions: {}", sessions.len())?;
            writeln!(out, "queries: {queries}")?;
            writeln!(out, "page_visits: {pages}")?;
            if let Some(path) = records {
                let (kept, rejected) = filter_sessions(sessions, &load_records(&path)?);
                writeln!(out, "kept: {}", kept.len())?;
                writeln!(out, "rejected: {}", rejected.len())?;
                let mut by_reason: BTreeMap<&str, usize> = BTreeMap::new();
                for (id, reason) in &rejected {
                    log::info!("rejected session {id}: {}", reason.as_str());
                    *by_reason.entry(reason.as_str()).or_default() += 1;
                }
                for (reason, n) in by_reason {
                    writeln!(out, "rejected.{reason}: {n}")?;
                }
            }
        }
        Command::Label { records, grouping, out: dest } => {
            let mut all = load_records(&records)?;
            let before = all.len();
            all.retain(KnowledgeRecord::has_post_test);
            if all.len() < before {
                log::warn!("skipping {} records without a post-session test", before - all.len());
            }
            label_dataset(&mut all, grouping)?;
            let rows = all.iter().map(LabelRow::from_record).collect::<sessionlens_core::Result<Vec<_>>>()?;
            let mut buf = Vec::new();
            write_labels_csv(&rows, &mut buf)?;
            emit(&mut out, dest.as_deref(), &String::from_utf8(buf)?)?;
        }
        Command::Extract { events, records, lexicon, session, out: dest } => {
            let lexicon = AoaLexicon::from_csv(&read(&lexicon)?)?;
            let sessions = assemble_sessions(parse_event_stream(&read(&events)?)?, &session.config()?)?;
            let (kept, rejected) = filter_sessions(sessions, &load_records(&records)?);
            if !rejected.is_empty() {
                log::warn!("{} sessions rejected by filtering", rejected.len());
            }
            emit(&mut out, dest.as_deref(), &extract_matrix(&kept, &lexicon)?.to_csv_string()?)?;
        }
        Command::Select { features, labels, correlations, task, threshold, tau } => {
            let th = threshold.resolve(task)?;
            let matrix = match (&features, &labels) {
                (Some(f), Some(l)) => Some(Dataset::from_labels(load_matrix(f)?, &load_labels(l)?, task)?),
                (None, None) => None,
                _ => return Err(usage("--features and --labels go together")),
            };
            let table = match (&correlations, &matrix) {
                (Some(p), _) => {
                    RelevanceTable::read_csv(fs::File::open(p).with_context(|| format!("opening {}", p.display()))?)?
                }
                (None, Some(d)) => {
                    let rows: Vec<usize> = (0..d.len()).collect();
                    RelevanceTable::compute_for(&d.matrix(), &rows, task, &d.target)
                }
                (None, None) => return Err(usage("select needs --correlations or --features with --labels")),
            };
            let m = matrix.as_ref().map(Dataset::matrix);
            let rows: Vec<usize> = (0..m.as_ref().map_or(0, FeatureMatrix::n_rows)).collect();
            let subset = select(&table, m.as_ref().map(|m| (m, rows.as_slice())), task, th, tau)?;
            for f in &subset.features {
                writeln!(out, "{f}\t{:.4}", table.corr(f, task).unwrap_or(f64::NAN))?;
            }
            writeln!(
                out,
                "selected {} of {} features (task {task}, threshold {th}, tau {tau})",
                subset.len(),
                table.entries.len()
            )?;
        }
        Command::Evaluate { data, classifier, seed, hyper, threshold, tau, cv, csv } => {
            let th = threshold.resolve(data.task)?;
            let spec = ModelSpec::new(classifier, seed).with_pairs(&hyper).map_err(|e| usage(e.to_string()))?;
            let d = load_dataset(&data.features, &data.labels, data.task)?;
            let mut sel = SelectionConfig::new(data.task, th, tau);
            sel.scope = cv.selection_scope;
            let report = repeated_cv(&d, &spec, &sel, &cv_config(&cv, seed))?;
            write_report(&mut out, &report, csv.as_deref())?;
        }
        Command::Gridsearch { data, seed, classifier, beta, gamma, tau, cv, json } => {
            let thresholds = match data.task {
                Target::Gain if !gamma.is_empty() => {
                    return Err(usage("--gamma applies to the state task; use --beta"))
                }
                Target::State if !beta.is_empty() => return Err(usage("--beta applies to the gain task; use --gamma")),
                Target::Gain if beta.is_empty() => vec![0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3],
                Target::State if gamma.is_empty() => vec![0.0, 0.05, 0.1, 0.15],
                Target::Gain => beta,
                Target::State => gamma,
            };
            if tau.is_empty() {
                return Err(usage("--tau grid is empty"));
            }
            let kinds = if classifier.is_empty() { ModelKind::LEARNED.to_vec() } else { classifier };
            let specs: Vec<ModelSpec> = kinds.iter().flat_map(|&k| default_grid(k, seed)).collect();
            let d = load_dataset(&data.features, &data.labels, data.task)?;
            let grid =
                grid_search(&d, &specs, &tau, &thresholds, data.task, cv.selection_scope, &cv_config(&cv, seed))?;
            writeln!(out, "{CSV_HEADER}")?;
            for r in &grid.reports {
                writeln!(out, "{}", r.csv_row())?;
            }
            eprintln!("best cell: {}", grid.best_report().csv_row());
            if let Some(p) = json {
                let doc = serde_json::json!({ "best": grid.best, "reports": grid.reports });
                fs::write(&p, serde_json::to_string_pretty(&doc)?)
                    .with_context(|| format!("writing {}", p.display()))?;
            }
        }
        Command::Importance { data, seed, hyper, out: dest } => {
            let spec = ModelSpec::new(ModelKind::Rf, seed).with_pairs(&hyper).map_err(|e| usage(e.to_string()))?;
            let d = load_dataset(&data.features, &data.labels, data.task)?;
            let report = mda_importance(&d, &spec, seed)?;
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            emit(&mut out, dest.as_deref(), &String::from_utf8(buf)?)?;
        }
        Command::BaselineKs { features, labels, cv, csv } => {
            let d = load_dataset(&features, &labels, Target::State)?;
            for col in [KS_ZHANG_QLEN, KS_ZHANG_RELMEAN] {
                if !d.columns.iter().any(|c| c == col) {
                    anyhow::bail!("feature file lacks column {col}");
                }
            }
            let mut sel = SelectionConfig::new(Target::State, 0.0, 1.0);
            sel.scope = cv.selection_scope;
            let report = repeated_cv(&d, &ModelSpec::new(ModelKind::KsZhang, 0), &sel, &cv_config(&cv, 0))?;
            write_report(&mut out, &report, csv.as_deref())?;
        }
        Command::Synth { spec, seed, out_dir } => {
            let mut spec = GeneratorSpec::from_json(&read(&spec)?)?;
            spec.seed = seed;
            let data = sessionlens_core::generate(&spec)?;
            fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            fs::write(out_dir.join("events.jsonl"), data.events_jsonl())?;
            fs::write(out_dir.join("records.json"), data.knowledge.to_json()?)?;
            writeln!(
                out,
                "wrote {} events for {} sessions to {}",
                data.events.len(),
                spec.n_sessions,
                out_dir.display()
            )?;
        }
        Command::Describe { records } => {
            let mut all = load_records(&records)?;
            all.retain(KnowledgeRecord::has_post_test);
            write!(out, "{}", describe_topics(&all)?.render())?;
        }
    }
    Ok(())
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("SESSIONLENS_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("SESSIONLENS_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match init_threads().and_then(|_| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed pipe downstream (e.g. `| head`) is not a failure.
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
