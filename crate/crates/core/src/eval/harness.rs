use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::metrics::{EntryFailure, MetricsReport, QueryOutcome};
use super::EvalError;
use crate::embedding::EmbeddingProvider;
use crate::index_store::{build_index, CorpusIndex};
use crate::ingest::snapshot_repository;
use crate::localize::{localize, LocalizeConfig, Mode};
use crate::trace::{parse_trace, ExecutionTrace};

/// Creates one provider per worker. Providers carry per-call state, so they
/// are never shared across threads.
pub type ProviderFactory = dyn Fn() -> Box<dyn EmbeddingProvider + Send> + Sync;

pub const DEFAULT_KS: [usize; 3] = [1, 5, 10];

/// One benchmark bug. Paths are resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub bug_id: String,
    pub corpus_path: PathBuf,
    pub report_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_path: Option<PathBuf>,
    pub ground_truth: BTreeSet<String>,
}

/// Reads a line-per-record manifest. Blank lines are skipped.
pub fn load_dataset(manifest: &Path) -> Result<Vec<DatasetEntry>, EvalError> {
    let text = fs::read_to_string(manifest).map_err(|source| EvalError::Io {
        path: manifest.to_path_buf(),
        source,
    })?;
    let base = manifest.parent().unwrap_or(Path::new(""));
    let mut entries = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| EvalError::Dataset {
            path: manifest.to_path_buf(),
            line: i + 1,
            message,
        };
        let value: Value = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        let mut entry: DatasetEntry = serde_json::from_value(value).map_err(|e| err(e.to_string()))?;
        if entry.ground_truth.is_empty() {
            return Err(err("ground_truth is empty".into()));
        }
        if let Some(bad) = entry.ground_truth.iter().find(|p| !p.ends_with(".java")) {
            return Err(err(format!("ground_truth path {bad:?} is not a .java file")));
        }
        if !seen.insert(entry.bug_id.clone()) {
            return Err(err(format!("duplicate bug_id {:?}", entry.bug_id)));
        }
        entry.corpus_path = base.join(&entry.corpus_path);
        entry.trace_path = entry.trace_path.map(|p| base.join(p));
        entries.push(entry);
    }
    if entries.is_empty() {
        return Err(EvalError::NoEntries {
            path: manifest.to_path_buf(),
        });
    }
    Ok(entries)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkMode {
    Gui,
    NoGui,
    Compare,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchmarkOptions {
    pub mode: BenchmarkMode,
    pub iterations: usize,
    pub ks: Vec<usize>,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        Self {
            mode: BenchmarkMode::Compare,
            iterations: 1,
            ks: DEFAULT_KS.to_vec(),
        }
    }
}

/// `(gui − no_gui) / no_gui`, kept symbolic when the baseline is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum RelativeChange {
    Finite(f64),
    PositiveInfinity,
    NegativeInfinity,
    /// Both values are zero.
    Undefined,
}

impl RelativeChange {
    pub fn between(gui: f64, no_gui: f64) -> Self {
        if no_gui != 0.0 {
            RelativeChange::Finite((gui - no_gui) / no_gui)
        } else if gui > 0.0 {
            RelativeChange::PositiveInfinity
        } else if gui < 0.0 {
            RelativeChange::NegativeInfinity
        } else {
            RelativeChange::Undefined
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            RelativeChange::Finite(v) => *v > 0.0,
            RelativeChange::PositiveInfinity => true,
            _ => false,
        }
    }

    pub fn percent_label(&self) -> String {
        match self {
            RelativeChange::Finite(v) => format!("{:+.1}%", v * 100.0),
            RelativeChange::PositiveInfinity => "+inf".into(),
            RelativeChange::NegativeInfinity => "-inf".into(),
            RelativeChange::Undefined => "n/a".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDelta {
    pub metric: String,
    pub gui: f64,
    pub no_gui: f64,
    pub relative_change: RelativeChange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub gui: MetricsReport,
    pub no_gui: MetricsReport,
    pub deltas: Vec<MetricDelta>,
}

impl CompareReport {
    pub fn new(gui: MetricsReport, no_gui: MetricsReport) -> Self {
        let deltas = gui
            .metric_rows()
            .into_iter()
            .zip(no_gui.metric_rows())
            .map(|((metric, g), (_, n))| MetricDelta {
                metric,
                gui: g,
                no_gui: n,
                relative_change: RelativeChange::between(g, n),
            })
            .collect();
        Self { gui, no_gui, deltas }
    }

    pub fn delta(&self, metric: &str) -> Option<&MetricDelta> {
        self.deltas.iter().find(|d| d.metric == metric)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkReport {
    Single(MetricsReport),
    Compare(CompareReport),
}

impl BenchmarkReport {
    pub fn failures(&self) -> &[EntryFailure] {
        match self {
            BenchmarkReport::Single(r) => &r.failures,
            BenchmarkReport::Compare(c) => &c.gui.failures,
        }
    }

    /// Markdown metric table; compare mode adds a relative-change column.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        match self {
            BenchmarkReport::Single(r) => {
                let column = mode_label(r.mode);
                out.push_str(&format!("| Metric | {column} |\n|---|---|\n"));
                for (metric, v) in r.metric_rows() {
                    out.push_str(&format!("| {metric} | {v:.4} |\n"));
                }
            }
            BenchmarkReport::Compare(c) => {
                out.push_str("| Metric | GUI | NoGUI | Δ |\n|---|---|---|---|\n");
                for d in &c.deltas {
                    out.push_str(&format!(
                        "| {} | {:.4} | {:.4} | {} |\n",
                        d.metric,
                        d.gui,
                        d.no_gui,
                        d.relative_change.percent_label()
                    ));
                }
            }
        }
        out
    }
}

fn mode_label(mode: Mode) -> &'static str {
    match mode {
        Mode::Gui => "GUI",
        Mode::NoGui => "NoGUI",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingStats {
    pub runs_ms: Vec<f64>,
    pub mean_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
}

impl TimingStats {
    fn from_runs(runs_ms: Vec<f64>) -> Self {
        let n = runs_ms.len().max(1) as f64;
        Self {
            mean_ms: runs_ms.iter().sum::<f64>() / n,
            min_ms: runs_ms.iter().copied().fold(f64::INFINITY, f64::min),
            max_ms: runs_ms.iter().copied().fold(0.0, f64::max),
            runs_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRun {
    pub report: BenchmarkReport,
    pub iterations: usize,
    /// All iterations serialized to identical bytes.
    pub deterministic: bool,
    pub timing: TimingStats,
}

/// Runs the dataset `options.iterations` times concurrently and audits that
/// every run produced the same report.
pub fn run_benchmark(
    dataset_path: &Path,
    options: &BenchmarkOptions,
    providers: &ProviderFactory,
) -> Result<BenchmarkRun, EvalError> {
    if options.iterations == 0 {
        return Err(EvalError::InvalidOption("iterations must be at least 1".into()));
    }
    if options.ks.contains(&0) {
        return Err(EvalError::InvalidOption("every K must be at least 1".into()));
    }
    let entries = load_dataset(dataset_path)?;

    let runs: Vec<(Result<BenchmarkReport, EvalError>, f64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..options.iterations)
            .map(|_| {
                scope.spawn(|| {
                    let started = Instant::now();
                    let report = evaluate_entries(&entries, options, providers);
                    (report, started.elapsed().as_secs_f64() * 1000.0)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("benchmark iteration panicked"))
            .collect()
    });

    let mut reports = Vec::with_capacity(runs.len());
    let mut times = Vec::with_capacity(runs.len());
    for (report, ms) in runs {
        reports.push(report?);
        times.push(ms);
    }
    let encoded: Vec<Vec<u8>> = reports
        .iter()
        .map(|r| serde_json::to_vec(r).expect("report serializes"))
        .collect();
    let deterministic = encoded.windows(2).all(|w| w[0] == w[1]);
    Ok(BenchmarkRun {
        report: reports.swap_remove(0),
        iterations: options.iterations,
        deterministic,
        timing: TimingStats::from_runs(times),
    })
}

/// One pass over already-loaded entries.
pub fn evaluate_entries(
    entries: &[DatasetEntry],
    options: &BenchmarkOptions,
    providers: &ProviderFactory,
) -> Result<BenchmarkReport, EvalError> {
    let corpora: BTreeSet<&Path> = entries.iter().map(|e| e.corpus_path.as_path()).collect();
    let indexes: BTreeMap<&Path, Result<CorpusIndex, String>> = corpora
        .into_par_iter()
        .map(|path| {
            let built = snapshot_repository(path)
                .map_err(crate::Error::from)
                .and_then(|snapshot| build_index(&snapshot, providers().as_mut()))
                .map_err(|e| e.to_string());
            (path, built)
        })
        .collect();

    let modes: &[Mode] = match options.mode {
        BenchmarkMode::Gui => &[Mode::Gui],
        BenchmarkMode::NoGui => &[Mode::NoGui],
        BenchmarkMode::Compare => &[Mode::Gui, Mode::NoGui],
    };

    let mut ordered: Vec<&DatasetEntry> = entries.iter().collect();
    ordered.sort_by(|a, b| a.bug_id.cmp(&b.bug_id));
    let results: Vec<Result<Vec<QueryOutcome>, EntryFailure>> = ordered
        .par_iter()
        .map(|entry| {
            let index = indexes[entry.corpus_path.as_path()].as_ref().map_err(|e| EntryFailure {
                bug_id: entry.bug_id.clone(),
                error: e.clone(),
            })?;
            evaluate_entry(entry, index, modes, providers).map_err(|e| EntryFailure {
                bug_id: entry.bug_id.clone(),
                error: e,
            })
        })
        .collect();

    let mut per_mode: Vec<Vec<QueryOutcome>> = vec![Vec::new(); modes.len()];
    let mut failures = Vec::new();
    for result in results {
        match result {
            Ok(outcomes) => {
                for (slot, outcome) in per_mode.iter_mut().zip(outcomes) {
                    slot.push(outcome);
                }
            }
            Err(f) => failures.push(f),
        }
    }
    if per_mode[0].is_empty() {
        return Err(EvalError::NothingEvaluated { failures });
    }

    let mut reports = modes
        .iter()
        .zip(&per_mode)
        .map(|(&mode, outcomes)| MetricsReport::from_outcomes(mode, &options.ks, outcomes, failures.clone()));
    let first = reports.next().expect("at least one mode");
    Ok(match reports.next() {
        Some(no_gui) => BenchmarkReport::Compare(CompareReport::new(first, no_gui)),
        None => BenchmarkReport::Single(first),
    })
}

fn evaluate_entry(
    entry: &DatasetEntry,
    index: &CorpusIndex,
    modes: &[Mode],
    providers: &ProviderFactory,
) -> Result<Vec<QueryOutcome>, String> {
    let trace = match &entry.trace_path {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            parse_trace(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        // A bug without a reproduction trace runs GUI mode with no GUI
        // information, which degrades to the text-only ranking.
        None => ExecutionTrace::default(),
    };
    let mut provider = providers();
    modes
        .iter()
        .map(|&mode| {
            let ranking = localize(
                &entry.report_text,
                Some(&trace),
                index,
                &LocalizeConfig::for_mode(mode),
                provider.as_mut(),
            )
            .map_err(|e| e.to_string())?;
            Ok(QueryOutcome {
                bug_id: entry.bug_id.clone(),
                ranked: ranking.paths().map(str::to_string).collect(),
                truth: entry.ground_truth.clone(),
                corpus_size: index.file_count(),
            })
        })
        .collect()
}
