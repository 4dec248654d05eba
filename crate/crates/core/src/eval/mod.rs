//! Benchmark harness: runs the localizer over a manifest of bugs with known
//! buggy files and reports Hits@K, MRR, MAP and Effectiveness.
//!
//! The manifest has one JSON record per line:
//!
//! ```text
//! {"bug_id":"b1","corpus_path":"repo","report_text":"…","trace_path":"b1.json","ground_truth":["app/src/main/java/A.java"]}
//! ```

mod harness;
mod metrics;

use std::path::PathBuf;

pub use harness::{
    evaluate_entries, load_dataset, run_benchmark, BenchmarkMode, BenchmarkOptions, BenchmarkReport, BenchmarkRun,
    CompareReport, DatasetEntry, MetricDelta, ProviderFactory, RelativeChange, TimingStats, DEFAULT_KS,
};
pub use metrics::{
    average_precision, effectiveness, first_truth_rank, hits_at_k, mean_average_precision, mean_reciprocal_rank,
    reciprocal_rank, BugRow, EntryFailure, MetricsReport, QueryOutcome,
};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}, line {line}: {message}", path.display())]
    Dataset { path: PathBuf, line: usize, message: String },
    #[error("{}: dataset has no entries", path.display())]
    NoEntries { path: PathBuf },
    #[error("every entry failed ({} failures)", failures.len())]
    NothingEvaluated { failures: Vec<EntryFailure> },
    #[error("{0}")]
    InvalidOption(String),
}
