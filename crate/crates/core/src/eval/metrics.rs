//! Ranked-retrieval metrics over file rankings with known buggy files.
//!
//! A ground-truth file that is absent from a ranking (filtered out, or never
//! indexed) contributes 0 to RR and AP, and a query with no truth file
//! ranked contributes `corpus_size + 1` to Effectiveness.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::localize::Mode;

/// One evaluated query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryOutcome {
    pub bug_id: String,
    pub ranked: Vec<String>,
    pub truth: BTreeSet<String>,
    /// Files in the index, used for the Effectiveness penalty.
    pub corpus_size: usize,
}

impl QueryOutcome {
    pub fn first_truth_rank(&self) -> Option<usize> {
        first_truth_rank(&self.ranked, &self.truth)
    }
}

/// 1-based rank of the first ground-truth file.
pub fn first_truth_rank<S: AsRef<str>>(ranked: &[S], truth: &BTreeSet<String>) -> Option<usize> {
    ranked
        .iter()
        .position(|p| truth.contains(p.as_ref()))
        .map(|i| i + 1)
}

pub fn reciprocal_rank<S: AsRef<str>>(ranked: &[S], truth: &BTreeSet<String>) -> f64 {
    first_truth_rank(ranked, truth).map_or(0.0, |r| 1.0 / r as f64)
}

/// Mean over all truth files of the precision at each one's rank.
pub fn average_precision<S: AsRef<str>>(ranked: &[S], truth: &BTreeSet<String>) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let mut found = 0usize;
    let mut sum = 0.0;
    for (i, p) in ranked.iter().enumerate() {
        if truth.contains(p.as_ref()) {
            found += 1;
            sum += found as f64 / (i + 1) as f64;
        }
    }
    sum / truth.len() as f64
}

/// Fraction of queries with a truth file in the top `k`.
pub fn hits_at_k(outcomes: &[QueryOutcome], k: usize) -> f64 {
    assert!(k >= 1, "k must be at least 1");
    mean(outcomes.iter().map(|o| match o.first_truth_rank() {
        Some(r) if r <= k => 1.0,
        _ => 0.0,
    }))
}

/// Mean first-truth rank (lower is better).
pub fn effectiveness(outcomes: &[QueryOutcome]) -> f64 {
    mean(
        outcomes
            .iter()
            .map(|o| o.first_truth_rank().unwrap_or(o.corpus_size + 1) as f64),
    )
}

pub fn mean_reciprocal_rank(outcomes: &[QueryOutcome]) -> f64 {
    mean(outcomes.iter().map(|o| reciprocal_rank(&o.ranked, &o.truth)))
}

pub fn mean_average_precision(outcomes: &[QueryOutcome]) -> f64 {
    mean(outcomes.iter().map(|o| average_precision(&o.ranked, &o.truth)))
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BugRow {
    pub bug_id: String,
    pub first_rank: Option<usize>,
    pub reciprocal_rank: f64,
    pub average_precision: f64,
    pub ranked_files: usize,
    pub corpus_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryFailure {
    pub bug_id: String,
    pub error: String,
}

/// Aggregate metrics for one localization mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mode: Mode,
    pub hits_at: BTreeMap<usize, f64>,
    pub mrr: f64,
    pub map: f64,
    pub effectiveness: f64,
    pub per_bug: Vec<BugRow>,
    #[serde(default)]
    pub failures: Vec<EntryFailure>,
}

impl MetricsReport {
    pub fn from_outcomes(mode: Mode, ks: &[usize], outcomes: &[QueryOutcome], failures: Vec<EntryFailure>) -> Self {
        let per_bug = outcomes
            .iter()
            .map(|o| BugRow {
                bug_id: o.bug_id.clone(),
                first_rank: o.first_truth_rank(),
                reciprocal_rank: reciprocal_rank(&o.ranked, &o.truth),
                average_precision: average_precision(&o.ranked, &o.truth),
                ranked_files: o.ranked.len(),
                corpus_size: o.corpus_size,
            })
            .collect();
        Self {
            mode,
            hits_at: ks.iter().map(|&k| (k, hits_at_k(outcomes, k))).collect(),
            mrr: mean_reciprocal_rank(outcomes),
            map: mean_average_precision(outcomes),
            effectiveness: effectiveness(outcomes),
            per_bug,
            failures,
        }
    }

    /// `(label, value)` pairs in display order: H@K…, MRR, MAP, E.
    pub fn metric_rows(&self) -> Vec<(String, f64)> {
        let mut rows: Vec<(String, f64)> = self
            .hits_at
            .iter()
            .map(|(k, v)| (format!("H@{k}"), *v))
            .collect();
        rows.push(("MRR".into(), self.mrr));
        rows.push(("MAP".into(), self.map));
        rows.push(("E".into(), self.effectiveness));
        rows
    }
}
