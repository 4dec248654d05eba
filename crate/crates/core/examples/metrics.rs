//! Computes the ranking metrics for a few hand-made rankings.

use std::collections::BTreeSet;

use ladybug::eval::{effectiveness, hits_at_k, mean_average_precision, mean_reciprocal_rank, QueryOutcome};

pub fn run() -> Vec<f64> {
    let query = |id: &str, ranked: &[&str], truth: &[&str]| QueryOutcome {
        bug_id: id.into(),
        ranked: ranked.iter().map(|s| s.to_string()).collect(),
        truth: truth.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>(),
        corpus_size: ranked.len(),
    };
    let outcomes = [
        query("b1", &["A.java", "B.java", "C.java"], &["A.java"]),
        query("b2", &["A.java", "B.java", "C.java"], &["C.java", "B.java"]),
        query("b3", &["A.java", "B.java"], &["Missing.java"]),
    ];
    let values = vec![
        hits_at_k(&outcomes, 1),
        hits_at_k(&outcomes, 5),
        mean_reciprocal_rank(&outcomes),
        mean_average_precision(&outcomes),
        effectiveness(&outcomes),
    ];
    for (label, v) in ["H@1", "H@5", "MRR", "MAP", "E"].iter().zip(&values) {
        println!("{label:>4} {v:.4}");
    }
    values
}

#[allow(dead_code)]
fn main() {
    run();
}
