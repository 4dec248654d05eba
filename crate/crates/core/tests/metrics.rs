mod common;

use std::collections::BTreeSet;

use common::metrics as oracle;
use ladybug::eval::{
    average_precision, effectiveness, hits_at_k, mean_average_precision, mean_reciprocal_rank, reciprocal_rank,
    QueryOutcome,
};
use proptest::prelude::*;

/// A ranking over a corpus of up to 20 files with up to 4 truth files, some
/// of which may be missing from the ranking.
fn outcome() -> impl Strategy<Value = QueryOutcome> {
    (1usize..=20)
        .prop_flat_map(|corpus| {
            (
                Just(corpus),
                Just((0..corpus).collect::<Vec<_>>()).prop_shuffle(),
                0..=corpus,
                prop::collection::btree_set(0..corpus + 2, 1..=4),
            )
        })
        .prop_map(|(corpus, order, shown, truth)| QueryOutcome {
            bug_id: "q".into(),
            ranked: order[..shown].iter().map(|i| format!("F{i}.java")).collect(),
            truth: truth.into_iter().map(|i| format!("F{i}.java")).collect::<BTreeSet<_>>(),
            corpus_size: corpus,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn per_query_metrics_match_oracle(o in outcome()) {
        prop_assert!((reciprocal_rank(&o.ranked, &o.truth) - oracle::rr(&o.ranked, &o.truth)).abs() <= 1e-9);
        prop_assert!((average_precision(&o.ranked, &o.truth) - oracle::ap(&o.ranked, &o.truth)).abs() <= 1e-9);
        let ap = average_precision(&o.ranked, &o.truth);
        prop_assert!(ap <= 1.0);
        if o.truth.len() == 1 {
            prop_assert_eq!(ap, reciprocal_rank(&o.ranked, &o.truth));
        }
    }

    #[test]
    fn aggregate_metrics_match_oracle(queries in prop::collection::vec(outcome(), 1..6)) {
        let n = queries.len() as f64;
        let mut previous = 0.0;
        for k in [1usize, 5, 10] {
            let want: f64 = queries.iter().map(|q| oracle::hit(&q.ranked, &q.truth, k)).sum::<f64>() / n;
            let got = hits_at_k(&queries, k);
            prop_assert!((got - want).abs() <= 1e-9);
            prop_assert!(got >= previous);
            previous = got;
        }
        let mrr: f64 = queries.iter().map(|q| oracle::rr(&q.ranked, &q.truth)).sum::<f64>() / n;
        let map: f64 = queries.iter().map(|q| oracle::ap(&q.ranked, &q.truth)).sum::<f64>() / n;
        let e: f64 = queries.iter().map(|q| oracle::first_rank_or_penalty(&q.ranked, &q.truth, q.corpus_size)).sum::<f64>() / n;
        prop_assert!((mean_reciprocal_rank(&queries) - mrr).abs() <= 1e-9);
        prop_assert!((mean_average_precision(&queries) - map).abs() <= 1e-9);
        prop_assert!((effectiveness(&queries) - e).abs() <= 1e-9);
        prop_assert!(effectiveness(&queries) >= 1.0);
    }
}
