mod common;

use std::collections::BTreeSet;

use common::{ranking_case, RankingCase, RelationOracle};
use ladybug::embedding::{EmbeddingProvider, LexicalProvider};
use ladybug::localize::{boost_ranking, filter_ranking, rank_files, RankedList};
use ladybug::preprocess::{Origin, TokenStream};
use proptest::prelude::*;

fn case_strategy() -> impl Strategy<Value = RankingCase> {
    (
        prop::collection::vec((0usize..8, prop::collection::vec(0usize..10, 0..6), 0u32..20), 1..20),
        prop::collection::vec(prop::collection::vec(0usize..6, 1..3), 0..3),
        prop::collection::vec(0usize..4, 0..3),
    )
        .prop_map(|(files, comps, screens)| ranking_case(&files, &comps, &screens))
}

fn paths(r: &RankedList) -> Vec<String> {
    r.paths().map(str::to_string).collect()
}

fn is_subsequence(small: &[String], big: &[String]) -> bool {
    let mut it = big.iter();
    small.iter().all(|s| it.any(|b| b == s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn boost_is_a_stable_partition(case in case_strategy()) {
        let oracle = RelationOracle::new(&case.terms);
        let before = paths(&case.ranking);
        let boosted = boost_ranking(&case.ranking, &case.terms, &case.index);
        let flag = |p: &String| oracle.names_screen(p, &case.index.file_token_sets[p]);
        let expected: Vec<String> = before.iter().filter(|p| flag(p)).chain(before.iter().filter(|p| !flag(p))).cloned().collect();
        prop_assert_eq!(paths(&boosted), expected);
        for (i, e) in boosted.entries.iter().enumerate() {
            prop_assert_eq!(e.boosted, flag(&e.file_path));
            if e.boosted {
                prop_assert!(i <= before.iter().position(|p| *p == e.file_path).unwrap());
            }
        }
    }

    #[test]
    fn filter_is_a_subsequence_or_identity(case in case_strategy()) {
        let oracle = RelationOracle::new(&case.terms);
        let before = paths(&case.ranking);
        let filtered = filter_ranking(&case.ranking, &case.terms, &case.index);
        let after = paths(&filtered);
        let related: Vec<String> = before.iter().filter(|p| oracle.related(p, &case.index.file_token_sets[*p])).cloned().collect();
        if related.is_empty() {
            prop_assert_eq!(after, before);
        } else {
            prop_assert!(is_subsequence(&after, &before));
            prop_assert_eq!(after, related);
        }
        prop_assert!(filtered.entries.iter().all(|e| e.survived_filter));
    }

    #[test]
    fn screen_named_truth_never_loses_rank(case in case_strategy(), pick in 0usize..20) {
        let oracle = RelationOracle::new(&case.terms);
        let before = paths(&case.ranking);
        let truth: BTreeSet<String> = before
            .iter()
            .filter(|p| oracle.names_screen(p, &case.index.file_token_sets[*p]))
            .cycle()
            .skip(pick)
            .take(1)
            .cloned()
            .collect();
        let after = boost_ranking(&filter_ranking(&case.ranking, &case.terms, &case.index), &case.terms, &case.index);
        for t in &truth {
            let r0 = before.iter().position(|p| p == t).unwrap();
            let r1 = after.rank_of(t).expect("screen-named file survives the filter") - 1;
            prop_assert!(r1 <= r0, "{} moved from {} to {}", t, r0 + 1, r1 + 1);
        }
    }
}

#[test]
fn component_only_relation_can_lose_rank() {
    // G relates to the trace only through a component token; X names the
    // screen and is boosted past it.
    let case = ranking_case(
        &[(5, vec![4], 90), (0, vec![], 10)],
        &[vec![0]],
        &[0],
    );
    let g = case.ranking.entries[0].file_path.clone();
    let after = boost_ranking(&filter_ranking(&case.ranking, &case.terms, &case.index), &case.terms, &case.index);
    assert_eq!(after.rank_of(&g), Some(2));
}

fn query(tokens: &[&str]) -> TokenStream {
    TokenStream::new(tokens.iter().map(|s| s.to_string()).collect(), Origin::BugReport)
}

fn rank_toy(tokens: &[&str]) -> RankedList {
    let index = common::toy_index();
    let mut provider = LexicalProvider::new();
    let v = provider.embed_query(&query(tokens), index.lexical_model.as_ref()).unwrap();
    rank_files(&v, &index.provider, &index).unwrap()
}

#[test]
fn toy_corpus_matches_brute_force() {
    let segments = common::toy_segments();
    assert_eq!(segments.len(), 12);
    for q in [
        &["save", "note", "button"][..],
        &["database", "crash"],
        &["backup", "export", "file", "save"],
        &["view", "list", "sync", "queue", "unknown"],
        &["nothing", "matches"],
    ] {
        let ranking = rank_toy(q);
        let oracle = common::brute_force_ranking(&segments, &q.iter().map(|s| s.to_string()).collect::<Vec<_>>());
        let got: Vec<_> = ranking.entries.iter().map(|e| e.file_path.clone()).collect();
        let want: Vec<_> = oracle.iter().map(|(p, _)| p.clone()).collect();
        assert_eq!(got, want, "query {q:?}");
        for (e, (_, s)) in ranking.entries.iter().zip(&oracle) {
            assert!((e.score - s).abs() < 1e-12, "{} {} vs {}", e.file_path, e.score, s);
        }
    }
}

#[test]
fn query_equal_to_a_segment_scores_one() {
    for s in common::toy_segments() {
        let tokens: Vec<&str> = s.tokens.iter().map(String::as_str).collect();
        let ranking = rank_toy(&tokens);
        let entry = &ranking.entries[ranking.rank_of(&s.file_path).unwrap() - 1];
        assert_eq!(entry.score, 1.0, "{}#{}", s.file_path, s.segment_index);
    }
}

#[test]
fn six_file_filter_fixture() {
    // files 0..6: EditNoteActivity (screen), two sharing a component token,
    // three unrelated
    let case = ranking_case(
        &[
            (0, vec![1, 0], 50),
            (5, vec![4], 95),
            (6, vec![5], 80),
            (7, vec![6], 99),
            (4, vec![7], 70),
            (5, vec![9], 60),
        ],
        &[vec![0, 1], vec![5]],
        &[0],
    );
    let filtered = filter_ranking(&case.ranking, &case.terms, &case.index);
    let kept: Vec<_> = filtered.paths().collect();
    assert_eq!(kept.len(), 3, "{kept:?}");
    let boosted = boost_ranking(&filtered, &case.terms, &case.index);
    assert!(boosted.entries[0].file_path.ends_with("EditNoteActivity.java"));
    assert!(boosted.entries[0].boosted);
    assert!(boosted.entries[1..].iter().all(|e| !e.boosted));
}
