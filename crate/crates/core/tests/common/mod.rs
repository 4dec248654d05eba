//! Independent oracles and fixtures shared by the integration tests and the
//! acceptance suite. Nothing here calls the code it checks, except to build
//! inputs.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use ladybug::embedding::{EmbeddingVector, LexicalProvider, ProviderIdentity, SegmentEmbedding};
use ladybug::embedding::EmbeddingProvider;
use ladybug::index_store::CorpusIndex;
use ladybug::localize::{Mode, RankEntry, RankedList};
use ladybug::preprocess::{normalize_token, Segment};
use ladybug::trace::{GuiScreenTerm, GuiTermSet};
use regex::{Captures, Regex};

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// Comment/import stripping by regular expressions, one alternation scanned
/// left to right so that literals shield comment markers and vice versa.
pub fn sanitize_oracle(raw: &str) -> String {
    let lexer = Regex::new(concat!(
        r#"(?ms)(?P<tb>""".*?(?:"""|\z))"#,
        r#"|(?P<str>"(?:\\.|[^"\\\n])*(?:"|$))"#,
        r#"|(?P<chr>'(?:\\.|[^'\\\n])*(?:'|$))"#,
        r#"|(?P<lc>//[^\n]*)"#,
        r#"|(?P<bc>/\*.*?(?:\*/|\z))"#,
        r#"|(?P<dir>^[ \t\r\x{feff}]*(?:import|package)[^A-Za-z0-9_$][^\n]*)"#,
    ))
    .unwrap();
    let escape = Regex::new(r"\\(?:u+[0-9a-fA-F]{0,4}|[0-7]{1,3}|.|\z)").unwrap();

    let stripped = lexer.replace_all(raw, |c: &Captures| {
        let literal = c
            .name("tb")
            .map(|m| &m.as_str()[3..m.as_str().len().saturating_sub(3).max(3)])
            .or_else(|| c.name("str").or(c.name("chr")).map(|m| m.as_str()));
        match literal {
            Some(body) => format!(" {} ", escape.replace_all(body, " ")),
            None if c.name("dir").is_some() => String::new(),
            None => " ".to_string(),
        }
    });
    let spaced: String = stripped
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { ' ' })
        .collect();
    spaced.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub mod metrics {
    //! Brute-force metric definitions.
    use std::collections::BTreeSet;

    pub fn first_rank(ranked: &[String], truth: &BTreeSet<String>) -> Option<usize> {
        (1..=ranked.len()).find(|&k| ranked[..k].iter().any(|p| truth.contains(p)))
    }

    pub fn rr(ranked: &[String], truth: &BTreeSet<String>) -> f64 {
        first_rank(ranked, truth).map_or(0.0, |k| 1.0 / k as f64)
    }

    pub fn ap(ranked: &[String], truth: &BTreeSet<String>) -> f64 {
        let mut total = 0.0;
        for t in truth {
            if let Some(pos) = ranked.iter().position(|p| p == t) {
                let r = pos + 1;
                let prefix: BTreeSet<&String> = ranked[..r].iter().collect();
                let hits = truth.iter().filter(|x| prefix.contains(x)).count();
                total += hits as f64 / r as f64;
            }
        }
        total / truth.len() as f64
    }

    pub fn hit(ranked: &[String], truth: &BTreeSet<String>, k: usize) -> f64 {
        if ranked.iter().take(k).any(|p| truth.contains(p)) {
            1.0
        } else {
            0.0
        }
    }

    pub fn first_rank_or_penalty(ranked: &[String], truth: &BTreeSet<String>, corpus: usize) -> f64 {
        truth
            .iter()
            .filter_map(|t| ranked.iter().position(|p| p == t))
            .min()
            .map_or(corpus as f64 + 1.0, |i| i as f64 + 1.0)
    }
}

/// Screen-relation predicates written out directly from their definitions.
pub struct RelationOracle {
    component: BTreeSet<String>,
    names: BTreeSet<String>,
    forms: Vec<BTreeSet<String>>,
}

impl RelationOracle {
    pub fn new(terms: &GuiTermSet) -> Self {
        let mut component = BTreeSet::new();
        for term in &terms.screen_component_terms {
            for t in term {
                if let Some(n) = normalize_token(t) {
                    component.insert(n);
                }
            }
        }
        let names = terms.gui_screen_terms.iter().map(|s| s.class_name.clone()).collect();
        let mut forms = Vec::new();
        for s in &terms.gui_screen_terms {
            let form: BTreeSet<String> = s.tokens.iter().filter_map(|t| normalize_token(t)).collect();
            if !form.is_empty() {
                forms.push(form);
            }
        }
        Self { component, names, forms }
    }

    pub fn names_screen(&self, path: &str, tokens: &BTreeSet<String>) -> bool {
        let file = path.rsplit('/').next().unwrap_or(path);
        let stem = file.strip_suffix(".java").unwrap_or(file);
        self.names.contains(stem) || self.forms.iter().any(|f| f.is_subset(tokens))
    }

    pub fn related(&self, path: &str, tokens: &BTreeSet<String>) -> bool {
        !self.component.is_disjoint(tokens) || self.names_screen(path, tokens)
    }
}

/// A small world of files, tokens and GUI terms for ranking-algebra checks.
#[derive(Debug, Clone)]
pub struct RankingCase {
    pub ranking: RankedList,
    pub index: CorpusIndex,
    pub terms: GuiTermSet,
}

pub const CASE_WORDS: &[&str] = &["note", "edit", "activ", "list", "save", "button", "sync", "titl", "view", "main"];
pub const CASE_SCREENS: &[&str] = &["EditNoteActivity", "NoteListActivity", "MainActivity", "SyncFragment"];
pub const CASE_COMPONENT_WORDS: &[&str] = &["save", "button", "title", "list", "sync", "view"];

/// Builds a case from index choices, so it can be driven by any generator.
pub fn ranking_case(
    files: &[(usize, Vec<usize>, u32)],
    components: &[Vec<usize>],
    screens: &[usize],
) -> RankingCase {
    let mut token_sets = BTreeMap::new();
    let mut entries = Vec::new();
    for (i, (name, tokens, score)) in files.iter().enumerate() {
        let stem = if *name < CASE_SCREENS.len() {
            CASE_SCREENS[*name].to_string()
        } else {
            format!("Other{name}")
        };
        let path = format!("src/f{i}/{stem}.java");
        token_sets.insert(
            path.clone(),
            tokens.iter().map(|&t| CASE_WORDS[t % CASE_WORDS.len()].to_string()).collect(),
        );
        entries.push(RankEntry {
            file_path: path,
            score: f64::from(*score) / 100.0,
            boosted: false,
            survived_filter: true,
        });
    }
    entries.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.file_path.cmp(&b.file_path)));
    let segment_embeddings = token_sets
        .keys()
        .map(|p| SegmentEmbedding {
            file_path: p.clone(),
            segment_index: 0,
            vector: EmbeddingVector::new(vec![1.0]).unwrap(),
        })
        .collect();
    let index = CorpusIndex {
        commit_id: "case".into(),
        provider: ProviderIdentity {
            name: "case".into(),
            version: "1".into(),
            dimension: 1,
        },
        segment_embeddings,
        file_token_sets: token_sets,
        lexical_model: None,
    };
    let terms = GuiTermSet {
        screen_component_terms: components
            .iter()
            .map(|c| c.iter().map(|&w| CASE_COMPONENT_WORDS[w % CASE_COMPONENT_WORDS.len()].to_string()).collect())
            .collect(),
        gui_screen_terms: screens
            .iter()
            .map(|&s| {
                let name = CASE_SCREENS[s % CASE_SCREENS.len()];
                GuiScreenTerm {
                    class_name: name.to_string(),
                    tokens: ladybug::preprocess::split_identifier(name),
                }
            })
            .collect(),
    };
    RankingCase {
        ranking: RankedList {
            entries,
            mode: Mode::Gui,
            commit_id: "case".into(),
        },
        index,
        terms,
    }
}

/// Five files, twelve segments, hand-picked token lists.
pub fn toy_segments() -> Vec<Segment> {
    let files: [(&str, &[&str]); 5] = [
        ("a/Alpha.java", &["save note button", "note list view", "sync queue"]),
        ("a/Beta.java", &["database open close", "database query note"]),
        ("b/Gamma.java", &["button click listen", "save button save", "view layout inflat"]),
        ("b/Delta.java", &["export backup file", "backup restor"]),
        ("c/Epsilon.java", &["crash report except", "thread crash handler save"]),
    ];
    let mut out = Vec::new();
    for (path, segments) in files {
        for (i, text) in segments.iter().enumerate() {
            out.push(Segment {
                file_path: path.to_string(),
                segment_index: i,
                tokens: text.split(' ').map(str::to_string).collect(),
            });
        }
    }
    out
}

pub fn toy_index() -> CorpusIndex {
    let segments = toy_segments();
    let mut provider = LexicalProvider::new();
    let embedded = provider.embed_corpus(&segments).unwrap();
    let mut token_sets: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for s in &segments {
        token_sets.entry(s.file_path.clone()).or_default().extend(s.tokens.iter().cloned());
    }
    let mut pairs: Vec<_> = segments.into_iter().zip(embedded.vectors).collect();
    pairs.sort_by(|a, b| (&a.0.file_path, a.0.segment_index).cmp(&(&b.0.file_path, b.0.segment_index)));
    CorpusIndex {
        commit_id: "toy".into(),
        provider: embedded.identity,
        segment_embeddings: pairs
            .into_iter()
            .map(|(s, vector)| SegmentEmbedding {
                file_path: s.file_path,
                segment_index: s.segment_index,
                vector,
            })
            .collect(),
        file_token_sets: token_sets,
        lexical_model: embedded.lexical_model,
    }
}

/// Scores every (file, segment) pair from first principles: raw term counts
/// weighted by ln((N+1)/(df+1)) + 1, cosine, best segment per file, then
/// descending score with ties by path.
pub fn brute_force_ranking(segments: &[Segment], query: &[String]) -> Vec<(String, f64)> {
    let n = segments.len() as f64;
    let mut df: BTreeMap<&str, f64> = BTreeMap::new();
    for s in segments {
        let distinct: BTreeSet<&str> = s.tokens.iter().map(String::as_str).collect();
        for t in distinct {
            *df.entry(t).or_default() += 1.0;
        }
    }
    let weigh = |tokens: &[String]| -> BTreeMap<&str, f64> {
        let mut w: BTreeMap<&str, f64> = BTreeMap::new();
        for t in tokens {
            if let Some(d) = df.get(t.as_str()) {
                *w.entry(df.get_key_value(t.as_str()).unwrap().0).or_default() += ((n + 1.0) / (d + 1.0)).ln() + 1.0;
            }
        }
        w
    };
    let q = weigh(query);
    let mut best: BTreeMap<String, f64> = BTreeMap::new();
    for s in segments {
        let v = weigh(&s.tokens);
        let dot: f64 = q.iter().map(|(t, a)| a * v.get(t).copied().unwrap_or(0.0)).sum();
        let nq: f64 = q.values().map(|a| a * a).sum::<f64>().sqrt();
        let nv: f64 = v.values().map(|a| a * a).sum::<f64>().sqrt();
        let c = if nq == 0.0 || nv == 0.0 { 0.0 } else { dot / (nq * nv) };
        let e = best.entry(s.file_path.clone()).or_insert(f64::NEG_INFINITY);
        *e = e.max(c);
    }
    let mut out: Vec<_> = best.into_iter().collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}
