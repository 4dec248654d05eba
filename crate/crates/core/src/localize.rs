//! Ranking pipeline: query reformulation, similarity ranking, screen
//! filtering and screen boosting.

use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embedding::{cosine, EmbedError, EmbeddingProvider, EmbeddingVector, ProviderIdentity};
use crate::index_store::CorpusIndex;
use crate::preprocess::{normalize_token, query_tokens};
use crate::trace::{ExecutionTrace, GuiTermSet};

#[derive(Debug, thiserror::Error)]
pub enum LocalizeError {
    #[error("GUI augmentation requested but no execution trace was supplied")]
    MissingTrace,
    #[error("query embedded by {query} but index built by {index}")]
    ProviderMismatch { index: String, query: String },
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Gui,
    NoGui,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub file_path: String,
    pub score: f64,
    pub boosted: bool,
    pub survived_filter: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub entries: Vec<RankEntry>,
    pub mode: Mode,
    pub commit_id: String,
}

impl RankedList {
    pub fn paths(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.iter().map(|e| e.file_path.as_str())
    }

    /// 1-based rank of `path`.
    pub fn rank_of(&self, path: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.file_path == path).map(|i| i + 1)
    }

    /// Numbered markdown list of the first `top_k` entries.
    pub fn to_markdown(&self, top_k: usize) -> String {
        let mut out = String::new();
        for (i, e) in self.entries.iter().take(top_k).enumerate() {
            out.push_str(&format!("{}. {} — score {:.4}", i + 1, e.file_path, e.score));
            if e.boosted {
                out.push_str(" (boosted)");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalizeConfig {
    pub use_query_reformulation: bool,
    pub use_filtering: bool,
    pub use_boosting: bool,
    pub top_k_display: usize,
}

impl LocalizeConfig {
    /// All three augmentations on.
    pub fn gui() -> Self {
        Self {
            use_query_reformulation: true,
            use_filtering: true,
            use_boosting: true,
            top_k_display: 10,
        }
    }

    /// Text-only baseline.
    pub fn no_gui() -> Self {
        Self {
            use_query_reformulation: false,
            use_filtering: false,
            use_boosting: false,
            top_k_display: 10,
        }
    }

    pub fn for_mode(mode: Mode) -> Self {
        match mode {
            Mode::Gui => Self::gui(),
            Mode::NoGui => Self::no_gui(),
        }
    }

    pub fn mode(&self) -> Mode {
        if self.use_query_reformulation || self.use_filtering || self.use_boosting {
            Mode::Gui
        } else {
            Mode::NoGui
        }
    }
}

/// Appends each distinct Screen Component term to the report, in order.
pub fn reformulate_query(report_text: &str, sc_terms: &[Vec<String>]) -> String {
    let mut seen = HashSet::new();
    let appended: Vec<&str> = sc_terms
        .iter()
        .filter(|term| seen.insert(*term))
        .flatten()
        .map(String::as_str)
        .collect();
    if appended.is_empty() {
        report_text.to_string()
    } else {
        format!("{report_text} {}", appended.join(" "))
    }
}

/// Scores every file by its best segment's cosine similarity to the query.
/// Ties are broken by path.
pub fn rank_files(
    query: &EmbeddingVector,
    query_provider: &ProviderIdentity,
    index: &CorpusIndex,
) -> Result<RankedList, LocalizeError> {
    if query_provider.key() != index.provider.key()
        || query.dimension() != index.provider.dimension
    {
        return Err(LocalizeError::ProviderMismatch {
            index: format!("{}/{}", index.provider.key(), index.provider.dimension),
            query: format!("{}/{}", query_provider.key(), query.dimension()),
        });
    }
    let mut entries = Vec::with_capacity(index.file_count());
    for (path, segments) in index.segments_by_file() {
        let mut best = f64::NEG_INFINITY;
        for s in segments {
            best = best.max(cosine(query, &s.vector)?);
        }
        entries.push(RankEntry {
            file_path: path.to_string(),
            score: best,
            boosted: false,
            survived_filter: true,
        });
    }
    entries.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.file_path.cmp(&b.file_path))
    });
    Ok(RankedList {
        entries,
        mode: Mode::NoGui,
        commit_id: index.commit_id.clone(),
    })
}

/// The screen-relation tests, with term tokens put through the same
/// normalization as the indexed file tokens.
#[derive(Debug, Clone)]
pub struct ScreenMatcher {
    component_tokens: BTreeSet<String>,
    screen_names: BTreeSet<String>,
    screen_forms: Vec<Vec<String>>,
}

impl ScreenMatcher {
    pub fn new(terms: &GuiTermSet) -> Self {
        let component_tokens = terms
            .screen_component_terms
            .iter()
            .flatten()
            .filter_map(|t| normalize_token(t))
            .collect();
        let screen_names = terms
            .gui_screen_terms
            .iter()
            .map(|t| t.class_name.clone())
            .collect();
        let screen_forms = terms
            .gui_screen_terms
            .iter()
            .map(|t| t.tokens.iter().filter_map(|tok| normalize_token(tok)).collect::<Vec<_>>())
            .filter(|form| !form.is_empty())
            .collect();
        Self {
            component_tokens,
            screen_names,
            screen_forms,
        }
    }

    /// File name (without `.java`) equals a screen class name, or the file
    /// contains every token of a screen's split name.
    pub fn names_screen(&self, path: &str, tokens: &BTreeSet<String>) -> bool {
        let stem = Path::new(path)
            .file_stem()
            .map(|s| s.to_string_lossy())
            .unwrap_or_default();
        self.screen_names.contains(stem.as_ref())
            || self
                .screen_forms
                .iter()
                .any(|form| form.iter().all(|t| tokens.contains(t)))
    }

    /// [`names_screen`](Self::names_screen), or the file shares a token with
    /// any Screen Component term.
    pub fn is_related(&self, path: &str, tokens: &BTreeSet<String>) -> bool {
        self.component_tokens.iter().any(|t| tokens.contains(t)) || self.names_screen(path, tokens)
    }
}

fn tokens_of<'a>(index: &'a CorpusIndex, path: &str) -> &'a BTreeSet<String> {
    static EMPTY: BTreeSet<String> = BTreeSet::new();
    index.file_token_sets.get(path).unwrap_or(&EMPTY)
}

/// Removes files unrelated to the trace's screens, keeping order. When no
/// file is related the ranking is returned unchanged.
pub fn filter_ranking(ranking: &RankedList, terms: &GuiTermSet, index: &CorpusIndex) -> RankedList {
    let matcher = ScreenMatcher::new(terms);
    let keep: Vec<bool> = ranking
        .entries
        .iter()
        .map(|e| matcher.is_related(&e.file_path, tokens_of(index, &e.file_path)))
        .collect();
    if !keep.contains(&true) {
        let mut unchanged = ranking.clone();
        unchanged.entries.iter_mut().for_each(|e| e.survived_filter = true);
        return unchanged;
    }
    RankedList {
        entries: ranking
            .entries
            .iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|(e, _)| RankEntry {
                survived_filter: true,
                ..e.clone()
            })
            .collect(),
        mode: ranking.mode,
        commit_id: ranking.commit_id.clone(),
    }
}

/// Moves files that name a visited screen to the front, preserving relative
/// order on both sides.
pub fn boost_ranking(ranking: &RankedList, terms: &GuiTermSet, index: &CorpusIndex) -> RankedList {
    let matcher = ScreenMatcher::new(terms);
    let (mut boosted, rest): (Vec<RankEntry>, Vec<RankEntry>) = ranking
        .entries
        .iter()
        .cloned()
        .map(|mut e| {
            e.boosted = matcher.names_screen(&e.file_path, tokens_of(index, &e.file_path));
            e
        })
        .partition(|e| e.boosted);
    boosted.extend(rest);
    RankedList {
        entries: boosted,
        mode: ranking.mode,
        commit_id: ranking.commit_id.clone(),
    }
}

/// Runs the configured pipeline: reformulate → embed → rank → filter → boost.
/// With every augmentation off this is embed → rank on the raw report.
pub fn localize(
    report_text: &str,
    trace: Option<&ExecutionTrace>,
    index: &CorpusIndex,
    config: &LocalizeConfig,
    provider: &mut dyn EmbeddingProvider,
) -> Result<RankedList, LocalizeError> {
    let mode = config.mode();
    let terms = match (mode, trace) {
        (Mode::NoGui, _) => GuiTermSet::default(),
        (Mode::Gui, Some(t)) => GuiTermSet::from_trace(t),
        (Mode::Gui, None) => return Err(LocalizeError::MissingTrace),
    };

    let query_text = if config.use_query_reformulation {
        reformulate_query(report_text, &terms.screen_component_terms)
    } else {
        report_text.to_string()
    };
    let key = provider.key()?;
    let query = provider.embed_query(&query_tokens(&query_text), index.lexical_model.as_ref())?;
    let query_identity = ProviderIdentity {
        name: key.name,
        version: key.version,
        dimension: query.dimension(),
    };

    let mut ranking = rank_files(&query, &query_identity, index)?;
    ranking.mode = mode;
    if config.use_filtering {
        ranking = filter_ranking(&ranking, &terms, index);
    }
    if config.use_boosting {
        ranking = boost_ranking(&ranking, &terms, index);
    }
    Ok(ranking)
}
