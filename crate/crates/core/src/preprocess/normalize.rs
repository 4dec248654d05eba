use std::collections::BTreeSet;
use std::sync::LazyLock;

use rust_stemmers::{Algorithm, Stemmer};

use super::TokenStream;

const BUNDLED_STOP_LIST: &str = include_str!("../../resources/stoplist.txt");

/// Fixed-point iteration cap; English Snowball converges in one or two passes.
const MAX_STEM_PASSES: usize = 8;

static STOP_LIST: LazyLock<StopList> = LazyLock::new(|| StopList::parse(BUNDLED_STOP_LIST));
static STEMMER: LazyLock<Stemmer> = LazyLock::new(|| Stemmer::create(Algorithm::English));

/// Tokens removed during normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopList {
    words: BTreeSet<String>,
}

impl StopList {
    /// Parses the resource format: one token per line, `#` starts a comment.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(|line| line.split('#').next().unwrap_or("").trim())
            .filter(|word| !word.is_empty())
            .map(str::to_lowercase)
            .collect();
        Self { words }
    }

    /// The list shipped with the crate.
    pub fn bundled() -> &'static StopList {
        &STOP_LIST
    }

    /// Single characters are always stop tokens.
    pub fn contains(&self, token: &str) -> bool {
        token.chars().count() <= 1 || self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Stems to a fixed point.
pub fn stem(token: &str) -> String {
    let mut current = token.to_string();
    for _ in 0..MAX_STEM_PASSES {
        let next = STEMMER.stem(&current);
        if next == current {
            break;
        }
        current = next.into_owned();
    }
    current
}

/// Normalizes one token; `None` when it is dropped.
pub fn normalize_token(token: &str) -> Option<String> {
    let lowered = token.to_ascii_lowercase();
    if STOP_LIST.contains(&lowered) {
        return None;
    }
    let stemmed = stem(&lowered);
    (stemmed.chars().count() > 1).then_some(stemmed)
}

/// Drops stop tokens (English stop words, Java reserved words, single
/// characters) and stems the rest. Method boundaries are remapped onto the
/// surviving tokens.
///
/// The stop test runs on the unstemmed token, so a stem that coincides with
/// a stop word (`classes` → `class`) survives one pass but not a second.
pub fn normalize(stream: &TokenStream) -> TokenStream {
    let mut tokens = Vec::with_capacity(stream.tokens.len());
    let mut boundaries = Vec::with_capacity(stream.boundaries.len());
    let mut pending = stream.boundaries.iter().copied().peekable();
    for (i, token) in stream.tokens.iter().enumerate() {
        while pending.next_if(|&b| b <= i).is_some() {
            boundaries.push(tokens.len());
        }
        if let Some(t) = normalize_token(token) {
            tokens.push(t);
        }
    }
    TokenStream::with_boundaries(tokens, stream.origin, boundaries)
}

#[cfg(test)]
mod tests {
    use super::super::Origin;
    use super::*;

    fn norm(tokens: &[&str]) -> Vec<String> {
        let stream = TokenStream::new(tokens.iter().map(|s| s.to_string()).collect(), Origin::SourceFile);
        normalize(&stream).tokens
    }

    #[test]
    fn stop_words_and_plurals() {
        assert_eq!(norm(&["the", "public", "buttons"]), ["button"]);
        assert!(norm(&[]).is_empty());
    }

    #[test]
    fn stems_match_reference_stemmer() {
        assert_eq!(norm(&["running", "classes", "if"]), ["run", "class"]);
    }

    /// Expected stems frozen from NLTK's SnowballStemmer("english").
    #[test]
    fn frozen_reference_stems() {
        let table = [
            ("running", "run"),
            ("classes", "class"),
            ("buttons", "button"),
            ("activity", "activ"),
            ("activities", "activ"),
            ("settings", "set"),
            ("generalization", "general"),
            ("connection", "connect"),
            ("relational", "relat"),
            ("happiness", "happi"),
            ("saved", "save"),
            ("saving", "save"),
            ("editing", "edit"),
            ("notes", "note"),
            ("fragments", "fragment"),
            ("login", "login"),
        ];
        for (word, expected) in table {
            assert_eq!(stem(word), expected, "stem of {word}");
        }
    }

    #[test]
    fn single_characters_and_digits() {
        assert_eq!(norm(&["x", "2", "404", "v7"]), ["404", "v7"]);
    }

    #[test]
    fn boundaries_follow_surviving_tokens() {
        let stream = TokenStream::with_boundaries(
            ["class", "note", "void", "save", "the", "edit"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            Origin::SourceFile,
            vec![2, 4],
        );
        let out = normalize(&stream);
        assert_eq!(out.tokens, ["note", "save", "edit"]);
        assert_eq!(out.boundaries, [1, 2]);
    }

    #[test]
    fn stop_list_parsing() {
        let list = StopList::parse("# header\nfoo\n  Bar  # trailing\n\n");
        assert_eq!(list.len(), 2);
        assert!(list.contains("foo") && list.contains("bar") && list.contains("q"));
        assert!(!list.contains("baz"));
        assert!(StopList::bundled().contains("synchronized"));
        assert!(StopList::bundled().contains("themselves"));
    }
}
