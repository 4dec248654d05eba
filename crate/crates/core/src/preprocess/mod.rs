//! Source and bug-report preprocessing: sanitization, tokenization,
//! normalization and segmentation.

mod normalize;
mod sanitize;
mod segment;
mod tokenize;

use serde::{Deserialize, Serialize};

pub use normalize::{normalize, normalize_token, stem, StopList};
pub use sanitize::{sanitize, sanitize_source, SanitizedText};
pub use segment::{segment, Segment, SEGMENT_TOKEN_LIMIT};
pub use tokenize::{split_identifier, tokenize, tokenize_sanitized};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    SourceFile,
    BugReport,
}

/// Ordered lowercase tokens.
///
/// `boundaries` holds token offsets where a method ends; segmentation may cut
/// there. Offsets are strictly increasing and lie in `1..tokens.len()`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStream {
    pub tokens: Vec<String>,
    pub origin: Origin,
    #[serde(default)]
    pub boundaries: Vec<usize>,
}

impl TokenStream {
    pub fn new(tokens: Vec<String>, origin: Origin) -> Self {
        Self {
            tokens,
            origin,
            boundaries: Vec::new(),
        }
    }

    pub fn with_boundaries(tokens: Vec<String>, origin: Origin, mut boundaries: Vec<usize>) -> Self {
        let len = tokens.len();
        boundaries.sort_unstable();
        boundaries.dedup();
        boundaries.retain(|&b| b > 0 && b < len);
        Self {
            tokens,
            origin,
            boundaries,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// A Java file after the full preprocessing pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessedFile {
    pub path: String,
    pub tokens: TokenStream,
    pub segments: Vec<Segment>,
}

/// sanitize → tokenize → normalize → segment.
pub fn preprocess_source(path: &str, raw_text: &str) -> PreprocessedFile {
    let sanitized = sanitize_source(raw_text);
    let tokens = normalize(&tokenize_sanitized(&sanitized));
    let segments = segment(path, &tokens);
    PreprocessedFile {
        path: path.to_string(),
        tokens,
        segments,
    }
}

/// Bug-report text → normalized query tokens. Reports are never segmented.
pub fn query_tokens(report_text: &str) -> TokenStream {
    let mut stream = normalize(&tokenize(report_text));
    stream.origin = Origin::BugReport;
    stream
}
