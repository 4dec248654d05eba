use serde::{Deserialize, Serialize};

use super::TokenStream;

/// Maximum number of tokens in one segment.
pub const SEGMENT_TOKEN_LIMIT: usize = 500;

/// A contiguous slice of one file's normalized token stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub file_path: String,
    pub segment_index: usize,
    pub tokens: Vec<String>,
}

/// Splits a normalized stream into segments of at most
/// [`SEGMENT_TOKEN_LIMIT`] tokens.
///
/// Streams that do not exceed the limit yield exactly one segment, possibly
/// empty. Longer streams are cut greedily at the latest method boundary that
/// keeps the segment within the limit, or at the limit itself when there is
/// no such boundary.
pub fn segment(file_path: &str, tokens: &TokenStream) -> Vec<Segment> {
    cut_points(tokens.tokens.len(), &tokens.boundaries, SEGMENT_TOKEN_LIMIT)
        .windows(2)
        .enumerate()
        .map(|(segment_index, w)| Segment {
            file_path: file_path.to_string(),
            segment_index,
            tokens: tokens.tokens[w[0]..w[1]].to_vec(),
        })
        .collect()
}

/// Segment edges `0 = c0 < c1 < … < cn = len` (just `[0, 0]` for empty input).
fn cut_points(len: usize, boundaries: &[usize], limit: usize) -> Vec<usize> {
    let mut cuts = vec![0];
    let mut start = 0;
    while len - start > limit {
        let max_end = start + limit;
        let end = boundaries
            .iter()
            .copied()
            .filter(|&b| b > start && b <= max_end)
            .max()
            .unwrap_or(max_end);
        cuts.push(end);
        start = end;
    }
    cuts.push(len);
    cuts
}
