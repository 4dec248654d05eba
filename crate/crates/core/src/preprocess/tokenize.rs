use super::{Origin, SanitizedText, TokenStream};

/// Splits text into lowercase identifier parts.
///
/// Any character outside `[A-Za-z0-9]` separates tokens. Each remaining run
/// is split at camelCase humps, at the last capital of an acronym run that is
/// followed by a lowercase letter (`HTTPResponse` → `http`, `response`), and
/// at letter/digit transitions. Only the parts are kept, never the compound.
pub fn tokenize(sanitized_text: &str) -> TokenStream {
    let mut tokens = Vec::new();
    push_tokens(sanitized_text, &mut tokens);
    TokenStream::new(tokens, Origin::SourceFile)
}

/// Tokenizes sanitized source, carrying method boundaries over as token offsets.
pub fn tokenize_sanitized(sanitized: &SanitizedText) -> TokenStream {
    let mut tokens = Vec::new();
    let mut boundaries = Vec::new();
    for piece in sanitized.pieces() {
        if !tokens.is_empty() {
            boundaries.push(tokens.len());
        }
        push_tokens(piece, &mut tokens);
    }
    TokenStream::with_boundaries(tokens, Origin::SourceFile, boundaries)
}

/// Splits one identifier into its lowercase parts.
pub fn split_identifier(word: &str) -> Vec<String> {
    let mut parts = Vec::new();
    push_tokens(word, &mut parts);
    parts
}

fn push_tokens(text: &str, out: &mut Vec<String>) {
    for run in text.split(|c: char| !c.is_ascii_alphanumeric()) {
        if !run.is_empty() {
            split_run(run.as_bytes(), out);
        }
    }
}

fn split_run(b: &[u8], out: &mut Vec<String>) {
    let mut start = 0;
    for i in 1..b.len() {
        let (prev, cur) = (b[i - 1], b[i]);
        let hump = prev.is_ascii_lowercase() && cur.is_ascii_uppercase();
        let kind_change = prev.is_ascii_digit() != cur.is_ascii_digit();
        let acronym_end = prev.is_ascii_uppercase()
            && cur.is_ascii_uppercase()
            && b.get(i + 1).is_some_and(|n| n.is_ascii_lowercase());
        if hump || kind_change || acronym_end {
            out.push(lower(&b[start..i]));
            start = i;
        }
    }
    out.push(lower(&b[start..]));
}

fn lower(bytes: &[u8]) -> String {
    bytes.iter().map(|b| b.to_ascii_lowercase() as char).collect()
}
