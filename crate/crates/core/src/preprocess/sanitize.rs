//! Comment, import and punctuation stripping for Java source.

/// Sanitized text plus the byte offsets of method boundaries.
///
/// A boundary is recorded at every closing brace that returns the brace depth
/// to 1, i.e. the end of a member of a top-level type. Offsets always fall on
/// a separator, so no token straddles one.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SanitizedText {
    pub text: String,
    pub boundaries: Vec<usize>,
}

impl SanitizedText {
    /// Splits `text` at the recorded boundaries.
    pub fn pieces(&self) -> impl Iterator<Item = &str> + '_ {
        let mut start = 0;
        self.boundaries
            .iter()
            .copied()
            .chain(std::iter::once(self.text.len()))
            .map(move |end| {
                let end = end.min(self.text.len()).max(start);
                let piece = &self.text[start..end];
                start = end;
                piece
            })
    }
}

/// Strips comments, `import`/`package` lines and every character outside
/// ASCII letters, digits, underscore and whitespace. Literal contents are
/// kept without their delimiters. Whitespace runs collapse to one space.
pub fn sanitize(raw_text: &str) -> String {
    sanitize_source(raw_text).text
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Code,
    LineComment,
    BlockComment,
    Str,
    Char,
    TextBlock,
}

struct Out {
    text: String,
    boundaries: Vec<usize>,
}

impl Out {
    fn separator(&mut self) {
        if !self.text.is_empty() && !self.text.ends_with(' ') {
            self.text.push(' ');
        }
    }

    fn emit(&mut self, c: char) {
        if c.is_ascii_alphanumeric() || c == '_' {
            self.text.push(c);
        } else {
            self.separator();
        }
    }
}

/// Like [`sanitize`], additionally recording method boundaries.
pub fn sanitize_source(raw_text: &str) -> SanitizedText {
    let chars: Vec<char> = raw_text.chars().collect();
    let mut out = Out {
        text: String::with_capacity(raw_text.len()),
        boundaries: Vec::new(),
    };
    let mut state = State::Code;
    let mut depth: usize = 0;
    let mut line_start = true;
    let mut i = 0;

    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        match state {
            State::Code => {
                if line_start {
                    if c == ' ' || c == '\t' || c == '\r' || c == '\u{feff}' {
                        out.separator();
                        i += 1;
                        continue;
                    }
                    line_start = false;
                    if starts_directive(&chars[i..]) {
                        while i < chars.len() && chars[i] != '\n' {
                            i += 1;
                        }
                        continue;
                    }
                }
                match c {
                    '\n' => {
                        out.separator();
                        line_start = true;
                    }
                    '/' if next == Some('/') => {
                        out.separator();
                        state = State::LineComment;
                        i += 1;
                    }
                    '/' if next == Some('*') => {
                        out.separator();
                        state = State::BlockComment;
                        i += 1;
                    }
                    '"' if next == Some('"') && chars.get(i + 2) == Some(&'"') => {
                        out.separator();
                        state = State::TextBlock;
                        i += 2;
                    }
                    '"' => {
                        out.separator();
                        state = State::Str;
                    }
                    '\'' => {
                        out.separator();
                        state = State::Char;
                    }
                    '{' => {
                        depth += 1;
                        out.separator();
                    }
                    '}' => {
                        depth = depth.saturating_sub(1);
                        out.separator();
                        if depth == 1 {
                            out.boundaries.push(out.text.len());
                        }
                    }
                    _ => out.emit(c),
                }
            }
            State::LineComment => {
                if c == '\n' {
                    out.separator();
                    state = State::Code;
                    line_start = true;
                }
            }
            State::BlockComment => {
                if c == '*' && next == Some('/') {
                    state = State::Code;
                    i += 1;
                }
            }
            State::Str | State::Char | State::TextBlock => {
                let closes = match state {
                    State::Str => c == '"',
                    State::Char => c == '\'',
                    _ => c == '"' && next == Some('"') && chars.get(i + 2) == Some(&'"'),
                };
                if c == '\\' {
                    out.separator();
                    i += 1 + escape_len(&chars[i + 1..]);
                    continue;
                } else if closes {
                    out.separator();
                    if state == State::TextBlock {
                        i += 2;
                    }
                    state = State::Code;
                } else if c == '\n' && state != State::TextBlock {
                    // unterminated literal: resume code on the next line
                    out.separator();
                    state = State::Code;
                    line_start = true;
                } else {
                    out.emit(c);
                }
            }
        }
        i += 1;
    }

    let trimmed = out.text.trim_end().len();
    out.text.truncate(trimmed);
    let mut boundaries = out.boundaries;
    boundaries.retain(|&b| b > 0 && b < trimmed);
    boundaries.dedup();
    SanitizedText {
        text: out.text,
        boundaries,
    }
}

/// `import` or `package` followed by a non-identifier character.
fn starts_directive(rest: &[char]) -> bool {
    ["import", "package"].iter().any(|kw| {
        let n = kw.len();
        rest.len() > n
            && rest[..n].iter().copied().eq(kw.chars())
            && !(rest[n].is_ascii_alphanumeric() || rest[n] == '_' || rest[n] == '$')
    })
}

/// Number of characters consumed after a backslash inside a literal.
fn escape_len(rest: &[char]) -> usize {
    match rest.first() {
        None => 0,
        Some('u') => {
            let us = rest.iter().take_while(|&&c| c == 'u').count();
            us + rest[us..]
                .iter()
                .take(4)
                .take_while(|c| c.is_ascii_hexdigit())
                .count()
        }
        Some(c) if c.is_digit(8) => rest.iter().take(3).take_while(|c| c.is_digit(8)).count(),
        Some(_) => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_comment_and_punctuation() {
        assert_eq!(sanitize("// fix me\nint x;"), "int x");
    }

    #[test]
    fn import_line_removed() {
        assert_eq!(sanitize("import java.util.List;\nclass A {}"), "class A");
    }

    #[test]
    fn block_comment_and_string_literal() {
        assert_eq!(
            sanitize("/* a\nb */ String s = \"save file\";"),
            "String s save file"
        );
    }

    #[test]
    fn empty_input() {
        assert_eq!(sanitize(""), "");
        assert_eq!(sanitize_source("").boundaries, Vec::<usize>::new());
    }

    #[test]
    fn package_and_indented_import() {
        let src = "package org.app;\n  import static org.x.Y.z;\nclass Importer { int importCount; }";
        assert_eq!(sanitize(src), "class Importer int importCount");
    }

    #[test]
    fn comment_markers_inside_strings_are_text() {
        assert_eq!(sanitize(r#"String u = "http://x/*y*/";"#), "String u http x y");
    }

    #[test]
    fn quotes_inside_comments_are_ignored() {
        assert_eq!(sanitize("// don't\nint a; /* \"x */ int b;"), "int a int b");
    }

    #[test]
    fn escapes_become_separators() {
        assert_eq!(sanitize(r#"s = "a\nbAc\"d";"#), "s a bAc d");
        assert_eq!(sanitize(r"c = '\'';"), "c");
    }

    #[test]
    fn text_blocks() {
        assert_eq!(sanitize("s = \"\"\"\n  hello \"x\" world\n  \"\"\";"), "s hello x world");
    }

    #[test]
    fn method_boundaries_at_depth_one() {
        let src = "class A {\n void f() { if (x) { y(); } }\n void g() { }\n}";
        let s = sanitize_source(src);
        assert_eq!(s.text, "class A void f if x y void g");
        let pieces: Vec<_> = s.pieces().collect();
        assert_eq!(pieces, ["class A void f if x y ", "void g"]);
    }

    #[test]
    fn non_ascii_letters_are_separators() {
        assert_eq!(sanitize("String café = \"naïve\";"), "String caf na ve");
    }

    #[test]
    fn unterminated_block_comment_swallows_rest() {
        assert_eq!(sanitize("int a; /* never closed\nint b;"), "int a");
    }
}
