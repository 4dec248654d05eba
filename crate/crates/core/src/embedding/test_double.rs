//! A scriptable provider speaking the external protocol, for tests and demos.
//!
//! The `ladybug` binary exposes it as the hidden `echo-provider` subcommand.
//! Vectors are a pure function of the request text ([`vector_for`]), so a
//! caller can predict exactly what the double returns.

use std::io::{self, BufRead, Write};
use std::time::Duration;

use serde_json::json;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubleOptions {
    pub name: String,
    pub version: String,
    pub dimension: usize,
    /// Answer only after stdin closes, in reverse request order.
    pub reverse: bool,
    /// Emit a vector one component short for this request id.
    pub wrong_dimension_at: Option<usize>,
    /// Report a per-item error for this request id.
    pub fail_at: Option<usize>,
    /// Emit a non-JSON line instead of this response.
    pub garbage_at: Option<usize>,
    /// Sleep before answering this request id.
    pub stall_at: Option<(usize, Duration)>,
    /// Exit without answering this request id or any later one.
    pub exit_at: Option<usize>,
}

impl Default for DoubleOptions {
    fn default() -> Self {
        Self {
            name: "echo-double".into(),
            version: "1".into(),
            dimension: 4,
            reverse: false,
            wrong_dimension_at: None,
            fail_at: None,
            garbage_at: None,
            stall_at: None,
            exit_at: None,
        }
    }
}

/// FNV-1a seeded splitmix stream mapped into `[-1, 1)`.
pub fn vector_for(text: &str, dimension: usize) -> Vec<f64> {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    (0..dimension)
        .map(|j| {
            let mut z = h.wrapping_add((j as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 52) as f64 - 1.0
        })
        .collect()
}

/// Serves the protocol until `input` ends.
pub fn serve(input: impl BufRead, mut output: impl Write, opts: &DoubleOptions) -> io::Result<()> {
    writeln!(
        output,
        "{}",
        json!({"name": opts.name, "version": opts.version, "dimension": opts.dimension})
    )?;
    output.flush()?;

    let mut held = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let request: serde_json::Value = match serde_json::from_str(&line) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let id = request["id"].as_u64().unwrap_or(0) as usize;
        let text = request["text"].as_str().unwrap_or("").to_string();
        if opts.reverse {
            held.push((id, text));
            continue;
        }
        if !respond(&mut output, id, &text, opts)? {
            return Ok(());
        }
    }
    for (id, text) in held.into_iter().rev() {
        if !respond(&mut output, id, &text, opts)? {
            return Ok(());
        }
    }
    Ok(())
}

/// Returns `false` once the double should exit.
fn respond(output: &mut impl Write, id: usize, text: &str, opts: &DoubleOptions) -> io::Result<bool> {
    if opts.exit_at == Some(id) {
        return Ok(false);
    }
    if let Some((at, pause)) = opts.stall_at {
        if at == id {
            std::thread::sleep(pause);
        }
    }
    let line = if opts.garbage_at == Some(id) {
        "this is not json".to_string()
    } else if opts.fail_at == Some(id) {
        json!({"id": id, "error": "scripted failure"}).to_string()
    } else {
        let mut vector = vector_for(text, opts.dimension);
        if opts.wrong_dimension_at == Some(id) {
            vector.pop();
        }
        json!({"id": id, "vector": vector}).to_string()
    };
    writeln!(output, "{line}")?;
    output.flush()?;
    Ok(true)
}
