//! Shows each preprocessing stage on a small Activity.

use ladybug::preprocess::{normalize, preprocess_source, sanitize_source, tokenize_sanitized};

const SOURCE: &str = r#"package com.example.notes;

import android.os.Bundle;

/** Lists the saved notes. */
public class NoteListActivity extends AppCompatActivity {
    private RecyclerView noteRecycler; // the list

    @Override
    protected void onCreate(Bundle savedInstanceState) {
        super.onCreate(savedInstanceState);
        setContentView(R.layout.activity_note_list);
    }

    void showHTTPError(int code) {
        Toast.makeText(this, "Request failed: " + code, Toast.LENGTH_SHORT).show();
    }
}
"#;

pub fn run() -> Vec<String> {
    let sanitized = sanitize_source(SOURCE);
    println!("sanitized: {}", sanitized.text);
    let raw = tokenize_sanitized(&sanitized);
    println!("raw tokens: {:?}", raw.tokens);
    let normalized = normalize(&raw);
    println!("normalized: {:?} (boundaries {:?})", normalized.tokens, normalized.boundaries);

    let file = preprocess_source("app/src/main/java/com/example/notes/NoteListActivity.java", SOURCE);
    for segment in &file.segments {
        println!("segment {}: {} tokens", segment.segment_index, segment.tokens.len());
    }
    file.tokens.tokens
}

#[allow(dead_code)]
fn main() {
    run();
}
