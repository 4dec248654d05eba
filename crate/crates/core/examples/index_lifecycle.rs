//! Builds, reuses and invalidates a stored index.

use std::fs;

use ladybug::embedding::{CountingProvider, LexicalProvider};
use ladybug::index_store::{ensure_fresh, Freshness};
use ladybug::synthetic::write_planted_repo;

pub fn run() -> Vec<Freshness> {
    let dir = tempfile::tempdir().expect("temp dir");
    let repo = dir.path().join("repo");
    let store = dir.path().join("store/index.bin");
    write_planted_repo(&repo).expect("fixture written");

    let mut provider = CountingProvider::new(LexicalProvider::new());
    let mut seen = Vec::new();
    let mut step = |label: &str, provider: &mut CountingProvider<LexicalProvider>| {
        provider.reset();
        let fresh = ensure_fresh(&repo, &store, provider).expect("index");
        println!(
            "{label}: {:?}, {} files, {} corpus embedding calls",
            fresh.status,
            fresh.index.file_count(),
            provider.corpus_calls
        );
        seen.push(fresh.status);
    };

    step("first run", &mut provider);
    step("unchanged", &mut provider);
    fs::write(repo.join("app/src/main/java/Extra.java"), "class Extra { void sync() {} }").expect("write");
    step("new file", &mut provider);

    let mut upgraded = CountingProvider::new(LexicalProvider::with_version("2"));
    step("new provider version", &mut upgraded);
    seen
}

#[allow(dead_code)]
fn main() {
    run();
}
