//! Localizes the planted bug with and without its GUI trace.

use ladybug::embedding::LexicalProvider;
use ladybug::index_store::build_index;
use ladybug::ingest::snapshot_repository;
use ladybug::localize::{localize, LocalizeConfig, RankedList};
use ladybug::synthetic::{planted_trace, write_planted_repo, PLANTED_REPORT, PLANTED_TRUTH};

pub fn run() -> (RankedList, RankedList) {
    let dir = tempfile::tempdir().expect("temp dir");
    write_planted_repo(dir.path()).expect("fixture written");
    let snapshot = snapshot_repository(dir.path()).expect("snapshot");
    let mut provider = LexicalProvider::new();
    let index = build_index(&snapshot, &mut provider).expect("index");

    let trace = planted_trace();
    let gui = localize(PLANTED_REPORT, Some(&trace), &index, &LocalizeConfig::gui(), &mut provider).expect("gui");
    let text_only = localize(PLANTED_REPORT, None, &index, &LocalizeConfig::no_gui(), &mut provider).expect("no gui");

    println!("GUI ranking:\n{}", gui.to_markdown(5));
    println!("text-only ranking:\n{}", text_only.to_markdown(12));
    println!(
        "{PLANTED_TRUTH}: rank {:?} with GUI, {:?} without",
        gui.rank_of(PLANTED_TRUTH),
        text_only.rank_of(PLANTED_TRUTH)
    );
    (gui, text_only)
}

#[allow(dead_code)]
fn main() {
    run();
}
