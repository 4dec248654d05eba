//! Runs the three-bug benchmark in compare mode.

use ladybug::embedding::{EmbeddingProvider, LexicalProvider};
use ladybug::eval::{run_benchmark, BenchmarkOptions, BenchmarkRun};
use ladybug::synthetic::write_three_bug_dataset;

pub fn run() -> BenchmarkRun {
    let dir = tempfile::tempdir().expect("temp dir");
    let manifest = write_three_bug_dataset(dir.path()).expect("dataset written");
    let options = BenchmarkOptions {
        iterations: 2,
        ..Default::default()
    };
    let factory = || Box::new(LexicalProvider::new()) as Box<dyn EmbeddingProvider + Send>;
    let run = run_benchmark(&manifest, &options, &factory).expect("benchmark");
    print!("{}", run.report.render_table());
    println!("deterministic across {} runs: {}", run.iterations, run.deterministic);
    run
}

#[allow(dead_code)]
fn main() {
    run();
}
