//! Embeds through an external process. The `ladybug` binary's hidden
//! `echo-provider` subcommand plays the model; pass its path as the first
//! argument (`cargo run --example external_provider -- target/debug/ladybug`).

use ladybug::embedding::test_double::vector_for;
use ladybug::embedding::{embed_external, probe_identity, ExternalConfig};

pub fn run(ladybug_binary: &str) -> Vec<Vec<f64>> {
    let config = ExternalConfig::new(ladybug_binary, ["echo-provider", "--dimension", "3", "--reverse"]);
    let identity = probe_identity(&config).expect("handshake");
    println!("provider {} ({} dimensions)", identity.key(), identity.dimension);

    let texts = vec!["save note".to_string(), "open settings".to_string()];
    let vectors = embed_external(&texts, &config).expect("embedding");
    for (text, vector) in texts.iter().zip(&vectors) {
        assert_eq!(vector.values(), vector_for(text, 3).as_slice());
        println!("{text:?} -> {:?}", vector.values());
    }
    vectors.into_iter().map(Vec::from).collect()
}

#[allow(dead_code)]
fn main() {
    let binary = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "target/debug/ladybug".to_string());
    run(&binary);
}
