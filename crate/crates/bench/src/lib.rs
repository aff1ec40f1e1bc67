//! Benchmark-only crate; see benches/pipeline.rs.

/// Loads a counts fixture from the shared testdata directory.
pub fn fixture_counts(name: &str) -> mmd_core::TraitCounts {
    let path = format!("{}/../../testdata/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {path}: {e}"));
    mmd_core::TraitCounts::from_csv(&text).expect("fixture parses")
}
