use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

/// What a run did: subcommand, input files, seed (for stochastic runs) and
/// the effective parameters. Re-running with the same manifest reproduces
/// every output byte for byte. Printed as one JSON line on standard error
/// under `--manifest`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub inputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub parameters: BTreeMap<String, String>,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            inputs: Vec::new(),
            seed: None,
            parameters: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn input(mut self, path: &Path) -> Self {
        self.inputs.push(path.display().to_string());
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn emit(&self, enabled: bool) {
        if enabled {
            eprintln!(
                "{}",
                serde_json::to_string(self).expect("manifest serialization cannot fail")
            );
        }
    }
}
