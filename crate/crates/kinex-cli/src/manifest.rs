//! Run manifests: a JSON record of what a command computed, from what, with
//! which parameters.
//!
//! Manifests deliberately contain no timestamps, hostnames, or filesystem
//! paths. Inputs are captured as content digests and parameters as resolved
//! values, so two runs over identical inputs with identical parameters emit
//! byte-identical manifests wherever they ran.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub tool_version: &'static str,
    /// Resolved run parameters (defaults filled in), keyed by flag name.
    pub parameters: BTreeMap<String, String>,
    /// `sha256:<hex>` digest per input role ("input", "gini", "gds").
    pub input_digests: BTreeMap<String, String>,
    /// Deterministic facts about the run worth surfacing (drift, drops).
    pub diagnostics: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &'static str) -> Self {
        RunManifest {
            command,
            tool_version: env!("CARGO_PKG_VERSION"),
            parameters: BTreeMap::new(),
            input_digests: BTreeMap::new(),
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.to_string(), value.to_string());
    }

    pub fn digest(&mut self, role: &str, bytes: &[u8]) {
        let mut hex = String::with_capacity(7 + 64);
        hex.push_str("sha256:");
        for byte in Sha256::digest(bytes) {
            hex.push_str(&format!("{byte:02x}"));
        }
        self.input_digests.insert(role.to_string(), hex);
    }

    pub fn diag(&mut self, key: &str, value: impl ToString) {
        self.diagnostics.insert(key.to_string(), value.to_string());
    }
}
