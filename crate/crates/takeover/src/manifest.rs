//! Run manifests: what was run, on which bytes, and how long it took. The
//! only place wall-clock time appears, so result files stay reproducible.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Identity of an input table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputInfo {
    pub path: String,
    pub sha256: String,
    pub schema_fingerprint: String,
    pub rows: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: C,
    pub inputs: Vec<InputInfo>,
    pub outputs: Vec<String>,
    pub started_unix_seconds: f64,
    pub wall_time_seconds: f64,
}

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
