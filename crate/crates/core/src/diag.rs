//! Warning and drop-count collection shared by the pipeline stages.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Non-fatal findings accumulated while a stage runs. Serialized into the
/// stage logs and the run summary, so everything here must be deterministic.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub warnings: Vec<String>,
    pub counts: BTreeMap<String, u64>,
}

impl Diagnostics {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    /// Increment a named counter by `by`.
    pub fn count(&mut self, key: &str, by: u64) {
        *self.counts.entry(key.to_string()).or_insert(0) += by;
    }

    pub fn get(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn merge(&mut self, other: Diagnostics) {
        self.warnings.extend(other.warnings);
        for (k, v) in other.counts {
            self.count(&k, v);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.warnings.is_empty() && self.counts.is_empty()
    }
}
