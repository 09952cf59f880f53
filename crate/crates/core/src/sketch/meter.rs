use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Between-operation space in bits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceMeter {
    pub bits_current: u64,
    pub bits_peak: u64,
}

impl SpaceMeter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records the state size at a point between two operations.
    pub fn observe(&mut self, bits: u64) {
        self.bits_current = bits;
        self.bits_peak = self.bits_peak.max(bits);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceReport {
    pub algorithm: String,
    pub n: u32,
    pub params: BTreeMap<String, f64>,
    pub bits_peak: u64,
    pub passes: u32,
    pub decision: Option<bool>,
    pub failed: bool,
}
