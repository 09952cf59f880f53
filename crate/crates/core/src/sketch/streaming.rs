use super::{SketchError, SpaceMeter};
use crate::stream::StreamOp;

/// A multi-pass streaming algorithm whose between-op memory can be exported
/// and restored, so that a protocol can hand it from party to party.
pub trait StreamingAlgorithm {
    fn passes(&self) -> u32;

    /// Called before the first op of pass `pass` (0-based).
    fn begin_pass(&mut self, pass: u32) -> Result<(), SketchError>;

    fn process(&mut self, op: &StreamOp) -> Result<(), SketchError>;

    fn end_pass(&mut self, pass: u32) -> Result<(), SketchError>;

    /// Output after the last pass.
    fn decide(&self) -> Result<bool, SketchError>;

    /// Current state size; equals `8 * encode_state().len()`.
    fn state_bits(&self) -> u64;

    fn encode_state(&self) -> Vec<u8>;

    fn decode_state(&mut self, bytes: &[u8]) -> Result<(), SketchError>;

    /// Upper bound `S` on `state_bits` at any point between ops.
    fn space_bound(&self) -> u64;
}

/// Feeds `ops` to `alg` once per pass, metering between ops.
pub fn run_streaming<A: StreamingAlgorithm + ?Sized>(alg: &mut A, ops: &[StreamOp], meter: &mut SpaceMeter) -> Result<bool, SketchError> {
    for pass in 0..alg.passes() {
        alg.begin_pass(pass)?;
        meter.observe(alg.state_bits());
        for op in ops {
            alg.process(op)?;
            meter.observe(alg.state_bits());
        }
        alg.end_pass(pass)?;
        meter.observe(alg.state_bits());
    }
    alg.decide()
}
