//! Turnstile sketches and sketch-based MST algorithms.
//!
//! * [`L0Sketch`]: a linear ℓ0 sampler.
//! * [`ForestSketchBank`]: per-vertex incidence sketches with post-pass
//!   Borůvka recovery of a spanning forest.
//! * [`SinglePassDecider`]: `W` forest banks, copy `i` fed the edges of
//!   weight at most `i`; spanning-forest sizes per prefix give the MST weight.
//! * [`MultipassMst`]: Borůvka phases grouped into `p` passes, each phase
//!   finding minimum outgoing edges through weight-prefix sketches. This is a
//!   reconstruction of the known `n^{1+O(1/p)}`-space `p`-pass approach, not
//!   a transcription of a published algorithm.
//!
//! Space is measured by [`SpaceMeter`] as the size of the state kept between
//! stream operations; that size equals the length of the encoded state.

mod forest;
mod l0;
mod meter;
mod mst;
mod streaming;

pub use forest::{default_rounds, pair_count, pair_index, pair_of, spanning_forest_pass, ForestSketchBank};
pub use l0::{L0Params, L0Sample, L0Sketch, Plan, CELL_BITS};
pub use meter::{SpaceMeter, SpaceReport};
pub use mst::{mst_decide_single_pass, mst_multipass, MultipassMst, MultipassOutcome, SinglePassDecider, SinglePassOutcome};
pub use streaming::{run_streaming, StreamingAlgorithm};

use petgraph::unionfind::UnionFind;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SketchError {
    #[error("index {index} outside [0, {dim})")]
    IndexOutOfRange { index: u64, dim: u64 },
    #[error("sketches were built with different randomness")]
    RandomnessMismatch,
    #[error("sketch failure: {0}")]
    SketchFailure(String),
    #[error("edge weight {weight} exceeds W = {max}")]
    WeightOutOfRange { weight: u64, max: u64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("state decode: {0}")]
    Decode(String),
}

/// Component label per vertex (the smallest vertex of its component,
/// 1-based), for 1-based edges over `[1, n]`.
pub fn union_find_oracle(edges: &[(u32, u32)], n: u32) -> Vec<u32> {
    let mut uf = UnionFind::<u32>::new(n as usize + 1);
    for &(u, v) in edges {
        uf.union(u, v);
    }
    let mut least = vec![u32::MAX; n as usize + 1];
    for v in 1..=n {
        let r = uf.find_mut(v) as usize;
        least[r] = least[r].min(v);
    }
    (1..=n).map(|v| least[uf.find_mut(v) as usize]).collect()
}
