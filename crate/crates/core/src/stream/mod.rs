//! Dynamic graph streams built from hinted instance batches, plus exact
//! offline evaluation.
//!
//! For a batch of `k` instances of depth `d` and arity `w` (hint `T`), the
//! graph has `n = k + w^d + 1` vertices: one vertex per instance, one per
//! leaf, and a final vertex joined to vertex 1. The stream is
//!
//! 1. insert `(1, n)` with weight `2kw^d − 2T + 1`;
//! 2. insert every pair of leaf vertices `(k+u, k+v)`, `u < v`, with weight 1;
//! 3. for each instance `j` and each `t ∈ sender(a_j, 0)` insert
//!    `(j, k + ⌈t/2⌉)` with weight `t + 1`;
//! 4. for each `j` and each `t ∈ receiver(b_j, 1)` delete that same edge.
//!
//! Every instance vertex then has at least one surviving edge and its
//! cheapest one has weight `2t_j − z_j + 1`, so the MST weight is
//! `2kw^d + w^d + k − Σ z_j`.

mod format;

pub use format::{parse_stream, serialize_stream};

use crate::atpc::{self, derive_views, AliceView, AtpcParams, BobView, InstanceBatch};
use crate::urmin::{receiver, sender, UrError};
use crate::Party;
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StreamError {
    #[error("parameters too large: {0}")]
    Overflow(String),
    #[error("op {index}: delete of an edge that is not present")]
    IllegalDelete { index: usize },
    #[error("op {index}: insert of an edge that is already present")]
    DoubleInsert { index: usize },
    #[error("op {index}: delete weight differs from the live insert weight")]
    WeightMismatch { index: usize },
    #[error("op {index}: {msg}")]
    InvalidOp { index: usize, msg: String },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Set(#[from] UrError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpKind {
    Insert,
    Delete,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamOp {
    pub kind: OpKind,
    pub u: u32,
    pub v: u32,
    pub weight: u64,
}

impl StreamOp {
    pub fn insert(u: u32, v: u32, weight: u64) -> Self {
        StreamOp { kind: OpKind::Insert, u, v, weight }
    }

    pub fn delete(u: u32, v: u32, weight: u64) -> Self {
        StreamOp { kind: OpKind::Delete, u, v, weight }
    }

    /// Endpoint pair with the smaller id first.
    pub fn key(&self) -> (u32, u32) {
        (self.u.min(self.v), self.u.max(self.v))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicStream {
    pub n: u32,
    pub threshold: u64,
    pub ops: Vec<StreamOp>,
}

impl DynamicStream {
    pub fn max_weight(&self) -> u64 {
        self.ops.iter().map(|o| o.weight).max().unwrap_or(0)
    }

    pub fn inserts_precede_deletes(&self) -> bool {
        let first_del = self.ops.iter().position(|o| o.kind == OpKind::Delete).unwrap_or(self.ops.len());
        self.ops[first_del..].iter().all(|o| o.kind == OpKind::Delete)
    }

    /// The stream that undoes this one, in reverse order.
    pub fn reversed_inverse(&self) -> Vec<StreamOp> {
        self.ops
            .iter()
            .rev()
            .map(|o| StreamOp {
                kind: match o.kind {
                    OpKind::Insert => OpKind::Delete,
                    OpKind::Delete => OpKind::Insert,
                },
                ..*o
            })
            .collect()
    }
}

/// Closed-form quantities of the construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MstFormulas {
    pub k: u64,
    pub leaves: u64,
    pub n: u64,
    /// `M = 2kw^d + w^d + k`.
    pub base_weight: u64,
    /// `M − ⌊k/2⌋`.
    pub threshold: u64,
}

impl MstFormulas {
    pub fn new(k: u64, leaves: u64) -> Result<Self, StreamError> {
        let big = k
            .checked_mul(leaves)
            .and_then(|x| x.checked_mul(2))
            .filter(|&x| x < (1u64 << 62) - 1)
            .ok_or_else(|| StreamError::Overflow(format!("2kw^d + 1 must stay below 2^62 (k={k}, w^d={leaves})")))?;
        let n = k + leaves + 1;
        if n > u32::MAX as u64 {
            return Err(StreamError::Overflow(format!("n = {n} exceeds the 32-bit vertex range")));
        }
        let base_weight = big + leaves + k;
        Ok(MstFormulas { k, leaves, n, base_weight, threshold: base_weight - k / 2 })
    }

    /// Weight `2kw^d − 2T + 1` of the `(1, n)` edge.
    pub fn special_edge_weight(&self, hint: u64) -> u64 {
        2 * self.k * self.leaves - 2 * hint + 1
    }
}

fn formulas(k: usize, params: AtpcParams) -> Result<MstFormulas, StreamError> {
    MstFormulas::new(k as u64, params.leaves())
}

/// Steps 1 and 2: the `(1, n)` edge and the leaf clique. Known to every party
/// that holds the hint.
pub fn preamble_ops(k: u32, params: AtpcParams, hint: u64) -> Result<Vec<StreamOp>, StreamError> {
    let f = formulas(k as usize, params)?;
    let leaves = params.leaves();
    let kk = k as u64;
    if hint < kk || hint > kk * leaves {
        return Err(StreamError::Overflow(format!("hint {hint} outside [{kk}, {}]", kk * leaves)));
    }
    let n = f.n as u32;
    let mut ops = Vec::with_capacity(1 + (leaves * leaves.saturating_sub(1) / 2) as usize);
    ops.push(StreamOp::insert(1, n, f.special_edge_weight(hint)));
    for u in 1..=leaves {
        for v in u + 1..=leaves {
            ops.push(StreamOp::insert((kk + u) as u32, (kk + v) as u32, 1));
        }
    }
    Ok(ops)
}

/// Step 3 for instance `j` (1-based), from Alice `j`'s view alone.
pub fn insert_ops(j: u32, k: u32, params: AtpcParams, alice: &AliceView) -> Result<Vec<StreamOp>, StreamError> {
    let s = sender(params.d, params.w, alice, Party::Alice)?;
    Ok(s.iter().map(|t| StreamOp::insert(j, k + t.div_ceil(2) as u32, t + 1)).collect())
}

/// Step 4 for instance `j`, from Bob `j`'s view alone.
pub fn delete_ops(j: u32, k: u32, params: AtpcParams, bob: &BobView) -> Result<Vec<StreamOp>, StreamError> {
    let s = receiver(params.d, params.w, bob, Party::Bob)?;
    Ok(s.iter().map(|t| StreamOp::delete(j, k + t.div_ceil(2) as u32, t + 1)).collect())
}

pub fn build_mst_stream(batch: &InstanceBatch) -> Result<DynamicStream, StreamError> {
    let params = batch.params();
    let k = batch.k() as u32;
    let f = formulas(batch.k(), params)?;
    let mut ops = preamble_ops(k, params, batch.hint)?;
    let views: Vec<_> = batch.trees.iter().map(derive_views).collect();
    for (j, (a, _)) in views.iter().enumerate() {
        ops.extend(insert_ops(j as u32 + 1, k, params, a)?);
    }
    for (j, (_, b)) in views.iter().enumerate() {
        ops.extend(delete_ops(j as u32 + 1, k, params, b)?);
    }
    Ok(DynamicStream { n: f.n as u32, threshold: f.threshold, ops })
}

/// `2kw^d + w^d + k − Σ z_j`.
pub fn expected_mst_weight(batch: &InstanceBatch) -> Result<u64, StreamError> {
    let f = formulas(batch.k(), batch.params())?;
    let ones = batch.trees.iter().filter(|t| atpc::answer(t)).count() as u64;
    Ok(f.base_weight - ones)
}

/// 1 iff the MST weight reaches the threshold, i.e. at most `⌊k/2⌋` answers are 1.
pub fn decision_ground_truth(batch: &InstanceBatch) -> bool {
    let ones = batch.trees.iter().filter(|t| atpc::answer(t)).count();
    ones <= batch.k() / 2
}

/// Final graph of a stream as live `(u, v, weight)` triples with `u < v`.
///
/// The construction inserts parallel edges of different weights between the
/// same pair (both `2j − 1` and `2j` can land on leaf vertex `j`), so edges
/// are identified by the full triple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSnapshot {
    pub n: u32,
    pub edges: BTreeSet<(u32, u32, u64)>,
}

impl GraphSnapshot {
    pub fn edge_list(&self) -> Vec<(u32, u32, u64)> {
        self.edges.iter().copied().collect()
    }

    pub fn degree(&self, x: u32) -> usize {
        self.edges.iter().filter(|&&(u, v, _)| u == x || v == x).count()
    }
}

pub(crate) fn check_op(op: &StreamOp, n: u32, index: usize) -> Result<(), StreamError> {
    let bad = |msg: &str| Err(StreamError::InvalidOp { index, msg: msg.into() });
    if op.u == op.v {
        return bad("self loop");
    }
    if op.u == 0 || op.v == 0 || op.u > n || op.v > n {
        return bad("vertex outside [1, n]");
    }
    if op.weight == 0 {
        return bad("weight must be positive");
    }
    Ok(())
}

/// Applies the ops in order, enforcing the stream guarantees.
pub fn materialize(stream: &DynamicStream) -> Result<GraphSnapshot, StreamError> {
    let mut edges = BTreeSet::new();
    for (index, op) in stream.ops.iter().enumerate() {
        check_op(op, stream.n, index)?;
        let (u, v) = op.key();
        let triple = (u, v, op.weight);
        match op.kind {
            OpKind::Insert => {
                if !edges.insert(triple) {
                    return Err(StreamError::DoubleInsert { index });
                }
            }
            OpKind::Delete => {
                if !edges.remove(&triple) {
                    let pair_live = edges.range((u, v, 0)..=(u, v, u64::MAX)).next().is_some();
                    return Err(if pair_live { StreamError::WeightMismatch { index } } else { StreamError::IllegalDelete { index } });
                }
            }
        }
    }
    Ok(GraphSnapshot { n: stream.n, edges })
}

/// Kruskal's minimum spanning forest on 1-based vertices, ties broken by
/// endpoint order.
pub fn kruskal(n: u32, edges: &[(u32, u32, u64)]) -> Vec<(u32, u32, u64)> {
    let mut sorted = edges.to_vec();
    sorted.sort_by_key(|&(u, v, w)| (w, u, v));
    let mut uf = UnionFind::<u32>::new(n as usize + 1);
    sorted.into_iter().filter(|&(u, v, _)| uf.union(u, v)).collect()
}

/// Exact MST weight of a connected graph.
pub fn mst_oracle(graph: &GraphSnapshot) -> Result<u64, StreamError> {
    let forest = kruskal(graph.n, &graph.edge_list());
    if graph.n > 0 && forest.len() + 1 != graph.n as usize {
        return Err(StreamError::Disconnected);
    }
    Ok(forest.iter().map(|e| e.2).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atpc::*;

    fn one(bits: [bool; 2], i: u32) -> InstanceBatch {
        InstanceBatch::new(vec![AtpcTree::from_levels(1, 2, &[vec![i]], &bits).unwrap()]).unwrap()
    }

    #[test]
    fn worked_example() {
        let b = one([true, false], 1);
        let s = build_mst_stream(&b).unwrap();
        assert_eq!(s.n, 4);
        assert_eq!(s.threshold, 7);
        assert_eq!(
            s.ops,
            vec![StreamOp::insert(1, 4, 3), StreamOp::insert(2, 3, 1), StreamOp::insert(1, 2, 2), StreamOp::insert(1, 3, 5),]
        );
        assert_eq!(mst_oracle(&materialize(&s).unwrap()).unwrap(), 6);
        assert_eq!(expected_mst_weight(&b).unwrap(), 6);
        assert!(!decision_ground_truth(&b));
    }

    #[test]
    fn worked_example_zero_answer() {
        let b = one([false, true], 1);
        let s = build_mst_stream(&b).unwrap();
        assert_eq!(&s.ops[2..], &[StreamOp::insert(1, 2, 3), StreamOp::insert(1, 3, 4)]);
        assert_eq!(s.threshold, 7);
        assert_eq!(mst_oracle(&materialize(&s).unwrap()).unwrap(), 7);
        assert_eq!(expected_mst_weight(&b).unwrap(), 7);
        assert!(decision_ground_truth(&b));
    }

    #[test]
    fn ground_truth_majority() {
        let p = AtpcParams::new(1, 2).unwrap();
        let t1 = AtpcTree::from_levels(1, 2, &[vec![1]], &[true, true]).unwrap();
        let b = InstanceBatch::new(vec![t1.clone(), t1.clone(), t1]).unwrap();
        assert!(!decision_ground_truth(&b));
        assert_eq!(expected_mst_weight(&b).unwrap(), MstFormulas::new(3, p.leaves()).unwrap().base_weight - 3);
        let t0 = AtpcTree::from_levels(1, 2, &[vec![2]], &[true, false]).unwrap();
        let b = InstanceBatch::new(vec![t0.clone(), t0]).unwrap();
        assert_eq!(expected_mst_weight(&b).unwrap(), MstFormulas::new(2, 2).unwrap().base_weight);
    }

    #[test]
    fn op_count_formula() {
        for s in 0..50 {
            let b = sample_batch(3, AtpcParams::new(2, 3).unwrap(), s).unwrap();
            let st = build_mst_stream(&b).unwrap();
            let l = 9u64;
            let sets: u64 = b
                .trees
                .iter()
                .map(|t| {
                    let (a, bv) = derive_views(t);
                    sender(2, 3, &a, Party::Alice).unwrap().len() + receiver(2, 3, &bv, Party::Bob).unwrap().len()
                })
                .sum();
            assert_eq!(st.ops.len() as u64, 1 + l * (l - 1) / 2 + sets);
        }
    }

    #[test]
    fn demo_tree_snapshot() {
        let b = InstanceBatch::new(vec![demo_tree()]).unwrap();
        let s = build_mst_stream(&b).unwrap();
        let g = materialize(&s).unwrap();
        let at_one = g.edges.iter().filter(|&&(u, v, _)| u == 1 && v != s.n).count();
        assert_eq!(at_one, 5);
        assert_eq!(mst_oracle(&g).unwrap(), expected_mst_weight(&b).unwrap());
    }

    #[test]
    fn materialize_errors() {
        let mk = |ops| DynamicStream { n: 3, threshold: 0, ops };
        let g = materialize(&mk(vec![StreamOp::insert(1, 2, 5), StreamOp::delete(1, 2, 5)])).unwrap();
        assert!(g.edges.is_empty());
        assert_eq!(materialize(&mk(vec![StreamOp::delete(1, 2, 5)])), Err(StreamError::IllegalDelete { index: 0 }));
        assert_eq!(
            materialize(&mk(vec![StreamOp::insert(1, 2, 5), StreamOp::insert(2, 1, 5)])),
            Err(StreamError::DoubleInsert { index: 1 })
        );
        let par = materialize(&mk(vec![StreamOp::insert(1, 2, 5), StreamOp::insert(1, 2, 6)])).unwrap();
        assert_eq!(par.edges.len(), 2);
        assert_eq!(
            materialize(&mk(vec![StreamOp::insert(1, 2, 5), StreamOp::delete(1, 2, 4)])),
            Err(StreamError::WeightMismatch { index: 1 })
        );
        assert!(matches!(materialize(&mk(vec![StreamOp::insert(1, 1, 5)])), Err(StreamError::InvalidOp { .. })));
        assert!(matches!(materialize(&mk(vec![StreamOp::insert(1, 4, 5)])), Err(StreamError::InvalidOp { .. })));
    }

    #[test]
    fn oracle_cases() {
        let tri = GraphSnapshot { n: 3, edges: [(1, 2, 1), (2, 3, 2), (1, 3, 3)].into_iter().collect() };
        assert_eq!(mst_oracle(&tri).unwrap(), 3);
        let m = 6u32;
        let mut edges = BTreeSet::new();
        for u in 1..=m {
            for v in u + 1..=m {
                edges.insert((u, v, 1));
            }
        }
        assert_eq!(mst_oracle(&GraphSnapshot { n: m, edges }).unwrap(), 5);
        let split = GraphSnapshot { n: 3, edges: [(1, 2, 1)].into_iter().collect() };
        let parallel = GraphSnapshot { n: 2, edges: [(1, 2, 4), (1, 2, 3)].into_iter().collect() };
        assert_eq!(mst_oracle(&parallel).unwrap(), 3);
        assert_eq!(mst_oracle(&split), Err(StreamError::Disconnected));
    }

    #[test]
    fn overflow_rejected() {
        assert!(MstFormulas::new(1 << 31, 1 << 31).is_err());
        assert!(MstFormulas::new(1, 1 << 40).is_err());
    }
}
