//! Augmented tree pointer chasing instances.
//!
//! An instance of depth `d` and arity `w` is a complete `w`-ary tree. Every
//! node carries a pointer into its children; level-1 nodes carry `w` leaf bits
//! instead of children. Following pointers from the root ends at the target
//! leaf `t ∈ [w^d]` and the answer is the bit stored there.
//!
//! Indices exposed by this module (pointers, leaves) are 1-based.

mod enumerate;
mod text;
mod views;

pub use enumerate::{enumerate_instances, enumerate_instances_capped, instance_at, support_size, DEFAULT_ENUM_CAP};
pub use views::{derive_views, joint_solve, AliceView, BobView};

use crate::seed;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AtpcError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("support size {size} exceeds cap {cap}")]
    Capacity { size: u128, cap: u128 },
    #[error("inconsistent views: {0}")]
    Inconsistent(String),
    #[error("malformed tree: {0}")]
    Malformed(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AtpcParams {
    pub d: u32,
    pub w: u32,
    pub k: u32,
}

impl AtpcParams {
    /// Single-instance parameters (`k = 1`).
    pub fn new(d: u32, w: u32) -> Result<Self, AtpcError> {
        Self::with_k(d, w, 1)
    }

    pub fn with_k(d: u32, w: u32, k: u32) -> Result<Self, AtpcError> {
        if d == 0 {
            return Err(AtpcError::InvalidParams("depth d must be at least 1".into()));
        }
        if w == 0 {
            return Err(AtpcError::InvalidParams("arity w must be at least 1".into()));
        }
        if k == 0 {
            return Err(AtpcError::InvalidParams("copy count k must be at least 1".into()));
        }
        if (w as u64).checked_pow(d).is_none() {
            return Err(AtpcError::InvalidParams(format!("w^d = {w}^{d} does not fit in 64 bits")));
        }
        Ok(AtpcParams { d, w, k })
    }

    /// Number of leaves `w^d`.
    pub fn leaves(&self) -> u64 {
        (self.w as u64).pow(self.d)
    }

    /// `w^e`, for `e ≤ d`.
    pub fn pow(&self, e: u32) -> u64 {
        (self.w as u64).pow(e)
    }

    /// Same shape one level shorter.
    pub fn child(&self) -> Option<AtpcParams> {
        (self.d > 1).then(|| AtpcParams { d: self.d - 1, ..*self })
    }
}

/// A node of a fully materialized tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Node {
    Internal { pointer: u32, children: Vec<Node> },
    Leaf { pointer: u32, bits: Vec<bool> },
}

impl Node {
    pub fn pointer(&self) -> u32 {
        match self {
            Node::Internal { pointer, .. } | Node::Leaf { pointer, .. } => *pointer,
        }
    }

    fn check(&self, level: u32, w: u32) -> Result<(), AtpcError> {
        let p = self.pointer();
        if p == 0 || p > w {
            return Err(AtpcError::Malformed(format!("pointer {p} outside [1, {w}]")));
        }
        match (self, level) {
            (Node::Leaf { bits, .. }, 1) => {
                if bits.len() != w as usize {
                    return Err(AtpcError::Malformed(format!("leaf block has {} bits, expected {w}", bits.len())));
                }
                Ok(())
            }
            (Node::Internal { children, .. }, l) if l > 1 => {
                if children.len() != w as usize {
                    return Err(AtpcError::Malformed(format!("internal node has {} children, expected {w}", children.len())));
                }
                children.iter().try_for_each(|c| c.check(l - 1, w))
            }
            _ => Err(AtpcError::Malformed(format!("node kind does not match level {level}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AtpcTree {
    pub params: AtpcParams,
    pub root: Node,
}

impl AtpcTree {
    /// Validates shape against `params`.
    pub fn new(params: AtpcParams, root: Node) -> Result<Self, AtpcError> {
        root.check(params.d, params.w)?;
        Ok(AtpcTree { params, root })
    }

    /// Builds a tree from its pointers listed level by level (root first,
    /// left to right) and its `w^d` leaf bits.
    pub fn from_levels(d: u32, w: u32, pointers: &[Vec<u32>], leaves: &[bool]) -> Result<Self, AtpcError> {
        let params = AtpcParams::new(d, w)?;
        if pointers.len() != d as usize {
            return Err(AtpcError::Malformed(format!("expected {d} pointer levels")));
        }
        for (l, ps) in pointers.iter().enumerate() {
            if ps.len() as u64 != params.pow(l as u32) {
                return Err(AtpcError::Malformed(format!("pointer level {} has wrong length", l + 1)));
            }
        }
        if leaves.len() as u64 != params.leaves() {
            return Err(AtpcError::Malformed("wrong number of leaf bits".into()));
        }
        fn build(depth: usize, pos: usize, w: usize, pointers: &[Vec<u32>], leaves: &[bool]) -> Node {
            let pointer = pointers[depth][pos];
            if depth + 1 == pointers.len() {
                Node::Leaf { pointer, bits: leaves[pos * w..(pos + 1) * w].to_vec() }
            } else {
                let children = (0..w).map(|j| build(depth + 1, pos * w + j, w, pointers, leaves)).collect();
                Node::Internal { pointer, children }
            }
        }
        let root = build(0, 0, w as usize, pointers, leaves);
        AtpcTree::new(params, root)
    }

    /// Pointers along the target path, root first.
    pub fn path(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.params.d as usize);
        let mut node = &self.root;
        loop {
            out.push(node.pointer());
            match node {
                Node::Internal { pointer, children } => node = &children[*pointer as usize - 1],
                Node::Leaf { .. } => return out,
            }
        }
    }

    /// All leaf bits, left to right.
    pub fn leaf_bits(&self) -> Vec<bool> {
        fn walk(n: &Node, out: &mut Vec<bool>) {
            match n {
                Node::Internal { children, .. } => children.iter().for_each(|c| walk(c, out)),
                Node::Leaf { bits, .. } => out.extend_from_slice(bits),
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }

    /// Encodes shape and content in canonical preorder text.
    pub fn to_text(&self) -> String {
        text::encode(self)
    }

    pub fn from_text(s: &str) -> Result<Self, AtpcError> {
        text::decode(s)
    }
}

fn node_target(node: &Node, level: u32, w: u64) -> u64 {
    match node {
        Node::Leaf { pointer, .. } => *pointer as u64,
        Node::Internal { pointer, children } => {
            (*pointer as u64 - 1) * w.pow(level - 1) + node_target(&children[*pointer as usize - 1], level - 1, w)
        }
    }
}

/// The target leaf in `[w^d]`.
pub fn target(tree: &AtpcTree) -> u64 {
    node_target(&tree.root, tree.params.d, tree.params.w as u64)
}

/// The leaf bit at the target.
pub fn answer(tree: &AtpcTree) -> bool {
    let mut node = &tree.root;
    loop {
        match node {
            Node::Internal { pointer, children } => node = &children[*pointer as usize - 1],
            Node::Leaf { pointer, bits } => return bits[*pointer as usize - 1],
        }
    }
}

fn sample_node<R: Rng>(rng: &mut R, level: u32, w: u32) -> Node {
    let pointer = rng.gen_range(1..=w);
    if level == 1 {
        Node::Leaf { pointer, bits: (0..w).map(|_| rng.gen::<bool>()).collect() }
    } else {
        Node::Internal { pointer, children: (0..w).map(|_| sample_node(rng, level - 1, w)).collect() }
    }
}

/// Samples every pointer and leaf bit independently and uniformly.
///
/// Materializes `Θ(w^d)` nodes; the caller is expected to keep `w^d` at a
/// size that fits in memory.
pub fn sample_instance(params: AtpcParams, seed: u64) -> Result<AtpcTree, AtpcError> {
    let params = AtpcParams::with_k(params.d, params.w, params.k)?;
    let mut rng = seed::rng(seed);
    Ok(AtpcTree { params, root: sample_node(&mut rng, params.d, params.w) })
}

/// `k` instances of one shape, revealed together with the sum of targets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceBatch {
    pub trees: Vec<AtpcTree>,
    pub hint: u64,
}

impl InstanceBatch {
    pub fn new(trees: Vec<AtpcTree>) -> Result<Self, AtpcError> {
        let first = trees.first().ok_or_else(|| AtpcError::InvalidParams("batch must be nonempty".into()))?;
        let (d, w) = (first.params.d, first.params.w);
        if trees.iter().any(|t| t.params.d != d || t.params.w != w) {
            return Err(AtpcError::InvalidParams("batch trees differ in shape".into()));
        }
        let hint = trees.iter().map(target).sum();
        Ok(InstanceBatch { trees, hint })
    }

    pub fn k(&self) -> usize {
        self.trees.len()
    }

    pub fn params(&self) -> AtpcParams {
        let p = self.trees[0].params;
        AtpcParams { k: self.trees.len() as u32, ..p }
    }

    pub fn targets(&self) -> Vec<u64> {
        self.trees.iter().map(target).collect()
    }

    pub fn answers(&self) -> Vec<bool> {
        self.trees.iter().map(answer).collect()
    }
}

/// Instance `j` uses seed `derive(seed, j)`.
pub fn sample_batch(k: u32, params: AtpcParams, seed: u64) -> Result<InstanceBatch, AtpcError> {
    let params = AtpcParams::with_k(params.d, params.w, k)?;
    let trees = (0..k).map(|j| sample_instance(params, seed::derive(seed, j as u64))).collect::<Result<Vec<_>, _>>()?;
    InstanceBatch::new(trees)
}

/// A depth-3 binary worked example: root pointer 2, level-2 pointers (2, 1),
/// level-1 pointers (2, 1, 1, 2) and leaves 0 1 0 1 1 1 0 0. Target 5, answer 1.
pub fn demo_tree() -> AtpcTree {
    AtpcTree::from_levels(3, 2, &[vec![2], vec![2, 1], vec![2, 1, 1, 2]], &[false, true, false, true, true, true, false, false])
        .expect("valid literal")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(pointer: u32, bits: &[u8]) -> AtpcTree {
        let params = AtpcParams::new(1, bits.len() as u32).unwrap();
        AtpcTree::new(params, Node::Leaf { pointer, bits: bits.iter().map(|&b| b == 1).collect() }).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(AtpcParams::new(0, 2).is_err());
        assert!(AtpcParams::new(2, 0).is_err());
        assert!(AtpcParams::new(64, 2).is_err());
        assert!(AtpcParams::new(63, 2).is_ok());
        assert_eq!(AtpcParams::new(3, 2).unwrap().leaves(), 8);
    }

    #[test]
    fn w1_pointer_forced() {
        let p = AtpcParams::new(1, 1).unwrap();
        for s in 0..20 {
            let t = sample_instance(p, s).unwrap();
            assert_eq!(t.root.pointer(), 1);
            assert_eq!(target(&t), 1);
        }
    }

    #[test]
    fn depth1_pointer_is_uniform() {
        let p = AtpcParams::new(1, 2).unwrap();
        let n = 100_000;
        let ones = (0..n).filter(|&s| sample_instance(p, s).unwrap().root.pointer() == 1).count();
        assert!((ones as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn sampling_hits_all_128() {
        let p = AtpcParams::new(2, 2).unwrap();
        let mut seen = std::collections::HashSet::new();
        for s in 0..20_000 {
            seen.insert(sample_instance(p, s).unwrap());
        }
        assert_eq!(seen.len(), 128);
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = AtpcParams::new(3, 3).unwrap();
        assert_eq!(sample_instance(p, 42).unwrap(), sample_instance(p, 42).unwrap());
    }

    #[test]
    fn targets_and_answers() {
        let p = AtpcParams::new(2, 3).unwrap();
        let all_one = AtpcTree::from_levels(2, 3, &[vec![1], vec![1, 1, 1]], &[true; 9]).unwrap();
        assert_eq!(target(&all_one), 1);
        assert_eq!(all_one.params, p);
        assert_eq!(target(&leaf(2, &[0, 0, 0])), 2);
        assert!(answer(&leaf(1, &[1, 0])));
        assert!(!answer(&leaf(1, &[0, 1])));
        let f = demo_tree();
        assert_eq!(target(&f), 5);
        assert!(answer(&f));
        assert_eq!(f.path(), vec![2, 1, 1]);
    }

    #[test]
    fn answer_bit_is_uniform() {
        let p = AtpcParams::new(2, 3).unwrap();
        let n = 100_000u64;
        let ones = (0..n).filter(|&s| answer(&sample_instance(p, s ^ 0xabc).unwrap())).count();
        assert!((ones as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn target_decomposition_random_depth3() {
        for w in 1..=3 {
            let p = AtpcParams::new(3, w).unwrap();
            for s in 0..1000 {
                let t = sample_instance(p, s).unwrap();
                let Node::Internal { pointer, children } = &t.root else { panic!() };
                let child = AtpcTree::new(AtpcParams::new(2, w).unwrap(), children[*pointer as usize - 1].clone()).unwrap();
                assert_eq!(target(&t), (*pointer as u64 - 1) * p.pow(2) + target(&child));
                assert_eq!(t.leaf_bits()[target(&t) as usize - 1], answer(&t));
            }
        }
    }

    #[test]
    fn batches() {
        let p = AtpcParams::new(1, 2).unwrap();
        let b = InstanceBatch::new(vec![leaf(1, &[0, 0]), leaf(1, &[1, 1])]).unwrap();
        assert_eq!(b.hint, 2);
        assert_eq!(InstanceBatch::new(vec![demo_tree()]).unwrap().hint, 5);
        for s in 0..200 {
            let b = sample_batch(3, p, s).unwrap();
            assert!((3..=6).contains(&b.hint));
            assert_eq!(b.k(), 3);
        }
        assert!(InstanceBatch::new(vec![leaf(1, &[0, 0]), demo_tree()]).is_err());
    }

    #[test]
    fn malformed_trees_rejected() {
        let p = AtpcParams::new(1, 2).unwrap();
        assert!(AtpcTree::new(p, Node::Leaf { pointer: 3, bits: vec![false, true] }).is_err());
        assert!(AtpcTree::new(p, Node::Leaf { pointer: 1, bits: vec![false] }).is_err());
        let p2 = AtpcParams::new(2, 2).unwrap();
        assert!(AtpcTree::new(p2, Node::Leaf { pointer: 1, bits: vec![false, true] }).is_err());
    }
}
