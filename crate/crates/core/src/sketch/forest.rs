//! Spanning forests from per-vertex edge-incidence sketches.

use super::l0::{L0Params, L0Sample, L0Sketch, Plan};
use super::SketchError;
use crate::seed::derive;
use crate::stream::{OpKind, StreamOp};
use petgraph::unionfind::UnionFind;

/// Number of vertex pairs, the incidence dimension.
pub fn pair_count(n: u32) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

/// Coordinate of the pair `u < v` (1-based vertices) in `[0, n(n−1)/2)`.
pub fn pair_index(n: u32, u: u32, v: u32) -> u64 {
    let (u, v) = (u.min(v) as u64 - 1, u.max(v) as u64 - 1);
    let n = n as u64;
    u * n - u * (u + 1) / 2 + (v - u - 1)
}

pub fn pair_of(n: u32, mut idx: u64) -> (u32, u32) {
    let n = n as u64;
    let mut u = 0;
    while idx >= n - u - 1 {
        idx -= n - u - 1;
        u += 1;
    }
    ((u + 1) as u32, (u + 2 + idx) as u32)
}

/// Sign convention: `+1` at the smaller endpoint, `−1` at the larger, so the
/// sum over a vertex set cancels every internal edge.
pub fn op_delta(op: &StreamOp) -> i64 {
    match op.kind {
        OpKind::Insert => 1,
        OpKind::Delete => -1,
    }
}

/// `⌈log₂ n⌉ + 2` merge rounds.
pub fn default_rounds(n: u32) -> u32 {
    (32 - n.saturating_sub(1).leading_zeros()) + 2
}

/// One sketch per vertex per merge round; rounds use independent randomness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForestSketchBank {
    n: u32,
    round_params: Vec<L0Params>,
    /// `sketches[r][v - 1]`.
    sketches: Vec<Vec<L0Sketch>>,
}

impl ForestSketchBank {
    pub fn new(n: u32, rounds: u32, delta: f64, seed: u64) -> Result<Self, SketchError> {
        let dim = pair_count(n).max(1);
        let round_params = (0..rounds).map(|r| L0Params::new(dim, delta, derive(seed, r as u64))).collect::<Result<Vec<_>, _>>()?;
        let sketches = round_params.iter().map(|&p| vec![L0Sketch::new(p); n as usize]).collect();
        Ok(ForestSketchBank { n, round_params, sketches })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn rounds(&self) -> usize {
        self.round_params.len()
    }

    pub fn bits(&self) -> u64 {
        self.round_params.iter().map(|p| p.bits() * self.n as u64).sum()
    }

    pub fn plans(&self, u: u32, v: u32) -> Result<Vec<Plan>, SketchError> {
        let idx = pair_index(self.n, u, v);
        self.round_params.iter().map(|p| p.plan(idx)).collect()
    }

    /// Adds `delta` copies of edge `{u, v}`.
    pub fn apply_edge(&mut self, u: u32, v: u32, delta: i64, plans: &[Plan]) {
        let (a, b) = (u.min(v) as usize - 1, u.max(v) as usize - 1);
        for (round, plan) in self.sketches.iter_mut().zip(plans) {
            round[a].apply(plan, delta);
            round[b].apply(plan, -delta);
        }
    }

    pub fn update(&mut self, op: &StreamOp) -> Result<(), SketchError> {
        check_endpoints(self.n, op)?;
        let plans = self.plans(op.u, op.v)?;
        self.apply_edge(op.u, op.v, op_delta(op), &plans);
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.sketches.iter().flatten().all(L0Sketch::is_zero)
    }

    /// Borůvka over the sketches: each round, every unfinished component sums
    /// its members' sketches for that round and samples a cut edge.
    pub fn spanning_forest(&self) -> Result<Vec<(u32, u32)>, SketchError> {
        let n = self.n as usize;
        let mut uf = UnionFind::<usize>::new(n);
        let mut done = vec![false; n];
        let mut forest = Vec::new();
        for round in &self.sketches {
            let mut sums: Vec<Option<L0Sketch>> = vec![None; n];
            for (v, s) in round.iter().enumerate() {
                let r = uf.find_mut(v);
                if done[r] {
                    continue;
                }
                match &mut sums[r] {
                    Some(acc) => acc.merge(s)?,
                    slot => *slot = Some(s.clone()),
                }
            }
            let mut found = Vec::new();
            let mut open = 0;
            for (r, s) in sums.iter().enumerate() {
                let Some(s) = s else { continue };
                match s.sample() {
                    L0Sample::Empty => done[r] = true,
                    L0Sample::Found(idx) => {
                        let (u, v) = pair_of(self.n, idx);
                        let (ru, rv) = (uf.find_mut(u as usize - 1), uf.find_mut(v as usize - 1));
                        if (ru == r) == (rv == r) {
                            return Err(SketchError::SketchFailure("sampled edge does not leave its component".into()));
                        }
                        found.push((u, v));
                        open += 1;
                    }
                    L0Sample::Fail => open += 1,
                }
            }
            for (u, v) in found {
                if uf.union(u as usize - 1, v as usize - 1) {
                    forest.push((u, v));
                }
            }
            if open == 0 {
                return Ok(forest);
            }
        }
        // A final check: every surviving component must now be isolated.
        let last = self.sketches.last();
        let mut sums: Vec<Option<L0Sketch>> = vec![None; n];
        if let Some(round) = last {
            for (v, s) in round.iter().enumerate() {
                let r = uf.find_mut(v);
                if done[r] {
                    continue;
                }
                match &mut sums[r] {
                    Some(acc) => acc.merge(s)?,
                    slot => *slot = Some(s.clone()),
                }
            }
        }
        if sums.iter().flatten().all(|s| s.sample() == L0Sample::Empty) {
            Ok(forest)
        } else {
            Err(SketchError::SketchFailure("merge rounds exhausted with open components".into()))
        }
    }

    pub fn write_bytes(&self, out: &mut Vec<u8>) {
        self.sketches.iter().flatten().for_each(|s| s.write_bytes(out));
    }

    pub fn read_bytes<'a>(&mut self, mut bytes: &'a [u8]) -> Result<&'a [u8], SketchError> {
        for (round, &p) in self.sketches.iter_mut().zip(&self.round_params) {
            for s in round.iter_mut() {
                let (t, rest) = L0Sketch::read_bytes(p, bytes)?;
                *s = t;
                bytes = rest;
            }
        }
        Ok(bytes)
    }
}

pub(crate) fn check_endpoints(n: u32, op: &StreamOp) -> Result<(), SketchError> {
    if op.u == op.v || op.u == 0 || op.v == 0 || op.u > n || op.v > n {
        return Err(SketchError::InvalidParams(format!("edge ({}, {}) outside [1, {n}]", op.u, op.v)));
    }
    Ok(())
}

/// One pass over `ops` into a fresh bank, then post-pass Borůvka.
pub fn spanning_forest_pass(n: u32, ops: &[StreamOp], seed: u64, delta: f64) -> Result<Vec<(u32, u32)>, SketchError> {
    let mut bank = ForestSketchBank::new(n, default_rounds(n), delta, seed)?;
    for op in ops {
        bank.update(op)?;
    }
    bank.spanning_forest()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::union_find_oracle;
    use crate::stream::StreamOp;
    use rand::Rng;

    #[test]
    fn pair_indexing() {
        for n in 2..12 {
            let mut seen = Vec::new();
            for u in 1..=n {
                for v in u + 1..=n {
                    let i = pair_index(n, u, v);
                    assert_eq!(pair_of(n, i), (u, v));
                    assert_eq!(pair_index(n, v, u), i);
                    seen.push(i);
                }
            }
            assert_eq!(seen, (0..pair_count(n)).collect::<Vec<_>>());
        }
    }

    #[test]
    fn path_and_cancel() {
        let ops: Vec<_> = [(1, 2), (2, 3), (3, 4)].iter().map(|&(u, v)| StreamOp::insert(u, v, 1)).collect();
        let f = spanning_forest_pass(4, &ops, 9, 0.05).unwrap();
        assert_eq!(f.len(), 3);
        let labels = union_find_oracle(&f, 4);
        assert!(labels.iter().all(|&l| l == labels[0]));
        let ops = [StreamOp::insert(1, 2, 1), StreamOp::delete(1, 2, 1)];
        assert!(spanning_forest_pass(4, &ops, 9, 0.05).unwrap().is_empty());
    }

    #[test]
    fn random_graphs_match_oracle() {
        let mut rng = crate::seed::rng(5);
        let mut ok = 0;
        for seed in 0..100 {
            let n = 20;
            let mut ops = Vec::new();
            let mut live = Vec::new();
            for u in 1..=n {
                for v in u + 1..=n {
                    if rng.gen_bool(0.12) {
                        ops.push(StreamOp::insert(u, v, 1));
                        live.push((u, v));
                    }
                }
            }
            // Delete roughly a third again.
            live.retain(|&(u, v)| {
                if rng.gen_bool(0.3) {
                    ops.push(StreamOp::delete(u, v, 1));
                    false
                } else {
                    true
                }
            });
            if let Ok(f) = spanning_forest_pass(n, &ops, seed, 0.05) {
                let truth = union_find_oracle(&live, n);
                if union_find_oracle(&f, n) == truth && f.iter().all(|e| live.contains(e)) {
                    ok += 1;
                }
            }
        }
        assert!(ok >= 90, "{ok}");
    }

    #[test]
    fn bank_bytes_round_trip() {
        let mut b = ForestSketchBank::new(5, 3, 0.1, 1).unwrap();
        b.update(&StreamOp::insert(1, 5, 2)).unwrap();
        let mut bytes = Vec::new();
        b.write_bytes(&mut bytes);
        assert_eq!(bytes.len() as u64 * 8, b.bits());
        let mut c = ForestSketchBank::new(5, 3, 0.1, 1).unwrap();
        assert!(c.read_bytes(&bytes).unwrap().is_empty());
        assert_eq!(b, c);
    }
}
