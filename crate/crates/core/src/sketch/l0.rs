//! ℓ0 sampler over integer vectors indexed by `[0, dim)`.
//!
//! Each repetition assigns every index a level (trailing zeros of a keyed
//! hash, capped) and keeps one `(count, index_sum, fingerprint)` cell per
//! level; an index is added to all cells at or below its level. A cell whose
//! survivors are a single index `i` with value `c` has `index_sum = c·i` and
//! `fingerprint = c·h(i)`, which is what `sample` checks. All arithmetic
//! wraps, so the state is a linear function of the net vector.

use super::SketchError;
use crate::seed::{derive, hash_words};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct L0Params {
    pub dim: u64,
    pub levels: u32,
    pub reps: u32,
    pub seed: u64,
}

/// Bits per cell: three 64-bit words.
pub const CELL_BITS: u64 = 192;

impl L0Params {
    /// `levels = ⌈log₂ dim⌉ + 1`, `reps = ⌈log₂(1/δ)⌉`.
    pub fn new(dim: u64, delta: f64, seed: u64) -> Result<Self, SketchError> {
        if dim == 0 {
            return Err(SketchError::InvalidParams("dimension must be positive".into()));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(SketchError::InvalidParams(format!("delta {delta} outside (0, 1)")));
        }
        let levels = (64 - (dim - 1).leading_zeros()) + 1;
        let reps = ((1.0 / delta).log2().ceil() as u32).max(1);
        Ok(L0Params { dim, levels, reps, seed })
    }

    pub fn cells(&self) -> usize {
        (self.levels * self.reps) as usize
    }

    pub fn bits(&self) -> u64 {
        self.cells() as u64 * CELL_BITS
    }

    /// Per-repetition level and fingerprint of `index`, shared by every
    /// sketch built from these parameters.
    pub fn plan(&self, index: u64) -> Result<Plan, SketchError> {
        if index >= self.dim {
            return Err(SketchError::IndexOutOfRange { index, dim: self.dim });
        }
        let mut top = Vec::with_capacity(self.reps as usize);
        let mut fp = Vec::with_capacity(self.reps as usize);
        for r in 0..self.reps as u64 {
            let h = hash_words(derive(self.seed, 2 * r), &[index]);
            top.push((h.trailing_zeros()).min(self.levels - 1) as u8);
            fp.push(self.fingerprint(r, index));
        }
        Ok(Plan { index, top, fp })
    }

    fn fingerprint(&self, rep: u64, index: u64) -> u64 {
        hash_words(derive(self.seed, 2 * rep + 1), &[index])
    }
}

/// Precomputed hash values for one index.
#[derive(Clone, Debug)]
pub struct Plan {
    index: u64,
    top: Vec<u8>,
    fp: Vec<u64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
struct Cell {
    count: i64,
    isum: i64,
    fp: u64,
}

impl Cell {
    fn is_zero(&self) -> bool {
        self.count == 0 && self.isum == 0 && self.fp == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum L0Sample {
    Found(u64),
    Empty,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct L0Sketch {
    params: L0Params,
    cells: Vec<Cell>,
}

impl L0Sketch {
    pub fn new(params: L0Params) -> Self {
        L0Sketch { params, cells: vec![Cell::default(); params.cells()] }
    }

    pub fn params(&self) -> &L0Params {
        &self.params
    }

    pub fn bits(&self) -> u64 {
        self.params.bits()
    }

    pub fn update(&mut self, index: u64, delta: i64) -> Result<(), SketchError> {
        let plan = self.params.plan(index)?;
        self.apply(&plan, delta);
        Ok(())
    }

    /// Applies a plan made from the same parameters.
    pub fn apply(&mut self, plan: &Plan, delta: i64) {
        let levels = self.params.levels as usize;
        let di = delta.wrapping_mul(plan.index as i64);
        for (r, (&top, &fp)) in plan.top.iter().zip(&plan.fp).enumerate() {
            let dfp = (delta as u64).wrapping_mul(fp);
            for c in &mut self.cells[r * levels..=r * levels + top as usize] {
                c.count = c.count.wrapping_add(delta);
                c.isum = c.isum.wrapping_add(di);
                c.fp = c.fp.wrapping_add(dfp);
            }
        }
    }

    pub fn merge(&mut self, other: &L0Sketch) -> Result<(), SketchError> {
        if self.params != other.params {
            return Err(SketchError::RandomnessMismatch);
        }
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            a.count = a.count.wrapping_add(b.count);
            a.isum = a.isum.wrapping_add(b.isum);
            a.fp = a.fp.wrapping_add(b.fp);
        }
        Ok(())
    }

    pub fn merged(mut self, other: &L0Sketch) -> Result<L0Sketch, SketchError> {
        self.merge(other)?;
        Ok(self)
    }

    pub fn negate(&mut self) {
        for c in &mut self.cells {
            c.count = c.count.wrapping_neg();
            c.isum = c.isum.wrapping_neg();
            c.fp = c.fp.wrapping_neg();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.cells.iter().all(Cell::is_zero)
    }

    fn pure(&self, rep: u64, c: &Cell) -> Option<u64> {
        if c.count == 0 || c.isum % c.count != 0 {
            return None;
        }
        let i = c.isum / c.count;
        if i < 0 || i as u64 >= self.params.dim {
            return None;
        }
        let i = i as u64;
        ((c.count as u64).wrapping_mul(self.params.fingerprint(rep, i)) == c.fp).then_some(i)
    }

    /// A nonzero coordinate, `Empty` if every level-0 cell is zero, `Fail`
    /// if no cell is pure.
    pub fn sample(&self) -> L0Sample {
        let levels = self.params.levels as usize;
        if (0..self.params.reps as usize).all(|r| self.cells[r * levels].is_zero()) {
            return L0Sample::Empty;
        }
        for r in 0..self.params.reps as usize {
            for c in self.cells[r * levels..(r + 1) * levels].iter().rev() {
                if let Some(i) = self.pure(r as u64, c) {
                    return L0Sample::Found(i);
                }
            }
        }
        L0Sample::Fail
    }

    /// Little-endian cell words, `bits() / 8` bytes.
    pub fn write_bytes(&self, out: &mut Vec<u8>) {
        for c in &self.cells {
            out.extend_from_slice(&c.count.to_le_bytes());
            out.extend_from_slice(&c.isum.to_le_bytes());
            out.extend_from_slice(&c.fp.to_le_bytes());
        }
    }

    /// Reads one sketch from the front of `bytes`, returning the rest.
    pub fn read_bytes<'a>(params: L0Params, bytes: &'a [u8]) -> Result<(L0Sketch, &'a [u8]), SketchError> {
        let need = params.cells() * 24;
        if bytes.len() < need {
            return Err(SketchError::Decode("truncated sketch".into()));
        }
        let word = |k: usize| u64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().expect("8 bytes"));
        let cells =
            (0..params.cells()).map(|j| Cell { count: word(3 * j) as i64, isum: word(3 * j + 1) as i64, fp: word(3 * j + 2) }).collect();
        Ok((L0Sketch { params, cells }, &bytes[need..]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::Rng;

    fn params(seed: u64) -> L0Params {
        L0Params::new(1000, 0.05, seed).unwrap()
    }

    #[test]
    fn shape_defaults() {
        let p = L0Params::new(1024, 0.01, 0).unwrap();
        assert_eq!(p.levels, 11);
        assert_eq!(p.reps, 7);
        assert_eq!(L0Params::new(1, 0.5, 0).unwrap().levels, 1);
        assert!(L0Params::new(0, 0.5, 0).is_err());
        assert!(L0Params::new(4, 1.5, 0).is_err());
    }

    #[test]
    fn insert_delete_cancels() {
        let mut s = L0Sketch::new(params(1));
        s.update(5, 1).unwrap();
        assert!(!s.is_zero());
        s.update(5, -1).unwrap();
        assert_eq!(s, L0Sketch::new(params(1)));
        assert!(matches!(s.update(1000, 1), Err(SketchError::IndexOutOfRange { .. })));
    }

    #[test]
    fn singleton_and_pair() {
        let mut ok = 0;
        for seed in 0..200 {
            let mut s = L0Sketch::new(params(seed));
            s.update(7, 1).unwrap();
            if s.sample() == L0Sample::Found(7) {
                ok += 1;
            }
            assert!(matches!(s.sample(), L0Sample::Found(7) | L0Sample::Fail));
            let mut a = L0Sketch::new(params(seed));
            let mut b = L0Sketch::new(params(seed));
            a.update(3, 1).unwrap();
            b.update(9, 1).unwrap();
            let m = a.merged(&b).unwrap();
            assert!(matches!(m.sample(), L0Sample::Found(3) | L0Sample::Found(9) | L0Sample::Fail));
        }
        assert!(ok >= 190);
    }

    #[test]
    fn random_nets_sample_nonzero() {
        let mut rng = crate::seed::rng(11);
        let (mut found, trials) = (0, 1000);
        for seed in 0..trials {
            let mut s = L0Sketch::new(params(seed));
            let mut net = vec![0i64; 1000];
            for _ in 0..rng.gen_range(1..200) {
                let i = rng.gen_range(0..1000);
                let d = if rng.gen() { 1 } else { -1 };
                net[i] += d;
                s.update(i as u64, d).unwrap();
            }
            match s.sample() {
                L0Sample::Found(i) => {
                    assert_ne!(net[i as usize], 0);
                    found += 1;
                }
                L0Sample::Empty => assert!(net.iter().all(|&x| x == 0)),
                L0Sample::Fail => {}
            }
            if net.iter().all(|&x| x == 0) {
                found += 1;
            }
        }
        assert!(found as f64 >= 0.95 * trials as f64, "found {found}");
    }

    #[test]
    fn merge_identity_inverse_mismatch() {
        let mut s = L0Sketch::new(params(2));
        s.update(4, 3).unwrap();
        s.update(40, -1).unwrap();
        assert_eq!(s.clone().merged(&L0Sketch::new(params(2))).unwrap(), s);
        let mut neg = s.clone();
        neg.negate();
        assert!(s.clone().merged(&neg).unwrap().is_zero());
        assert_eq!(s.merge(&L0Sketch::new(params(3))), Err(SketchError::RandomnessMismatch));
    }

    #[test]
    fn bytes_round_trip() {
        let mut s = L0Sketch::new(params(4));
        s.update(17, 2).unwrap();
        let mut b = Vec::new();
        s.write_bytes(&mut b);
        assert_eq!(b.len() as u64 * 8, s.bits());
        let (t, rest) = L0Sketch::read_bytes(params(4), &b).unwrap();
        assert_eq!(t, s);
        assert!(rest.is_empty());
    }

    proptest! {
        #[test]
        fn permutation_invariant(ups in prop::collection::vec((0u64..1000, -3i64..=3), 0..60), seed in any::<u64>()) {
            let mut a = L0Sketch::new(params(seed));
            ups.iter().for_each(|&(i, d)| a.update(i, d).unwrap());
            let mut shuffled = ups.clone();
            shuffled.shuffle(&mut crate::seed::rng(seed));
            let mut b = L0Sketch::new(params(seed));
            shuffled.iter().for_each(|&(i, d)| b.update(i, d).unwrap());
            prop_assert_eq!(&a, &b);
            let mut x = L0Sketch::new(params(seed));
            let mut y = L0Sketch::new(params(seed));
            let mut both = L0Sketch::new(params(seed));
            for (j, &(i, d)) in ups.iter().enumerate() {
                if j % 2 == 0 { x.update(i, d).unwrap() } else { y.update(i, d).unwrap() }
                both.update(i, d).unwrap();
            }
            prop_assert_eq!(x.merged(&y).unwrap(), both);
        }
    }
}
