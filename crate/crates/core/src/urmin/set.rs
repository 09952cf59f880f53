use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SetError {
    #[error("element {0} outside universe [1, {1}]")]
    OutOfUniverse(u64, u64),
    #[error("elements not strictly increasing at {0}")]
    Unsorted(u64),
    #[error("universe mismatch: {0} vs {1}")]
    UniverseMismatch(u64, u64),
    #[error("bad token `{0}`")]
    Parse(String),
}

/// A sorted duplicate-free subset of `[1, universe]`.
///
/// Stored as maximal disjoint inclusive runs, so long intervals such as the
/// right-range block of `receiver` cost one entry.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ElementSet {
    universe: u64,
    runs: Vec<(u64, u64)>,
}

impl ElementSet {
    pub fn empty(universe: u64) -> Self {
        ElementSet { universe, runs: Vec::new() }
    }

    /// `[a, b]`, empty when `a > b`.
    pub fn interval(universe: u64, a: u64, b: u64) -> Result<Self, SetError> {
        let mut s = Self::empty(universe);
        if a <= b {
            s.check(a)?;
            s.check(b)?;
            s.runs.push((a, b));
        }
        Ok(s)
    }

    pub fn from_sorted(universe: u64, elems: impl IntoIterator<Item = u64>) -> Result<Self, SetError> {
        let mut s = Self::empty(universe);
        for x in elems {
            s.check(x)?;
            if s.max().is_some_and(|m| m >= x) {
                return Err(SetError::Unsorted(x));
            }
            s.append_run(x, x);
        }
        Ok(s)
    }

    /// Sorts and deduplicates first.
    pub fn from_unsorted(universe: u64, elems: impl IntoIterator<Item = u64>) -> Result<Self, SetError> {
        let mut v: Vec<u64> = elems.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self::from_sorted(universe, v)
    }

    fn check(&self, x: u64) -> Result<(), SetError> {
        if x == 0 || x > self.universe {
            Err(SetError::OutOfUniverse(x, self.universe))
        } else {
            Ok(())
        }
    }

    /// Caller guarantees `a` is above every current element.
    fn append_run(&mut self, a: u64, b: u64) {
        match self.runs.last_mut() {
            Some(last) if last.1 + 1 == a => last.1 = b,
            _ => self.runs.push((a, b)),
        }
    }

    /// Appends `other` shifted by `offset`. Panics if it would not stay
    /// above the current maximum or inside the universe; used only by the
    /// set constructions where sibling blocks are disjoint and ordered.
    pub(crate) fn append_shifted(&mut self, other: &ElementSet, offset: u64) {
        for &(a, b) in &other.runs {
            let (a, b) = (a + offset, b + offset);
            assert!(self.max().is_none_or(|m| m < a) && b <= self.universe, "out-of-order append");
            self.append_run(a, b);
        }
    }

    pub(crate) fn append_interval(&mut self, a: u64, b: u64) {
        if a <= b {
            assert!(self.max().is_none_or(|m| m < a) && b <= self.universe, "out-of-order append");
            self.append_run(a, b);
        }
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    pub fn runs(&self) -> &[(u64, u64)] {
        &self.runs
    }

    pub fn len(&self) -> u64 {
        self.runs.iter().map(|&(a, b)| b - a + 1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn min(&self) -> Option<u64> {
        self.runs.first().map(|r| r.0)
    }

    pub fn max(&self) -> Option<u64> {
        self.runs.last().map(|r| r.1)
    }

    pub fn contains(&self, x: u64) -> bool {
        let i = self.runs.partition_point(|r| r.1 < x);
        i < self.runs.len() && self.runs[i].0 <= x
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.runs.iter().flat_map(|&(a, b)| a..=b)
    }

    pub fn to_vec(&self) -> Vec<u64> {
        self.iter().collect()
    }

    /// `[1, universe] \ self`.
    pub fn complement(&self) -> ElementSet {
        let mut out = Self::empty(self.universe);
        let mut next = 1;
        for &(a, b) in &self.runs {
            if next < a {
                out.runs.push((next, a - 1));
            }
            next = b + 1;
        }
        if next <= self.universe {
            out.runs.push((next, self.universe));
        }
        out
    }

    pub fn difference(&self, other: &ElementSet) -> ElementSet {
        let mut out = Self::empty(self.universe);
        let mut j = 0;
        for &(a, b) in &self.runs {
            let mut lo = a;
            while j < other.runs.len() && other.runs[j].1 < lo {
                j += 1;
            }
            let mut k = j;
            while lo <= b {
                match other.runs.get(k) {
                    Some(&(c, e)) if c <= b => {
                        if c > lo {
                            out.append_run(lo, c - 1);
                        }
                        lo = lo.max(e + 1);
                        k += 1;
                    }
                    _ => {
                        out.append_run(lo, b);
                        break;
                    }
                }
            }
        }
        out
    }

    pub fn is_subset(&self, other: &ElementSet) -> bool {
        self.difference(other).is_empty()
    }

    /// `self ⊊ other`.
    pub fn is_strict_subset(&self, other: &ElementSet) -> bool {
        self.is_subset(other) && self.len() < other.len()
    }

    /// Space-separated ascending elements; runs of three or more render as `a..b`.
    pub fn to_text(&self) -> String {
        let mut parts = Vec::new();
        for &(a, b) in &self.runs {
            match b - a {
                0 => parts.push(a.to_string()),
                1 => {
                    parts.push(a.to_string());
                    parts.push(b.to_string());
                }
                _ => parts.push(format!("{a}..{b}")),
            }
        }
        parts.join(" ")
    }

    pub fn parse(universe: u64, s: &str) -> Result<Self, SetError> {
        let mut out = Self::empty(universe);
        for tok in s.split_whitespace() {
            let num = |t: &str| t.parse::<u64>().map_err(|_| SetError::Parse(tok.to_string()));
            let (a, b) = match tok.split_once("..") {
                Some((x, y)) => (num(x)?, num(y)?),
                None => {
                    let x = num(tok)?;
                    (x, x)
                }
            };
            if a > b {
                return Err(SetError::Parse(tok.to_string()));
            }
            out.check(a)?;
            out.check(b)?;
            if out.max().is_some_and(|m| m >= a) {
                return Err(SetError::Unsorted(a));
            }
            out.append_run(a, b);
        }
        Ok(out)
    }
}

impl fmt::Debug for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}} ⊆ [{}]", self.to_text(), self.universe)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn set(u: u64, v: &[u64]) -> ElementSet {
        ElementSet::from_sorted(u, v.iter().copied()).unwrap()
    }

    #[test]
    fn basics() {
        let s = set(8, &[1, 2, 3, 6]);
        assert_eq!(s.runs(), &[(1, 3), (6, 6)]);
        assert_eq!(s.len(), 4);
        assert_eq!(s.to_text(), "1..3 6");
        assert_eq!(s.complement().to_vec(), vec![4, 5, 7, 8]);
        assert!(s.contains(2) && !s.contains(4));
        assert_eq!(s.min(), Some(1));
        assert!(ElementSet::from_sorted(4, [2, 2]).is_err());
        assert!(ElementSet::from_sorted(4, [5]).is_err());
        assert!(ElementSet::from_sorted(4, [0]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let s = set(20, &[1, 2, 5, 6, 7, 8, 12, 20]);
        assert_eq!(s.to_text(), "1 2 5..8 12 20");
        assert_eq!(ElementSet::parse(20, &s.to_text()).unwrap(), s);
        assert_eq!(ElementSet::parse(20, "1 2 3").unwrap(), set(20, &[1, 2, 3]));
        assert!(ElementSet::parse(20, "3 1").is_err());
        assert!(ElementSet::parse(20, "5..3").is_err());
        assert!(ElementSet::parse(20, "x").is_err());
        assert!(ElementSet::parse(5, "3..6").is_err());
    }

    proptest! {
        #[test]
        fn ops_match_btreeset(a in prop::collection::btree_set(1u64..=64, 0..40),
                              b in prop::collection::btree_set(1u64..=64, 0..40)) {
            let sa = ElementSet::from_sorted(64, a.iter().copied()).unwrap();
            let sb = ElementSet::from_sorted(64, b.iter().copied()).unwrap();
            let diff: Vec<u64> = a.difference(&b).copied().collect();
            prop_assert_eq!(sa.difference(&sb).to_vec(), diff);
            let all: BTreeSet<u64> = (1..=64).collect();
            let comp: Vec<u64> = all.difference(&a).copied().collect();
            prop_assert_eq!(sa.complement().to_vec(), comp);
            prop_assert_eq!(sa.is_subset(&sb), a.is_subset(&b));
            prop_assert_eq!(sa.len() as usize, a.len());
            for x in 1..=64 {
                prop_assert_eq!(sa.contains(x), a.contains(&x));
            }
            prop_assert_eq!(ElementSet::parse(64, &sa.to_text()).unwrap(), sa);
        }
    }
}
