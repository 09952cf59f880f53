//! Deterministic one-way protocols on `𝒟_{1,w}` with a maximum-likelihood
//! Bob.
//!
//! Alice's leaf block is read as an integer `x` with leaf `j` at bit
//! `j − 1`. A protocol is a map `x ↦ m` to a `bits`-bit message; Bob, who
//! holds the pointer `i` and the bits left of it, outputs the likelier value
//! of leaf `i` given `m`.

use super::{bits_of, bits_value, q_frac, Arity, Bits, Ctx, Protocol, ProtocolError, Seat, View, Q};
use crate::atpc::{AliceView, BobView};
use crate::Party;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::sync::Arc;

fn leaf_int(bits: &[bool]) -> u64 {
    bits.iter().enumerate().fold(0, |acc, (j, &b)| acc | (b as u64) << j)
}

#[derive(Clone, Debug)]
pub struct OneWay {
    name: String,
    w: u32,
    bits: u32,
    messages: Vec<u64>,
    /// `guess[(m * w + (i − 1)) << (w − 1) | prefix]`.
    guess: Vec<bool>,
    hits: u64,
}

impl OneWay {
    pub fn new(name: impl Into<String>, w: u32, bits: u32, f: impl Fn(u64) -> u64) -> Result<Self, ProtocolError> {
        if !(1..=16).contains(&w) || bits > 16 {
            return Err(ProtocolError::Params(format!("one-way family needs w ≤ 16 and at most 16 bits, got w = {w}, {bits} bits")));
        }
        let xs = 1u64 << w;
        let messages: Vec<u64> = (0..xs).map(&f).collect();
        if messages.iter().any(|&m| m >> bits != 0) {
            return Err(ProtocolError::Params("message exceeds its declared width".into()));
        }
        let half = 1usize << (w - 1);
        let cells = (1usize << bits) * w as usize * half;
        let mut ones = vec![0u32; cells];
        let mut total = vec![0u32; cells];
        for (x, &m) in messages.iter().enumerate() {
            for i in 0..w as usize {
                let cell = ((m as usize * w as usize + i) << (w - 1)) | (x & ((1 << i) - 1));
                total[cell] += 1;
                ones[cell] += (x >> i & 1) as u32;
            }
        }
        let guess: Vec<bool> = ones.iter().zip(&total).map(|(&o, &t)| 2 * o > t).collect();
        let hits = ones.iter().zip(&total).map(|(&o, &t)| o.max(t - o) as u64).sum();
        Ok(OneWay { name: name.into(), w, bits, messages, guess, hits })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cc(&self) -> u32 {
        self.bits
    }

    /// Exact success on `𝒟_{1,w}`, from the maximum-likelihood counts.
    pub fn success(&self) -> Q {
        q_frac(self.hits, (self.w as u64) << self.w)
    }

    /// `success ≤ 1/2 + √(CC/w)`, decided exactly.
    pub fn within_bound(&self) -> bool {
        let adv = self.success() - q_frac(1, 2);
        !adv.is_positive() || &adv * &adv * Q::from_integer(self.w.into()) <= Q::from_integer(self.bits.into())
    }
}

impl Protocol for OneWay {
    type A = AliceView;
    type B = BobView;

    fn id(&self) -> String {
        format!("one-way-{}-w{}", self.name, self.w)
    }

    fn arity(&self) -> Arity {
        Arity::TwoParty
    }

    fn rounds(&self) -> u32 {
        1
    }

    fn max_bits(&self, seat: Seat, _: u32) -> u64 {
        if seat.side == Party::Alice {
            self.bits as u64
        } else {
            0
        }
    }

    fn message(&self, input: View<'_, AliceView, BobView>, _: &Ctx<'_>) -> Result<Bits, ProtocolError> {
        match input.alice()? {
            AliceView::Bits(b) if b.len() == self.w as usize => Ok(bits_of(self.messages[leaf_int(b) as usize], self.bits as usize)),
            _ => Err(ProtocolError::Input("expected a depth-1 leaf block".into())),
        }
    }

    fn output(&self, input: View<'_, AliceView, BobView>, ctx: &Ctx<'_>) -> Result<bool, ProtocolError> {
        let (i, prefix) = match input.bob()? {
            BobView::Leaf { pointer, prefix } => (*pointer as usize, leaf_int(prefix) as usize),
            BobView::Node { .. } => return Err(ProtocolError::Input("expected a depth-1 Bob view".into())),
        };
        let m = ctx.board.first().map_or(0, |p| bits_value(&p.bits)) as usize;
        Ok(self.guess[((m * self.w as usize + i - 1) << (self.w - 1)) | prefix])
    }
}

/// All Boolean functions of at most two leaf coordinates, as truth tables
/// over `x`, without duplicates.
fn two_coordinate_functions(w: u32) -> Vec<Vec<bool>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for c1 in 0..w {
        for c2 in c1..w {
            for g in 0..16u32 {
                let t: Vec<bool> = (0..1u64 << w).map(|x| g >> ((x >> c1 & 1) + 2 * (x >> c2 & 1)) & 1 == 1).collect();
                if seen.insert(t.clone()) {
                    out.push(t);
                }
            }
        }
    }
    out
}

type Map = (&'static str, u32, fn(u32, u64) -> u64);

/// Twenty fixed message maps of one to three bits.
pub fn hand_written_maps() -> Vec<Map> {
    fn bit(x: u64, j: u32) -> u64 {
        x >> j & 1
    }
    fn ones(w: u32, x: u64) -> u64 {
        (x & ((1 << w) - 1)).count_ones() as u64
    }
    vec![
        ("parity", 1, |w, x| ones(w, x) % 2),
        ("majority", 1, |w, x| (2 * ones(w, x) > w as u64) as u64),
        ("first", 1, |_, x| bit(x, 0)),
        ("last", 1, |w, x| bit(x, w - 1)),
        ("any", 1, |w, x| (ones(w, x) > 0) as u64),
        ("all", 1, |w, x| (ones(w, x) == w as u64) as u64),
        ("first-two", 2, |_, x| x & 3),
        ("even-parity", 1, |w, x| (0..w).step_by(2).map(|j| bit(x, j)).sum::<u64>() % 2),
        ("odd-parity", 1, |w, x| (1..w).step_by(2).map(|j| bit(x, j)).sum::<u64>() % 2),
        ("weight-mod-4", 2, |w, x| ones(w, x) % 4),
        ("xor01-and2", 2, |_, x| (bit(x, 0) ^ bit(x, 1)) | (bit(x, 2) << 1)),
        ("half-parities", 2, |w, x| {
            let h = w / 2;
            (ones(h, x) % 2) | ((ones(w - h, x >> h) % 2) << 1)
        }),
        ("first-one", 2, |w, x| (0..w).find(|&j| bit(x, j) == 1).map_or(3, |j| j.min(3) as u64)),
        ("and01", 1, |_, x| bit(x, 0) & bit(x, 1)),
        ("middle", 1, |w, x| bit(x, w / 2)),
        ("weight-2", 1, |w, x| (ones(w, x) >= 2) as u64),
        ("and012", 1, |_, x| bit(x, 0) & bit(x, 1) & bit(x, 2)),
        ("top-two", 2, |w, x| bit(x, w - 1) | (bit(x, w - 2) << 1)),
        ("ends-xor", 1, |w, x| bit(x, 0) ^ bit(x, w - 1)),
        ("first-three", 3, |_, x| x & 7),
    ]
}

/// The test family at width `w`: every ≤2-coordinate Boolean function as a
/// 1-bit message, every unordered pair of distinct ones as a 2-bit message,
/// then the hand-written maps. Members are built lazily.
pub fn one_way_family(w: u32) -> Result<impl Iterator<Item = OneWay>, ProtocolError> {
    if !(3..=12).contains(&w) {
        return Err(ProtocolError::Params(format!("family defined for 3 ≤ w ≤ 12, got {w}")));
    }
    let fs = Arc::new(two_coordinate_functions(w));
    let n = fs.len();
    let singles = {
        let fs = fs.clone();
        (0..n).map(move |a| OneWay::new(format!("f{a}"), w, 1, |x| fs[a][x as usize] as u64))
    };
    let pairs = (0..n).flat_map(move |a| {
        let fs = fs.clone();
        (a + 1..n).map(move |b| OneWay::new(format!("f{a}+f{b}"), w, 2, |x| fs[a][x as usize] as u64 | (fs[b][x as usize] as u64) << 1))
    });
    let hand = hand_written_maps().into_iter().map(move |(name, bits, f)| OneWay::new(name, w, bits, |x| f(w, x)));
    Ok(singles.chain(pairs).chain(hand).map(|p| p.expect("family members are well formed")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneWayCheck {
    pub w: u32,
    pub protocols: u64,
    pub max_success: f64,
    /// Smallest `1/2 + √(CC/w) − success`.
    pub min_slack: f64,
    pub violations: Vec<String>,
}

impl OneWayCheck {
    pub fn run(w: u32) -> Result<Self, ProtocolError> {
        let mut c = OneWayCheck { w, protocols: 0, max_success: 0.0, min_slack: f64::INFINITY, violations: Vec::new() };
        for p in one_way_family(w)? {
            c.protocols += 1;
            let s = super::q_f64(&p.success());
            c.max_success = c.max_success.max(s);
            c.min_slack = c.min_slack.min(0.5 + (p.cc() as f64 / w as f64).sqrt() - s);
            if !p.within_bound() {
                c.violations.push(p.id());
            }
        }
        Ok(c)
    }

    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::super::eval::{atpc_table, exact_success, Caps};
    use super::*;
    use crate::atpc::AtpcParams;

    #[test]
    fn family_sizes() {
        // 2 constants, 2w literals, 10 genuine functions per pair.
        for w in [4u32, 8] {
            let n = 2 + 2 * w as usize + 10 * (w * (w - 1) / 2) as usize;
            assert_eq!(two_coordinate_functions(w).len(), n);
            assert_eq!(one_way_family(w).unwrap().count(), n + n * (n - 1) / 2 + 20);
        }
        assert_eq!(hand_written_maps().len(), 20);
    }

    #[test]
    fn ml_success_matches_generic_enumeration() {
        for w in [4u32, 5] {
            let table = atpc_table(AtpcParams::new(1, w).unwrap()).unwrap();
            let fam: Vec<_> = one_way_family(w).unwrap().collect();
            let picks = fam.iter().step_by(fam.len() / 40).chain(fam.iter().rev().take(20));
            for p in picks {
                let e = exact_success(p, &table, Caps::default()).unwrap();
                assert_eq!(e.success, p.success(), "{}", p.id());
                assert!(e.cc_total_max <= p.cc() as u64);
            }
        }
    }

    #[test]
    fn first_bit_value() {
        let p = OneWay::new("first", 4, 1, |x| x & 1).unwrap();
        // Pointer 1: always right. Otherwise the prefix gives nothing
        // about the target bit: 1/2.
        assert_eq!(p.success(), q_frac(1, 4) + q_frac(3, 8));
        assert!(OneWay::new("wide", 4, 1, |x| x & 3).is_err());
    }

    #[test]
    fn bound_holds_at_w4() {
        let c = OneWayCheck::run(4).unwrap();
        assert!(c.pass(), "{:?}", c.violations);
        assert!(c.max_success < 1.0);
    }
}
