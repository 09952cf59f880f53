//! Round elimination for tree pointer chasing.
//!
//! From a deterministic protocol `π` for `ATPC_{d+1,w}` whose first message
//! `M` is Alice's, build `τ` for `ATPC_{d,w}` with one round fewer. With
//! `I` the root pointer, `A_j, B_j` the two views of child `j`:
//!
//! 1. publicly sample `(M, B_{<I}, I)`;
//! 2. Alice takes `A_I = A`, Bob takes `B_I = B`;
//! 3. Alice privately samples `A_{<I}` given `(M, A_I, B_{<I}, I)` and
//!    builds `B' = (I, A_{≤I}, B_{<I})`;
//! 4. Bob privately samples `B_{>I}` given `(M, B_{≤I}, I)` and builds
//!    `A' = B_{≤w}`;
//! 5. they run `π` from its second round on `(A', B')`, Alice as `π`'s Bob.
//!
//! All laws come from counting over the enumerated joint support. When a
//! private conditioning event has zero mass (the public `M` contradicts the
//! party's real view), the party falls back to the same conditional
//! without `M`. The mass of such runs is reported by
//! [`RoundEliminated::fallback_mass`].

use super::eval::{atpc_table, exact_success, Caps};
use super::{declared_cc, q_f64, Arity, Bits, Ctx, Law, Post, Protocol, ProtocolError, Seat, Tape, View, Q};
use crate::atpc::{derive_views, enumerate_instances, support_size, AliceView, AtpcParams, BobView};
use crate::Party;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::hash::Hash;

struct Group<V> {
    values: Vec<V>,
    index: HashMap<V, usize>,
    counts: Vec<u64>,
    total: u64,
}

/// Conditional laws `V | K` from joint counts.
struct CondTable<K, V> {
    groups: HashMap<K, Group<V>>,
}

impl<K: Hash + Eq, V: Hash + Eq + Clone> CondTable<K, V> {
    fn new() -> Self {
        CondTable { groups: HashMap::new() }
    }

    fn add(&mut self, key: K, value: V) {
        let g = self.groups.entry(key).or_insert_with(|| Group { values: Vec::new(), index: HashMap::new(), counts: Vec::new(), total: 0 });
        let j = *g.index.entry(value.clone()).or_insert_with(|| {
            g.values.push(value);
            g.counts.push(0);
            g.values.len() - 1
        });
        g.counts[j] += 1;
        g.total += 1;
    }

    fn law(&self, key: &K, tag: u64) -> Option<Law> {
        let g = self.groups.get(key)?;
        Some(Law::Finite(g.counts.iter().enumerate().map(|(j, &c)| (vec![tag, j as u64], Q::new(c.into(), g.total.into()))).collect()))
    }

    fn value(&self, key: &K, j: u64) -> Option<&V> {
        self.groups.get(key)?.values.get(j as usize)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Public {
    i: u32,
    m: Bits,
    b_lt: Vec<BobView>,
}

type AliceKey = (Bits, AliceView, Vec<BobView>, u32);
type AliceFreeKey = (AliceView, Vec<BobView>, u32);
type BobKey = (Bits, Vec<BobView>, u32);
type BobFreeKey = (Vec<BobView>, u32);

pub struct RoundEliminated<P> {
    inner: P,
    params: AtpcParams,
    publics: Vec<(Public, Q)>,
    alice: CondTable<AliceKey, Vec<AliceView>>,
    alice_free: CondTable<AliceFreeKey, Vec<AliceView>>,
    bob: CondTable<BobKey, Vec<BobView>>,
    bob_free: CondTable<BobFreeKey, Vec<BobView>>,
}

impl<P> std::fmt::Debug for RoundEliminated<P> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RoundEliminated").field("params", &self.params).field("publics", &self.publics.len()).finish()
    }
}

fn fixed_tape(law: Law) -> Result<Tape, ProtocolError> {
    match law {
        Law::Fixed(t) => Ok(t),
        Law::Finite(mut v) if v.len() == 1 => Ok(v.pop().map(|x| x.0).unwrap_or_default()),
        _ => Err(ProtocolError::Params("round elimination needs a deterministic protocol".into())),
    }
}

/// Builds `τ` for `ATPC_{d,w}` (`params`) from `π` for `ATPC_{d+1,w}`.
pub fn round_eliminate<P>(inner: P, params: AtpcParams, caps: Caps) -> Result<RoundEliminated<P>, ProtocolError>
where
    P: Protocol<A = AliceView, B = BobView>,
{
    if inner.arity() != Arity::TwoParty || inner.rounds() == 0 {
        return Err(ProtocolError::Params("π must be two-party with at least one round".into()));
    }
    let pub_tape = fixed_tape(inner.public_law())?;
    let w = params.w as usize;
    let count = support_size(params).map_err(|e| ProtocolError::Params(e.to_string()))?;
    let joint = count.checked_pow(params.w).and_then(|x| x.checked_mul(w as u128)).unwrap_or(u128::MAX);
    if joint > caps.inputs {
        return Err(ProtocolError::Capacity { what: "joint table of the larger instance", size: joint, cap: caps.inputs });
    }
    let children: Vec<(AliceView, BobView)> =
        enumerate_instances(params).map_err(|e| ProtocolError::Params(e.to_string()))?.map(|t| derive_views(&t)).collect();
    let n = children.len();
    let mut public_counts: CondTable<(), Public> = CondTable::new();
    let mut alice = CondTable::new();
    let mut alice_free = CondTable::new();
    let mut bob = CondTable::new();
    let mut bob_free = CondTable::new();
    let mut idx = vec![0usize; w];
    let first = Seat::alice(1);
    loop {
        let bs: Vec<BobView> = idx.iter().map(|&c| children[c].1.clone()).collect();
        let a_prime = AliceView::Children(bs.clone());
        let private = fixed_tape(inner.private_law(first, View::Alice(&a_prime), &pub_tape))?;
        let ctx = Ctx { seat: first, round: 1, board: &[], public: &pub_tape, private: &private };
        let m = inner.message(View::Alice(&a_prime), &ctx)?;
        for i in 1..=w {
            let a: Vec<AliceView> = idx[..i].iter().map(|&c| children[c].0.clone()).collect();
            let b_lt = bs[..i - 1].to_vec();
            let b_le = bs[..i].to_vec();
            let a_lt = a[..i - 1].to_vec();
            let i32_ = i as u32;
            public_counts.add((), Public { i: i32_, m: m.clone(), b_lt: b_lt.clone() });
            alice.add((m.clone(), a[i - 1].clone(), b_lt.clone(), i32_), a_lt.clone());
            alice_free.add((a[i - 1].clone(), b_lt, i32_), a_lt);
            bob.add((m.clone(), b_le.clone(), i32_), bs[i..].to_vec());
            bob_free.add((b_le, i32_), bs[i..].to_vec());
        }
        let mut j = w;
        loop {
            if j == 0 {
                let g = public_counts.groups.remove(&()).expect("nonempty joint");
                let publics = g.values.into_iter().zip(g.counts).map(|(p, c)| (p, Q::new(c.into(), g.total.into()))).collect();
                return Ok(RoundEliminated { inner, params, publics, alice, alice_free, bob, bob_free });
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < n {
                break;
            }
            idx[j] = 0;
        }
    }
}

impl<P> RoundEliminated<P>
where
    P: Protocol<A = AliceView, B = BobView>,
{
    fn public(&self, tape: &[u64]) -> Result<&Public, ProtocolError> {
        let i = *tape.first().ok_or_else(|| ProtocolError::Law("missing public tape".into()))?;
        self.publics.get(i as usize).map(|x| &x.0).ok_or_else(|| ProtocolError::Law("public tape out of range".into()))
    }

    fn alice_law(&self, a: &AliceView, p: &Public) -> Option<Law> {
        self.alice
            .law(&(p.m.clone(), a.clone(), p.b_lt.clone(), p.i), 0)
            .or_else(|| self.alice_free.law(&(a.clone(), p.b_lt.clone(), p.i), 1))
    }

    fn bob_le(b: &BobView, p: &Public) -> Vec<BobView> {
        let mut v = p.b_lt.clone();
        v.push(b.clone());
        v
    }

    fn bob_law(&self, b: &BobView, p: &Public) -> Option<Law> {
        let le = Self::bob_le(b, p);
        self.bob.law(&(p.m.clone(), le.clone(), p.i), 0).or_else(|| self.bob_free.law(&(le, p.i), 1))
    }

    /// `π`'s input for the given `τ` party.
    fn lift(&self, input: View<'_, AliceView, BobView>, ctx: &Ctx<'_>) -> Result<(Party, PiInput), ProtocolError> {
        let p = self.public(ctx.public)?;
        let bad = || ProtocolError::Law("private tape does not match the conditional table".into());
        let (tag, j) = match ctx.private {
            [t, j] => (*t, *j),
            _ => return Err(bad()),
        };
        match input {
            View::Alice(a) => {
                let a_lt = if tag == 0 {
                    self.alice.value(&(p.m.clone(), a.clone(), p.b_lt.clone(), p.i), j)
                } else {
                    self.alice_free.value(&(a.clone(), p.b_lt.clone(), p.i), j)
                }
                .ok_or_else(bad)?;
                let mut alice = a_lt.clone();
                alice.push(a.clone());
                Ok((Party::Bob, PiInput::Bob(BobView::Node { pointer: p.i, alice, bobs: p.b_lt.clone() })))
            }
            View::Bob(b) => {
                let le = Self::bob_le(b, p);
                let b_gt =
                    if tag == 0 { self.bob.value(&(p.m.clone(), le.clone(), p.i), j) } else { self.bob_free.value(&(le.clone(), p.i), j) }
                        .ok_or_else(bad)?;
                let mut all = le;
                all.extend(b_gt.iter().cloned());
                Ok((Party::Alice, PiInput::Alice(AliceView::Children(all))))
            }
        }
    }

    fn pi_board(&self, ctx: &Ctx<'_>) -> Result<Vec<Post>, ProtocolError> {
        let p = self.public(ctx.public)?;
        let mut board = vec![Post { seat: Seat::alice(1), round: 1, bits: p.m.clone() }];
        board.extend(ctx.board.iter().map(|q| Post {
            seat: Seat::new(q.seat.side.other(), q.seat.index),
            round: q.round + 1,
            bits: q.bits.clone(),
        }));
        Ok(board)
    }

    fn with_pi<T>(
        &self,
        input: View<'_, AliceView, BobView>,
        ctx: &Ctx<'_>,
        f: impl FnOnce(View<'_, AliceView, BobView>, &Ctx<'_>) -> Result<T, ProtocolError>,
    ) -> Result<T, ProtocolError> {
        let (side, lifted) = self.lift(input, ctx)?;
        let board = self.pi_board(ctx)?;
        let seat = Seat::new(side, 1);
        let pub_tape = fixed_tape(self.inner.public_law())?;
        let view = match &lifted {
            PiInput::Alice(a) => View::Alice(a),
            PiInput::Bob(b) => View::Bob(b),
        };
        let private = fixed_tape(self.inner.private_law(seat, view, &pub_tape))?;
        let pctx = Ctx { seat, round: ctx.round + 1, board: &board, public: &pub_tape, private: &private };
        f(view, &pctx)
    }

    /// Mass of `(input, public)` pairs where Alice's, resp. Bob's,
    /// conditioning event had zero mass and the `M`-free law was used.
    pub fn fallback_mass(&self) -> Result<(Q, Q), ProtocolError> {
        let table = atpc_table(self.params)?;
        let masses = table.exact_masses()?;
        let (mut fa, mut fb) = (Q::zero(), Q::zero());
        for (inst, px) in table.items().iter().zip(masses) {
            for (p, pp) in &self.publics {
                if !self.alice.groups.contains_key(&(p.m.clone(), inst.alice[0].clone(), p.b_lt.clone(), p.i)) {
                    fa += px * pp;
                }
                if !self.bob.groups.contains_key(&(p.m.clone(), Self::bob_le(&inst.bob[0], p), p.i)) {
                    fb += px * pp;
                }
            }
        }
        Ok((fa, fb))
    }

    /// Exact successes of `π` and `τ` and the loss bound
    /// `s(τ) ≥ s(π) − √(CC¹(π)/w)`, decided in rational arithmetic.
    pub fn check(&self, caps: Caps) -> Result<RoundElimReport, ProtocolError> {
        let big = AtpcParams::new(self.params.d + 1, self.params.w).map_err(|e| ProtocolError::Params(e.to_string()))?;
        let s_pi = exact_success(&self.inner, &atpc_table(big)?, caps)?;
        let s_tau = exact_success(self, &atpc_table(self.params)?, caps)?;
        let cc1 = self.inner.max_bits(Seat::alice(1), 1);
        let w = self.params.w as u64;
        let diff = &s_pi.success - &s_tau.success;
        let holds = !diff.is_positive() || &diff * &diff * Q::from_integer(w.into()) <= Q::from_integer(cc1.into());
        let bound = q_f64(&s_pi.success) - (cc1 as f64 / w as f64).sqrt();
        let pi_cc = declared_cc(&self.inner)?;
        let tau_cc = declared_cc(self)?;
        let (fa, fb) = self.fallback_mass()?;
        Ok(RoundElimReport {
            spec_id: self.inner.id(),
            success_pi: s_pi.success.to_string(),
            success_tau: s_tau.success.to_string(),
            success_pi_f64: q_f64(&s_pi.success),
            success_tau_f64: q_f64(&s_tau.success),
            cc1,
            w,
            holds,
            slack: q_f64(&s_tau.success) - bound,
            cc_matches: tau_cc == pi_cc[1..] && s_tau.cc_per_round_max.iter().zip(&tau_cc).all(|(m, d)| m <= d),
            fallback_alice: q_f64(&fa),
            fallback_bob: q_f64(&fb),
        })
    }
}

enum PiInput {
    Alice(AliceView),
    Bob(BobView),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundElimReport {
    pub spec_id: String,
    pub success_pi: String,
    pub success_tau: String,
    pub success_pi_f64: f64,
    pub success_tau_f64: f64,
    /// First-round communication of `π`.
    pub cc1: u64,
    pub w: u64,
    pub holds: bool,
    /// `s(τ) − (s(π) − √(CC¹/w))`.
    pub slack: f64,
    /// Declared per-round alphabets of `τ` equal those of `π` after round 1.
    pub cc_matches: bool,
    pub fallback_alice: f64,
    pub fallback_bob: f64,
}

impl<P> Protocol for RoundEliminated<P>
where
    P: Protocol<A = AliceView, B = BobView>,
{
    type A = AliceView;
    type B = BobView;

    fn id(&self) -> String {
        format!("round-elim({})", self.inner.id())
    }

    fn arity(&self) -> Arity {
        Arity::TwoParty
    }

    fn rounds(&self) -> u32 {
        self.inner.rounds() - 1
    }

    fn public_law(&self) -> Law {
        Law::Finite(self.publics.iter().enumerate().map(|(j, (_, q))| (vec![j as u64], q.clone())).collect())
    }

    fn private_law(&self, _: Seat, input: View<'_, AliceView, BobView>, public: &[u64]) -> Law {
        let Ok(p) = self.public(public) else { return Law::empty() };
        match input {
            View::Alice(a) => self.alice_law(a, p),
            View::Bob(b) => self.bob_law(b, p),
        }
        .unwrap_or_else(Law::empty)
    }

    fn max_bits(&self, seat: Seat, round: u32) -> u64 {
        self.inner.max_bits(Seat::new(seat.side.other(), seat.index), round + 1)
    }

    fn message(&self, input: View<'_, AliceView, BobView>, ctx: &Ctx<'_>) -> Result<Bits, ProtocolError> {
        self.with_pi(input, ctx, |v, c| self.inner.message(v, c))
    }

    fn output(&self, input: View<'_, AliceView, BobView>, ctx: &Ctx<'_>) -> Result<bool, ProtocolError> {
        self.with_pi(input, ctx, |v, c| self.inner.output(v, c))
    }
}

#[cfg(test)]
mod tests {
    use super::super::library::{FirstMessage, TwoLevel};
    use super::*;

    fn p12() -> AtpcParams {
        AtpcParams::new(1, 2).unwrap()
    }

    #[test]
    fn zero_first_message_loses_nothing() {
        let tau = round_eliminate(TwoLevel::new(2, FirstMessage::Empty).unwrap(), p12(), Caps::default()).unwrap();
        assert_eq!(tau.rounds(), 1);
        let r = tau.check(Caps::default()).unwrap();
        assert_eq!(r.success_pi, r.success_tau);
        assert!(r.holds && r.cc_matches);
        assert_eq!((r.fallback_alice, r.fallback_bob), (0.0, 0.0));
    }

    #[test]
    fn full_and_one_bit_first_messages() {
        for first in [FirstMessage::Full, FirstMessage::OneBit] {
            let tau = round_eliminate(TwoLevel::new(2, first).unwrap(), p12(), Caps::default()).unwrap();
            let r = tau.check(Caps::default()).unwrap();
            assert!(r.holds, "{r:?}");
            assert!(r.cc_matches);
            assert!(r.slack >= 0.0);
            if first == FirstMessage::OneBit {
                assert_eq!(r.fallback_alice, 0.0);
            }
        }
    }

    #[test]
    fn full_revelation_needs_fallback() {
        let tau = round_eliminate(TwoLevel::new(2, FirstMessage::Full).unwrap(), p12(), Caps::default()).unwrap();
        let (_, fb) = tau.fallback_mass().unwrap();
        assert!(fb > Q::zero());
    }

    #[test]
    fn three_level_joint_is_capped() {
        let tiny = Caps { inputs: 100, tapes: 1 << 10 };
        let e = round_eliminate(TwoLevel::new(2, FirstMessage::Empty).unwrap(), p12(), tiny).unwrap_err();
        assert!(matches!(e, ProtocolError::Capacity { .. }));
    }
}
