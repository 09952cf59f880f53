//! Blackboard protocols over finite inputs.
//!
//! A protocol is a [`Protocol`] implementation: message and output functions
//! of a party's own input, the visible board and explicit randomness tapes.
//! Two-party protocols are the `k = 1` case of the blackboard model. In
//! round `t` every party of one side posts (Alice's side in odd rounds);
//! after round `r` the parties `1..k−1` of the next side post once more and
//! party `k` of that side outputs.
//!
//! Randomness is a public tape plus one private tape per party, each drawn
//! from a [`Law`]. Finite laws make every protocol exactly enumerable.

mod compile;
mod convert;
mod elim;
mod eval;
mod info;
pub mod library;
mod oneway;

pub use compile::{batch_inputs, compile_streaming, CompiledStreaming, Hinted, StreamFactory};
pub use convert::{majority_to_xor, next_pointer, path_target, wrap_hint_guess, HintGuess, MajorityToXor};
pub use elim::{round_eliminate, RoundElimReport, RoundEliminated};
pub use eval::{
    atpc_table, estimate_advantage, exact_success, kfold_table, Caps, DistributionTable, Estimate, EvalReport, ExactEval, Instance, Mass,
};
pub use info::{
    cond_entropy, entropy, info_metrics, kl_divergence, mutual_information, pinsker_bound, tvd, tvd_chain_rhs, InfoError, InfoMetrics,
    Joint, Kl,
};
pub use oneway::{hand_written_maps, one_way_family, OneWay, OneWayCheck};

use crate::Party;
use bitvec::prelude::*;
use num_rational::BigRational;
use num_traits::One;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Q = BigRational;
pub type Bits = BitVec<u8, Msb0>;
pub type Tape = Vec<u64>;

/// `value` as a big-endian bit string of length `len`.
pub fn bits_of(value: u64, len: usize) -> Bits {
    let mut b = Bits::with_capacity(len);
    for i in (0..len).rev() {
        b.push(i < 64 && (value >> i) & 1 == 1);
    }
    b
}

/// Reads up to 64 bits as a big-endian integer.
pub fn bits_value(b: &BitSlice<u8, Msb0>) -> u64 {
    b.iter().fold(0, |acc, x| (acc << 1) | *x as u64)
}

/// `⌈log₂ w⌉`, the width of a pointer in bits.
pub fn pointer_width(w: u32) -> usize {
    (32 - w.saturating_sub(1).leading_zeros()) as usize
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("{seat} in round {round} sent {bits} bits, alphabet allows {max}")]
    Alphabet { seat: Seat, round: u32, bits: u64, max: u64 },
    #[error("arity mismatch: {0}")]
    Arity(String),
    #[error("capacity: {what} needs {size}, cap {cap}")]
    Capacity { what: &'static str, size: u128, cap: u128 },
    #[error("parameter mismatch: {0}")]
    Params(String),
    #[error("malformed input or board: {0}")]
    Input(String),
    #[error("randomness: {0}")]
    Law(String),
    #[error("streaming contract: {0}")]
    Contract(String),
    #[error("streaming algorithm: {0}")]
    Algorithm(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arity {
    TwoParty,
    /// `k` Alices and `k` Bobs.
    MultiParty(u32),
}

impl Arity {
    pub fn k(self) -> u32 {
        match self {
            Arity::TwoParty => 1,
            Arity::MultiParty(k) => k,
        }
    }
}

/// Party `index` (1-based) of side `side`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Seat {
    pub side: Party,
    pub index: u32,
}

impl Seat {
    pub fn new(side: Party, index: u32) -> Self {
        Seat { side, index }
    }

    pub fn alice(index: u32) -> Self {
        Seat::new(Party::Alice, index)
    }

    pub fn bob(index: u32) -> Self {
        Seat::new(Party::Bob, index)
    }
}

impl std::fmt::Display for Seat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?} {}", self.side, self.index)
    }
}

/// Distribution of a randomness tape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Law {
    Fixed(Tape),
    /// Exact masses, summing to 1.
    Finite(Vec<(Tape, Q)>),
    /// One uniform 64-bit word. Sampling only; not enumerable.
    Uniform64,
}

impl Law {
    pub fn empty() -> Law {
        Law::Fixed(Vec::new())
    }

    /// Uniform over the single-word tapes `[lo]..=[hi]`.
    pub fn uniform_range(lo: u64, hi: u64) -> Law {
        let p = Q::new(1.into(), (hi - lo + 1).into());
        Law::Finite((lo..=hi).map(|x| (vec![x], p.clone())).collect())
    }

    pub fn coin() -> Law {
        Law::uniform_range(0, 1)
    }

    /// Outcomes with exact masses; fails on [`Law::Uniform64`].
    pub fn outcomes(&self) -> Result<Vec<(Tape, Q)>, ProtocolError> {
        match self {
            Law::Fixed(t) => Ok(vec![(t.clone(), Q::one())]),
            Law::Finite(v) => Ok(v.clone()),
            Law::Uniform64 => Err(ProtocolError::Capacity { what: "uniform 64-bit tape", size: 1 << 64, cap: 0 }),
        }
    }

    pub fn support_len(&self) -> u128 {
        match self {
            Law::Fixed(_) => 1,
            Law::Finite(v) => v.len() as u128,
            Law::Uniform64 => 1 << 64,
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Tape {
        match self {
            Law::Fixed(t) => t.clone(),
            Law::Uniform64 => vec![rng.gen()],
            Law::Finite(v) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (t, p) in v {
                    acc += q_f64(p);
                    if u < acc {
                        return t.clone();
                    }
                }
                v.last().map(|(t, _)| t.clone()).unwrap_or_default()
            }
        }
    }

    /// Independent product; tapes are concatenated.
    pub fn concat(&self, other: &Law) -> Result<Law, ProtocolError> {
        match (self, other) {
            (Law::Fixed(a), Law::Fixed(b)) => Ok(Law::Fixed([a.as_slice(), b].concat())),
            (Law::Uniform64, _) | (_, Law::Uniform64) => Err(ProtocolError::Law("cannot combine a 64-bit uniform tape".into())),
            _ => {
                let (xs, ys) = (self.outcomes()?, other.outcomes()?);
                let mut out = Vec::with_capacity(xs.len() * ys.len());
                for (a, p) in &xs {
                    for (b, q) in &ys {
                        out.push(([a.as_slice(), b].concat(), p * q));
                    }
                }
                Ok(Law::Finite(out))
            }
        }
    }

    pub fn is_deterministic(&self) -> bool {
        match self {
            Law::Fixed(_) => true,
            Law::Finite(v) => v.len() == 1,
            Law::Uniform64 => false,
        }
    }
}

pub fn q_f64(q: &Q) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn q_frac(n: u64, d: u64) -> Q {
    Q::new(n.into(), d.into())
}

/// A party's own input.
#[derive(Debug)]
pub enum View<'a, A, B> {
    Alice(&'a A),
    Bob(&'a B),
}

impl<A, B> Clone for View<'_, A, B> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<A, B> Copy for View<'_, A, B> {}

impl<'a, A, B> View<'a, A, B> {
    pub fn alice(self) -> Result<&'a A, ProtocolError> {
        match self {
            View::Alice(a) => Ok(a),
            View::Bob(_) => Err(ProtocolError::Input("expected an Alice input".into())),
        }
    }

    pub fn bob(self) -> Result<&'a B, ProtocolError> {
        match self {
            View::Bob(b) => Ok(b),
            View::Alice(_) => Err(ProtocolError::Input("expected a Bob input".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Post {
    pub seat: Seat,
    pub round: u32,
    pub bits: Bits,
}

/// What a party sees when it speaks.
#[derive(Clone, Copy, Debug)]
pub struct Ctx<'a> {
    pub seat: Seat,
    pub round: u32,
    pub board: &'a [Post],
    pub public: &'a [u64],
    pub private: &'a [u64],
}

pub trait Protocol {
    type A;
    type B;

    fn id(&self) -> String;

    fn arity(&self) -> Arity;

    fn rounds(&self) -> u32;

    fn public_law(&self) -> Law {
        Law::empty()
    }

    /// Law of `seat`'s private tape; it may depend on the party's input and
    /// the public tape.
    fn private_law(&self, _seat: Seat, _input: View<'_, Self::A, Self::B>, _public: &[u64]) -> Law {
        Law::empty()
    }

    /// Declared alphabet: longest message `seat` may post in `round`.
    fn max_bits(&self, seat: Seat, round: u32) -> u64;

    fn message(&self, input: View<'_, Self::A, Self::B>, ctx: &Ctx<'_>) -> Result<Bits, ProtocolError>;

    fn output(&self, input: View<'_, Self::A, Self::B>, ctx: &Ctx<'_>) -> Result<bool, ProtocolError>;
}

/// Posting order for `k` pairs and `r` rounds, with the round each post is
/// charged to, followed by the outputting seat.
pub fn schedule(k: u32, r: u32) -> Result<(Vec<(Seat, u32)>, Seat), ProtocolError> {
    if k == 0 {
        return Err(ProtocolError::Arity("k must be at least 1".into()));
    }
    if r == 0 && k > 1 {
        return Err(ProtocolError::Arity("a 0-round protocol has no round to charge trailing posts to".into()));
    }
    let side = |t: u32| if t % 2 == 1 { Party::Alice } else { Party::Bob };
    let mut posts = Vec::new();
    for t in 1..=r {
        posts.extend((1..=k).map(|i| (Seat::new(side(t), i), t)));
    }
    let last = side(r + 1);
    posts.extend((1..k).map(|i| (Seat::new(last, i), r)));
    Ok((posts, Seat::new(last, k)))
}

/// Randomness for one execution.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tapes {
    pub public: Tape,
    pub alice: Vec<Tape>,
    pub bob: Vec<Tape>,
}

impl Tapes {
    /// All-empty tapes for `k` pairs.
    pub fn empty(k: u32) -> Self {
        Tapes { public: Vec::new(), alice: vec![Vec::new(); k as usize], bob: vec![Vec::new(); k as usize] }
    }

    pub fn with_public(k: u32, public: Tape) -> Self {
        Tapes { public, ..Tapes::empty(k) }
    }

    fn private(&self, seat: Seat) -> &[u64] {
        let v = match seat.side {
            Party::Alice => &self.alice,
            Party::Bob => &self.bob,
        };
        v.get(seat.index as usize - 1).map_or(&[], Vec::as_slice)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Execution {
    pub posts: Vec<Post>,
    /// `cc_per_round[i]` is the payload of round `i + 1`.
    pub cc_per_round: Vec<u64>,
    pub cc_total: u64,
    pub output_seat: Seat,
    pub output: bool,
}

impl Execution {
    pub fn posts_by(&self, seat: Seat) -> usize {
        self.posts.iter().filter(|p| p.seat == seat).count()
    }
}

fn view_of<'a, A, B>(seat: Seat, alice: &'a [A], bob: &'a [B]) -> View<'a, A, B> {
    match seat.side {
        Party::Alice => View::Alice(&alice[seat.index as usize - 1]),
        Party::Bob => View::Bob(&bob[seat.index as usize - 1]),
    }
}

pub(crate) fn run<P: Protocol + ?Sized>(proto: &P, alice: &[P::A], bob: &[P::B], tapes: &Tapes) -> Result<Execution, ProtocolError> {
    let k = proto.arity().k();
    if alice.len() != k as usize || bob.len() != k as usize {
        return Err(ProtocolError::Arity(format!("{k} pairs expected, got {} and {} inputs", alice.len(), bob.len())));
    }
    let r = proto.rounds();
    let (order, out_seat) = schedule(k, r)?;
    let mut posts: Vec<Post> = Vec::with_capacity(order.len());
    let mut cc = vec![0u64; r as usize];
    for (seat, round) in order {
        let ctx = Ctx { seat, round, board: &posts, public: &tapes.public, private: tapes.private(seat) };
        let bits = proto.message(view_of(seat, alice, bob), &ctx)?;
        let max = proto.max_bits(seat, round);
        if bits.len() as u64 > max {
            return Err(ProtocolError::Alphabet { seat, round, bits: bits.len() as u64, max });
        }
        cc[round as usize - 1] += bits.len() as u64;
        posts.push(Post { seat, round, bits });
    }
    let ctx = Ctx { seat: out_seat, round: r + 1, board: &posts, public: &tapes.public, private: tapes.private(out_seat) };
    let output = proto.output(view_of(out_seat, alice, bob), &ctx)?;
    let cc_total = cc.iter().sum();
    Ok(Execution { posts, cc_per_round: cc, cc_total, output_seat: out_seat, output })
}

/// Runs a two-party protocol; deterministic given `tapes`.
pub fn run_two_party<P: Protocol + ?Sized>(proto: &P, alice: &P::A, bob: &P::B, tapes: &Tapes) -> Result<Execution, ProtocolError>
where
    P::A: Clone,
    P::B: Clone,
{
    if proto.arity() != Arity::TwoParty {
        return Err(ProtocolError::Arity(format!("{} is not two-party", proto.id())));
    }
    run(proto, std::slice::from_ref(alice), std::slice::from_ref(bob), tapes)
}

/// Runs a blackboard protocol with `k` Alices and `k` Bobs.
pub fn run_multi_party<P: Protocol + ?Sized>(proto: &P, alice: &[P::A], bob: &[P::B], tapes: &Tapes) -> Result<Execution, ProtocolError> {
    if !matches!(proto.arity(), Arity::MultiParty(_)) {
        return Err(ProtocolError::Arity(format!("{} is not multi-party", proto.id())));
    }
    run(proto, alice, bob, tapes)
}

/// Sum of declared alphabet sizes over a whole schedule.
pub fn declared_cc<P: Protocol + ?Sized>(proto: &P) -> Result<Vec<u64>, ProtocolError> {
    let (order, _) = schedule(proto.arity().k(), proto.rounds())?;
    let mut cc = vec![0; proto.rounds() as usize];
    for (seat, round) in order {
        cc[round as usize - 1] += proto.max_bits(seat, round);
    }
    Ok(cc)
}
