//! Protocol-to-protocol converters for the `k`-fold tasks.

use super::compile::Hinted;
use super::{bits_of, bits_value, pointer_width, Arity, Bits, Ctx, Law, Post, Protocol, ProtocolError, Seat, View};
use crate::atpc::{AliceView, AtpcParams, BobView};
use crate::Party;

/// Runs a `k`-fold majority protocol and maps its output to a guess for
/// the `k`-fold XOR: parity of `⌊k/2⌋ + 1` on output 1, of `⌊k/2⌋` on 0.
#[derive(Clone, Debug)]
pub struct MajorityToXor<P> {
    inner: P,
    k: u32,
}

pub fn majority_to_xor<P: Protocol>(inner: P) -> MajorityToXor<P> {
    let k = inner.arity().k();
    MajorityToXor { inner, k }
}

impl<P: Protocol> MajorityToXor<P> {
    /// Overrides `k` for a two-party inner protocol holding all `k` instances.
    pub fn with_k(inner: P, k: u32) -> Result<Self, ProtocolError> {
        if k == 0 {
            return Err(ProtocolError::Params("k must be at least 1".into()));
        }
        Ok(MajorityToXor { inner, k })
    }
}

impl<P: Protocol> Protocol for MajorityToXor<P> {
    type A = P::A;
    type B = P::B;

    fn id(&self) -> String {
        format!("xor-of({})", self.inner.id())
    }

    fn arity(&self) -> Arity {
        self.inner.arity()
    }

    fn rounds(&self) -> u32 {
        self.inner.rounds()
    }

    fn public_law(&self) -> Law {
        self.inner.public_law()
    }

    fn private_law(&self, seat: Seat, input: View<'_, P::A, P::B>, public: &[u64]) -> Law {
        self.inner.private_law(seat, input, public)
    }

    fn max_bits(&self, seat: Seat, round: u32) -> u64 {
        self.inner.max_bits(seat, round)
    }

    fn message(&self, input: View<'_, P::A, P::B>, ctx: &Ctx<'_>) -> Result<Bits, ProtocolError> {
        self.inner.message(input, ctx)
    }

    fn output(&self, input: View<'_, P::A, P::B>, ctx: &Ctx<'_>) -> Result<bool, ProtocolError> {
        let half = self.k / 2;
        let count = if self.inner.output(input, ctx)? { half + 1 } else { half };
        Ok(count % 2 == 1)
    }
}

fn walk_a(a: &AliceView, known: &[u32]) -> Option<u32> {
    match (a, known) {
        (AliceView::Children(bs), [p, rest @ ..]) => walk_b(bs.get(*p as usize - 1)?, rest),
        _ => None,
    }
}

fn walk_b(b: &BobView, known: &[u32]) -> Option<u32> {
    match (b, known) {
        (_, []) => Some(b.pointer()),
        (BobView::Node { alice, .. }, [p, rest @ ..]) => walk_a(alice.get(*p as usize - 1)?, rest),
        _ => None,
    }
}

/// Pointer `s = known.len() + 1` on the path, top down, from one party's
/// view and the pointers above it. Bob can answer for odd `s`, Alice for
/// even `s`; anything else is `None`.
pub fn next_pointer(view: View<'_, AliceView, BobView>, known: &[u32]) -> Option<u32> {
    if known.contains(&0) {
        return None;
    }
    match view {
        View::Alice(a) => walk_a(a, known),
        View::Bob(b) => walk_b(b, known),
    }
}

/// Target leaf of a full top-down pointer path.
pub fn path_target(w: u32, path: &[u32]) -> u64 {
    path.iter().fold(0u64, |acc, &p| acc * w as u64 + (p as u64 - 1)) + 1
}

/// Guesses the hint publicly and forwards the path pointers.
///
/// The inner protocol solves the hinted task over two-party `k`-fold
/// inputs. The wrapper posts, with every message in round `r`, the `k`
/// pointers at depth `r − 1` of the paths (round 1 posts a zero block, so
/// each round carries `k·⌈log₂ w⌉` extra bits). The outputting party then
/// knows all `k` targets, checks the guess and returns the inner output on
/// a hit, else its private coin.
#[derive(Clone, Debug)]
pub struct HintGuess<P> {
    inner: P,
    params: AtpcParams,
    k: u32,
}

pub fn wrap_hint_guess<P>(inner: P, k: u32, d: u32, w: u32) -> Result<HintGuess<P>, ProtocolError>
where
    P: Protocol<A = Hinted<Vec<AliceView>>, B = Hinted<Vec<BobView>>>,
{
    let params = AtpcParams::with_k(d, w, k).map_err(|e| ProtocolError::Params(e.to_string()))?;
    if inner.arity() != Arity::TwoParty {
        return Err(ProtocolError::Params("hint guessing wraps a two-party protocol".into()));
    }
    if inner.rounds() != d {
        return Err(ProtocolError::Params(format!("{} has {} rounds, expected d = {d}", inner.id(), inner.rounds())));
    }
    (k as u64).checked_mul(params.leaves()).ok_or_else(|| ProtocolError::Params("k·w^d overflows".into()))?;
    Ok(HintGuess { inner, params, k })
}

impl<P> HintGuess<P>
where
    P: Protocol<A = Hinted<Vec<AliceView>>, B = Hinted<Vec<BobView>>>,
{
    fn block_bits(&self) -> usize {
        self.k as usize * pointer_width(self.params.w)
    }

    /// Extra communication over the inner protocol.
    pub fn overhead_bits(&self) -> u64 {
        self.block_bits() as u64 * self.params.d as u64
    }

    fn guess_range(&self) -> u64 {
        self.k as u64 * self.params.leaves()
    }

    fn inner_public(public: &[u64]) -> &[u64] {
        public.get(1..).unwrap_or(&[])
    }

    fn inner_board(&self, board: &[Post]) -> Vec<Post> {
        let b = self.block_bits();
        board.iter().map(|p| Post { seat: p.seat, round: p.round, bits: p.bits[b.min(p.bits.len())..].to_bitvec() }).collect()
    }

    /// Pointers known from the board: entry `s − 1` holds the `k` pointers
    /// at depth `s`, posted in round `s + 1`.
    fn board_pointers(&self, board: &[Post]) -> Vec<Vec<u32>> {
        let pw = pointer_width(self.params.w);
        board
            .iter()
            .filter(|p| p.round >= 2)
            .map(|p| (0..self.k as usize).map(|j| bits_value(&p.bits[j * pw..(j + 1) * pw]) as u32 + 1).collect())
            .collect()
    }

    fn paths(&self, board: &[Post]) -> Vec<Vec<u32>> {
        let known = self.board_pointers(board);
        (0..self.k as usize).map(|j| known.iter().map(|r| r[j]).collect()).collect()
    }

    fn hinted<'a, V: Clone>(v: &'a [V], hint: u64) -> Hinted<Vec<V>> {
        Hinted { view: v.to_vec(), hint }
    }

    fn own_pointer(&self, input: View<'_, Vec<AliceView>, Vec<BobView>>, j: usize, known: &[u32]) -> Result<u32, ProtocolError> {
        let v = match input {
            View::Alice(a) => View::Alice(a.get(j).ok_or_else(|| ProtocolError::Input("missing instance".into()))?),
            View::Bob(b) => View::Bob(b.get(j).ok_or_else(|| ProtocolError::Input("missing instance".into()))?),
        };
        next_pointer(v, known).ok_or_else(|| ProtocolError::Input("pointer not determined by this view".into()))
    }
}

impl<P> Protocol for HintGuess<P>
where
    P: Protocol<A = Hinted<Vec<AliceView>>, B = Hinted<Vec<BobView>>>,
{
    type A = Vec<AliceView>;
    type B = Vec<BobView>;

    fn id(&self) -> String {
        format!("hint-guess({})", self.inner.id())
    }

    fn arity(&self) -> Arity {
        Arity::TwoParty
    }

    fn rounds(&self) -> u32 {
        self.params.d
    }

    fn public_law(&self) -> Law {
        Law::uniform_range(1, self.guess_range()).concat(&self.inner.public_law()).unwrap_or(Law::Uniform64)
    }

    fn private_law(&self, seat: Seat, input: View<'_, Self::A, Self::B>, public: &[u64]) -> Law {
        let guess = public.first().copied().unwrap_or(0);
        let inner_pub = Self::inner_public(public);
        let inner = match input {
            View::Alice(a) => self.inner.private_law(seat, View::Alice(&Self::hinted(a, guess)), inner_pub),
            View::Bob(b) => self.inner.private_law(seat, View::Bob(&Self::hinted(b, guess)), inner_pub),
        };
        let out_side = if self.params.d % 2 == 0 { Party::Alice } else { Party::Bob };
        if seat.side == out_side {
            inner.concat(&Law::coin()).unwrap_or(Law::Uniform64)
        } else {
            inner
        }
    }

    fn max_bits(&self, seat: Seat, round: u32) -> u64 {
        self.block_bits() as u64 + self.inner.max_bits(seat, round)
    }

    fn message(&self, input: View<'_, Self::A, Self::B>, ctx: &Ctx<'_>) -> Result<Bits, ProtocolError> {
        let guess = ctx.public.first().copied().unwrap_or(0);
        let board = self.inner_board(ctx.board);
        let inner_ctx = Ctx { board: &board, public: Self::inner_public(ctx.public), ..*ctx };
        let pw = pointer_width(self.params.w);
        let mut m = Bits::new();
        if ctx.round == 1 {
            m.extend(std::iter::repeat_n(false, self.block_bits()));
        } else {
            for (j, known) in self.paths(ctx.board).iter().enumerate() {
                m.extend(bits_of(self.own_pointer(input, j, known)? as u64 - 1, pw));
            }
        }
        let inner_msg = match input {
            View::Alice(a) => self.inner.message(View::Alice(&Self::hinted(a, guess)), &inner_ctx)?,
            View::Bob(b) => self.inner.message(View::Bob(&Self::hinted(b, guess)), &inner_ctx)?,
        };
        m.extend_from_bitslice(&inner_msg);
        Ok(m)
    }

    fn output(&self, input: View<'_, Self::A, Self::B>, ctx: &Ctx<'_>) -> Result<bool, ProtocolError> {
        let guess = ctx.public.first().copied().unwrap_or(0);
        let board = self.inner_board(ctx.board);
        let inner_pub = Self::inner_public(ctx.public);
        let n_inner = ctx.private.len().saturating_sub(1);
        let inner_ctx = Ctx { board: &board, public: inner_pub, private: &ctx.private[..n_inner], ..*ctx };
        let mut hint = 0u64;
        for (j, mut path) in self.paths(ctx.board).into_iter().enumerate() {
            let last = self.own_pointer(input, j, &path)?;
            path.push(last);
            hint += path_target(self.params.w, &path);
        }
        if hint != guess {
            return Ok(ctx.private.last().is_some_and(|&c| c == 1));
        }
        match input {
            View::Alice(a) => self.inner.output(View::Alice(&Self::hinted(a, guess)), &inner_ctx),
            View::Bob(b) => self.inner.output(View::Bob(&Self::hinted(b, guess)), &inner_ctx),
        }
    }
}
