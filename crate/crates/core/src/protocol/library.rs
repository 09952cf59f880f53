//! Small reference protocols used by tests, the CLI and the demo.

use super::compile::Hinted;
use super::{bits_of, bits_value, pointer_width, Arity, Bits, Ctx, Protocol, ProtocolError, Seat, View};
use crate::atpc::{AliceView, BobView};
use crate::Party;
use std::marker::PhantomData;

fn leaf_bits(a: &AliceView) -> Result<&[bool], ProtocolError> {
    match a {
        AliceView::Bits(b) => Ok(b),
        AliceView::Children(_) => Err(ProtocolError::Input("expected a depth-1 Alice view".into())),
    }
}

fn children(a: &AliceView) -> Result<&[BobView], ProtocolError> {
    match a {
        AliceView::Children(c) => Ok(c),
        AliceView::Bits(_) => Err(ProtocolError::Input("expected a depth-2 or deeper Alice view".into())),
    }
}

fn leaf_prefix(b: &BobView) -> Result<(u32, &[bool]), ProtocolError> {
    match b {
        BobView::Leaf { pointer, prefix } => Ok((*pointer, prefix)),
        BobView::Node { .. } => Err(ProtocolError::Input("expected a depth-1 Bob view".into())),
    }
}

fn node_alice(b: &BobView) -> Result<(u32, &[AliceView]), ProtocolError> {
    match b {
        BobView::Node { pointer, alice, .. } => Ok((*pointer, alice)),
        BobView::Leaf { .. } => Err(ProtocolError::Input("expected a depth-2 or deeper Bob view".into())),
    }
}

fn board_bits<'a>(ctx: &'a Ctx<'_>, round: u32) -> Result<&'a Bits, ProtocolError> {
    ctx.board.iter().find(|p| p.round == round).map(|p| &p.bits).ok_or_else(|| ProtocolError::Input(format!("no post in round {round}")))
}

/// Posts empty messages and outputs a constant.
#[derive(Debug)]
pub struct Constant<A, B> {
    arity: Arity,
    rounds: u32,
    value: bool,
    _inputs: PhantomData<fn(&A, &B)>,
}

impl<A, B> Constant<A, B> {
    pub fn new(arity: Arity, rounds: u32, value: bool) -> Self {
        Constant { arity, rounds, value, _inputs: PhantomData }
    }
}

impl<A, B> Protocol for Constant<A, B> {
    type A = A;
    type B = B;

    fn id(&self) -> String {
        format!("constant-{}", self.value as u8)
    }

    fn arity(&self) -> Arity {
        self.arity
    }

    fn rounds(&self) -> u32 {
        self.rounds
    }

    fn max_bits(&self, _: Seat, _: u32) -> u64 {
        0
    }

    fn message(&self, _: View<'_, A, B>, _: &Ctx<'_>) -> Result<Bits, ProtocolError> {
        Ok(Bits::new())
    }

    fn output(&self, _: View<'_, A, B>, _: &Ctx<'_>) -> Result<bool, ProtocolError> {
        Ok(self.value)
    }
}

/// `𝒟_{1,w}`: Alice posts her whole leaf block, Bob reads his bit.
#[derive(Clone, Copy, Debug)]
pub struct RevealLeaves {
    w: u32,
    arity: Arity,
}

impl RevealLeaves {
    pub fn new(w: u32) -> Self {
        RevealLeaves { w, arity: Arity::TwoParty }
    }

    /// The same protocol run as a one-pair blackboard protocol.
    pub fn blackboard(w: u32) -> Self {
        RevealLeaves { w, arity: Arity::MultiParty(1) }
    }
}

impl Protocol for RevealLeaves {
    type A = AliceView;
    type B = BobView;

    fn id(&self) -> String {
        format!("reveal-leaves-w{}", self.w)
    }

    fn arity(&self) -> Arity {
        self.arity
    }

    fn rounds(&self) -> u32 {
        1
    }

    fn max_bits(&self, seat: Seat, _: u32) -> u64 {
        if seat.side == Party::Alice {
            self.w as u64
        } else {
            0
        }
    }

    fn message(&self, input: View<'_, AliceView, BobView>, _: &Ctx<'_>) -> Result<Bits, ProtocolError> {
        Ok(leaf_bits(input.alice()?)?.iter().copied().collect())
    }

    fn output(&self, input: View<'_, AliceView, BobView>, ctx: &Ctx<'_>) -> Result<bool, ProtocolError> {
        let (i, _) = leaf_prefix(input.bob()?)?;
        let m = board_bits(ctx, 1)?;
        m.get(i as usize - 1).map(|b| *b).ok_or_else(|| ProtocolError::Input("short message".into()))
    }
}

/// Alice posts her first leaf bit; Bob outputs it when his pointer is 1 and
/// 0 otherwise.
#[derive(Clone, Copy, Debug)]
pub struct OneBitLeaf;

impl Protocol for OneBitLeaf {
    type A = AliceView;
    type B = BobView;

    fn id(&self) -> String {
        "one-bit-leaf".into()
    }

    fn arity(&self) -> Arity {
        Arity::TwoParty
    }

    fn rounds(&self) -> u32 {
        1
    }

    fn max_bits(&self, seat: Seat, _: u32) -> u64 {
        (seat.side == Party::Alice) as u64
    }

    fn message(&self, input: View<'_, AliceView, BobView>, _: &Ctx<'_>) -> Result<Bits, ProtocolError> {
        Ok(leaf_bits(input.alice()?)?[..1].iter().copied().collect())
    }

    fn output(&self, input: View<'_, AliceView, BobView>, ctx: &Ctx<'_>) -> Result<bool, ProtocolError> {
        let (i, _) = leaf_prefix(input.bob()?)?;
        Ok(i == 1 && board_bits(ctx, 1)?[0])
    }
}

/// Two-round protocols for `ATPC_{2,w}`. Round 1 is Alice's message about
/// the children's Bob views, round 2 is Bob's, and Alice outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FirstMessage {
    /// Every child's pointer and prefix.
    Full,
    /// Nothing; Bob then posts his pointer and that child's leaf block.
    Empty,
    /// One bit: whether child 1 points at leaf 1. Needs `w = 2`.
    OneBit,
}

#[derive(Clone, Copy, Debug)]
pub struct TwoLevel {
    w: u32,
    first: FirstMessage,
}

impl TwoLevel {
    pub fn new(w: u32, first: FirstMessage) -> Result<Self, ProtocolError> {
        if w < 2 || (first == FirstMessage::OneBit && w != 2) {
            return Err(ProtocolError::Params(format!("{first:?} first message at w = {w}")));
        }
        Ok(TwoLevel { w, first })
    }

    fn child_code_bits(&self) -> usize {
        pointer_width(self.w) + self.w as usize - 1
    }
}

impl Protocol for TwoLevel {
    type A = AliceView;
    type B = BobView;

    fn id(&self) -> String {
        let tag = match self.first {
            FirstMessage::Full => "full",
            FirstMessage::Empty => "zero-first",
            FirstMessage::OneBit => "one-bit-first",
        };
        format!("two-level-{tag}-w{}", self.w)
    }

    fn arity(&self) -> Arity {
        Arity::TwoParty
    }

    fn rounds(&self) -> u32 {
        2
    }

    fn max_bits(&self, _: Seat, round: u32) -> u64 {
        match (self.first, round) {
            (FirstMessage::Full, 1) => (self.w as usize * self.child_code_bits()) as u64,
            (FirstMessage::Empty, 1) => 0,
            (FirstMessage::OneBit, 1) => 1,
            (FirstMessage::Empty, _) => (pointer_width(self.w) + self.w as usize) as u64,
            _ => 1,
        }
    }

    fn message(&self, input: View<'_, AliceView, BobView>, ctx: &Ctx<'_>) -> Result<Bits, ProtocolError> {
        let pw = pointer_width(self.w);
        if ctx.round == 1 {
            let kids = children(input.alice()?)?;
            let mut m = Bits::new();
            match self.first {
                FirstMessage::Full => {
                    for b in kids {
                        let (i, prefix) = leaf_prefix(b)?;
                        m.extend(bits_of(i as u64 - 1, pw));
                        m.extend(prefix.iter().copied());
                        m.extend(std::iter::repeat_n(false, self.w as usize - i as usize));
                    }
                }
                FirstMessage::Empty => {}
                FirstMessage::OneBit => m.push(leaf_prefix(&kids[0])?.0 == 1),
            }
            return Ok(m);
        }
        let (i, alice) = node_alice(input.bob()?)?;
        let a_i = leaf_bits(&alice[i as usize - 1])?;
        let m1 = board_bits(ctx, 1)?;
        let mut m = Bits::new();
        match self.first {
            FirstMessage::Full => {
                let c = self.child_code_bits();
                let code = &m1[(i as usize - 1) * c..(i as usize - 1) * c + pw];
                m.push(a_i[bits_value(code) as usize]);
            }
            FirstMessage::Empty => {
                m.extend(bits_of(i as u64 - 1, pw));
                m.extend(a_i.iter().copied());
            }
            FirstMessage::OneBit => {
                // With w = 2 the bit pins down child 1's pointer; for child 2
                // guess leaf 1.
                let j = if i == 1 && !m1[0] { 1 } else { 0 };
                m.push(a_i[j]);
            }
        }
        Ok(m)
    }

    fn output(&self, input: View<'_, AliceView, BobView>, ctx: &Ctx<'_>) -> Result<bool, ProtocolError> {
        let m2 = board_bits(ctx, 2)?;
        if self.first != FirstMessage::Empty {
            return Ok(m2[0]);
        }
        let pw = pointer_width(self.w);
        let i = bits_value(&m2[..pw]) as usize;
        let kids = children(input.alice()?)?;
        let (j, _) = leaf_prefix(kids.get(i).ok_or_else(|| ProtocolError::Input("pointer out of range".into()))?)?;
        Ok(m2[pw + j as usize - 1])
    }
}

/// A perfect `k`-fold majority oracle over answer bits: Alice `j` holds
/// `z_j` and posts it, Bob `k` outputs the majority.
#[derive(Clone, Copy, Debug)]
pub struct MajorityOracle {
    k: u32,
}

impl MajorityOracle {
    pub fn new(k: u32) -> Self {
        MajorityOracle { k }
    }
}

impl Protocol for MajorityOracle {
    type A = bool;
    type B = ();

    fn id(&self) -> String {
        format!("majority-oracle-k{}", self.k)
    }

    fn arity(&self) -> Arity {
        Arity::MultiParty(self.k)
    }

    fn rounds(&self) -> u32 {
        1
    }

    fn max_bits(&self, seat: Seat, _: u32) -> u64 {
        (seat.side == Party::Alice) as u64
    }

    fn message(&self, input: View<'_, bool, ()>, _: &Ctx<'_>) -> Result<Bits, ProtocolError> {
        Ok(match input {
            View::Alice(z) => [*z].into_iter().collect(),
            View::Bob(_) => Bits::new(),
        })
    }

    fn output(&self, _: View<'_, bool, ()>, ctx: &Ctx<'_>) -> Result<bool, ProtocolError> {
        let ones = ctx.board.iter().filter(|p| p.bits.first().is_some_and(|b| *b)).count() as u32;
        Ok(ones > self.k / 2)
    }
}

/// Hinted `ATPC_{1,w}` with `k = 1`: the hint is the target, so Alice posts
/// that leaf bit.
#[derive(Clone, Copy, Debug)]
pub struct PerfectHinted;

impl Protocol for PerfectHinted {
    type A = Hinted<Vec<AliceView>>;
    type B = Hinted<Vec<BobView>>;

    fn id(&self) -> String {
        "perfect-hinted".into()
    }

    fn arity(&self) -> Arity {
        Arity::TwoParty
    }

    fn rounds(&self) -> u32 {
        1
    }

    fn max_bits(&self, seat: Seat, _: u32) -> u64 {
        (seat.side == Party::Alice) as u64
    }

    fn message(&self, input: View<'_, Self::A, Self::B>, _: &Ctx<'_>) -> Result<Bits, ProtocolError> {
        let a = input.alice()?;
        if a.view.len() != 1 {
            return Err(ProtocolError::Params("perfect hinted protocol needs k = 1".into()));
        }
        let bits = leaf_bits(&a.view[0])?;
        let t = a.hint as usize;
        if t == 0 || t > bits.len() {
            return Ok([false].into_iter().collect());
        }
        Ok([bits[t - 1]].into_iter().collect())
    }

    fn output(&self, _: View<'_, Self::A, Self::B>, ctx: &Ctx<'_>) -> Result<bool, ProtocolError> {
        Ok(board_bits(ctx, 1)?[0])
    }
}

#[cfg(test)]
mod tests {
    use super::super::eval::{atpc_table, exact_success, Caps};
    use super::super::{q_frac, run_two_party, Tapes};
    use super::*;
    use crate::atpc::AtpcParams;
    use num_traits::One;

    #[test]
    fn two_level_successes() {
        let t = atpc_table(AtpcParams::new(2, 2).unwrap()).unwrap();
        assert_eq!(t.len(), 128);
        let full = TwoLevel::new(2, FirstMessage::Full).unwrap();
        let e = exact_success(&full, &t, Caps::default()).unwrap();
        assert_eq!(e.success, Q::one());
        assert_eq!(e.cc_per_round_max, vec![4, 1]);
        let zero = TwoLevel::new(2, FirstMessage::Empty).unwrap();
        let e = exact_success(&zero, &t, Caps::default()).unwrap();
        assert_eq!(e.success, Q::one());
        assert_eq!(e.cc_per_round_max, vec![0, 3]);
        let one = TwoLevel::new(2, FirstMessage::OneBit).unwrap();
        assert_eq!(exact_success(&one, &t, Caps::default()).unwrap().success, q_frac(7, 8));
        let t3 = atpc_table(AtpcParams::new(2, 3).unwrap()).unwrap();
        let full3 = TwoLevel::new(3, FirstMessage::Full).unwrap();
        assert_eq!(exact_success(&full3, &t3, Caps::default()).unwrap().success, Q::one());
        assert!(TwoLevel::new(3, FirstMessage::OneBit).is_err());
    }

    #[test]
    fn reveal_on_demo_shape() {
        let t = crate::atpc::sample_instance(AtpcParams::new(1, 4).unwrap(), 9).unwrap();
        let (a, b) = crate::atpc::derive_views(&t);
        let ex = run_two_party(&RevealLeaves::new(4), &a, &b, &Tapes::empty(1)).unwrap();
        assert_eq!(ex.cc_total, 4);
        assert_eq!(ex.output, crate::atpc::answer(&t));
    }

    use super::super::Q;
}
