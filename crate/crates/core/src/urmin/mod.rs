//! Insertion and deletion element sets derived from the two views.
//!
//! `sender` is computed by the party that does not own the current pointer,
//! `receiver` by the owner. With the party flag `p` (Alice = 0 builds the
//! insertion side, Bob = 1 the deletion side), the pair
//! `(sender(A, 0), receiver(B, 1))` is a nested pair `B ⊊ A` whose
//! difference has minimum `2t − z`; its parity is the answer.

mod set;

pub use set::{ElementSet, SetError};

use crate::atpc::{self, derive_views, AliceView, AtpcTree, BobView};
use crate::Party;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UrError {
    #[error("input shape does not match depth {d}, arity {w}: {msg}")]
    Shape { d: u32, w: u32, msg: String },
    #[error("structural check failed: {0}")]
    Structure(String),
    #[error("A \\ B is empty")]
    EmptyDifference,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Func {
    Sender,
    Receiver,
}

/// One recorded invocation; `parent` indexes the calling record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Call {
    pub func: Func,
    pub d: u32,
    pub party: Party,
    pub parent: Option<usize>,
}

struct Ctx<'a> {
    w: u32,
    trace: Option<&'a mut Vec<Call>>,
}

impl Ctx<'_> {
    fn enter(&mut self, func: Func, d: u32, party: Party, parent: Option<usize>) -> Option<usize> {
        let t = self.trace.as_mut()?;
        t.push(Call { func, d, party, parent });
        Some(t.len() - 1)
    }
}

fn shape(d: u32, w: u32, msg: impl Into<String>) -> UrError {
    UrError::Shape { d, w, msg: msg.into() }
}

/// `{2j − A_j : j ∈ js}` for a bit slice indexed from 1.
fn base_elems(bits: &[bool], universe: u64) -> ElementSet {
    let elems = bits.iter().enumerate().map(|(j, &a)| 2 * (j as u64 + 1) - a as u64);
    ElementSet::from_sorted(universe, elems).expect("base elements are increasing and in range")
}

fn sender_rec(cx: &mut Ctx, d: u32, input: &AliceView, p: Party, parent: Option<usize>) -> Result<ElementSet, UrError> {
    let me = cx.enter(Func::Sender, d, p, parent);
    let w = cx.w;
    let wl = (w as u64).pow(d - 1);
    let universe = 2 * wl * w as u64;
    match (d, input) {
        (1, AliceView::Bits(bits)) => {
            if bits.len() != w as usize {
                return Err(shape(d, w, format!("{} leaf bits", bits.len())));
            }
            let s = base_elems(bits, universe);
            Ok(match p {
                Party::Alice => s,
                Party::Bob => s.complement(),
            })
        }
        (d, AliceView::Children(bs)) if d > 1 => {
            if bs.len() != w as usize {
                return Err(shape(d, w, format!("{} children", bs.len())));
            }
            let mut out = ElementSet::empty(universe);
            for (j, b) in bs.iter().enumerate() {
                let part = receiver_rec(cx, d - 1, b, p, me)?;
                out.append_shifted(&part, 2 * j as u64 * wl);
            }
            Ok(out)
        }
        _ => Err(shape(d, w, "Alice view has the wrong depth")),
    }
}

fn receiver_rec(cx: &mut Ctx, d: u32, input: &BobView, p: Party, parent: Option<usize>) -> Result<ElementSet, UrError> {
    let me = cx.enter(Func::Receiver, d, p, parent);
    let w = cx.w;
    let wl = (w as u64).pow(d - 1);
    let universe = 2 * wl * w as u64;
    let i = input.pointer() as u64;
    if i == 0 || i > w as u64 {
        return Err(shape(d, w, format!("pointer {i}")));
    }
    match (d, input) {
        (1, BobView::Leaf { prefix, .. }) => {
            if prefix.len() as u64 != i - 1 {
                return Err(shape(d, w, "prefix length does not match the pointer"));
            }
            let s = base_elems(prefix, universe);
            Ok(match p {
                Party::Alice => s.complement(),
                Party::Bob => s,
            })
        }
        (d, BobView::Node { alice, bobs, .. }) if d > 1 => {
            if alice.len() as u64 != i || bobs.len() as u64 != i - 1 {
                return Err(shape(d, w, "prefix lengths do not match the pointer"));
            }
            let mut out = ElementSet::empty(universe);
            for (j, b) in bobs.iter().enumerate() {
                let part = receiver_rec(cx, d - 1, b, p.other(), me)?;
                out.append_shifted(&part, 2 * j as u64 * wl);
            }
            let slot = sender_rec(cx, d - 1, &alice[i as usize - 1], p, me)?;
            out.append_shifted(&slot, 2 * (i - 1) * wl);
            if p == Party::Alice {
                out.append_interval(2 * i * wl + 1, universe);
            }
            Ok(out)
        }
        _ => Err(shape(d, w, "Bob view has the wrong depth")),
    }
}

fn check_depth(d: u32, w: u32, got: u32) -> Result<(), UrError> {
    if d == 0 || w == 0 || got != d {
        return Err(shape(d, w, format!("view has depth {got}")));
    }
    Ok(())
}

/// The non-owner's set for party flag `p`.
pub fn sender(d: u32, w: u32, input: &AliceView, p: Party) -> Result<ElementSet, UrError> {
    check_depth(d, w, input.depth())?;
    sender_rec(&mut Ctx { w, trace: None }, d, input, p, None)
}

/// The pointer owner's set for party flag `p`.
pub fn receiver(d: u32, w: u32, input: &BobView, p: Party) -> Result<ElementSet, UrError> {
    check_depth(d, w, input.depth())?;
    receiver_rec(&mut Ctx { w, trace: None }, d, input, p, None)
}

/// Like [`sender`], also recording every recursive call.
pub fn sender_traced(d: u32, w: u32, input: &AliceView, p: Party, trace: &mut Vec<Call>) -> Result<ElementSet, UrError> {
    check_depth(d, w, input.depth())?;
    sender_rec(&mut Ctx { w, trace: Some(trace) }, d, input, p, None)
}

pub fn receiver_traced(d: u32, w: u32, input: &BobView, p: Party, trace: &mut Vec<Call>) -> Result<ElementSet, UrError> {
    check_depth(d, w, input.depth())?;
    receiver_rec(&mut Ctx { w, trace: Some(trace) }, d, input, p, None)
}

/// A nested pair `B ⊊ A` over `[universe]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrInstance {
    pub a: ElementSet,
    pub b: ElementSet,
    pub universe: u64,
}

impl UrInstance {
    pub fn new(a: ElementSet, b: ElementSet) -> Result<Self, UrError> {
        if a.universe() != b.universe() {
            return Err(UrError::Structure("universe mismatch".into()));
        }
        if !b.is_strict_subset(&a) {
            return Err(UrError::Structure("B is not a strict subset of A".into()));
        }
        Ok(UrInstance { universe: a.universe(), a, b })
    }
}

/// `A = sender(A^(d), 0)`, `B = receiver(B^(d), 1)`.
pub fn build_ur_instance(tree: &AtpcTree) -> Result<UrInstance, UrError> {
    let (av, bv) = derive_views(tree);
    let (d, w) = (tree.params.d, tree.params.w);
    let a = sender(d, w, &av, Party::Alice)?;
    let b = receiver(d, w, &bv, Party::Bob)?;
    UrInstance::new(a, b)
}

/// Parity of `min(A \ B)`, odd meaning 1.
pub fn ur_min_dec(inst: &UrInstance) -> Result<bool, UrError> {
    inst.a.difference(&inst.b).min().map(|m| m % 2 == 1).ok_or(UrError::EmptyDifference)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureReport {
    pub inclusion_ins: bool,
    pub inclusion_del: bool,
    pub min_ins: Option<u64>,
    pub min_del: Option<u64>,
    pub expected: u64,
}

impl StructureReport {
    pub fn pass(&self) -> bool {
        self.inclusion_ins && self.inclusion_del && self.min_ins == Some(self.expected) && self.min_del == Some(self.expected)
    }
}

/// Checks `sender(A,0) ⊋ receiver(B,1)` and `receiver(B,0) ⊋ sender(A,1)`,
/// with both differences having minimum `2t − z`.
pub fn verify_structure(tree: &AtpcTree) -> StructureReport {
    let (av, bv) = derive_views(tree);
    let (d, w) = (tree.params.d, tree.params.w);
    let expected = 2 * atpc::target(tree) - atpc::answer(tree) as u64;
    let s0 = sender(d, w, &av, Party::Alice).expect("views derived from a valid tree");
    let s1 = sender(d, w, &av, Party::Bob).expect("views derived from a valid tree");
    let r0 = receiver(d, w, &bv, Party::Alice).expect("views derived from a valid tree");
    let r1 = receiver(d, w, &bv, Party::Bob).expect("views derived from a valid tree");
    StructureReport {
        inclusion_ins: r1.is_strict_subset(&s0),
        inclusion_del: s1.is_strict_subset(&r0),
        min_ins: s0.difference(&r1).min(),
        min_del: r0.difference(&s1).min(),
        expected,
    }
}
