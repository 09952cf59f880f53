use super::{AtpcError, AtpcTree, Node};
use serde::{Deserialize, Serialize};

/// Alice's input `A^(d)`.
///
/// At depth 1 it is the leaf block; above that it is the list of all `w`
/// Bob views of the children.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AliceView {
    Bits(Vec<bool>),
    Children(Vec<BobView>),
}

/// Bob's input `B^(d)`.
///
/// At depth 1 it is the pointer together with the leaf bits strictly left of
/// it. Above that it is the pointer `i`, the Alice views of children `1..=i`
/// and the Bob views of children `1..i`. Children right of `i` are absent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BobView {
    Leaf { pointer: u32, prefix: Vec<bool> },
    Node { pointer: u32, alice: Vec<AliceView>, bobs: Vec<BobView> },
}

impl AliceView {
    pub fn depth(&self) -> u32 {
        match self {
            AliceView::Bits(_) => 1,
            AliceView::Children(bs) => 1 + bs.first().map_or(0, BobView::depth),
        }
    }

    /// Arity, read from the shape.
    pub fn width(&self) -> usize {
        match self {
            AliceView::Bits(b) => b.len(),
            AliceView::Children(bs) => bs.len(),
        }
    }
}

impl BobView {
    pub fn pointer(&self) -> u32 {
        match self {
            BobView::Leaf { pointer, .. } | BobView::Node { pointer, .. } => *pointer,
        }
    }

    pub fn depth(&self) -> u32 {
        match self {
            BobView::Leaf { .. } => 1,
            BobView::Node { alice, .. } => 1 + alice.first().map_or(0, AliceView::depth),
        }
    }
}

fn views_of(node: &Node) -> (AliceView, BobView) {
    match node {
        Node::Leaf { pointer, bits } => {
            (AliceView::Bits(bits.clone()), BobView::Leaf { pointer: *pointer, prefix: bits[..*pointer as usize - 1].to_vec() })
        }
        Node::Internal { pointer, children } => {
            let i = *pointer as usize;
            let (alices, bobs): (Vec<_>, Vec<_>) = children.iter().map(views_of).unzip();
            let bob = BobView::Node { pointer: *pointer, alice: alices[..i].to_vec(), bobs: bobs[..i - 1].to_vec() };
            (AliceView::Children(bobs), bob)
        }
    }
}

/// Projects the tree onto the two parties' inputs.
pub fn derive_views(tree: &AtpcTree) -> (AliceView, BobView) {
    views_of(&tree.root)
}

/// Recovers `(target, answer)` from the two views alone.
///
/// Bob's view supplies the pointer at the top; the selected child's Alice
/// view comes from Bob and its Bob view from Alice, so the roles alternate on
/// the way down. Parts held by both parties must agree.
pub fn joint_solve(alice: &AliceView, bob: &BobView) -> Result<(u64, bool), AtpcError> {
    match (alice, bob) {
        (AliceView::Bits(bits), BobView::Leaf { pointer, prefix }) => {
            let i = *pointer as usize;
            if i == 0 || i > bits.len() {
                return Err(AtpcError::Inconsistent(format!("pointer {i} outside [1, {}]", bits.len())));
            }
            if prefix.len() != i - 1 || prefix[..] != bits[..i - 1] {
                return Err(AtpcError::Inconsistent("leaf prefix disagrees with Alice's bits".into()));
            }
            Ok((i as u64, bits[i - 1]))
        }
        (AliceView::Children(cb), BobView::Node { pointer, alice: ca, bobs }) => {
            let w = cb.len();
            let i = *pointer as usize;
            if i == 0 || i > w {
                return Err(AtpcError::Inconsistent(format!("pointer {i} outside [1, {w}]")));
            }
            if ca.len() != i || bobs.len() != i - 1 {
                return Err(AtpcError::Inconsistent("Bob's prefix lengths do not match his pointer".into()));
            }
            if bobs[..] != cb[..i - 1] {
                return Err(AtpcError::Inconsistent("left subtrees disagree".into()));
            }
            let depth = alice.depth();
            let (t, z) = joint_solve(&ca[i - 1], &cb[i - 1])?;
            Ok(((i as u64 - 1) * (w as u64).pow(depth - 1) + t, z))
        }
        _ => Err(AtpcError::Inconsistent("views have different depths".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atpc::*;

    #[test]
    fn depth1_views() {
        let t = AtpcTree::from_levels(1, 2, &[vec![2]], &[true, false]).unwrap();
        let (a, b) = derive_views(&t);
        assert_eq!(a, AliceView::Bits(vec![true, false]));
        assert_eq!(b, BobView::Leaf { pointer: 2, prefix: vec![true] });
        let t = AtpcTree::from_levels(1, 2, &[vec![1]], &[true, false]).unwrap();
        assert_eq!(derive_views(&t).1, BobView::Leaf { pointer: 1, prefix: vec![] });
    }

    #[test]
    fn depth2_views() {
        let t = AtpcTree::from_levels(2, 2, &[vec![1], vec![2, 1]], &[false, true, true, true]).unwrap();
        let (a, b) = derive_views(&t);
        assert_eq!(
            a,
            AliceView::Children(vec![BobView::Leaf { pointer: 2, prefix: vec![false] }, BobView::Leaf { pointer: 1, prefix: vec![] },])
        );
        assert_eq!(b, BobView::Node { pointer: 1, alice: vec![AliceView::Bits(vec![false, true])], bobs: vec![] });
        assert_eq!(a.depth(), 2);
        assert_eq!(b.depth(), 2);
    }

    #[test]
    fn solve_small_cases() {
        for bit in [false, true] {
            let t = AtpcTree::from_levels(1, 1, &[vec![1]], &[bit]).unwrap();
            let (a, b) = derive_views(&t);
            assert_eq!(joint_solve(&a, &b).unwrap(), (1, bit));
        }
        let (a, b) = derive_views(&demo_tree());
        assert_eq!(joint_solve(&a, &b).unwrap(), (5, true));
    }

    #[test]
    fn solve_exhaustive() {
        for (d, w) in [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3), (3, 2)] {
            let p = AtpcParams::new(d, w).unwrap();
            if support_size(p).unwrap() > 1 << 16 {
                continue;
            }
            for t in enumerate_instances(p).unwrap() {
                let (a, b) = derive_views(&t);
                assert_eq!(joint_solve(&a, &b).unwrap(), (target(&t), answer(&t)));
            }
        }
    }

    #[test]
    fn inconsistent_views_rejected() {
        let t1 = AtpcTree::from_levels(1, 2, &[vec![2]], &[true, false]).unwrap();
        let t2 = AtpcTree::from_levels(1, 2, &[vec![2]], &[false, false]).unwrap();
        let (a, _) = derive_views(&t1);
        let (_, b) = derive_views(&t2);
        assert!(matches!(joint_solve(&a, &b), Err(AtpcError::Inconsistent(_))));
        let (a3, _) = derive_views(&demo_tree());
        assert!(joint_solve(&a3, &b).is_err());
    }
}
