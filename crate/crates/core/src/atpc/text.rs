//! Preorder text form:
//!
//! ```text
//! ATPC d=2 w=2
//! P 1
//! P 2
//! L 01
//! P 1
//! L 11
//! ```
//!
//! Every node contributes a `P <pointer>` line; a level-1 node is followed by
//! `L <bits>` with one `0`/`1` character per leaf.

use super::{AtpcError, AtpcParams, AtpcTree, Node};
use std::fmt::Write;

pub(super) fn encode(tree: &AtpcTree) -> String {
    fn walk(n: &Node, out: &mut String) {
        match n {
            Node::Internal { pointer, children } => {
                let _ = writeln!(out, "P {pointer}");
                children.iter().for_each(|c| walk(c, out));
            }
            Node::Leaf { pointer, bits } => {
                let _ = writeln!(out, "P {pointer}");
                let s: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
                let _ = writeln!(out, "L {s}");
            }
        }
    }
    let mut out = format!("ATPC d={} w={}\n", tree.params.d, tree.params.w);
    walk(&tree.root, &mut out);
    out
}

fn perr(line: usize, msg: impl Into<String>) -> AtpcError {
    AtpcError::Parse { line, msg: msg.into() }
}

fn header(line: &str) -> Option<(u32, u32)> {
    let rest = line.strip_prefix("ATPC d=")?;
    let (d, w) = rest.split_once(" w=")?;
    Some((d.parse().ok()?, w.parse().ok()?))
}

pub(super) fn decode(s: &str) -> Result<AtpcTree, AtpcError> {
    let mut lines = s.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, first) = lines.next().ok_or_else(|| perr(1, "empty input"))?;
    let (d, w) = header(first).ok_or_else(|| perr(1, "expected `ATPC d=<d> w=<w>`"))?;
    let params = AtpcParams::new(d, w).map_err(|e| perr(1, e.to_string()))?;

    fn read<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, level: u32, w: u32) -> Result<Node, AtpcError> {
        let (no, line) = lines.next().ok_or_else(|| perr(0, "unexpected end of input"))?;
        let p = line.strip_prefix("P ").ok_or_else(|| perr(no, "expected `P <pointer>`"))?;
        let pointer: u32 = p.parse().map_err(|_| perr(no, "bad pointer"))?;
        if pointer == 0 || pointer > w {
            return Err(perr(no, format!("pointer {pointer} outside [1, {w}]")));
        }
        if level == 1 {
            let (no, line) = lines.next().ok_or_else(|| perr(no + 1, "missing leaf line"))?;
            let b = line.strip_prefix("L ").ok_or_else(|| perr(no, "expected `L <bits>`"))?;
            if b.len() != w as usize || !b.bytes().all(|c| c == b'0' || c == b'1') {
                return Err(perr(no, format!("expected {w} bits of 0/1")));
            }
            return Ok(Node::Leaf { pointer, bits: b.bytes().map(|c| c == b'1').collect() });
        }
        let children = (0..w).map(|_| read(lines, level - 1, w)).collect::<Result<_, _>>()?;
        Ok(Node::Internal { pointer, children })
    }

    let root = read(&mut lines, d, w)?;
    if let Some((no, l)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(perr(no, format!("trailing content `{l}`")));
    }
    AtpcTree::new(params, root)
}

#[cfg(test)]
mod tests {
    use crate::atpc::*;

    #[test]
    fn round_trip() {
        let t = demo_tree();
        let s = t.to_text();
        assert!(s.starts_with("ATPC d=3 w=2\nP 2\nP 2\nP 2\nL 01\n"));
        assert_eq!(AtpcTree::from_text(&s).unwrap(), t);
        for seed in 0..50 {
            let t = sample_instance(AtpcParams::new(2, 3).unwrap(), seed).unwrap();
            assert_eq!(AtpcTree::from_text(&t.to_text()).unwrap(), t);
        }
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(AtpcTree::from_text(""), Err(AtpcError::Parse { line: 1, .. })));
        assert!(matches!(AtpcTree::from_text("ATPC d=1 w=2\nP 3\nL 01\n"), Err(AtpcError::Parse { line: 2, .. })));
        assert!(matches!(AtpcTree::from_text("ATPC d=1 w=2\nP 1\nL 0\n"), Err(AtpcError::Parse { line: 3, .. })));
        assert!(matches!(AtpcTree::from_text("ATPC d=1 w=2\nP 1\nL 01\nP 1\n"), Err(AtpcError::Parse { line: 4, .. })));
    }
}
