//! Line-oriented `DGS v1` stream files:
//!
//! ```text
//! DGS v1
//! n=4 threshold=7
//! I 1 4 3
//! D 1 4 3
//! ```

use super::{check_op, DynamicStream, OpKind, StreamError, StreamOp};
use std::fmt::Write;

pub fn serialize_stream(stream: &DynamicStream) -> String {
    let mut out = String::with_capacity(24 + stream.ops.len() * 16);
    let _ = writeln!(out, "DGS v1");
    let _ = writeln!(out, "n={} threshold={}", stream.n, stream.threshold);
    for op in &stream.ops {
        let c = match op.kind {
            OpKind::Insert => 'I',
            OpKind::Delete => 'D',
        };
        let _ = writeln!(out, "{c} {} {} {}", op.u, op.v, op.weight);
    }
    out
}

fn perr(line: usize, msg: impl Into<String>) -> StreamError {
    StreamError::Parse { line, msg: msg.into() }
}

/// Plain decimal: digits only, no sign, no leading zeros except `0` itself.
fn dec<T: std::str::FromStr>(s: &str, line: usize) -> Result<T, StreamError> {
    let canonical = !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) && (s == "0" || !s.starts_with('0'));
    if !canonical {
        return Err(perr(line, format!("`{s}` is not a decimal integer")));
    }
    s.parse().map_err(|_| perr(line, format!("`{s}` out of range")))
}

pub fn parse_stream(text: &str) -> Result<DynamicStream, StreamError> {
    let body = text.strip_suffix('\n').ok_or_else(|| perr(text.lines().count().max(1), "missing final newline"))?;
    let mut lines = body.split('\n').enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, "DGS v1")) => {}
        _ => return Err(perr(1, "expected `DGS v1`")),
    }
    let (no, hdr) = lines.next().ok_or_else(|| perr(2, "missing header"))?;
    let (n, threshold) =
        hdr.strip_prefix("n=").and_then(|r| r.split_once(" threshold=")).ok_or_else(|| perr(no, "expected `n=<int> threshold=<int>`"))?;
    let n: u32 = dec(n, no)?;
    let threshold: u64 = dec(threshold, no)?;
    let mut ops = Vec::new();
    for (no, line) in lines {
        let parts: Vec<&str> = line.split(' ').collect();
        let kind = match parts.first() {
            Some(&"I") => OpKind::Insert,
            Some(&"D") => OpKind::Delete,
            _ => return Err(perr(no, "expected `I` or `D`")),
        };
        if parts.len() != 4 {
            return Err(perr(no, format!("expected 4 fields, found {}", parts.len())));
        }
        let op = StreamOp { kind, u: dec(parts[1], no)?, v: dec(parts[2], no)?, weight: dec(parts[3], no)? };
        check_op(&op, n, ops.len()).map_err(|e| perr(no, e.to_string()))?;
        ops.push(op);
    }
    Ok(DynamicStream { n, threshold, ops })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atpc::*;
    use crate::stream::build_mst_stream;
    use rand::Rng;

    #[test]
    fn golden_k1_example() {
        let t = AtpcTree::from_levels(1, 2, &[vec![1]], &[true, false]).unwrap();
        let s = build_mst_stream(&InstanceBatch::new(vec![t]).unwrap()).unwrap();
        let text = serialize_stream(&s);
        assert_eq!(text, "DGS v1\nn=4 threshold=7\nI 1 4 3\nI 2 3 1\nI 1 2 2\nI 1 3 5\n");
        assert_eq!(parse_stream(&text).unwrap(), s);
    }

    #[test]
    fn random_round_trips() {
        let mut rng = crate::seed::rng(3);
        for _ in 0..1000 {
            let n = rng.gen_range(2..50u32);
            let ops = (0..rng.gen_range(0..30))
                .map(|_| {
                    let u = rng.gen_range(1..=n);
                    let v = loop {
                        let v = rng.gen_range(1..=n);
                        if v != u {
                            break v;
                        }
                    };
                    let kind = if rng.gen() { OpKind::Insert } else { OpKind::Delete };
                    StreamOp { kind, u, v, weight: rng.gen_range(1..1_000_000) }
                })
                .collect();
            let s = DynamicStream { n, threshold: rng.gen(), ops };
            assert_eq!(parse_stream(&serialize_stream(&s)).unwrap(), s);
        }
    }

    #[test]
    fn rejects_malformed() {
        let line_of = |t: &str| match parse_stream(t) {
            Err(StreamError::Parse { line, .. }) => line,
            other => panic!("{other:?}"),
        };
        assert_eq!(line_of("DGS v1\nn=4 threshold=7\nI 1 2 3\nI 1 2\n"), 4);
        assert_eq!(line_of("DGS v1\nn=4 threshold=7\nI 1 2 3 x\n"), 3);
        assert_eq!(line_of("DGS v1\nn=4 threshold=7\nI 1 2 3 \n"), 3);
        assert_eq!(line_of("DGS v1\nn=4 threshold=7\nI 1  2 3\n"), 3);
        assert_eq!(line_of("DGS v1\nn=4 threshold=7\nI 1 +2 3\n"), 3);
        assert_eq!(line_of("DGS v1\nn=4 threshold=7\nI 1 5 3\n"), 3);
        assert_eq!(line_of("DGS v2\nn=4 threshold=7\n"), 1);
        assert_eq!(line_of("DGS v1\nn=4 threshold=7 extra\n"), 2);
        assert_eq!(line_of("DGS v1\nn=4 threshold=7\n\n"), 3);
        assert!(parse_stream("DGS v1\nn=4 threshold=7").is_err());
    }
}
