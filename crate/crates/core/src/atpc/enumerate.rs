use super::{AtpcError, AtpcParams, AtpcTree, Node};

pub const DEFAULT_ENUM_CAP: u128 = 1 << 24;

/// `w·2^w` at depth 1 and `w·count(d−1)^w` above. `None` on overflow.
fn count(d: u32, w: u32) -> Option<u128> {
    if d == 1 {
        return (w as u128).checked_mul(1u128.checked_shl(w)?);
    }
    let inner = count(d - 1, w)?;
    (w as u128).checked_mul(inner.checked_pow(w)?)
}

/// Number of distinct instances, or a capacity error if it overflows `u128`.
pub fn support_size(params: AtpcParams) -> Result<u128, AtpcError> {
    count(params.d, params.w).ok_or(AtpcError::Capacity { size: u128::MAX, cap: u128::MAX })
}

fn node_at(mut idx: u128, level: u32, w: u32) -> Node {
    // Mixed radix, most significant digit first: pointer, then each child or bit.
    if level == 1 {
        let block = 1u128 << w;
        let pointer = (idx / block) as u32 + 1;
        idx %= block;
        let bits = (0..w).map(|j| (idx >> (w - 1 - j)) & 1 == 1).collect();
        return Node::Leaf { pointer, bits };
    }
    let child = count(level - 1, w).expect("checked by caller");
    let rest = child.pow(w);
    let pointer = (idx / rest) as u32 + 1;
    idx %= rest;
    let mut digits = vec![0u128; w as usize];
    for j in (0..w as usize).rev() {
        digits[j] = idx % child;
        idx /= child;
    }
    Node::Internal { pointer, children: digits.into_iter().map(|c| node_at(c, level - 1, w)).collect() }
}

/// The `idx`-th instance (0-based) in canonical order.
pub fn instance_at(params: AtpcParams, idx: u128) -> Result<AtpcTree, AtpcError> {
    let size = support_size(params)?;
    if idx >= size {
        return Err(AtpcError::InvalidParams(format!("index {idx} outside support of size {size}")));
    }
    Ok(AtpcTree { params, root: node_at(idx, params.d, params.w) })
}

/// Every instance once, in canonical order, if the support is at most `cap`.
pub fn enumerate_instances_capped(params: AtpcParams, cap: u128) -> Result<impl Iterator<Item = AtpcTree>, AtpcError> {
    let size = support_size(params)?;
    if size > cap {
        return Err(AtpcError::Capacity { size, cap });
    }
    Ok((0..size).map(move |i| AtpcTree { params, root: node_at(i, params.d, params.w) }))
}

pub fn enumerate_instances(params: AtpcParams) -> Result<impl Iterator<Item = AtpcTree>, AtpcError> {
    enumerate_instances_capped(params, DEFAULT_ENUM_CAP)
}
