//! Browser bindings for the demo page in `www/`.
//!
//! Each export returns a JSON string. The `*_json` functions hold the logic
//! and are plain Rust so they can be tested natively.

use mstlab::atpc::{answer, demo_tree, derive_views, sample_batch, sample_instance, target, AtpcParams, AtpcTree};
use mstlab::protocol::library::{MajorityOracle, PerfectHinted};
use mstlab::protocol::{exact_success, kfold_table, majority_to_xor, q_f64, wrap_hint_guess, Caps, DistributionTable, Instance};
use mstlab::stream::{build_mst_stream, decision_ground_truth, materialize, mst_oracle, serialize_stream};
use mstlab::urmin::{receiver, sender, verify_structure};
use mstlab::Party;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Keeps the page responsive.
const MAX_LEAVES: u64 = 256;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn small(d: u32, w: u32, k: u32) -> Result<AtpcParams, String> {
    let p = AtpcParams::with_k(d, w, k).map_err(err)?;
    if p.leaves() * k as u64 > MAX_LEAVES {
        return Err(format!("k·w^d must be at most {MAX_LEAVES} here"));
    }
    Ok(p)
}

#[derive(Serialize)]
struct Labels {
    tree: String,
    path: Vec<u32>,
    target: u64,
    answer: bool,
    insertions: Vec<u64>,
    deletions: Vec<u64>,
    difference_min: Option<u64>,
    structure_ok: bool,
}

fn labels(t: &AtpcTree) -> Result<String, String> {
    let (a, b) = derive_views(t);
    let (d, w) = (t.params.d, t.params.w);
    let ins = sender(d, w, &a, Party::Alice).map_err(err)?;
    let del = receiver(d, w, &b, Party::Bob).map_err(err)?;
    let out = Labels {
        tree: t.to_text(),
        path: t.path(),
        target: target(t),
        answer: answer(t),
        difference_min: ins.difference(&del).min(),
        insertions: ins.to_vec(),
        deletions: del.to_vec(),
        structure_ok: verify_structure(t).pass(),
    };
    serde_json::to_string(&out).map_err(err)
}

/// Root labels of a random instance, or of the worked example when `seed`
/// is negative.
pub fn labels_json(d: u32, w: u32, seed: f64) -> Result<String, String> {
    if seed < 0.0 {
        return labels(&demo_tree());
    }
    labels(&sample_instance(small(d, w, 1)?, seed as u64).map_err(err)?)
}

#[derive(Serialize)]
struct StreamSummary {
    n: u32,
    threshold: u64,
    ops: usize,
    mst_weight: u64,
    decision: bool,
    truth: bool,
    answers: Vec<bool>,
    hint: u64,
    text: String,
}

pub fn stream_json(k: u32, d: u32, w: u32, seed: f64) -> Result<String, String> {
    let batch = sample_batch(k, small(d, w, k)?, seed.max(0.0) as u64).map_err(err)?;
    let s = build_mst_stream(&batch).map_err(err)?;
    let weight = mst_oracle(&materialize(&s).map_err(err)?).map_err(err)?;
    let out = StreamSummary {
        n: s.n,
        threshold: s.threshold,
        ops: s.ops.len(),
        mst_weight: weight,
        decision: weight >= s.threshold,
        truth: decision_ground_truth(&batch),
        answers: batch.answers(),
        hint: batch.hint,
        text: serialize_stream(&s),
    };
    serde_json::to_string(&out).map_err(err)
}

#[derive(Serialize)]
struct Point {
    x: u32,
    success: String,
    value: f64,
}

/// Exact XOR success of the perfect majority oracle for `k = 1..=kmax`.
pub fn xor_curve_json(kmax: u32) -> Result<String, String> {
    if !(1..=12).contains(&kmax) {
        return Err("k must lie in 1..=12".into());
    }
    let mut pts = Vec::new();
    for k in 1..=kmax {
        let items = (0..1u32 << k)
            .map(|m| {
                let zs: Vec<bool> = (0..k).map(|j| m >> j & 1 == 1).collect();
                let x = zs.iter().fold(false, |a, &b| a ^ b);
                Instance { alice: zs, bob: vec![(); k as usize], answer: x }
            })
            .collect();
        let table = DistributionTable::uniform(items).map_err(err)?;
        let e = exact_success(&majority_to_xor(MajorityOracle::new(k)), &table, Caps::default()).map_err(err)?;
        pts.push(Point { x: k, success: e.success.to_string(), value: q_f64(&e.success) });
    }
    serde_json::to_string(&pts).map_err(err)
}

/// Exact success of the hint-guessing wrapper around a perfect hinted
/// protocol, for leaf counts `w = 2..=wmax` at depth 1.
pub fn hint_curve_json(wmax: u32) -> Result<String, String> {
    if !(2..=16).contains(&wmax) {
        return Err("w must lie in 2..=16".into());
    }
    let mut pts = Vec::new();
    for w in 2..=wmax {
        let params = AtpcParams::new(1, w).map_err(err)?;
        let tau = wrap_hint_guess(PerfectHinted, 1, 1, w).map_err(err)?;
        let e = exact_success(&tau, &kfold_table(params, 1, |z| z[0]).map_err(err)?, Caps::default()).map_err(err)?;
        pts.push(Point { x: w, success: e.success.to_string(), value: q_f64(&e.success) });
    }
    serde_json::to_string(&pts).map_err(err)
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn tree_labels(d: u32, w: u32, seed: f64) -> Result<String, JsError> {
    js(labels_json(d, w, seed))
}

#[wasm_bindgen]
pub fn hard_stream(k: u32, d: u32, w: u32, seed: f64) -> Result<String, JsError> {
    js(stream_json(k, d, w, seed))
}

#[wasm_bindgen]
pub fn xor_curve(kmax: u32) -> Result<String, JsError> {
    js(xor_curve_json(kmax))
}

#[wasm_bindgen]
pub fn hint_curve(wmax: u32) -> Result<String, JsError> {
    js(hint_curve_json(wmax))
}
