use crate::{param, to_json, write_out, Common, Failure, Res};
use mstlab::atpc::{sample_batch, InstanceBatch};
use mstlab::stream::{build_mst_stream, decision_ground_truth, materialize, mst_oracle, serialize_stream, DynamicStream};
use serde::Serialize;
use std::path::PathBuf;

/// Ground truth kept next to the stream file.
#[derive(Serialize, Debug)]
pub struct Sidecar {
    pub n: u32,
    pub threshold: u64,
    pub mst_weight: u64,
    pub decision: bool,
    pub targets: Vec<u64>,
    pub answers: Vec<bool>,
    pub hint: u64,
}

pub fn hard_stream(c: &Common, seed: u64) -> Res<(InstanceBatch, DynamicStream)> {
    let params = c.stream_params(1, 2)?;
    let batch = sample_batch(params.k, params, seed).map_err(param)?;
    let stream = build_mst_stream(&batch).map_err(param)?;
    Ok((batch, stream))
}

pub fn sidecar(batch: &InstanceBatch, stream: &DynamicStream) -> Res<Sidecar> {
    let graph = materialize(stream).map_err(|e| Failure::Check(e.to_string()))?;
    Ok(Sidecar {
        n: stream.n,
        threshold: stream.threshold,
        mst_weight: mst_oracle(&graph).map_err(|e| Failure::Check(e.to_string()))?,
        decision: decision_ground_truth(batch),
        targets: batch.targets(),
        answers: batch.answers(),
        hint: batch.hint,
    })
}

/// The sidecar of `out` is `out.truth.json`.
pub fn sidecar_path(out: &std::path::Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".truth.json");
    PathBuf::from(s)
}

pub fn run(c: &Common) -> Res<()> {
    if c.format == Some(crate::Format::Csv) {
        return Err(Failure::Params("generate writes a DGS file and a JSON sidecar; --format csv is not available".into()));
    }
    let out = c.out.as_deref().ok_or_else(|| Failure::Params("generate needs --out <stream file>".into()))?;
    let (batch, stream) = hard_stream(c, c.seed)?;
    let truth = sidecar(&batch, &stream)?;
    write_out(Some(out), &serialize_stream(&stream))?;
    write_out(Some(&sidecar_path(out)), &to_json(&truth))
}
