use crate::generate::hard_stream;
use crate::{to_json, write_out, Common, Failure, Format, Res};
use mstlab::seed::derive;
use mstlab::sketch::{mst_decide_single_pass, mst_multipass};
use mstlab::stream::decision_ground_truth;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct Row {
    pub alg: &'static str,
    pub n: u32,
    pub p: u32,
    pub bits_peak: u64,
    pub decision: Option<bool>,
    pub truth: bool,
    pub failed: bool,
}

pub const CSV_HEADER: &str = "alg,n,p,bits_peak,decision,truth,failed";

fn csv(rows: &[Row]) -> String {
    let mut s = format!("{CSV_HEADER}\n");
    for r in rows {
        let decision = r.decision.map_or(String::new(), |d| (d as u8).to_string());
        s += &format!("{},{},{},{},{decision},{},{}\n", r.alg, r.n, r.p, r.bits_peak, r.truth as u8, r.failed as u8);
    }
    s
}

/// One single-pass row and one multipass row per `p`, for each of
/// `--trials` streams drawn from `--seed`.
pub fn run(c: &Common) -> Res<()> {
    let passes = if c.p.is_empty() { vec![1, 3] } else { c.p.clone() };
    if passes.contains(&0) {
        return Err(Failure::Params("--p values must be at least 1".into()));
    }
    let delta = c.delta(0.05)?;
    let trials = c.trials(1)?;
    let streams = (0..trials).map(|i| hard_stream(c, derive(c.seed, i))).collect::<Res<Vec<_>>>()?;
    let mut jobs = Vec::new();
    for (i, (batch, s)) in streams.iter().enumerate() {
        let w = c.big_w.unwrap_or(s.max_weight());
        if w < s.max_weight() {
            return Err(Failure::Params(format!("--W {w} is below the stream's maximum weight {}", s.max_weight())));
        }
        jobs.push((i, batch, s, w, None));
        jobs.extend(passes.iter().map(|&p| (i, batch, s, w, Some(p))));
    }
    let rows: Vec<Row> = jobs
        .par_iter()
        .map(|&(i, batch, s, w, p)| {
            let truth = decision_ground_truth(batch);
            let seed = derive(c.seed ^ 0x5eed, i as u64);
            let (alg, p, out) = match p {
                None => ("single-pass", 1, mst_decide_single_pass(s, w, seed, delta).map(|o| (o.decision, o.meter.bits_peak))),
                Some(p) => ("multipass", p, mst_multipass(s, p, w, seed, delta).map(|o| (o.decision, o.meter.bits_peak))),
            };
            match out {
                Ok((d, bits)) => Row { alg, n: s.n, p, bits_peak: bits, decision: Some(d), truth, failed: d != truth },
                Err(_) => Row { alg, n: s.n, p, bits_peak: 0, decision: None, truth, failed: true },
            }
        })
        .collect();
    let text = match c.format.unwrap_or(Format::Csv) {
        Format::Csv => csv(&rows),
        Format::Json => to_json(&rows),
    };
    write_out(c.out.as_deref(), &text)
}
