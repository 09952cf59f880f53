use crate::{param, to_json, write_out, Common, Failure, Format, Res};
use clap::ValueEnum;
use mstlab::atpc::{sample_batch, AtpcParams};
use mstlab::protocol::library::{FirstMessage, MajorityOracle, PerfectHinted, TwoLevel};
use mstlab::protocol::*;
use mstlab::seed::derive;
use mstlab::sketch::{MultipassMst, SinglePassDecider, StreamingAlgorithm};
use mstlab::stream::{build_mst_stream, decision_ground_truth};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Name {
    /// Perfect majority oracle turned into a k-fold XOR protocol.
    MajorityXor,
    /// Perfect hinted protocol with the hint guessed publicly.
    HintGuess,
    /// Two-round protocols on depth 2 with their first round removed.
    RoundElim,
    /// The enumerated one-way family against the base bound.
    OneWay,
    /// A sketch MST algorithm compiled into a blackboard protocol.
    Compiled,
}

fn check(e: ProtocolError) -> Failure {
    Failure::Check(e.to_string())
}

fn binom(n: u64, r: u64) -> u64 {
    (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn majority_xor(c: &Common) -> Res<Value> {
    let k = c.k.unwrap_or(4);
    if !(1..=16).contains(&k) {
        return Err(Failure::Params(format!("--k must lie in 1..=16, got {k}")));
    }
    let items = (0..1u32 << k)
        .map(|m| {
            let zs: Vec<bool> = (0..k).map(|j| m >> j & 1 == 1).collect();
            let x = zs.iter().fold(false, |a, &b| a ^ b);
            Instance { alice: zs, bob: vec![(); k as usize], answer: x }
        })
        .collect();
    let table = DistributionTable::uniform(items).map_err(param)?;
    let proto = majority_to_xor(MajorityOracle::new(k));
    let e = exact_success(&proto, &table, Caps { inputs: 1 << 17, tapes: 1 }).map_err(check)?;
    let expect = q_frac(1, 2) + q_frac(binom(k as u64 - 1, k as u64 / 2), 1 << k);
    Ok(json!({ "report": EvalReport::exact(&proto, &e), "expected": expect.to_string(), "matches": e.success == expect }))
}

fn hint_guess(c: &Common) -> Res<Value> {
    let w = c.w.unwrap_or(2);
    let params = AtpcParams::new(1, w).map_err(param)?;
    if params.leaves() > 1 << 12 {
        return Err(Failure::Params(format!("--w {w} is too wide for exact enumeration")));
    }
    let tau = wrap_hint_guess(PerfectHinted, 1, 1, w).map_err(param)?;
    let table = kfold_table(params, 1, |z| z[0]).map_err(check)?;
    let e = exact_success(&tau, &table, Caps::default()).map_err(check)?;
    Ok(json!({ "report": EvalReport::exact(&tau, &e), "overhead_bits": tau.overhead_bits() }))
}

fn round_elim(c: &Common) -> Res<Value> {
    let w = c.w.unwrap_or(2);
    let mut firsts = vec![FirstMessage::Full, FirstMessage::Empty];
    if w == 2 {
        firsts.push(FirstMessage::OneBit);
    }
    let inner = AtpcParams::new(1, w).map_err(param)?;
    let mut reports = Vec::new();
    for first in firsts {
        let pi = TwoLevel::new(w, first).map_err(param)?;
        let tau = round_eliminate(pi, inner, Caps::default()).map_err(check)?;
        reports.push(tau.check(Caps::default()).map_err(check)?);
    }
    Ok(serde_json::to_value(reports).expect("reports serialize"))
}

fn one_way(c: &Common) -> Res<Value> {
    let w = c.w.unwrap_or(4);
    let _ = one_way_family(w).map_err(param)?;
    Ok(serde_json::to_value(OneWayCheck::run(w).map_err(check)?).expect("report serializes"))
}

#[derive(Serialize)]
struct CompiledReport {
    spec_id: String,
    rounds: u32,
    space_bound: u64,
    cc_max: u64,
    runs: u64,
    agree: u64,
    sketch_failures: u64,
    truth: bool,
}

fn compiled(c: &Common) -> Res<Value> {
    let params = c.stream_params(1, 2)?;
    if params.k != 1 {
        return Err(Failure::Params("compiled runs use the two-party setting, k = 1".into()));
    }
    let p = match c.p.as_slice() {
        [] => 1,
        [p] if *p >= 1 => *p,
        _ => return Err(Failure::Params("--p takes a single pass count ≥ 1 here".into())),
    };
    let delta = c.delta(0.01)?;
    let runs = c.trials(50)?;
    let batch = sample_batch(1, params, c.seed).map_err(param)?;
    let stream = build_mst_stream(&batch).map_err(param)?;
    let (n, threshold) = (stream.n, stream.threshold);
    let w_max = c.big_w.unwrap_or(stream.max_weight());
    if w_max < stream.max_weight() {
        return Err(Failure::Params(format!("--W {w_max} is below the stream's maximum weight {}", stream.max_weight())));
    }
    let factory: StreamFactory = if p == 1 {
        Box::new(move |s| Ok(Box::new(SinglePassDecider::new(n, threshold, w_max, s, delta)?) as Box<dyn StreamingAlgorithm>))
    } else {
        Box::new(move |s| Ok(Box::new(MultipassMst::new(n, threshold, w_max, p, s, delta)?) as Box<dyn StreamingAlgorithm>))
    };
    let proto = compile_streaming(factory, params, 1).map_err(param)?;
    let (a, b) = batch_inputs(&batch);
    let truth = decision_ground_truth(&batch);
    let mut r = CompiledReport {
        spec_id: proto.id(),
        rounds: proto.rounds(),
        space_bound: proto.space_bound(),
        cc_max: 0,
        runs,
        agree: 0,
        sketch_failures: 0,
        truth,
    };
    for i in 0..runs {
        match run_two_party(&proto, &a[0], &b[0], &Tapes::with_public(1, vec![derive(c.seed, i)])) {
            Ok(ex) => {
                r.cc_max = r.cc_max.max(ex.cc_total);
                r.agree += (ex.output == truth) as u64;
            }
            Err(ProtocolError::Algorithm(_)) => r.sketch_failures += 1,
            Err(e) => return Err(check(e)),
        }
    }
    Ok(serde_json::to_value(r).expect("report serializes"))
}

pub fn run(name: Name, c: &Common) -> Res<()> {
    if c.format == Some(Format::Csv) {
        return Err(Failure::Params("protocol reports are JSON only".into()));
    }
    let v = match name {
        Name::MajorityXor => majority_xor(c)?,
        Name::HintGuess => hint_guess(c)?,
        Name::RoundElim => round_elim(c)?,
        Name::OneWay => one_way(c)?,
        Name::Compiled => compiled(c)?,
    };
    write_out(c.out.as_deref(), &to_json(&v))
}
