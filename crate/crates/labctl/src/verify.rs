use crate::{param, to_json, write_out, Common, Failure, Format, Res};
use clap::ValueEnum;
use mstlab::atpc::{enumerate_instances, sample_batch, sample_instance, support_size, AtpcParams, InstanceBatch};
use mstlab::protocol::library::{FirstMessage, MajorityOracle, TwoLevel};
use mstlab::protocol::*;
use mstlab::seed::{derive, rng};
use mstlab::stream::{build_mst_stream, decision_ground_truth, materialize, mst_oracle};
use mstlab::urmin::verify_structure;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Structure,
    Weight,
    Info,
    Protocol,
}

#[derive(Serialize, Debug)]
pub struct Group {
    pub check: String,
    pub checked: u64,
    pub failures: Vec<String>,
}

#[derive(Serialize, Debug)]
pub struct Report {
    pub suite: String,
    pub pass: bool,
    pub groups: Vec<Group>,
}

/// Exhaustive enumeration above this many instances is refused.
const MAX_EXHAUSTIVE: u128 = 1 << 22;

fn structure(c: &Common) -> Res<Vec<Group>> {
    let (dmax, wmax) = (c.d.unwrap_or(2), c.w.unwrap_or(3));
    for d in 1..=dmax {
        for w in 1..=wmax {
            let size = support_size(AtpcParams::new(d, w).map_err(param)?).map_err(param)?;
            if size > MAX_EXHAUSTIVE {
                return Err(Failure::Params(format!("exhaustive d={d}, w={w} has {size} instances, above {MAX_EXHAUSTIVE}")));
            }
        }
    }
    let mut ex = Group { check: format!("exhaustive d<={dmax} w<={wmax}"), checked: 0, failures: vec![] };
    for d in 1..=dmax {
        for w in 1..=wmax {
            let trees: Vec<_> = enumerate_instances(AtpcParams::new(d, w).map_err(param)?).map_err(param)?.collect();
            ex.checked += trees.len() as u64;
            ex.failures.extend(
                trees
                    .par_iter()
                    .filter_map(|t| {
                        let r = verify_structure(t);
                        (!r.pass()).then(|| format!("{}: {r:?}", t.to_text().replace('\n', "; ")))
                    })
                    .collect::<Vec<_>>(),
            );
        }
    }
    let trials = c.trials(1000)?;
    let params = AtpcParams::new(dmax + 1, wmax).map_err(param)?;
    let failures = (0..trials)
        .into_par_iter()
        .filter_map(|i| {
            let t = sample_instance(params, derive(c.seed, i)).ok()?;
            let r = verify_structure(&t);
            (!r.pass()).then(|| format!("{}: {r:?}", t.to_text().replace('\n', "; ")))
        })
        .collect();
    let random = Group { check: format!("random d={} w={wmax}", dmax + 1), checked: trials, failures };
    Ok(vec![ex, random])
}

fn weight_check(b: &InstanceBatch) -> Result<(), String> {
    let (k, leaves) = (b.k() as u64, b.params().leaves());
    let ones = b.answers().iter().filter(|&&z| z).count() as u64;
    let formula = 2 * k * leaves + leaves + k - ones;
    let s = build_mst_stream(b).map_err(|e| e.to_string())?;
    let weight = mst_oracle(&materialize(&s).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    if weight != formula {
        return Err(format!("k={k} w={} d={}: kruskal {weight}, formula {formula}", b.params().w, b.params().d));
    }
    let decision = weight >= s.threshold;
    if decision != decision_ground_truth(b) || decision == (2 * ones > k) {
        return Err(format!("k={k}: decision {decision} with {ones} ones"));
    }
    Ok(())
}

fn weight(c: &Common) -> Res<Vec<Group>> {
    let (kmax, dmax, wmax) = (c.k.unwrap_or(8), c.d.unwrap_or(3), c.w.unwrap_or(3));
    Common { k: Some(kmax), d: Some(dmax), w: Some(wmax), ..c.clone() }.stream_params(dmax, wmax)?;
    let trials = c.trials(1000)?;
    let failures = (0..trials)
        .into_par_iter()
        .filter_map(|i| {
            let mut r = rng(derive(c.seed, i));
            let (k, d, w) = (r.gen_range(1..=kmax), r.gen_range(1..=dmax), r.gen_range(1..=wmax));
            let b = AtpcParams::new(d, w).and_then(|p| sample_batch(k, p, r.gen()));
            match b {
                Ok(b) => weight_check(&b).err(),
                Err(e) => Some(e.to_string()),
            }
        })
        .collect();
    Ok(vec![Group { check: format!("random k<={kmax} d<={dmax} w<={wmax}"), checked: trials, failures }])
}

fn random_joint(r: &mut impl Rng, dims: Vec<usize>) -> Joint {
    let n = dims.iter().product();
    let mut w: Vec<f64> = (0..n).map(|_| if r.gen_bool(0.3) { 0.0 } else { r.gen() }).collect();
    if w.iter().all(|&x| x == 0.0) {
        w[0] = 1.0;
    }
    Joint::from_weights(dims, w).expect("nonnegative weights with positive sum")
}

fn info_check(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let e = |e: InfoError| e.to_string();
    let dims = vec![r.gen_range(1..5), r.gen_range(1..5), r.gen_range(1..5)];
    let m = random_joint(&mut r, dims);
    let h = m.entropy_of(&[0, 1]).map_err(e)? - m.entropy_of(&[0]).map_err(e)? - cond_entropy(&m, &[1], &[0]).map_err(e)?;
    let i = mutual_information(&m, &[0, 1], &[2], &[]).map_err(e)?
        - mutual_information(&m, &[0], &[2], &[]).map_err(e)?
        - mutual_information(&m, &[1], &[2], &[0]).map_err(e)?;
    if h.abs() > 1e-9 || i.abs() > 1e-9 {
        return Err(format!("seed {seed}: chain rule residuals {h:e}, {i:e}"));
    }
    let dims = vec![m.dims()[0], m.dims()[1]];
    let (mu, nu) = (random_joint(&mut r, dims.clone()), random_joint(&mut r, dims));
    let tv = tvd(mu.probs(), nu.probs()).map_err(e)?;
    if tv > tvd_chain_rhs(&mu, &nu).map_err(e)? + 1e-12 {
        return Err(format!("seed {seed}: TVD chain rule"));
    }
    if let Kl::Finite(kl) = kl_divergence(mu.probs(), nu.probs()).map_err(e)? {
        if tv > pinsker_bound(kl) + 1e-12 {
            return Err(format!("seed {seed}: Pinsker"));
        }
    }
    Ok(())
}

fn info(c: &Common) -> Res<Vec<Group>> {
    let trials = c.trials(1000)?;
    let failures = (0..trials).into_par_iter().filter_map(|i| info_check(derive(c.seed, i)).err()).collect();
    Ok(vec![Group { check: "random tables".into(), checked: trials, failures }])
}

fn binom(n: u64, r: u64) -> u64 {
    (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn protocols(c: &Common) -> Res<Vec<Group>> {
    let kmax = c.k.unwrap_or(10);
    if !(1..=16).contains(&kmax) {
        return Err(Failure::Params(format!("--k must lie in 1..=16 for the XOR identity, got {kmax}")));
    }
    if let Some(w) = c.w {
        let _ = one_way_family(w).map_err(param)?;
    }
    let mut groups = Vec::new();
    let widths = match c.w {
        Some(w) => vec![w],
        None => vec![4, 8],
    };
    for w in widths {
        let r = OneWayCheck::run(w).map_err(param)?;
        groups.push(Group { check: format!("one-way w={w}"), checked: r.protocols, failures: r.violations });
    }
    let mut elim = Group { check: "round elimination w=2".into(), checked: 0, failures: vec![] };
    for first in [FirstMessage::Full, FirstMessage::Empty, FirstMessage::OneBit] {
        let tau = round_eliminate(TwoLevel::new(2, first).map_err(param)?, AtpcParams::new(1, 2).map_err(param)?, Caps::default())
            .map_err(|e| Failure::Check(e.to_string()))?;
        let r = tau.check(Caps::default()).map_err(|e| Failure::Check(e.to_string()))?;
        elim.checked += 1;
        if !r.holds {
            elim.failures.push(format!("{}: π {} τ {} cc1 {}", r.spec_id, r.success_pi, r.success_tau, r.cc1));
        }
    }
    groups.push(elim);
    let mut xor = Group { check: format!("majority to XOR k<={kmax}"), checked: 0, failures: vec![] };
    for k in 1..=kmax {
        let items = (0..1u32 << k)
            .map(|m| {
                let zs: Vec<bool> = (0..k).map(|j| m >> j & 1 == 1).collect();
                let x = zs.iter().fold(false, |a, &b| a ^ b);
                Instance { alice: zs, bob: vec![(); k as usize], answer: x }
            })
            .collect();
        let table = DistributionTable::uniform(items).map_err(param)?;
        let e = exact_success(&majority_to_xor(MajorityOracle::new(k)), &table, Caps { inputs: 1 << 17, tapes: 1 })
            .map_err(|e| Failure::Check(e.to_string()))?;
        let expect = q_frac(1, 2) + q_frac(binom(k as u64 - 1, k as u64 / 2), 1 << k);
        xor.checked += 1;
        if e.success != expect {
            xor.failures.push(format!("k={k}: {} vs {expect}", e.success));
        }
    }
    groups.push(xor);
    Ok(groups)
}

pub fn run(suite: Suite, c: &Common) -> Res<()> {
    let groups = match suite {
        Suite::Structure => structure(c)?,
        Suite::Weight => weight(c)?,
        Suite::Info => info(c)?,
        Suite::Protocol => protocols(c)?,
    };
    let name = suite.to_possible_value().expect("named").get_name().to_string();
    let report = Report { pass: groups.iter().all(|g| g.failures.is_empty()), suite: name, groups };
    let text = match c.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut s = String::from("suite,check,checked,failed\n");
            for g in &report.groups {
                s += &format!("{},{},{},{}\n", report.suite, g.check, g.checked, g.failures.len());
            }
            s
        }
    };
    write_out(c.out.as_deref(), &text)?;
    if report.pass {
        Ok(())
    } else {
        let n: usize = report.groups.iter().map(|g| g.failures.len()).sum();
        Err(Failure::Check(format!("{n} failed checks in suite {}", report.suite)))
    }
}
