//! Success probability: exact enumeration and Monte-Carlo estimates.

use super::{q_f64, run, schedule, Protocol, ProtocolError, Seat, Tapes, View, Q};
use crate::atpc::{answer, derive_views, enumerate_instances, support_size, AliceView, AtpcParams, BobView};
use crate::Party;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// One input configuration with its correct answer.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Instance<A, B> {
    pub alice: Vec<A>,
    pub bob: Vec<B>,
    pub answer: bool,
}

impl<A, B> Instance<A, B> {
    pub fn two_party(a: A, b: B, answer: bool) -> Self {
        Instance { alice: vec![a], bob: vec![b], answer }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Mass {
    Exact(Vec<Q>),
    Float(Vec<f64>),
}

/// Explicit probability mass over a finite list of outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionTable<T> {
    items: Vec<T>,
    mass: Mass,
}

impl<T> DistributionTable<T> {
    pub fn uniform(items: Vec<T>) -> Result<Self, ProtocolError> {
        if items.is_empty() {
            return Err(ProtocolError::Input("empty table".into()));
        }
        let p = Q::new(1.into(), items.len().into());
        let mass = Mass::Exact(vec![p; items.len()]);
        Ok(DistributionTable { items, mass })
    }

    pub fn exact(items: Vec<T>, masses: Vec<Q>) -> Result<Self, ProtocolError> {
        if items.len() != masses.len() || items.is_empty() {
            return Err(ProtocolError::Input("item and mass counts differ".into()));
        }
        if masses.iter().any(Signed::is_negative) || masses.iter().sum::<Q>() != Q::one() {
            return Err(ProtocolError::Input("masses must be non-negative and sum to 1".into()));
        }
        Ok(DistributionTable { items, mass: Mass::Exact(masses) })
    }

    pub fn float(items: Vec<T>, masses: Vec<f64>) -> Result<Self, ProtocolError> {
        if items.len() != masses.len() || items.is_empty() {
            return Err(ProtocolError::Input("item and mass counts differ".into()));
        }
        let s: f64 = masses.iter().sum();
        if masses.iter().any(|&m| !(m >= 0.0)) || (s - 1.0).abs() > 1e-12 {
            return Err(ProtocolError::Input(format!("masses must be non-negative and sum to 1, got {s}")));
        }
        Ok(DistributionTable { items, mass: Mass::Float(masses) })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[T] {
        &self.items
    }

    pub fn mass(&self) -> &Mass {
        &self.mass
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.mass, Mass::Exact(_))
    }

    pub fn prob_f64(&self, i: usize) -> f64 {
        match &self.mass {
            Mass::Exact(m) => q_f64(&m[i]),
            Mass::Float(m) => m[i],
        }
    }

    pub fn exact_masses(&self) -> Result<&[Q], ProtocolError> {
        match &self.mass {
            Mass::Exact(m) => Ok(m),
            Mass::Float(_) => Err(ProtocolError::Input("exact evaluation needs a rational table".into())),
        }
    }

    pub fn map<U>(self, f: impl FnMut(T) -> U) -> DistributionTable<U> {
        DistributionTable { items: self.items.into_iter().map(f).collect(), mass: self.mass }
    }
}

/// Enumeration limits: table size, and tape combinations per input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub inputs: u128,
    pub tapes: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { inputs: 1 << 20, tapes: 1 << 10 }
    }
}

/// Uniform `𝒟_{d,w}` as a two-party table.
pub fn atpc_table(params: AtpcParams) -> Result<DistributionTable<Instance<AliceView, BobView>>, ProtocolError> {
    let size = support_size(params).map_err(|e| ProtocolError::Params(e.to_string()))?;
    let cap = Caps::default().inputs;
    if size > cap {
        return Err(ProtocolError::Capacity { what: "instance table", size, cap });
    }
    let items = enumerate_instances(params)
        .map_err(|e| ProtocolError::Params(e.to_string()))?
        .map(|t| {
            let (a, b) = derive_views(&t);
            Instance::two_party(a, b, answer(&t))
        })
        .collect();
    DistributionTable::uniform(items)
}

/// `𝒟_{d,w}^k` for a two-party protocol holding all `k` views per side,
/// with answer `combine(z_1..z_k)`.
pub fn kfold_table(
    params: AtpcParams,
    k: u32,
    combine: impl Fn(&[bool]) -> bool,
) -> Result<DistributionTable<Instance<Vec<AliceView>, Vec<BobView>>>, ProtocolError> {
    let base = atpc_table(params)?;
    let size = (base.len() as u128).checked_pow(k).unwrap_or(u128::MAX);
    let cap = Caps::default().inputs;
    if size > cap {
        return Err(ProtocolError::Capacity { what: "k-fold table", size, cap });
    }
    let n = base.len();
    let mut items = Vec::with_capacity(size as usize);
    let mut idx = vec![0usize; k as usize];
    loop {
        let pick: Vec<_> = idx.iter().map(|&i| &base.items()[i]).collect();
        let zs: Vec<bool> = pick.iter().map(|x| x.answer).collect();
        items.push(Instance::two_party(
            pick.iter().map(|x| x.alice[0].clone()).collect(),
            pick.iter().map(|x| x.bob[0].clone()).collect(),
            combine(&zs),
        ));
        let mut j = k as usize;
        loop {
            if j == 0 {
                return DistributionTable::uniform(items);
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < n {
                break;
            }
            idx[j] = 0;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactEval {
    pub success: Q,
    pub runs: u64,
    /// Largest per-round payload seen over all runs.
    pub cc_per_round_max: Vec<u64>,
    pub cc_total_max: u64,
}

fn seats(k: u32) -> Vec<Seat> {
    [Party::Alice, Party::Bob].iter().flat_map(|&s| (1..=k).map(move |i| Seat::new(s, i))).collect()
}

/// Exact expected correctness over the table and every tape value.
pub fn exact_success<P: Protocol + ?Sized>(
    proto: &P,
    table: &DistributionTable<Instance<P::A, P::B>>,
    caps: Caps,
) -> Result<ExactEval, ProtocolError> {
    if table.len() as u128 > caps.inputs {
        return Err(ProtocolError::Capacity { what: "input table", size: table.len() as u128, cap: caps.inputs });
    }
    let k = proto.arity().k();
    schedule(k, proto.rounds())?;
    let masses = table.exact_masses()?;
    let seat_list = seats(k);
    let mut success = Q::zero();
    let mut runs = 0;
    let mut cc_max = vec![0u64; proto.rounds() as usize];
    let mut total_max = 0;
    let public = proto.public_law().outcomes()?;
    for (inst, px) in table.items().iter().zip(masses) {
        if inst.alice.len() != k as usize || inst.bob.len() != k as usize {
            return Err(ProtocolError::Arity(format!("instance does not have {k} pairs")));
        }
        let mut hit = Q::zero();
        for (pt, pp) in &public {
            let laws = seat_list
                .iter()
                .map(|&s| {
                    let v = match s.side {
                        Party::Alice => View::Alice(&inst.alice[s.index as usize - 1]),
                        Party::Bob => View::Bob(&inst.bob[s.index as usize - 1]),
                    };
                    proto.private_law(s, v, pt).outcomes()
                })
                .collect::<Result<Vec<_>, _>>()?;
            let combos = laws.iter().try_fold(1u128, |acc, l| acc.checked_mul(l.len() as u128)).unwrap_or(u128::MAX);
            if combos > caps.tapes {
                return Err(ProtocolError::Capacity { what: "private tape combinations", size: combos, cap: caps.tapes });
            }
            let mut digit = vec![0usize; laws.len()];
            'combos: loop {
                let mut tapes = Tapes::with_public(k, pt.clone());
                let mut p = pp.clone();
                for (j, (&s, law)) in seat_list.iter().zip(&laws).enumerate() {
                    let (t, q) = &law[digit[j]];
                    p *= q;
                    match s.side {
                        Party::Alice => tapes.alice[s.index as usize - 1] = t.clone(),
                        Party::Bob => tapes.bob[s.index as usize - 1] = t.clone(),
                    }
                }
                let ex = run(proto, &inst.alice, &inst.bob, &tapes)?;
                runs += 1;
                for (m, c) in cc_max.iter_mut().zip(&ex.cc_per_round) {
                    *m = (*m).max(*c);
                }
                total_max = total_max.max(ex.cc_total);
                if ex.output == inst.answer {
                    hit += p;
                }
                let mut j = laws.len();
                loop {
                    if j == 0 {
                        break 'combos;
                    }
                    j -= 1;
                    digit[j] += 1;
                    if digit[j] < laws[j].len() {
                        break;
                    }
                    digit[j] = 0;
                }
            }
        }
        success += hit * px;
    }
    Ok(ExactEval { success, runs, cc_per_round_max: cc_max, cc_total_max: total_max })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimate: f64,
    /// `3·sqrt(p̂(1 − p̂)/trials)`.
    pub half_width: f64,
    pub trials: u64,
}

impl Estimate {
    pub fn contains(&self, x: f64) -> bool {
        (x - self.estimate).abs() <= self.half_width
    }
}

/// Monte-Carlo success rate with inputs from `sampler` and tapes from the
/// protocol's laws.
pub fn estimate_advantage<P: Protocol + ?Sized>(
    proto: &P,
    mut sampler: impl FnMut(&mut ChaCha8Rng) -> Instance<P::A, P::B>,
    trials: u64,
    seed: u64,
) -> Result<Estimate, ProtocolError> {
    if trials == 0 {
        return Err(ProtocolError::Params("trials must be at least 1".into()));
    }
    let k = proto.arity().k();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let public = proto.public_law();
    let mut hits = 0u64;
    for _ in 0..trials {
        let inst = sampler(&mut rng);
        let mut tapes = Tapes::with_public(k, public.sample(&mut rng));
        for s in seats(k) {
            let i = s.index as usize - 1;
            match s.side {
                Party::Alice => tapes.alice[i] = proto.private_law(s, View::Alice(&inst.alice[i]), &tapes.public).sample(&mut rng),
                Party::Bob => tapes.bob[i] = proto.private_law(s, View::Bob(&inst.bob[i]), &tapes.public).sample(&mut rng),
            }
        }
        if run(proto, &inst.alice, &inst.bob, &tapes)?.output == inst.answer {
            hits += 1;
        }
    }
    let p = hits as f64 / trials as f64;
    Ok(Estimate { estimate: p, half_width: 3.0 * (p * (1.0 - p) / trials as f64).sqrt(), trials })
}

/// Machine-readable evaluation summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub spec_id: String,
    pub rounds: u32,
    pub cc_total: u64,
    pub cc_per_round: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success_exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success_exact_f64: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<f64>,
}

impl EvalReport {
    pub fn exact<P: Protocol + ?Sized>(proto: &P, e: &ExactEval) -> Self {
        EvalReport {
            spec_id: proto.id(),
            rounds: proto.rounds(),
            cc_total: e.cc_total_max,
            cc_per_round: e.cc_per_round_max.clone(),
            success_exact: Some(e.success.to_string()),
            success_exact_f64: Some(q_f64(&e.success)),
            success_estimate: None,
            interval: None,
        }
    }

    /// Communication figures are the declared alphabet sizes.
    pub fn estimated<P: Protocol + ?Sized>(proto: &P, e: &Estimate) -> Result<Self, ProtocolError> {
        let cc = super::declared_cc(proto)?;
        Ok(EvalReport {
            spec_id: proto.id(),
            rounds: proto.rounds(),
            cc_total: cc.iter().sum(),
            cc_per_round: cc,
            success_exact: None,
            success_exact_f64: None,
            success_estimate: Some(e.estimate),
            interval: Some(e.half_width),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::library::*;
    use super::super::q_frac;
    use super::*;
    use crate::atpc::sample_instance;

    fn p12() -> AtpcParams {
        AtpcParams::new(1, 2).unwrap()
    }

    #[test]
    fn table_validation() {
        assert!(DistributionTable::exact(vec![1, 2], vec![q_frac(1, 2), q_frac(1, 3)]).is_err());
        assert!(DistributionTable::float(vec![1, 2], vec![0.5, 0.5 + 1e-9]).is_err());
        assert!(DistributionTable::float(vec![1, 2], vec![0.25, 0.75]).is_ok());
        let t = atpc_table(p12()).unwrap();
        assert_eq!(t.len(), 8);
        assert_eq!(t.items().iter().filter(|x| x.answer).count(), 4);
    }

    #[test]
    fn basic_successes() {
        let t = atpc_table(p12()).unwrap();
        let c = exact_success(&Constant::new(super::super::Arity::TwoParty, 0, false), &t, Caps::default()).unwrap();
        assert_eq!(c.success, q_frac(1, 2));
        assert_eq!(c.cc_total_max, 0);
        let r = exact_success(&RevealLeaves::new(2), &t, Caps::default()).unwrap();
        assert_eq!(r.success, Q::one());
        assert_eq!(r.cc_total_max, 2);
        let o = exact_success(&OneBitLeaf, &t, Caps::default()).unwrap();
        assert_eq!(o.success, q_frac(3, 4));
        for d in 1..=2 {
            for w in 2..=3 {
                let t = atpc_table(AtpcParams::new(d, w).unwrap()).unwrap();
                let c = exact_success(&Constant::new(super::super::Arity::TwoParty, d, false), &t, Caps::default()).unwrap();
                assert_eq!(c.success, q_frac(1, 2));
            }
        }
        for w in 2..=5 {
            let t = atpc_table(AtpcParams::new(1, w).unwrap()).unwrap();
            assert_eq!(exact_success(&RevealLeaves::new(w), &t, Caps::default()).unwrap().success, Q::one());
        }
    }

    fn sampler(rng: &mut ChaCha8Rng) -> Instance<AliceView, BobView> {
        use rand::Rng;
        let t = sample_instance(p12(), rng.gen()).unwrap();
        let (a, b) = derive_views(&t);
        Instance::two_party(a, b, answer(&t))
    }

    #[test]
    fn estimates_cover_exact_values() {
        let c = estimate_advantage(&Constant::new(super::super::Arity::TwoParty, 0, true), sampler, 100_000, 1).unwrap();
        assert!(c.contains(0.5), "{c:?}");
        let o = estimate_advantage(&OneBitLeaf, sampler, 100_000, 2).unwrap();
        assert!(o.contains(0.75), "{o:?}");
        let widths: Vec<f64> =
            [1_000u64, 10_000, 100_000].iter().map(|&n| estimate_advantage(&OneBitLeaf, sampler, n, 3).unwrap().half_width).collect();
        for w in widths.windows(2) {
            let ratio = w[0] / w[1];
            assert!((2.5..4.0).contains(&ratio), "{ratio}");
        }
    }

    #[test]
    fn capacity_errors() {
        let t = atpc_table(p12()).unwrap();
        let caps = Caps { inputs: 4, tapes: 1 };
        assert!(matches!(exact_success(&OneBitLeaf, &t, caps), Err(ProtocolError::Capacity { .. })));
        assert!(atpc_table(AtpcParams::new(3, 3).unwrap()).is_err());
    }

    #[test]
    fn report_json() {
        let t = atpc_table(p12()).unwrap();
        let e = exact_success(&OneBitLeaf, &t, Caps::default()).unwrap();
        let r = EvalReport::exact(&OneBitLeaf, &e);
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["success_exact"], "3/4");
        assert_eq!(v["cc_per_round"], serde_json::json!([1]));
        for key in ["spec_id", "rounds", "cc_total"] {
            assert!(v.get(key).is_some());
        }
    }
}
