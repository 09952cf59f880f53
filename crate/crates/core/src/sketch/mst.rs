use super::forest::{check_endpoints, default_rounds, op_delta, pair_count, pair_index, pair_of, ForestSketchBank};
use super::l0::{L0Params, L0Sample, L0Sketch};
use super::{run_streaming, union_find_oracle, SketchError, SpaceMeter, StreamingAlgorithm};
use crate::seed::derive;
use crate::stream::{DynamicStream, StreamOp};
use petgraph::unionfind::UnionFind;

fn check_weight(op: &StreamOp, w_max: u64) -> Result<(), SketchError> {
    if op.weight == 0 || op.weight > w_max {
        return Err(SketchError::WeightOutOfRange { weight: op.weight, max: w_max });
    }
    Ok(())
}

/// `W` forest banks; copy `i` sees the edges of weight at most `i`.
///
/// With `c_i` the number of components of the graph restricted to weights
/// `≤ i` (`c_0 = n`), the MST weight is `Σ_i i·(c_{i−1} − c_i)`.
#[derive(Clone, Debug)]
pub struct SinglePassDecider {
    n: u32,
    threshold: u64,
    w_max: u64,
    copies: Vec<ForestSketchBank>,
}

impl SinglePassDecider {
    pub fn new(n: u32, threshold: u64, w_max: u64, seed: u64, delta: f64) -> Result<Self, SketchError> {
        if w_max == 0 {
            return Err(SketchError::InvalidParams("W must be at least 1".into()));
        }
        let rounds = default_rounds(n);
        let copies = (1..=w_max).map(|i| ForestSketchBank::new(n, rounds, delta, derive(seed, i))).collect::<Result<_, _>>()?;
        Ok(SinglePassDecider { n, threshold, w_max, copies })
    }

    /// Component counts `c_1..c_W` of the weight prefixes.
    pub fn prefix_components(&self) -> Result<Vec<u64>, SketchError> {
        let mut out = Vec::with_capacity(self.copies.len());
        for bank in &self.copies {
            let f = bank.spanning_forest()?;
            out.push(self.n as u64 - f.len() as u64);
        }
        if out.windows(2).any(|w| w[1] > w[0]) {
            return Err(SketchError::SketchFailure("prefix component counts are not monotone".into()));
        }
        Ok(out)
    }

    /// Minimum spanning forest weight.
    pub fn weight(&self) -> Result<u64, SketchError> {
        let c = self.prefix_components()?;
        let mut prev = self.n as u64;
        let mut total = 0;
        for (i, &ci) in c.iter().enumerate() {
            total += (i as u64 + 1) * (prev - ci);
            prev = ci;
        }
        Ok(total)
    }
}

impl StreamingAlgorithm for SinglePassDecider {
    fn passes(&self) -> u32 {
        1
    }

    fn begin_pass(&mut self, _pass: u32) -> Result<(), SketchError> {
        Ok(())
    }

    fn process(&mut self, op: &StreamOp) -> Result<(), SketchError> {
        check_endpoints(self.n, op)?;
        check_weight(op, self.w_max)?;
        for bank in &mut self.copies[op.weight as usize - 1..] {
            bank.update(op)?;
        }
        Ok(())
    }

    fn end_pass(&mut self, _pass: u32) -> Result<(), SketchError> {
        Ok(())
    }

    fn decide(&self) -> Result<bool, SketchError> {
        Ok(self.weight()? >= self.threshold)
    }

    fn state_bits(&self) -> u64 {
        self.copies.iter().map(ForestSketchBank::bits).sum()
    }

    fn encode_state(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity((self.state_bits() / 8) as usize);
        self.copies.iter().for_each(|b| b.write_bytes(&mut out));
        out
    }

    fn decode_state(&mut self, mut bytes: &[u8]) -> Result<(), SketchError> {
        for bank in &mut self.copies {
            bytes = bank.read_bytes(bytes)?;
        }
        if !bytes.is_empty() {
            return Err(SketchError::Decode("trailing bytes".into()));
        }
        Ok(())
    }

    fn space_bound(&self) -> u64 {
        self.state_bits()
    }
}

#[derive(Clone, Debug)]
pub struct SinglePassOutcome {
    pub decision: bool,
    pub weight: u64,
    pub meter: SpaceMeter,
}

pub fn mst_decide_single_pass(stream: &DynamicStream, w_max: u64, seed: u64, delta: f64) -> Result<SinglePassOutcome, SketchError> {
    let mut alg = SinglePassDecider::new(stream.n, stream.threshold, w_max, seed, delta)?;
    let mut meter = SpaceMeter::new();
    run_streaming(&mut alg, &stream.ops, &mut meter)?;
    let weight = alg.weight()?;
    Ok(SinglePassOutcome { decision: weight >= stream.threshold, weight, meter })
}

/// Borůvka in `p` passes.
///
/// The phase budget `L = ⌈log₂ n⌉ + 2` is split into `⌈L/p⌉` phases per
/// pass. During a pass every open component keeps, for each of its phases
/// and each weight class `c ≤ W`, a sketch of its incident edges of weight
/// at most `c`. After the pass the phases run in order: a component's
/// minimum outgoing weight is the smallest class whose sketch is nonempty,
/// and that sketch yields the edge. Components whose class-`W` sketch is
/// empty are finished.
#[derive(Clone, Debug)]
pub struct MultipassMst {
    n: u32,
    threshold: u64,
    w_max: u64,
    p: u32,
    phases: u32,
    seed: u64,
    delta: f64,
    dim: u64,
    pass: u32,
    labels: Vec<u32>,
    done: Vec<bool>,
    forest: Vec<(u32, u32, u64)>,
    /// Open components of the current pass, by label.
    open: Vec<u32>,
    /// `open` position of each label, `u32::MAX` when finished.
    slot: Vec<u32>,
    phase_params: Vec<L0Params>,
    /// `sketches[(t * W + c - 1) * open.len() + j]`.
    sketches: Vec<L0Sketch>,
}

impl MultipassMst {
    pub fn new(n: u32, threshold: u64, w_max: u64, p: u32, seed: u64, delta: f64) -> Result<Self, SketchError> {
        if p == 0 {
            return Err(SketchError::InvalidParams("p must be at least 1".into()));
        }
        if w_max == 0 {
            return Err(SketchError::InvalidParams("W must be at least 1".into()));
        }
        L0Params::new(1, delta, 0)?;
        let budget = default_rounds(n);
        Ok(MultipassMst {
            n,
            threshold,
            w_max,
            p,
            phases: budget.div_ceil(p),
            seed,
            delta,
            dim: pair_count(n).max(1),
            pass: 0,
            labels: (1..=n).collect(),
            done: vec![false; n as usize + 1],
            forest: Vec::new(),
            open: Vec::new(),
            slot: vec![u32::MAX; n as usize + 1],
            phase_params: Vec::new(),
            sketches: Vec::new(),
        })
    }

    pub fn phases_per_pass(&self) -> u32 {
        self.phases
    }

    pub fn forest(&self) -> &[(u32, u32, u64)] {
        &self.forest
    }

    pub fn finished(&self) -> bool {
        (1..=self.n).all(|v| self.done[self.labels[v as usize - 1] as usize])
    }

    fn setup_pass(&mut self, pass: u32) -> Result<(), SketchError> {
        self.pass = pass;
        self.open.clear();
        self.slot.iter_mut().for_each(|s| *s = u32::MAX);
        for v in 1..=self.n {
            let l = self.labels[v as usize - 1];
            if l == v && !self.done[l as usize] {
                self.slot[l as usize] = self.open.len() as u32;
                self.open.push(l);
            }
        }
        let pass_seed = derive(self.seed, pass as u64);
        self.phase_params =
            (0..self.phases).map(|t| L0Params::new(self.dim, self.delta, derive(pass_seed, t as u64))).collect::<Result<_, _>>()?;
        self.sketches = self
            .phase_params
            .iter()
            .flat_map(|&pp| std::iter::repeat_n(L0Sketch::new(pp), self.w_max as usize * self.open.len()))
            .collect();
        Ok(())
    }

    fn sketch_index(&self, t: usize, c: u64, j: usize) -> usize {
        (t * self.w_max as usize + c as usize - 1) * self.open.len() + j
    }

    fn run_phases(&mut self) -> Result<(), SketchError> {
        let n = self.n as usize;
        let mut uf = UnionFind::<usize>::new(n + 1);
        for &(u, v, _) in &self.forest {
            uf.union(u as usize, v as usize);
        }
        // Finished flags, indexed by union-find root.
        let mut fin = vec![false; n + 1];
        for v in 1..=n {
            if self.done[self.labels[v - 1] as usize] {
                fin[uf.find_mut(v)] = true;
            }
        }
        for t in 0..self.phases as usize {
            // Group this pass's open components by their current root.
            let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
            let mut pos = vec![usize::MAX; n + 1];
            for (j, &l) in self.open.iter().enumerate() {
                let r = uf.find_mut(l as usize);
                if fin[r] {
                    continue;
                }
                if pos[r] == usize::MAX {
                    pos[r] = groups.len();
                    groups.push((r, Vec::new()));
                }
                groups[pos[r]].1.push(j);
            }
            let mut chosen = Vec::new();
            for (root, members) in &groups {
                let mut outcome = None;
                for c in 1..=self.w_max {
                    let mut acc = self.sketches[self.sketch_index(t, c, members[0])].clone();
                    for &j in &members[1..] {
                        acc.merge(&self.sketches[self.sketch_index(t, c, j)])?;
                    }
                    match acc.sample() {
                        L0Sample::Empty => continue,
                        L0Sample::Found(idx) => outcome = Some(Some((idx, c))),
                        L0Sample::Fail => outcome = Some(None),
                    }
                    break;
                }
                match outcome {
                    None => fin[*root] = true,
                    Some(None) => {}
                    Some(Some((idx, c))) => {
                        let (u, v) = pair_of(self.n, idx);
                        let (ru, rv) = (uf.find_mut(u as usize), uf.find_mut(v as usize));
                        if (ru == *root) == (rv == *root) {
                            return Err(SketchError::SketchFailure("sampled edge does not leave its component".into()));
                        }
                        chosen.push((u, v, c));
                    }
                }
            }
            if chosen.is_empty() && groups.iter().all(|(r, _)| fin[*r]) {
                break;
            }
            chosen.sort_by_key(|&(u, v, c)| (c, u, v));
            for (u, v, c) in chosen {
                if uf.union(u as usize, v as usize) {
                    self.forest.push((u, v, c));
                }
            }
        }
        // Relabel by smallest member.
        let edges: Vec<(u32, u32)> = self.forest.iter().map(|&(u, v, _)| (u, v)).collect();
        let labels = union_find_oracle(&edges, self.n);
        let mut done = vec![false; n + 1];
        for v in 1..=n {
            if fin[uf.find_mut(v)] {
                done[labels[v - 1] as usize] = true;
            }
        }
        self.labels = labels;
        self.done = done;
        self.open.clear();
        self.sketches.clear();
        self.phase_params.clear();
        Ok(())
    }

    pub fn weight(&self) -> u64 {
        self.forest.iter().map(|e| e.2).sum()
    }
}

impl StreamingAlgorithm for MultipassMst {
    fn passes(&self) -> u32 {
        self.p
    }

    fn begin_pass(&mut self, pass: u32) -> Result<(), SketchError> {
        self.setup_pass(pass)
    }

    fn process(&mut self, op: &StreamOp) -> Result<(), SketchError> {
        check_endpoints(self.n, op)?;
        check_weight(op, self.w_max)?;
        let (a, b) = (op.u.min(op.v), op.u.max(op.v));
        let (la, lb) = (self.labels[a as usize - 1], self.labels[b as usize - 1]);
        if la == lb || self.open.is_empty() {
            return Ok(());
        }
        let (ja, jb) = (self.slot[la as usize], self.slot[lb as usize]);
        let idx = pair_index(self.n, a, b);
        let delta = op_delta(op);
        for t in 0..self.phases as usize {
            let plan = self.phase_params[t].plan(idx)?;
            for c in op.weight..=self.w_max {
                if ja != u32::MAX {
                    let k = self.sketch_index(t, c, ja as usize);
                    self.sketches[k].apply(&plan, delta);
                }
                if jb != u32::MAX {
                    let k = self.sketch_index(t, c, jb as usize);
                    self.sketches[k].apply(&plan, -delta);
                }
            }
        }
        Ok(())
    }

    fn end_pass(&mut self, _pass: u32) -> Result<(), SketchError> {
        self.run_phases()
    }

    fn decide(&self) -> Result<bool, SketchError> {
        if !self.finished() {
            return Err(SketchError::SketchFailure("phase budget exhausted with open components".into()));
        }
        Ok(self.weight() >= self.threshold)
    }

    fn state_bits(&self) -> u64 {
        // pass, labels, finished flags, edge count + edges, sketches.
        let sketch_bits: u64 = self.sketches.iter().map(L0Sketch::bits).sum();
        32 + 32 * self.n as u64 + 8 * (self.n as u64 + 1) + 32 + 128 * self.forest.len() as u64 + sketch_bits
    }

    fn encode_state(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity((self.state_bits() / 8) as usize);
        out.extend_from_slice(&self.pass.to_le_bytes());
        self.labels.iter().for_each(|l| out.extend_from_slice(&l.to_le_bytes()));
        out.extend(self.done.iter().map(|&d| d as u8));
        out.extend_from_slice(&(self.forest.len() as u32).to_le_bytes());
        for &(u, v, w) in &self.forest {
            out.extend_from_slice(&u.to_le_bytes());
            out.extend_from_slice(&v.to_le_bytes());
            out.extend_from_slice(&w.to_le_bytes());
        }
        self.sketches.iter().for_each(|s| s.write_bytes(&mut out));
        out
    }

    fn decode_state(&mut self, bytes: &[u8]) -> Result<(), SketchError> {
        let n = self.n as usize;
        let mut rd = Reader(bytes);
        let pass = rd.u32()?;
        let labels = (0..n).map(|_| rd.u32()).collect::<Result<Vec<_>, _>>()?;
        let done = (0..=n).map(|_| rd.take(1).map(|b| b[0] != 0)).collect::<Result<Vec<_>, _>>()?;
        let m = rd.u32()? as usize;
        let forest = (0..m)
            .map(|_| Ok((rd.u32()?, rd.u32()?, u64::from_le_bytes(rd.take(8)?.try_into().expect("8 bytes")))))
            .collect::<Result<Vec<_>, SketchError>>()?;
        if labels.iter().any(|&l| l == 0 || l > self.n) {
            return Err(SketchError::Decode("label out of range".into()));
        }
        self.labels = labels;
        self.done = done;
        self.forest = forest;
        self.open.clear();
        self.sketches.clear();
        self.phase_params.clear();
        self.pass = pass;
        if rd.0.is_empty() {
            return Ok(());
        }
        // Mid-pass state: rebuild the layout, then read the sketch cells.
        self.setup_pass(pass)?;
        let mut rest = rd.0;
        for s in &mut self.sketches {
            let (t, r) = L0Sketch::read_bytes(*s.params(), rest)?;
            *s = t;
            rest = r;
        }
        if !rest.is_empty() {
            return Err(SketchError::Decode("trailing bytes".into()));
        }
        Ok(())
    }

    fn space_bound(&self) -> u64 {
        let sketch = L0Params::new(self.dim, self.delta, 0).map(|p| p.bits()).unwrap_or(0);
        32 + 32 * self.n as u64
            + 8 * (self.n as u64 + 1)
            + 32
            + 128 * self.n.saturating_sub(1) as u64
            + self.phases as u64 * self.w_max * self.n as u64 * sketch
    }
}

struct Reader<'a>(&'a [u8]);

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8], SketchError> {
        if self.0.len() < k {
            return Err(SketchError::Decode("truncated state".into()));
        }
        let (a, b) = self.0.split_at(k);
        self.0 = b;
        Ok(a)
    }

    fn u32(&mut self) -> Result<u32, SketchError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

#[derive(Clone, Debug)]
pub struct MultipassOutcome {
    pub edges: Vec<(u32, u32, u64)>,
    pub weight: u64,
    pub decision: bool,
    pub meter: SpaceMeter,
    pub passes: u32,
}

pub fn mst_multipass(stream: &DynamicStream, p: u32, w_max: u64, seed: u64, delta: f64) -> Result<MultipassOutcome, SketchError> {
    let mut alg = MultipassMst::new(stream.n, stream.threshold, w_max, p, seed, delta)?;
    let mut meter = SpaceMeter::new();
    let decision = run_streaming(&mut alg, &stream.ops, &mut meter)?;
    Ok(MultipassOutcome { edges: alg.forest.clone(), weight: alg.weight(), decision, meter, passes: p })
}
