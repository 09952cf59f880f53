//! Entropy, mutual information, KL divergence and total variation, in bits.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InfoError {
    #[error("shape: {0}")]
    Shape(String),
    #[error("masses must be non-negative and sum to 1")]
    Mass,
    #[error("KL support condition fails")]
    Support,
}

/// A joint distribution over a product of finite axes, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Joint {
    dims: Vec<usize>,
    p: Vec<f64>,
}

impl Joint {
    pub fn new(dims: Vec<usize>, p: Vec<f64>) -> Result<Self, InfoError> {
        if dims.contains(&0) || dims.iter().product::<usize>() != p.len() {
            return Err(InfoError::Shape(format!("{} masses for dims {dims:?}", p.len())));
        }
        let s: f64 = p.iter().sum();
        if p.iter().any(|&x| !(x >= 0.0)) || (s - 1.0).abs() > 1e-12 {
            return Err(InfoError::Mass);
        }
        Ok(Joint { dims, p })
    }

    /// Normalizes non-negative weights.
    pub fn from_weights(dims: Vec<usize>, weights: Vec<f64>) -> Result<Self, InfoError> {
        let s: f64 = weights.iter().sum();
        if !(s > 0.0) {
            return Err(InfoError::Mass);
        }
        Joint::new(dims, weights.into_iter().map(|x| x / s).collect())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    /// Marginal on `axes`, in the given order.
    pub fn marginal(&self, axes: &[usize]) -> Result<Joint, InfoError> {
        let mut seen = vec![false; self.dims.len()];
        for &a in axes {
            if a >= self.dims.len() || std::mem::replace(&mut seen[a], true) {
                return Err(InfoError::Shape(format!("bad axis list {axes:?}")));
            }
        }
        let out_dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let mut out = vec![0.0; out_dims.iter().product::<usize>().max(1)];
        let mut idx = vec![0usize; self.dims.len()];
        for &x in &self.p {
            let pos = axes.iter().fold(0, |acc, &a| acc * self.dims[a] + idx[a]);
            out[pos] += x;
            for j in (0..idx.len()).rev() {
                idx[j] += 1;
                if idx[j] < self.dims[j] {
                    break;
                }
                idx[j] = 0;
            }
        }
        Ok(Joint { dims: if out_dims.is_empty() { vec![1] } else { out_dims }, p: out })
    }

    pub fn entropy_of(&self, axes: &[usize]) -> Result<f64, InfoError> {
        Ok(entropy(&self.marginal(axes)?.p))
    }
}

pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

/// KL divergence, possibly infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Kl {
    Finite(f64),
    Infinite,
}

impl Kl {
    /// The value when `p ≪ q`, else [`InfoError::Support`].
    pub fn finite(self) -> Result<f64, InfoError> {
        match self {
            Kl::Finite(x) => Ok(x),
            Kl::Infinite => Err(InfoError::Support),
        }
    }
}

pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<Kl, InfoError> {
    if p.len() != q.len() {
        return Err(InfoError::Shape("KL of different lengths".into()));
    }
    let mut s = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return Ok(Kl::Infinite);
            }
            s += a * (a / b).log2();
        }
    }
    Ok(Kl::Finite(s.max(0.0)))
}

pub fn tvd(p: &[f64], q: &[f64]) -> Result<f64, InfoError> {
    if p.len() != q.len() {
        return Err(InfoError::Shape("TVD of different lengths".into()));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// `√((ln 2 / 2)·KL)` with KL in bits.
pub fn pinsker_bound(kl_bits: f64) -> f64 {
    (std::f64::consts::LN_2 / 2.0 * kl_bits).sqrt()
}

/// Blocks of `m` (axes `lead` first, then `rest`) grouped by the lead value.
fn blocks(m: &Joint, lead: &[usize], rest: &[usize]) -> Result<(Vec<f64>, usize), InfoError> {
    let axes: Vec<usize> = lead.iter().chain(rest).copied().collect();
    let j = m.marginal(&axes)?;
    let size = rest.iter().map(|&a| m.dims[a]).product::<usize>().max(1);
    Ok((j.p, size))
}

/// `H(X | Z)` as the `p(z)`-average of `H(X | Z = z)`.
pub fn cond_entropy(m: &Joint, x: &[usize], z: &[usize]) -> Result<f64, InfoError> {
    let (p, size) = blocks(m, z, x)?;
    let mut h = 0.0;
    for block in p.chunks(size) {
        let pz: f64 = block.iter().sum();
        if pz > 0.0 {
            let cond: Vec<f64> = block.iter().map(|v| v / pz).collect();
            h += pz * entropy(&cond);
        }
    }
    Ok(h)
}

/// `I(X; Y | Z)` as the expected KL between `p(x, y | z)` and the product of
/// its marginals.
pub fn mutual_information(m: &Joint, x: &[usize], y: &[usize], z: &[usize]) -> Result<f64, InfoError> {
    let xy: Vec<usize> = x.iter().chain(y).copied().collect();
    let (p, size) = blocks(m, z, &xy)?;
    let ny = y.iter().map(|&a| m.dims[a]).product::<usize>().max(1);
    let nx = size / ny;
    let mut total = 0.0;
    for block in p.chunks(size) {
        let pz: f64 = block.iter().sum();
        if pz <= 0.0 {
            continue;
        }
        let c: Vec<f64> = block.iter().map(|v| v / pz).collect();
        let px: Vec<f64> = (0..nx).map(|i| c[i * ny..(i + 1) * ny].iter().sum()).collect();
        let py: Vec<f64> = (0..ny).map(|j| (0..nx).map(|i| c[i * ny + j]).sum()).collect();
        let prod: Vec<f64> = (0..size).map(|t| px[t / ny] * py[t % ny]).collect();
        total += pz * kl_divergence(&c, &prod)?.finite()?;
    }
    Ok(total)
}

/// Right side of the TVD chain rule for two-axis joints:
/// `TVD(μ_A, ν_A) + E_{a∼μ_A} TVD(μ_{B|a}, ν_{B|a})`, where `ν_{B|a}` is
/// taken uniform when `ν(a) = 0`.
pub fn tvd_chain_rhs(mu: &Joint, nu: &Joint) -> Result<f64, InfoError> {
    if mu.dims.len() != 2 || mu.dims != nu.dims {
        return Err(InfoError::Shape("chain rule needs matching two-axis joints".into()));
    }
    let (na, nb) = (mu.dims[0], mu.dims[1]);
    let (ma, va) = (mu.marginal(&[0])?.p, nu.marginal(&[0])?.p);
    let mut rhs = tvd(&ma, &va)?;
    for a in 0..na {
        if ma[a] <= 0.0 {
            continue;
        }
        let cm: Vec<f64> = mu.p[a * nb..(a + 1) * nb].iter().map(|x| x / ma[a]).collect();
        let cn: Vec<f64> =
            if va[a] > 0.0 { nu.p[a * nb..(a + 1) * nb].iter().map(|x| x / va[a]).collect() } else { vec![1.0 / nb as f64; nb] };
        rhs += ma[a] * tvd(&cm, &cn)?;
    }
    Ok(rhs)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfoMetrics {
    /// `H(A, B)` under `μ`.
    pub entropy: f64,
    /// `I(A; B)` under `μ`.
    pub mutual_information: f64,
    pub kl: Kl,
    pub tvd: f64,
}

/// Metrics of a two-axis `μ` and its distance to `ν`.
pub fn info_metrics(mu: &Joint, nu: &Joint) -> Result<InfoMetrics, InfoError> {
    if mu.dims.len() != 2 || mu.dims != nu.dims {
        return Err(InfoError::Shape("metrics need matching two-axis joints".into()));
    }
    Ok(InfoMetrics {
        entropy: entropy(&mu.p),
        mutual_information: mutual_information(mu, &[0], &[1], &[])?,
        kl: kl_divergence(&mu.p, &nu.p)?,
        tvd: tvd(&mu.p, &nu.p)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_joint(rng: &mut impl Rng, dims: Vec<usize>, sparse: bool) -> Joint {
        let n = dims.iter().product();
        let mut w: Vec<f64> = (0..n).map(|_| if sparse && rng.gen_bool(0.3) { 0.0 } else { rng.gen::<f64>() }).collect();
        if w.iter().all(|&x| x == 0.0) {
            w[0] = 1.0;
        }
        Joint::from_weights(dims, w).unwrap()
    }

    #[test]
    fn fixed_values() {
        assert!((entropy(&[0.25; 4]) - 2.0).abs() < 1e-15);
        let p = [0.9, 0.1];
        let q = [0.5, 0.5];
        assert_eq!(kl_divergence(&p, &p).unwrap(), Kl::Finite(0.0));
        assert_eq!(tvd(&p, &p).unwrap(), 0.0);
        assert!((tvd(&p, &q).unwrap() - 0.4).abs() < 1e-12);
        let kl = kl_divergence(&p, &q).unwrap().finite().unwrap();
        assert!((kl - 0.531).abs() < 1e-3, "{kl}");
        assert!((pinsker_bound(kl) - 0.429).abs() < 1e-3);
        assert!(tvd(&p, &q).unwrap() <= pinsker_bound(kl));
        assert_eq!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]).unwrap(), Kl::Infinite);
        assert_eq!(Kl::Infinite.finite(), Err(InfoError::Support));
    }

    #[test]
    fn validation() {
        assert!(Joint::new(vec![2], vec![0.5, 0.6]).is_err());
        assert!(Joint::new(vec![3], vec![0.5, 0.5]).is_err());
        let j = Joint::new(vec![2, 2], vec![0.25; 4]).unwrap();
        assert!(j.marginal(&[0, 0]).is_err());
        assert!(info_metrics(&j, &Joint::new(vec![4], vec![0.25; 4]).unwrap()).is_err());
    }

    #[test]
    fn chain_rules_on_random_tables() {
        let mut rng = crate::seed::rng(11);
        for _ in 0..1000 {
            let dims = vec![rng.gen_range(1..5), rng.gen_range(1..5), rng.gen_range(1..5)];
            let m = random_joint(&mut rng, dims, true);
            let h_ab = m.entropy_of(&[0, 1]).unwrap();
            let h_a = m.entropy_of(&[0]).unwrap();
            assert!((h_ab - h_a - cond_entropy(&m, &[1], &[0]).unwrap()).abs() < 1e-9);
            let i_abc = mutual_information(&m, &[0, 1], &[2], &[]).unwrap();
            let i_ac = mutual_information(&m, &[0], &[2], &[]).unwrap();
            let i_bc_a = mutual_information(&m, &[1], &[2], &[0]).unwrap();
            assert!((i_abc - i_ac - i_bc_a).abs() < 1e-9);
            assert!(i_ac >= 0.0 && i_bc_a >= 0.0);
            let d2 = vec![m.dims()[0], m.dims()[1]];
            let mu = random_joint(&mut rng, d2.clone(), true);
            let nu = random_joint(&mut rng, d2, true);
            assert!(tvd(mu.probs(), nu.probs()).unwrap() <= tvd_chain_rhs(&mu, &nu).unwrap() + 1e-12);
            if let Kl::Finite(kl) = kl_divergence(mu.probs(), nu.probs()).unwrap() {
                assert!(tvd(mu.probs(), nu.probs()).unwrap() <= pinsker_bound(kl) + 1e-12);
            }
            let met = info_metrics(&mu, &nu).unwrap();
            assert!(met.entropy >= 0.0 && met.mutual_information >= 0.0 && met.tvd >= 0.0);
        }
    }
}
