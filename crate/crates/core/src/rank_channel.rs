//! Rank-level description of the matrix channel `Y = G X` with a transfer
//! matrix that is uniform given its rank.
//!
//! Such a channel is fully described by the rank distribution of `G`. From it
//! we derive the kernel `p(v | u)`, the probability that the output has rank
//! `v` when the input has rank `u`, which does not depend on which rank-`u`
//! input was sent.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::enumeration::{count_rank_class, gaussian_binomial};
use crate::error::{Error, Result};
use crate::gf::FqMatrix;

/// Channel geometry: field order `q`, input rows `n`, output rows `m`, and
/// packet length `l`, with `max(n, m) <= l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChannelDims {
    q: u64,
    n: usize,
    m: usize,
    l: usize,
}

impl ChannelDims {
    pub fn new(q: u64, n: usize, m: usize, l: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidDims(format!("q must be at least 2, got {q}")));
        }
        if n == 0 || m == 0 {
            return Err(Error::InvalidDims("n and m must be positive".into()));
        }
        if n.max(m) > l {
            return Err(Error::InvalidDims(format!(
                "packet length l = {l} must be at least max(n, m) = {}",
                n.max(m)
            )));
        }
        Ok(Self { q, n, m, l })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// `min(n, m)`, the largest possible transfer and output rank.
    pub fn max_rank(&self) -> usize {
        self.n.min(self.m)
    }
}

/// A probability vector over ranks `0..=max_rank`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RankDistribution {
    probs: Vec<f64>,
}

impl RankDistribution {
    /// Inputs may miss unit mass by this much; they are renormalized.
    pub const SLACK: f64 = 1e-6;

    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty probability vector".into()));
        }
        if let Some((r, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "probability of rank {r} is {p}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > Self::SLACK {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self {
            probs: probs.into_iter().map(|p| p / total).collect(),
        })
    }

    pub fn point(rank: usize, max_rank: usize) -> Self {
        assert!(rank <= max_rank, "rank beyond max_rank");
        let mut probs = vec![0.0; max_rank + 1];
        probs[rank] = 1.0;
        Self { probs }
    }

    pub fn uniform(max_rank: usize) -> Self {
        Self {
            probs: vec![1.0 / (max_rank + 1) as f64; max_rank + 1],
        }
    }

    /// Converts exact probabilities. They must sum to one exactly.
    pub fn from_exact(probs: &[BigRational]) -> Result<Self> {
        let total: BigRational = probs.iter().sum();
        if total != BigRational::from_integer(1.into()) {
            return Err(Error::InvalidDistribution(format!(
                "exact probabilities sum to {total}"
            )));
        }
        Self::new(probs.iter().map(|p| p.to_f64().unwrap_or(0.0)).collect())
    }

    /// Full-rank square transfer matrices: a point mass at `n`.
    pub fn silva(dims: &ChannelDims) -> Result<Self> {
        if dims.n != dims.m {
            return Err(Error::InvalidDims(format!(
                "the full-rank square model needs n = m, got n = {}, m = {}",
                dims.n, dims.m
            )));
        }
        Ok(Self::point(dims.n, dims.n))
    }

    /// Uniform transfer matrices: the rank census of `F_q^{m x n}`.
    pub fn jafari(dims: &ChannelDims) -> Self {
        Self::from_exact(&jafari_exact(dims)).expect("census sums to one")
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn max_rank(&self) -> usize {
        self.probs.len() - 1
    }

    /// Probability of `rank`, zero beyond the stored support.
    pub fn prob(&self, rank: usize) -> f64 {
        self.probs.get(rank).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(r, p)| r as f64 * p).sum()
    }

    /// Same distribution stored over `0..=max_rank`. Fails if mass would be
    /// dropped.
    pub fn resized(&self, max_rank: usize) -> Result<Self> {
        if let Some(r) = (max_rank + 1..self.probs.len()).find(|&r| self.probs[r] > 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "rank {r} has positive mass but the maximum rank is {max_rank}"
            )));
        }
        let mut probs = self.probs.clone();
        probs.resize(max_rank + 1, 0.0);
        Ok(Self { probs })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let x: f64 = rng.random();
        let mut acc = 0.0;
        for (r, &p) in self.probs.iter().enumerate() {
            acc += p;
            if x < acc {
                return r;
            }
        }
        // rounding left x above the accumulated mass
        self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }
}

/// Exact census probabilities `|T_r(F_q^{m x n})| / q^{mn}`.
pub fn jafari_exact(dims: &ChannelDims) -> Vec<BigRational> {
    let total: BigUint = num_traits::pow(BigUint::from(dims.q), dims.m * dims.n);
    (0..=dims.max_rank())
        .map(|r| {
            BigRational::new(
                count_rank_class(dims.m, dims.n, r, dims.q).into(),
                total.clone().into(),
            )
        })
        .collect()
}

/// Exact `p(v | u, r)`: the probability that `rank(G X) = v` for a fixed
/// rank-`u` input `X` with `n` rows and `G` uniform over the rank-`r` class.
///
/// `p(v|u,r) = [u v]_q [n-u r-v]_q q^{v(n-u-r+v)} / [n r]_q`, nonzero only for
/// `u + r - n <= v <= min(u, r)`.
pub fn rank_transition_exact(q: u64, n: usize, u: usize, r: usize, v: usize) -> BigRational {
    if u > n || r > n || v > u.min(r) || r - v > n - u {
        return BigRational::zero();
    }
    let exp = v * (n - u - (r - v));
    let num = gaussian_binomial(u as i64, v as i64, q)
        * gaussian_binomial((n - u) as i64, (r - v) as i64, q)
        * num_traits::pow(BigUint::from(q), exp);
    BigRational::new(num.into(), gaussian_binomial(n as i64, r as i64, q).into())
}

/// `p(. | u, r)` over output ranks `0..=min(n, m)`.
pub fn rank_transition(dims: &ChannelDims, u: usize, r: usize) -> Result<RankDistribution> {
    if u > dims.n {
        return Err(Error::OutOfRange(format!("input rank {u} exceeds n = {}", dims.n)));
    }
    if r > dims.max_rank() {
        return Err(Error::OutOfRange(format!(
            "transfer rank {r} exceeds min(n, m) = {}",
            dims.max_rank()
        )));
    }
    let probs: Vec<f64> = (0..=dims.max_rank())
        .map(|v| {
            rank_transition_exact(dims.q, dims.n, u, r, v)
                .to_f64()
                .expect("probability is finite")
        })
        .collect();
    let total: f64 = probs.iter().sum();
    debug_assert!((total - 1.0).abs() < 1e-12, "row sums to {total}");
    RankDistribution::new(probs)
}

/// Rank-transition kernel of a channel: `p(v|u)` and the per-transfer-rank
/// table `p(v|u,r)`.
#[derive(Debug, Clone)]
pub struct RankKernel {
    dims: ChannelDims,
    rank_dist: RankDistribution,
    // (n+1) x (k+1), k = min(n, m)
    table: Vec<f64>,
    // (n+1) x (k+1) x (k+1), indexed [u][r][v]
    conditional: Vec<f64>,
}

impl RankKernel {
    /// Mixes `p(v|u,r)` over the transfer-rank distribution.
    pub fn new(dims: ChannelDims, rank_dist: &RankDistribution) -> Result<Self> {
        let k = dims.max_rank();
        let rank_dist = rank_dist.resized(k)?;
        let mut conditional = vec![0.0; (dims.n + 1) * (k + 1) * (k + 1)];
        for u in 0..=dims.n {
            for r in 0..=k {
                for v in 0..=k {
                    conditional[(u * (k + 1) + r) * (k + 1) + v] =
                        rank_transition_exact(dims.q, dims.n, u, r, v)
                            .to_f64()
                            .expect("probability is finite");
                }
            }
        }
        let mut table = vec![0.0; (dims.n + 1) * (k + 1)];
        for u in 0..=dims.n {
            for r in 0..=k {
                let pr = rank_dist.prob(r);
                if pr == 0.0 {
                    continue;
                }
                for v in 0..=k {
                    table[u * (k + 1) + v] += pr * conditional[(u * (k + 1) + r) * (k + 1) + v];
                }
            }
        }
        Ok(Self {
            dims,
            rank_dist,
            table,
            conditional,
        })
    }

    pub fn dims(&self) -> &ChannelDims {
        &self.dims
    }

    pub fn rank_distribution(&self) -> &RankDistribution {
        &self.rank_dist
    }

    /// `p(v | u)`.
    pub fn p(&self, v: usize, u: usize) -> f64 {
        self.row(u)[v]
    }

    /// `p(v | u, r)`.
    pub fn p_given_rank(&self, v: usize, u: usize, r: usize) -> f64 {
        let k = self.dims.max_rank();
        self.conditional[(u * (k + 1) + r) * (k + 1) + v]
    }

    /// The row `p(. | u)` over output ranks `0..=min(n, m)`.
    pub fn row(&self, u: usize) -> &[f64] {
        let w = self.dims.max_rank() + 1;
        &self.table[u * w..(u + 1) * w]
    }
}

/// Builds the kernel of the channel with transfer-rank distribution
/// `rank_dist`, which must put no mass above `min(n, m)`.
pub fn kernel(dims: &ChannelDims, rank_dist: &RankDistribution) -> Result<RankKernel> {
    RankKernel::new(*dims, rank_dist)
}

/// Output-rank distribution `p_v = p_u K`.
pub fn output_rank_dist(kernel: &RankKernel, input: &RankDistribution) -> Result<RankDistribution> {
    let n = kernel.dims.n;
    let input = input.resized(n)?;
    let k = kernel.dims.max_rank();
    let mut out = vec![0.0; k + 1];
    for u in 0..=n {
        let pu = input.prob(u);
        if pu == 0.0 {
            continue;
        }
        for (o, &t) in out.iter_mut().zip(kernel.row(u)) {
            *o += pu * t;
        }
    }
    RankDistribution::new(out)
}

/// Matrix-level transition probability `p(Y | X)`:
/// `p(v|u) / |T_v(F_q^{m x u})|` when the row space of `Y` lies inside that of
/// `X`, and zero otherwise.
pub fn matrix_transition_prob(kernel: &RankKernel, x: &FqMatrix, y: &FqMatrix) -> Result<f64> {
    let d = &kernel.dims;
    if x.field() != y.field() {
        return Err(Error::FieldMismatch(x.field().order(), y.field().order()));
    }
    if x.field().order() as u64 != d.q {
        return Err(Error::DimensionMismatch(format!(
            "matrices over F_{} for a channel over F_{}",
            x.field().order(),
            d.q
        )));
    }
    if (x.rows(), x.cols()) != (d.n, d.l) || (y.rows(), y.cols()) != (d.m, d.l) {
        return Err(Error::DimensionMismatch(format!(
            "expected X {}x{} and Y {}x{}, got {}x{} and {}x{}",
            d.n,
            d.l,
            d.m,
            d.l,
            x.rows(),
            x.cols(),
            y.rows(),
            y.cols()
        )));
    }
    let (sx, sy) = (x.row_space(), y.row_space());
    if !sy.is_subspace_of(&sx) {
        return Ok(0.0);
    }
    let (u, v) = (sx.dim(), sy.dim());
    let class = count_rank_class(d.m, u, v, d.q);
    Ok(kernel.p(v, u) / class.to_f64().expect("finite count"))
}
