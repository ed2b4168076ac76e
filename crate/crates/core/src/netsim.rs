//! Monte Carlo model of the layered wireless relay network.
//!
//! The source sends `X` to `N` relays, each of the `L` layers forwards `M`
//! random combinations per relay to the next one, and every hop erases each
//! packet independently with probability `eps` (an erased packet arrives as
//! the zero vector). The end-to-end transfer matrix is
//!
//! ```text
//! G = E' A_L E_L ... A_2 E_2 A_1 E_1
//! ```
//!
//! with `A_i` block diagonal (relay `j` holds an `M x MN` uniform coding
//! matrix `A_{i,j}`), `E_i` the stack of the relays' diagonal erasure
//! matrices and `E'` the erasures at the sink. `n = m = MN`.
//!
//! Trials are split into fixed blocks; block `b` draws from a ChaCha8 stream
//! `b` under the configured seed, so results do not depend on the thread
//! count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{
    asymptotic_packet_length, CapacityModel, CapacityResult, OptimizerConfig,
};
use crate::error::{Error, Result};
use crate::gf::{sample_uniform, Field, FqMatrix};
use crate::rank_channel::{ChannelDims, RankDistribution, RankKernel};

/// Trials per RNG stream.
pub const BLOCK_TRIALS: u64 = 4096;

pub const DEFAULT_TRIALS: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub q: u32,
    pub layers: usize,
    pub relays: usize,
    pub repetitions: usize,
    pub erasure: f64,
    pub trials: u64,
    pub seed: u64,
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<Field> {
        let field = Field::new(self.q)?;
        if self.layers == 0 || self.relays == 0 || self.repetitions == 0 {
            return Err(Error::InvalidNetwork(format!(
                "layers, relays and repetitions must be at least 1 (got {}, {}, {})",
                self.layers, self.relays, self.repetitions
            )));
        }
        if !(0.0..=1.0).contains(&self.erasure) {
            return Err(Error::InvalidNetwork(format!(
                "erasure probability {} outside [0, 1]",
                self.erasure
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidNetwork("trials must be at least 1".into()));
        }
        Ok(field)
    }

    /// `M N`, the number of rows and columns of the transfer matrix.
    pub fn width(&self) -> usize {
        self.repetitions * self.relays
    }
}

/// Every random quantity of one network realization, in draw order.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkDraw {
    field: Field,
    /// `coding[i][j]` is `A_{i+1, j+1}`, `M x MN`.
    pub coding: Vec<Vec<FqMatrix>>,
    /// `erasures[i][j][k]`: packet `k` into relay `j` of layer `i` survives.
    pub erasures: Vec<Vec<Vec<bool>>>,
    /// Survivals at the sink.
    pub sink: Vec<bool>,
}

/// Draws a realization: for each layer and relay the coding matrix (row
/// major) and then its erasure pattern, and finally the sink erasures.
pub fn draw_network<R: Rng + ?Sized>(config: &NetworkConfig, field: Field, rng: &mut R) -> NetworkDraw {
    let w = config.width();
    let survive = |rng: &mut R| -> Vec<bool> {
        (0..w).map(|_| rng.random::<f64>() >= config.erasure).collect()
    };
    let mut coding = Vec::with_capacity(config.layers);
    let mut erasures = Vec::with_capacity(config.layers);
    for _ in 0..config.layers {
        let mut a = Vec::with_capacity(config.relays);
        let mut e = Vec::with_capacity(config.relays);
        for _ in 0..config.relays {
            a.push(sample_uniform(config.repetitions, w, field, rng));
            e.push(survive(rng));
        }
        coding.push(a);
        erasures.push(e);
    }
    let sink = survive(rng);
    NetworkDraw {
        field,
        coding,
        erasures,
        sink,
    }
}

fn diagonal(field: Field, keep: &[bool]) -> FqMatrix {
    let mut d = FqMatrix::zeros(field, keep.len(), keep.len());
    for (i, &k) in keep.iter().enumerate() {
        if k {
            d.set(i, i, 1);
        }
    }
    d
}

impl NetworkDraw {
    /// Builds `A_i` (`MN x MN^2`) and `E_i` (`MN^2 x MN`) in full and
    /// multiplies everything out.
    pub fn assemble_naive(&self) -> FqMatrix {
        let f = self.field;
        let relays = self.coding[0].len();
        let reps = self.coding[0][0].rows();
        let w = reps * relays;
        let mut g = FqMatrix::identity(f, w);
        for (a_layer, e_layer) in self.coding.iter().zip(&self.erasures) {
            let mut a = FqMatrix::zeros(f, w, w * relays);
            for (j, block) in a_layer.iter().enumerate() {
                for r in 0..reps {
                    for c in 0..w {
                        a.set(j * reps + r, j * w + c, block.get(r, c));
                    }
                }
            }
            let mut e = diagonal(f, &e_layer[0]);
            for keep in &e_layer[1..] {
                e = e.vstack(&diagonal(f, keep)).expect("same width");
            }
            g = a.mul(&e).expect("conformal").mul(&g).expect("conformal");
        }
        diagonal(f, &self.sink).mul(&g).expect("conformal")
    }

    /// Same product, without materializing the `MN^2` intermediates:
    /// `A_i E_i` has row block `j` equal to `A_{i,j}` with the erased columns
    /// zeroed, and `E'` zeroes rows.
    pub fn assemble(&self) -> FqMatrix {
        let f = self.field;
        let relays = self.coding[0].len();
        let reps = self.coding[0][0].rows();
        let w = reps * relays;
        let mut g: Option<FqMatrix> = None;
        for (a_layer, e_layer) in self.coding.iter().zip(&self.erasures) {
            let mut step = FqMatrix::zeros(f, w, w);
            for (j, (block, keep)) in a_layer.iter().zip(e_layer).enumerate() {
                for r in 0..reps {
                    for (c, &k) in keep.iter().enumerate() {
                        if k {
                            step.set(j * reps + r, c, block.get(r, c));
                        }
                    }
                }
            }
            g = Some(match g {
                None => step,
                Some(prev) => step.mul(&prev).expect("square"),
            });
        }
        let mut g = g.expect("at least one layer");
        for (i, &k) in self.sink.iter().enumerate() {
            if !k {
                for c in 0..w {
                    g.set(i, c, 0);
                }
            }
        }
        g
    }
}

/// One draw of the end-to-end transfer matrix.
pub fn sample_transfer_matrix<R: Rng + ?Sized>(config: &NetworkConfig, rng: &mut R) -> Result<FqMatrix> {
    let field = config.validate()?;
    Ok(draw_network(config, field, rng).assemble())
}

/// Rank histogram of the transfer matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalRankDistribution {
    pub counts: Vec<u64>,
    pub trials: u64,
}

impl EmpiricalRankDistribution {
    pub fn max_rank(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.trials as f64)
            .collect()
    }

    pub fn distribution(&self) -> RankDistribution {
        RankDistribution::new(self.frequencies()).expect("histogram of a nonempty sample")
    }

    /// `sqrt(p(1 - p) / trials)` per rank.
    pub fn standard_errors(&self) -> Vec<f64> {
        self.frequencies()
            .iter()
            .map(|p| (p * (1.0 - p) / self.trials as f64).sqrt())
            .collect()
    }

    pub fn mean(&self) -> f64 {
        self.distribution().mean()
    }

    pub fn mean_standard_error(&self) -> f64 {
        let p = self.frequencies();
        let mean: f64 = p.iter().enumerate().map(|(r, p)| r as f64 * p).sum();
        let second: f64 = p.iter().enumerate().map(|(r, p)| (r * r) as f64 * p).sum();
        ((second - mean * mean).max(0.0) / self.trials as f64).sqrt()
    }
}

/// RNG for trial block `block`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

pub fn estimate_rank_distribution(config: &NetworkConfig) -> Result<EmpiricalRankDistribution> {
    let field = config.validate()?;
    let w = config.width();
    let blocks = config.trials.div_ceil(BLOCK_TRIALS);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(config.seed, b);
            let n = BLOCK_TRIALS.min(config.trials - b * BLOCK_TRIALS);
            let mut counts = vec![0u64; w + 1];
            for _ in 0..n {
                counts[draw_network(config, field, &mut rng).assemble().rank()] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; w + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(EmpiricalRankDistribution {
        counts,
        trials: config.trials,
    })
}

/// Which network parameter a sweep varies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    Erasure(Vec<f64>),
    Layers(Vec<usize>),
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Erasure(_) => "eps",
            SweepAxis::Layers(_) => "layers",
        }
    }

    fn configs(&self, base: &NetworkConfig) -> Vec<(f64, NetworkConfig)> {
        match self {
            SweepAxis::Erasure(values) => values
                .iter()
                .map(|&e| (e, NetworkConfig { erasure: e, ..*base }))
                .collect(),
            SweepAxis::Layers(values) => values
                .iter()
                .map(|&l| (l as f64, NetworkConfig { layers: l, ..*base }))
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            SweepAxis::Erasure(v) => v.is_empty(),
            SweepAxis::Layers(v) => v.is_empty(),
        }
    }
}

/// One grid point of a capacity sweep. Capacities are in q-ary symbols per
/// channel use.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub config: NetworkConfig,
    pub ranks: EmpiricalRankDistribution,
    pub capacity: CapacityResult,
    /// Delta-method standard error of `capacity.capacity`.
    pub capacity_se: f64,
    /// `l E[r]`, the capacity with the transfer matrix known at the receiver.
    pub coherent_upper_bound: f64,
    /// `E[r]`, the per-packet limit as `l` grows.
    pub asymptotic_packet: f64,
}

/// Estimates the rank distribution at each grid point (every point uses the
/// base seed) and computes the u.g.r. capacity for packet length `l`.
pub fn capacity_sweep(
    base: &NetworkConfig,
    axis: &SweepAxis,
    l: usize,
    optimizer: &OptimizerConfig,
) -> Result<Vec<SweepRow>> {
    if axis.is_empty() {
        return Err(Error::InvalidNetwork("empty sweep grid".into()));
    }
    let mut rows = Vec::new();
    for (value, config) in axis.configs(base) {
        let ranks = estimate_rank_distribution(&config)?;
        let w = config.width();
        let dims = ChannelDims::new(config.q as u64, w, w, l)?;
        let dist = ranks.distribution();
        let capacity = ugr_capacity(dims, &dist, optimizer)?;
        let capacity_se = capacity_standard_error(dims, &ranks, capacity.capacity, optimizer)?;
        let asymptotic = asymptotic_packet_length(&dims, &dist);
        rows.push(SweepRow {
            value,
            config,
            coherent_upper_bound: l as f64 * dist.mean(),
            asymptotic_packet: asymptotic.value,
            ranks,
            capacity,
            capacity_se,
        });
    }
    Ok(rows)
}

fn ugr_capacity(dims: ChannelDims, dist: &RankDistribution, optimizer: &OptimizerConfig) -> Result<CapacityResult> {
    let kernel = RankKernel::new(dims, dist)?;
    CapacityModel::new(&kernel).optimize(optimizer)
}

/// Multinomial delta method: with `d_r` the directional derivative of the
/// capacity towards rank `r`, `Var = (sum p_r d_r^2 - (sum p_r d_r)^2) / T`.
fn capacity_standard_error(
    dims: ChannelDims,
    ranks: &EmpiricalRankDistribution,
    at: f64,
    optimizer: &OptimizerConfig,
) -> Result<f64> {
    const STEP: f64 = 1e-4;
    let p = ranks.frequencies();
    let mut first = 0.0;
    let mut second = 0.0;
    for r in 0..p.len() {
        if p[r] == 0.0 {
            continue;
        }
        let moved: Vec<f64> = p
            .iter()
            .enumerate()
            .map(|(k, &x)| (1.0 - STEP) * x + if k == r { STEP } else { 0.0 })
            .collect();
        let c = ugr_capacity(dims, &RankDistribution::new(moved)?, optimizer)?.capacity;
        let d = (c - at) / STEP;
        first += p[r] * d;
        second += p[r] * d * d;
    }
    Ok(((second - first * first).max(0.0) / ranks.trials as f64).sqrt())
}
