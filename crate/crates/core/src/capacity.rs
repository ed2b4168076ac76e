//! Mutual information and capacity of the uniform-given-rank matrix channel.
//!
//! All information quantities are in base `q` (q-ary symbols per channel
//! use). Capacity-achieving inputs can be taken uniform given their rank, so
//! the optimization runs over the `n + 1` input-rank probabilities only.

use serde::Serialize;

use crate::enumeration::{count_rank_class, gaussian_binomial, ln_big};
use crate::error::{Error, Result};
use crate::rank_channel::{ChannelDims, RankDistribution, RankKernel};

/// Optimizer settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Stop once the capacity bracket is narrower than this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CapacityResult {
    pub capacity: f64,
    pub optimal_pu: RankDistribution,
    pub iterations: usize,
    /// `max_u reward(u) - I*(p_u)` at the returned input; an upper bound on
    /// how far `capacity` is below the true capacity.
    pub convergence_gap: f64,
    pub converged: bool,
    pub h: Vec<f64>,
    pub per_rank_capacity: Vec<f64>,
    pub u_star: usize,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

/// Best constant-rank input and the capacity bracket it certifies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantRankSummary {
    pub u_star: usize,
    pub capacity: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

/// Per-kernel quantities reused across evaluations.
#[derive(Debug, Clone)]
pub struct CapacityModel<'a> {
    kernel: &'a RankKernel,
    ln_q: f64,
    // log_q |T_v(F_q^{m x l})|
    log_output_class: Vec<f64>,
    h: Vec<f64>,
    constant_rank: Vec<f64>,
}

impl<'a> CapacityModel<'a> {
    pub fn new(kernel: &'a RankKernel) -> Self {
        let d = *kernel.dims();
        let q = d.q();
        let ln_q = (q as f64).ln();
        let log_output_class = (0..=d.max_rank())
            .map(|v| ln_big(&count_rank_class(d.m(), d.l(), v, q)) / ln_q)
            .collect();
        let h = (0..=d.n())
            .map(|u| {
                kernel
                    .row(u)
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(v, &p)| p * (ln_big(&count_rank_class(d.m(), u, v, q)) / ln_q - p.ln() / ln_q))
                    .sum()
            })
            .collect();
        let constant_rank = (0..=d.n())
            .map(|u| {
                kernel
                    .row(u)
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(v, &p)| {
                        let num = ln_big(&gaussian_binomial(d.l() as i64, v as i64, q));
                        let den = ln_big(&gaussian_binomial(u as i64, v as i64, q));
                        p * (num - den) / ln_q
                    })
                    .sum()
            })
            .collect();
        Self {
            kernel,
            ln_q,
            log_output_class,
            h,
            constant_rank,
        }
    }

    pub fn dims(&self) -> &ChannelDims {
        self.kernel.dims()
    }

    /// `h_u`, the output entropy given any fixed rank-`u` input.
    pub fn h(&self) -> &[f64] {
        &self.h
    }

    /// `C_u`, the capacity with inputs restricted to rank `u`.
    pub fn constant_rank(&self) -> &[f64] {
        &self.constant_rank
    }

    fn output_dist(&self, pu: &[f64]) -> Vec<f64> {
        let k = self.dims().max_rank();
        let mut pv = vec![0.0; k + 1];
        for (u, &p) in pu.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (o, &t) in pv.iter_mut().zip(self.kernel.row(u)) {
                *o += p * t;
            }
        }
        pv
    }

    /// `I*(p_u) = sum_v p_v log_q(|T_v(F_q^{m x l})| / p_v) - sum_u p_u h_u`.
    pub fn mutual_information(&self, pu: &[f64]) -> f64 {
        let pv = self.output_dist(pu);
        let out: f64 = pv
            .iter()
            .zip(&self.log_output_class)
            .filter(|(&p, _)| p > 0.0)
            .map(|(&p, &lc)| p * (lc - p.ln() / self.ln_q))
            .sum();
        let cond: f64 = pu.iter().zip(&self.h).map(|(p, h)| p * h).sum();
        out - cond
    }

    /// Splits `I*(p_u)` into `sum_u p_u C_u` and `I(u; v)`.
    pub fn decomposition(&self, pu: &[f64]) -> (f64, f64) {
        let pv = self.output_dist(pu);
        let weighted: f64 = pu.iter().zip(&self.constant_rank).map(|(p, c)| p * c).sum();
        let rank_info: f64 = pu
            .iter()
            .enumerate()
            .map(|(u, &p)| p * self.divergence(u, &pv))
            .sum();
        (weighted, rank_info)
    }

    /// `D(p(.|u) || p_v)` in base q.
    fn divergence(&self, u: usize, pv: &[f64]) -> f64 {
        self.kernel
            .row(u)
            .iter()
            .zip(pv)
            .filter(|(&p, _)| p > 0.0)
            .map(|(&p, &o)| p * (p / o.max(f64::MIN_POSITIVE)).ln())
            .sum::<f64>()
            / self.ln_q
    }

    pub fn constant_rank_summary(&self) -> ConstantRankSummary {
        let (u_star, &best) = self
            .constant_rank
            .iter()
            .enumerate()
            .fold((0, &self.constant_rank[0]), |acc, (u, c)| if *c > *acc.1 { (u, c) } else { acc });
        let d = self.dims();
        ConstantRankSummary {
            u_star,
            capacity: best,
            lower_bound: best,
            upper_bound: best + ((d.max_rank() + 1) as f64).ln() / self.ln_q,
        }
    }

    /// Maximizes `I*` over the input-rank simplex.
    ///
    /// Blahut-Arimoto on the rank channel with per-input reward `C_u`: the
    /// update is `p(u) <- p(u) q^{C_u + D(p(.|u) || p_v)}`, normalized. The
    /// quantity `max_u [C_u + D_u] - I*(p_u)` bounds the distance to capacity
    /// and is the stopping criterion. Starts from the uniform input.
    pub fn optimize(&self, config: &OptimizerConfig) -> Result<CapacityResult> {
        if !(config.tol > 0.0) {
            return Err(Error::OutOfRange(format!("tolerance must be positive, got {}", config.tol)));
        }
        let n = self.dims().n();
        let summary = self.constant_rank_summary();

        // All rows equal: the input rank carries no information and the best
        // constant rank is optimal.
        let row0 = self.kernel.row(0);
        let degenerate = (1..=n).all(|u| {
            self.kernel
                .row(u)
                .iter()
                .zip(row0)
                .all(|(a, b)| (a - b).abs() < 1e-15)
        });
        if degenerate {
            return Ok(self.result(
                RankDistribution::point(summary.u_star, n),
                summary.capacity,
                0,
                0.0,
                true,
                summary,
            ));
        }

        let mut pu = vec![1.0 / (n + 1) as f64; n + 1];
        let mut reward = vec![0.0; n + 1];
        let mut info = 0.0;
        let mut gap = f64::INFINITY;
        let mut iterations = 0;
        while iterations < config.max_iter {
            iterations += 1;
            let pv = self.output_dist(&pu);
            for (u, r) in reward.iter_mut().enumerate() {
                *r = self.constant_rank[u] + self.divergence(u, &pv);
            }
            info = pu.iter().zip(&reward).map(|(p, r)| p * r).sum();
            let best = reward.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            gap = best - info;
            if gap < config.tol {
                break;
            }
            let mut total = 0.0;
            for (p, r) in pu.iter_mut().zip(&reward) {
                *p *= ((r - best) * self.ln_q).exp();
                total += *p;
            }
            pu.iter_mut().for_each(|p| *p /= total);
        }
        let converged = gap < config.tol;
        let optimal = RankDistribution::new(pu).expect("normalized iterate");
        let result = self.result(optimal, info, iterations, gap, converged, summary);
        if converged {
            Ok(result)
        } else {
            Err(Error::NotConverged(Box::new(result)))
        }
    }

    fn result(
        &self,
        optimal_pu: RankDistribution,
        capacity: f64,
        iterations: usize,
        gap: f64,
        converged: bool,
        summary: ConstantRankSummary,
    ) -> CapacityResult {
        CapacityResult {
            capacity,
            optimal_pu,
            iterations,
            convergence_gap: gap,
            converged,
            h: self.h.clone(),
            per_rank_capacity: self.constant_rank.clone(),
            u_star: summary.u_star,
            lower_bound: summary.lower_bound,
            upper_bound: summary.upper_bound,
        }
    }
}

pub fn h_u(kernel: &RankKernel, u: usize) -> f64 {
    CapacityModel::new(kernel).h[u]
}

pub fn constant_rank_capacity(kernel: &RankKernel, u: usize) -> f64 {
    CapacityModel::new(kernel).constant_rank[u]
}

/// `I*(p_u)` for an input that is uniform given its rank.
pub fn mutual_information(kernel: &RankKernel, pu: &RankDistribution) -> Result<f64> {
    let pu = pu.resized(kernel.dims().n())?;
    Ok(CapacityModel::new(kernel).mutual_information(pu.probs()))
}

/// `(sum_u p_u C_u, I(u; v))`; the two parts add up to `I*(p_u)`.
pub fn mutual_information_decomposition(
    kernel: &RankKernel,
    pu: &RankDistribution,
) -> Result<(f64, f64)> {
    let pu = pu.resized(kernel.dims().n())?;
    Ok(CapacityModel::new(kernel).decomposition(pu.probs()))
}

pub fn constant_rank_summary(kernel: &RankKernel) -> ConstantRankSummary {
    CapacityModel::new(kernel).constant_rank_summary()
}

pub fn optimize_capacity(kernel: &RankKernel, config: &OptimizerConfig) -> Result<CapacityResult> {
    CapacityModel::new(kernel).optimize(config)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AsymptoticRegime {
    PacketLength,
    FieldSize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticResult {
    pub regime: AsymptoticRegime,
    pub value: f64,
    pub optimal_u: usize,
}

/// Limit of `C / l` as `l` grows, in packets per channel use: the mean
/// transfer rank, reached with full-rank input.
pub fn asymptotic_packet_length(dims: &ChannelDims, rank_dist: &RankDistribution) -> AsymptoticResult {
    AsymptoticResult {
        regime: AsymptoticRegime::PacketLength,
        value: rank_dist.mean(),
        optimal_u: dims.n(),
    }
}

/// Limit of `C` as `q` grows, for the limiting transfer-rank distribution:
/// `max_u (l - u) sum_r p(r) min(u, r)`, smallest maximizer reported.
pub fn asymptotic_field_size(dims: &ChannelDims, limit_rank_dist: &RankDistribution) -> AsymptoticResult {
    let l = dims.l() as f64;
    let mut best = (0, f64::NEG_INFINITY);
    for u in 0..=dims.n() {
        let mean_min: f64 = limit_rank_dist
            .probs()
            .iter()
            .enumerate()
            .map(|(r, p)| p * r.min(u) as f64)
            .sum();
        let value = (l - u as f64) * mean_min;
        if value > best.1 {
            best = (u, value);
        }
    }
    AsymptoticResult {
        regime: AsymptoticRegime::FieldSize,
        value: best.1,
        optimal_u: best.0,
    }
}
