use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::{product_index, row_images, MatrixSpace, TransferDist, DEFAULT_CAP};
use crate::enumeration::{count_full_rank, count_rank_class, ln_big};
use crate::error::{Error, Result};
use crate::gf::Field;

/// Exact law of the two-relay, one-layer transfer matrix
/// `G = [[e5 a1 e1, e5 a2 e2], [e6 a3 e3, e6 a4 e4]]` over `F_2`, where each
/// `e_i` is 0 with probability `eps` and each `a_i` is a fair bit.
pub fn example2_transfer_dist(eps: &BigRational) -> Result<TransferDist> {
    if eps < &BigRational::zero() || eps > &BigRational::one() {
        return Err(Error::OutOfRange(format!("erasure probability {eps} outside [0, 1]")));
    }
    let f = Field::new(2)?;
    let space = MatrixSpace::new(f, 2, 2, DEFAULT_CAP)?;
    let keep = BigRational::one() - eps;
    let coin = BigRational::new(BigInt::from(1), BigInt::from(16));
    let mut probs = vec![BigRational::zero(); 16];
    for bits in 0u32..1 << 10 {
        let e = |i: u32| (bits >> (i - 1)) & 1;
        let a = |i: u32| (bits >> (i + 5)) & 1;
        let mut w = coin.clone();
        for i in 1..=6 {
            w *= if e(i) == 1 { &keep } else { eps };
        }
        if w.is_zero() {
            continue;
        }
        let g = [
            e(5) & a(1) & e(1),
            e(5) & a(2) & e(2),
            e(6) & a(3) & e(3),
            e(6) & a(4) & e(4),
        ];
        let idx = g.iter().rev().fold(0usize, |s, &b| s * 2 + b as usize);
        probs[idx] += w;
    }
    TransferDist::new(space, probs)
}

fn general_linear(field: Field, k: usize, gl_cap: u64) -> Result<Vec<u64>> {
    let q = field.order() as u64;
    let order = count_full_rank(k, k, q)?;
    let order = order.to_u64().unwrap_or(u64::MAX);
    if order > gl_cap {
        return Err(Error::CapExceeded {
            what: format!("GL({k}, {q})"),
            needed: order as u128,
            cap: gl_cap as u128,
        });
    }
    let space = MatrixSpace::new(field, k, k, u64::MAX)?;
    Ok((0..space.size())
        .filter(|&i| space.matrix(i).rank() == k)
        .collect())
}

/// Exact law of `T1 G T2` with `T1`, `T2` uniform on `GL(m, q)` and
/// `GL(n, q)`, by summing over every pair.
pub fn randomize_channel(dist: &TransferDist, gl_cap: u64) -> Result<TransferDist> {
    let space = *dist.space();
    let field = space.field();
    let (m, n) = (space.rows(), space.cols());
    let left = general_linear(field, m, gl_cap)?;
    let right = general_linear(field, n, gl_cap)?;
    let mspace = MatrixSpace::new(field, m, m, u64::MAX)?;
    let nspace = MatrixSpace::new(field, n, n, u64::MAX)?;
    let right_images: Vec<Vec<u64>> = right.iter().map(|&t| row_images(&nspace.matrix(t))).collect();
    let n_radix = space.row_radix();
    let pairs = BigRational::from_integer(BigInt::from(left.len() as u64 * right.len() as u64));

    let mut probs = vec![BigRational::zero(); space.size() as usize];
    for (g, p) in dist.support() {
        let gm = space.matrix(g);
        let mut hits: HashMap<u64, u64> = HashMap::new();
        for &t1 in &left {
            let a = mspace.matrix(t1).mul(&gm)?.to_index();
            for images in &right_images {
                *hits.entry(product_index(a, n_radix, m, images, n_radix)).or_default() += 1;
            }
        }
        let share = p / &pairs;
        for (h, count) in hits {
            probs[h as usize] += &share * BigRational::from_integer(BigInt::from(count));
        }
    }
    TransferDist::new(space, probs)
}

/// Entropy of a matrix distribution against the largest entropy allowed by
/// its rank marginal, both in base `q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyBound {
    pub entropy: f64,
    pub bound: f64,
    pub is_ugr: bool,
    /// `entropy` and `bound` agree within 1e-12.
    pub equality: bool,
}

pub fn entropy_bound_check(dist: &TransferDist) -> EntropyBound {
    let space = dist.space();
    let q = space.field().order() as u64;
    let ln_q = (q as f64).ln();
    let entropy = -dist
        .support()
        .map(|(_, p)| {
            let p = p.to_f64().unwrap_or(0.0);
            p * p.ln()
        })
        .sum::<f64>()
        / ln_q;
    let bound = dist
        .rank_marginal()
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.is_zero())
        .map(|(k, p)| {
            let p = p.to_f64().unwrap_or(0.0);
            p * (ln_big(&count_rank_class(space.rows(), space.cols(), k, q)) - p.ln())
        })
        .sum::<f64>()
        / ln_q;
    EntropyBound {
        entropy,
        bound,
        is_ugr: dist.is_ugr(),
        equality: (bound - entropy).abs() < 1e-12,
    }
}
