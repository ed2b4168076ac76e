//! Brute-force ground truth for tiny instances.
//!
//! Nothing here uses the closed forms of [`crate::rank_channel`] or
//! [`crate::capacity`] to produce its answers; every table is built by
//! enumerating matrices. Distributions are exact rationals and floats only
//! appear when entropies or capacities are evaluated.
//!
//! Matrices are addressed by the mixed-radix index documented in
//! [`crate::gf`]. Alphabet sizes are bounded by explicit caps and exceeding a
//! cap is an error.

mod channel;
mod network;
mod verify;

pub use channel::{
    build_explicit_channel, build_subspace_channel, exact_capacity, ugr_input_distribution,
    ExactCapacity, ExplicitChannel, SubspaceChannel,
};
pub use network::{entropy_bound_check, example2_transfer_dist, randomize_channel, EntropyBound};
pub use verify::{count_solutions, verify_lemma_counts, verify_rank_kernel, Check, VerificationReport};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::enumeration::count_rank_class;
use crate::error::{Error, Result};
use crate::gf::{Field, FqMatrix};

/// Default bound on the number of matrices in any enumerated alphabet.
pub const DEFAULT_CAP: u64 = 1 << 16;

/// Default bound on `|GL(k, q)|` for each side of the randomization.
pub const DEFAULT_GL_CAP: u64 = 10_000;

/// All matrices of `F_q^{rows x cols}`, addressed by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatrixSpace {
    field: Field,
    rows: usize,
    cols: usize,
    size: u64,
}

impl MatrixSpace {
    pub fn new(field: Field, rows: usize, cols: usize, cap: u64) -> Result<Self> {
        let needed = (field.order() as u128).checked_pow((rows * cols) as u32);
        match needed {
            Some(size) if size <= cap as u128 => Ok(Self {
                field,
                rows,
                cols,
                size: size as u64,
            }),
            _ => Err(Error::CapExceeded {
                what: format!("F_{}^({rows}x{cols})", field.order()),
                needed: needed.unwrap_or(u128::MAX),
                cap: cap as u128,
            }),
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn matrix(&self, index: u64) -> FqMatrix {
        FqMatrix::from_index(self.field, self.rows, self.cols, index)
    }

    pub fn iter(&self) -> impl Iterator<Item = FqMatrix> + '_ {
        (0..self.size).map(|i| self.matrix(i))
    }

    /// Rank of every matrix, by index.
    pub fn rank_table(&self) -> Vec<u8> {
        self.iter().map(|m| m.rank() as u8).collect()
    }

    /// Number of distinct rows, `q^cols`.
    fn row_radix(&self) -> u64 {
        (self.field.order() as u64).pow(self.cols as u32)
    }
}

/// For every row vector `w` of length `x.rows()` (by index), the index of `wX`.
pub(crate) fn row_images(x: &FqMatrix) -> Vec<u64> {
    let f = x.field();
    let q = f.order() as u64;
    let count = q.pow(x.rows() as u32);
    let mut out = Vec::with_capacity(count as usize);
    let mut acc = vec![0u32; x.cols()];
    for w in 0..count {
        acc.iter_mut().for_each(|a| *a = 0);
        let mut rest = w;
        for i in 0..x.rows() {
            let c = (rest % q) as u32;
            rest /= q;
            if c != 0 {
                for (a, &xe) in acc.iter_mut().zip(x.row(i)) {
                    *a = f.add(*a, f.mul(c, xe));
                }
            }
        }
        let idx = acc.iter().rev().fold(0u64, |s, &a| s * q + a as u64);
        out.push(idx);
    }
    out
}

/// Index of `GX`, where `g` indexes `G` (rows of `n_radix` values) and
/// `images` comes from [`row_images`] of `X`.
#[inline]
pub(crate) fn product_index(mut g: u64, n_radix: u64, rows: usize, images: &[u64], l_radix: u64) -> u64 {
    let mut y = 0;
    let mut weight = 1;
    for _ in 0..rows {
        y += images[(g % n_radix) as usize] * weight;
        g /= n_radix;
        weight *= l_radix;
    }
    y
}

/// An explicit transfer-matrix distribution over `F_q^{rows x cols}` with
/// exact rational probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferDist {
    space: MatrixSpace,
    probs: Vec<BigRational>,
}

impl TransferDist {
    pub fn new(space: MatrixSpace, probs: Vec<BigRational>) -> Result<Self> {
        if probs.len() as u64 != space.size {
            return Err(Error::DimensionMismatch(format!(
                "{} probabilities for {} matrices",
                probs.len(),
                space.size
            )));
        }
        if probs.iter().any(|p| p < &BigRational::zero()) {
            return Err(Error::InvalidDistribution("negative probability".into()));
        }
        let total: BigRational = probs.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!(
                "transfer probabilities sum to {total}"
            )));
        }
        Ok(Self { space, probs })
    }

    /// Point mass at `g`.
    pub fn point(g: &FqMatrix) -> Result<Self> {
        let space = MatrixSpace::new(g.field(), g.rows(), g.cols(), DEFAULT_CAP)?;
        let mut probs = vec![BigRational::zero(); space.size as usize];
        probs[g.to_index() as usize] = BigRational::one();
        Ok(Self { space, probs })
    }

    /// Uniform given rank, with the given exact rank probabilities.
    pub fn ugr(space: MatrixSpace, rank_probs: &[BigRational]) -> Result<Self> {
        let q = space.field.order() as u64;
        let ranks = space.rank_table();
        let mut per_matrix = Vec::with_capacity(rank_probs.len());
        for (r, p) in rank_probs.iter().enumerate() {
            let class = count_rank_class(space.rows, space.cols, r, q);
            if class.is_zero() {
                if !p.is_zero() {
                    return Err(Error::InvalidDistribution(format!(
                        "rank {r} impossible for {}x{} matrices",
                        space.rows, space.cols
                    )));
                }
                per_matrix.push(BigRational::zero());
            } else {
                per_matrix.push(p / BigRational::from_integer(BigInt::from(class)));
            }
        }
        let probs = ranks
            .iter()
            .map(|&r| per_matrix.get(r as usize).cloned().unwrap_or_else(BigRational::zero))
            .collect();
        Self::new(space, probs)
    }

    pub fn space(&self) -> &MatrixSpace {
        &self.space
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn prob(&self, index: u64) -> &BigRational {
        &self.probs[index as usize]
    }

    /// Nonzero entries as `(matrix index, probability)`.
    pub fn support(&self) -> impl Iterator<Item = (u64, &BigRational)> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(i, p)| (i as u64, p))
    }

    pub fn rank_marginal(&self) -> Vec<BigRational> {
        let ranks = self.space.rank_table();
        let mut out = vec![BigRational::zero(); self.space.rows.min(self.space.cols) + 1];
        for (p, &r) in self.probs.iter().zip(&ranks) {
            out[r as usize] += p;
        }
        out
    }

    /// Exactly constant on every rank class.
    pub fn is_ugr(&self) -> bool {
        let ranks = self.space.rank_table();
        let mut seen: Vec<Option<&BigRational>> = vec![None; self.space.rows.min(self.space.cols) + 1];
        for (p, &r) in self.probs.iter().zip(&ranks) {
            match seen[r as usize] {
                None => seen[r as usize] = Some(p),
                Some(first) if first != p => return false,
                Some(_) => {}
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn space_cap_is_enforced() {
        let f = Field::new(2).unwrap();
        assert!(MatrixSpace::new(f, 4, 4, 1 << 16).is_ok());
        let err = MatrixSpace::new(f, 4, 5, 1 << 16).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { needed, .. } if needed == 1 << 20));
    }

    #[test]
    fn transfer_dist_validation() {
        let f = Field::new(2).unwrap();
        let space = MatrixSpace::new(f, 1, 1, DEFAULT_CAP).unwrap();
        assert!(TransferDist::new(space, vec![rat(1, 2), rat(1, 3)]).is_err());
        assert!(TransferDist::new(space, vec![rat(1, 2)]).is_err());
        assert!(TransferDist::new(space, vec![rat(3, 2), rat(-1, 2)]).is_err());
        assert!(TransferDist::new(space, vec![rat(1, 2), rat(1, 2)]).is_ok());
    }

    #[test]
    fn ugr_dist_is_ugr_with_requested_marginal() {
        let f = Field::new(3).unwrap();
        let space = MatrixSpace::new(f, 2, 2, DEFAULT_CAP).unwrap();
        let marginal = vec![rat(1, 5), rat(1, 5), rat(3, 5)];
        let d = TransferDist::ugr(space, &marginal).unwrap();
        assert!(d.is_ugr());
        assert_eq!(d.rank_marginal(), marginal);
        let g = FqMatrix::from_rows(f, &[[1u32, 0], [0, 0]]).unwrap();
        let p = TransferDist::point(&g).unwrap();
        assert!(!p.is_ugr());
        assert_eq!(p.rank_marginal(), vec![rat(0, 1), rat(1, 1), rat(0, 1)]);
    }

    #[test]
    fn product_index_agrees_with_multiplication() {
        let f = Field::new(3).unwrap();
        let gs = MatrixSpace::new(f, 2, 3, DEFAULT_CAP).unwrap();
        let xs = MatrixSpace::new(f, 3, 2, DEFAULT_CAP).unwrap();
        for x in (0..xs.size()).step_by(37) {
            let xm = xs.matrix(x);
            let images = row_images(&xm);
            for g in (0..gs.size()).step_by(13) {
                let y = product_index(g, 27, 2, &images, 9);
                assert_eq!(y, gs.matrix(g).mul(&xm).unwrap().to_index());
            }
        }
    }
}
