//! Dense linear algebra over prime fields.
//!
//! Entries are stored as residues in `[0, q)` in row-major order. Over `F_2`
//! with at most 64 columns, rank is computed on bit-packed rows; every other
//! case goes through the generic elimination path.
//!
//! Matrices can be mapped to and from a mixed-radix integer index: the entry
//! at row-major position `k` (that is, `k = i * cols + j`) is the base-`q`
//! digit of weight `q^k`. Entry `(0, 0)` is therefore the least significant
//! digit. Row vectors use the same convention, so the index of a matrix is
//! `sum_i row_index(i) * q^(cols * i)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rank_channel::RankDistribution;

/// A prime field `F_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Field {
    q: u32,
}

impl Field {
    pub fn new(q: u32) -> Result<Self> {
        if q < 2 {
            return Err(Error::FieldTooSmall(q as u64));
        }
        if !is_prime(q as u64) {
            return Err(Error::NotPrime(q as u64));
        }
        Ok(Self { q })
    }

    #[inline]
    pub fn order(self) -> u32 {
        self.q
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.q as u64) as u32
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        ((a as u64 + (self.q - b) as u64) % self.q as u64) as u32
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.q as u64) as u32
    }

    pub fn pow(self, mut base: u32, mut exp: u64) -> u32 {
        let mut acc = 1 % self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(self, a: u32) -> Option<u32> {
        if a.is_multiple_of(self.q) {
            None
        } else {
            Some(self.pow(a, self.q as u64 - 2))
        }
    }
}

impl TryFrom<u32> for Field {
    type Error = Error;

    fn try_from(q: u32) -> Result<Self> {
        Field::new(q)
    }
}

impl From<Field> for u32 {
    fn from(f: Field) -> u32 {
        f.q
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// A dense `rows x cols` matrix over a prime field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FqMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl FqMatrix {
    pub fn new(field: Field, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(&value) = data.iter().find(|&&e| e >= field.order()) {
            return Err(Error::EntryOutOfRange {
                value,
                q: field.order(),
            });
        }
        Ok(Self {
            field,
            rows,
            cols,
            data,
        })
    }

    /// Builds a matrix from nested rows. All rows must have equal length.
    pub fn from_rows<R: AsRef<[u32]>>(field: Field, rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch("ragged rows".into()));
            }
            data.extend_from_slice(r);
        }
        Self::new(field, rows.len(), cols, data)
    }

    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    #[inline]
    pub fn field(&self) -> Field {
        self.field
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn entries(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: u32) {
        assert!(value < self.field.order(), "entry out of range");
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &FqMatrix) -> Result<FqMatrix> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.order(), other.field.order()));
        }
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let q = self.field.order() as u64;
        let mut out = vec![0u32; self.rows * other.cols];
        let mut acc = vec![0u64; other.cols];
        for i in 0..self.rows {
            acc.iter_mut().for_each(|a| *a = 0);
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k] as u64;
                if a == 0 {
                    continue;
                }
                let brow = other.row(k);
                for (acc_j, &b) in acc.iter_mut().zip(brow) {
                    *acc_j = (*acc_j + a * b as u64) % q;
                }
            }
            for (o, &a) in out[i * other.cols..(i + 1) * other.cols].iter_mut().zip(&acc) {
                *o = a as u32;
            }
        }
        Ok(FqMatrix {
            field: self.field,
            rows: self.rows,
            cols: other.cols,
            data: out,
        })
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &FqMatrix) -> Result<FqMatrix> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.order(), other.field.order()));
        }
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot stack {} columns on {} columns",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(FqMatrix {
            field: self.field,
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// The leftmost `cols` columns.
    pub fn left_columns(&self, cols: usize) -> FqMatrix {
        assert!(cols <= self.cols);
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(&self.row(i)[..cols]);
        }
        FqMatrix {
            field: self.field,
            rows: self.rows,
            cols,
            data,
        }
    }

    pub fn rank(&self) -> usize {
        if self.field.order() == 2 && self.cols <= 64 {
            rank_gf2_packed(&self.pack_gf2())
        } else {
            self.rank_generic()
        }
    }

    /// Rank by forward elimination over `F_q`, without the bit-packed shortcut.
    pub fn rank_generic(&self) -> usize {
        let mut a = self.data.clone();
        forward_eliminate(self.field, &mut a, self.rows, self.cols).len()
    }

    /// Reduced row-echelon form and the pivot columns.
    pub fn rref(&self) -> (FqMatrix, Vec<usize>) {
        let f = self.field;
        let (rows, cols) = (self.rows, self.cols);
        let mut a = self.data.clone();
        let pivots = forward_eliminate(f, &mut a, rows, cols);
        // back substitution; pivot rows are already normalized
        for (prow, &pcol) in pivots.iter().enumerate().rev() {
            for r in 0..prow {
                let factor = a[r * cols + pcol];
                if factor == 0 {
                    continue;
                }
                for c in pcol..cols {
                    let v = f.mul(factor, a[prow * cols + c]);
                    a[r * cols + c] = f.sub(a[r * cols + c], v);
                }
            }
        }
        (
            FqMatrix {
                field: f,
                rows,
                cols,
                data: a,
            },
            pivots,
        )
    }

    pub fn row_space(&self) -> Subspace {
        let (echelon, pivots) = self.rref();
        let dim = pivots.len();
        let basis = FqMatrix {
            field: self.field,
            rows: dim,
            cols: self.cols,
            data: echelon.data[..dim * self.cols].to_vec(),
        };
        Subspace {
            ambient_dim: self.cols,
            basis,
        }
    }

    /// Mixed-radix index of this matrix (see the module docs).
    ///
    /// Panics if `q^(rows*cols)` does not fit in a `u64`.
    pub fn to_index(&self) -> u64 {
        let q = self.field.order() as u64;
        let mut idx: u64 = 0;
        for &e in self.data.iter().rev() {
            idx = idx
                .checked_mul(q)
                .and_then(|v| v.checked_add(e as u64))
                .expect("matrix index overflows u64");
        }
        idx
    }

    pub fn from_index(field: Field, rows: usize, cols: usize, mut index: u64) -> FqMatrix {
        let q = field.order() as u64;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            data.push((index % q) as u32);
            index /= q;
        }
        debug_assert_eq!(index, 0, "index out of range for the matrix space");
        FqMatrix {
            field,
            rows,
            cols,
            data,
        }
    }

    fn pack_gf2(&self) -> Vec<u64> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (j, &e)| acc | ((e as u64) << j))
            })
            .collect()
    }
}

/// Brings `a` to row-echelon form with unit pivots and returns pivot columns.
fn forward_eliminate(f: Field, a: &mut [u32], rows: usize, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut prow = 0;
    for col in 0..cols {
        if prow == rows {
            break;
        }
        let Some(p) = (prow..rows).find(|&r| a[r * cols + col] != 0) else {
            continue;
        };
        if p != prow {
            for c in 0..cols {
                a.swap(p * cols + c, prow * cols + c);
            }
        }
        let inv = f.inv(a[prow * cols + col]).expect("pivot is nonzero");
        for c in col..cols {
            a[prow * cols + c] = f.mul(a[prow * cols + c], inv);
        }
        for r in prow + 1..rows {
            let factor = a[r * cols + col];
            if factor == 0 {
                continue;
            }
            for c in col..cols {
                let v = f.mul(factor, a[prow * cols + c]);
                a[r * cols + c] = f.sub(a[r * cols + c], v);
            }
        }
        pivots.push(col);
        prow += 1;
    }
    pivots
}

/// Rank of a set of GF(2) row vectors packed into words.
pub fn rank_gf2_packed(rows: &[u64]) -> usize {
    let mut basis = [0u64; 64];
    let mut rank = 0;
    for &row in rows {
        let mut v = row;
        while v != 0 {
            let h = 63 - v.leading_zeros() as usize;
            if basis[h] == 0 {
                basis[h] = v;
                rank += 1;
                break;
            }
            v ^= basis[h];
        }
    }
    rank
}

/// A subspace of `F_q^ambient_dim`, held as its reduced row-echelon basis.
///
/// Because the basis is canonical, structural equality is equality of
/// subspaces.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient_dim: usize,
    basis: FqMatrix,
}

impl Subspace {
    pub fn zero(field: Field, ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: FqMatrix::zeros(field, 0, ambient_dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.rows
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &FqMatrix {
        &self.basis
    }

    /// `self ⊆ other`.
    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        if self.ambient_dim != other.ambient_dim || self.basis.field != other.basis.field {
            return false;
        }
        if self.dim() > other.dim() {
            return false;
        }
        let stacked = other
            .basis
            .vstack(&self.basis)
            .expect("same ambient dimension");
        stacked.rank() == other.dim()
    }
}

pub fn sample_uniform<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    field: Field,
    rng: &mut R,
) -> FqMatrix {
    let q = field.order();
    let data = (0..rows * cols).map(|_| rng.random_range(0..q)).collect();
    FqMatrix {
        field,
        rows,
        cols,
        data,
    }
}

/// Uniform over the full-rank `rows x cols` matrices, by rejection.
pub fn sample_full_rank<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    field: Field,
    rng: &mut R,
) -> FqMatrix {
    let target = rows.min(cols);
    loop {
        let m = sample_uniform(rows, cols, field, rng);
        if m.rank() == target {
            return m;
        }
    }
}

/// Uniform over `GL(n, q)`.
pub fn sample_invertible<R: Rng + ?Sized>(n: usize, field: Field, rng: &mut R) -> FqMatrix {
    sample_full_rank(n, n, field, rng)
}

/// Draws a rank from `rank_dist`, then a matrix uniform over that rank class.
///
/// A rank-`k` matrix is produced as `B * C` with `B` uniform full-rank
/// `rows x k` and `C` uniform full-rank `k x cols`; every rank-`k` matrix has
/// exactly `|GL(k, q)|` such factorizations, so the product is uniform.
pub fn sample_ugr<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    field: Field,
    rank_dist: &RankDistribution,
    rng: &mut R,
) -> Result<FqMatrix> {
    let max_rank = rows.min(cols);
    if let Some((r, _)) = rank_dist
        .probs()
        .iter()
        .enumerate()
        .find(|&(r, &p)| r > max_rank && p > 0.0)
    {
        return Err(Error::InvalidDistribution(format!(
            "rank {r} has positive mass but a {rows}x{cols} matrix has rank at most {max_rank}"
        )));
    }
    let k = rank_dist.sample(rng);
    if k == 0 {
        return Ok(FqMatrix::zeros(field, rows, cols));
    }
    let b = sample_full_rank(rows, k, field, rng);
    let c = sample_full_rank(k, cols, field, rng);
    b.mul(&c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn f2() -> Field {
        Field::new(2).unwrap()
    }

    fn m(field: Field, rows: &[&[u32]]) -> FqMatrix {
        FqMatrix::from_rows(field, rows).unwrap()
    }

    /// Scalar triple loop, used as an independent check of `mul`.
    fn naive_mul(a: &FqMatrix, b: &FqMatrix) -> Vec<u32> {
        let q = a.field().order() as u64;
        let mut out = vec![0u32; a.rows() * b.cols()];
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut s = 0u64;
                for k in 0..a.cols() {
                    s += a.get(i, k) as u64 * b.get(k, j) as u64;
                }
                out[i * b.cols() + j] = (s % q) as u32;
            }
        }
        out
    }

    #[test]
    fn rejects_composite_and_tiny_orders() {
        assert!(matches!(Field::new(4), Err(Error::NotPrime(4))));
        assert!(matches!(Field::new(1), Err(Error::FieldTooSmall(1))));
        assert!(Field::new(101).is_ok());
    }

    #[test]
    fn rejects_out_of_range_entries() {
        let err = FqMatrix::new(f2(), 1, 2, vec![0, 2]).unwrap_err();
        assert!(matches!(err, Error::EntryOutOfRange { value: 2, q: 2 }));
        assert!(FqMatrix::new(f2(), 2, 2, vec![0; 3]).is_err());
    }

    #[test]
    fn inverse_round_trips() {
        let f = Field::new(7).unwrap();
        for a in 1..7 {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
        assert_eq!(f.inv(0), None);
    }

    #[test]
    fn mul_examples() {
        let f = f2();
        let a = m(f, &[&[1, 1], &[0, 1]]);
        let b = m(f, &[&[1, 0], &[1, 1]]);
        let p = a.mul(&b).unwrap();
        assert_eq!(p, m(f, &[&[0, 1], &[1, 1]]));
        assert_eq!(p.entries(), naive_mul(&a, &b).as_slice());

        let x = m(f, &[&[1, 0, 1], &[0, 1, 1]]);
        assert_eq!(FqMatrix::identity(f, 2).mul(&x).unwrap(), x);
        assert!(FqMatrix::zeros(f, 2, 2).mul(&x).unwrap().is_zero());
    }

    #[test]
    fn mul_errors() {
        let a = FqMatrix::zeros(f2(), 2, 3);
        assert!(matches!(a.mul(&a), Err(Error::DimensionMismatch(_))));
        let b = FqMatrix::zeros(Field::new(3).unwrap(), 3, 2);
        assert!(matches!(a.mul(&b), Err(Error::FieldMismatch(2, 3))));
    }

    #[test]
    fn rank_examples() {
        let f = f2();
        assert_eq!(FqMatrix::zeros(f, 3, 4).rank(), 0);
        assert_eq!(FqMatrix::identity(f, 5).rank(), 5);
        assert_eq!(m(f, &[&[1, 1], &[1, 1]]).rank(), 1);
        let f5 = Field::new(5).unwrap();
        assert_eq!(m(f5, &[&[1, 2], &[2, 4]]).rank(), 1);
        assert_eq!(m(f5, &[&[1, 2], &[2, 3]]).rank(), 2);
    }

    #[test]
    fn row_space_examples() {
        let f = f2();
        let zero = FqMatrix::zeros(f, 2, 3).row_space();
        assert_eq!(zero.dim(), 0);
        assert_eq!(zero, Subspace::zero(f, 3));

        let s = m(f, &[&[1, 1, 0], &[0, 0, 0]]).row_space();
        assert_eq!(s.basis(), &m(f, &[&[1, 1, 0]]));

        let f3 = Field::new(3).unwrap();
        let full = m(f3, &[&[2, 1], &[1, 1]]).row_space();
        assert_eq!(full.basis(), &FqMatrix::identity(f3, 2));
    }

    #[test]
    fn row_space_is_canonical() {
        let f = Field::new(3).unwrap();
        let a = m(f, &[&[1, 2, 0], &[0, 1, 1]]);
        let b = m(f, &[&[1, 0, 1], &[0, 2, 2]]);
        assert_eq!(a.row_space(), b.row_space());
        let echelon = a.row_space().basis().clone();
        assert_eq!(echelon.row_space().basis(), &echelon);
    }

    #[test]
    fn index_round_trip_and_convention() {
        let f = Field::new(3).unwrap();
        let a = m(f, &[&[2, 0], &[0, 1]]);
        // (0,0) weighs 1, (1,1) weighs 3^3
        assert_eq!(a.to_index(), 2 + 27);
        assert_eq!(FqMatrix::from_index(f, 2, 2, 29), a);
    }

    #[test]
    fn sample_uniform_empty_request() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let e = sample_uniform(0, 4, f2(), &mut rng);
        assert_eq!((e.rows(), e.cols()), (0, 4));
        assert!(e.entries().is_empty());
    }

    #[test]
    fn sample_uniform_entry_frequencies() {
        let f = Field::new(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let mut counts = [0u64; 5];
        for _ in 0..n {
            counts[sample_uniform(1, 1, f, &mut rng).get(0, 0) as usize] += 1;
        }
        let p = 0.2;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 * p).abs() < 5.0 * sigma);
        }
    }

    #[test]
    fn sample_uniform_rank_histogram_2x2() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let mut hist = [0u64; 3];
        for _ in 0..n {
            hist[sample_uniform(2, 2, f2(), &mut rng).rank()] += 1;
        }
        for (c, p) in hist.iter().zip([1.0 / 16.0, 9.0 / 16.0, 6.0 / 16.0]) {
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((*c as f64 - n as f64 * p).abs() < 5.0 * sigma);
        }
    }

    #[test]
    fn invertible_samples_cover_gl22_uniformly() {
        let f = f2();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let mut counts: HashMap<u64, u64> = HashMap::new();
        for _ in 0..n {
            let g = sample_invertible(2, f, &mut rng);
            assert_eq!(g.rank(), 2);
            *counts.entry(g.to_index()).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        let p = 1.0 / 6.0;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for &c in counts.values() {
            assert!((c as f64 - n as f64 * p).abs() < 5.0 * sigma);
        }
        let one = sample_invertible(1, f, &mut rng);
        assert_eq!(one, FqMatrix::identity(f, 1));
    }

    #[test]
    fn ugr_point_mass_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = RankDistribution::point(0, 2);
        for _ in 0..100 {
            assert!(sample_ugr(2, 3, f2(), &d, &mut rng).unwrap().is_zero());
        }
    }

    #[test]
    fn ugr_rejects_impossible_ranks() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = RankDistribution::point(3, 3);
        assert!(sample_ugr(2, 3, f2(), &d, &mut rng).is_err());
    }

    #[test]
    fn ugr_rank_one_is_uniform_over_nine_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let d = RankDistribution::point(1, 2);
        let n = 100_000;
        let mut counts: HashMap<u64, u64> = HashMap::new();
        for _ in 0..n {
            let g = sample_ugr(2, 2, f2(), &d, &mut rng).unwrap();
            assert_eq!(g.rank(), 1);
            *counts.entry(g.to_index()).or_default() += 1;
        }
        assert_eq!(counts.len(), 9);
        let p = 1.0 / 9.0;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for &c in counts.values() {
            assert!((c as f64 - n as f64 * p).abs() < 5.0 * sigma);
        }
    }

    #[test]
    fn ugr_with_census_distribution_matches_uniform_sampler() {
        // 15 degrees of freedom; 37.7 is the 0.999 quantile.
        let d = RankDistribution::new(vec![1.0 / 16.0, 9.0 / 16.0, 6.0 / 16.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 100_000;
        let mut counts = [0u64; 16];
        for _ in 0..n {
            counts[sample_ugr(2, 2, f2(), &d, &mut rng).unwrap().to_index() as usize] += 1;
        }
        let expected = n as f64 / 16.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 37.7, "chi2 = {chi2}");
    }
}
