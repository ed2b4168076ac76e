//! Exact matrix and subspace counts over `F_q`.
//!
//! Everything here is pure integer arithmetic in `q`, so any `q >= 2` is
//! accepted, prime or not. Counts are arbitrary-precision; only [`log_q`]
//! rounds.

use std::cell::RefCell;
use std::collections::HashMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

fn big_pow(q: u64, exp: usize) -> BigUint {
    num_traits::pow(BigUint::from(q), exp)
}

/// `|T(F_q^{m x r})| = prod_{i<r} (q^m - q^i)`, the number of full-rank
/// `m x r` matrices with `r <= m`.
pub fn count_full_rank(m: usize, r: usize, q: u64) -> Result<BigUint> {
    if r > m {
        return Err(Error::OutOfRange(format!(
            "full-rank count needs r <= m, got r = {r}, m = {m}"
        )));
    }
    Ok(falling_product(m, 0, r, q))
}

/// `prod_{i=from}^{to-1} (q^m - q^i)`.
fn falling_product(m: usize, from: usize, to: usize, q: u64) -> BigUint {
    let qm = big_pow(q, m);
    let mut acc = BigUint::one();
    let mut qi = big_pow(q, from);
    for _ in from..to {
        acc *= &qm - &qi;
        qi *= q;
    }
    acc
}

/// `|T_r(F_q^{m x n})|`, zero when `r > min(m, n)`.
pub fn count_rank_class(m: usize, n: usize, r: usize, q: u64) -> BigUint {
    if r > m.min(n) {
        return BigUint::zero();
    }
    falling_product(m, 0, r, q) * gaussian_binomial(n as i64, r as i64, q)
}

thread_local! {
    // q -> rows of the q-Pascal triangle
    static QPASCAL: RefCell<HashMap<u64, Vec<Vec<BigUint>>>> = RefCell::new(HashMap::new());
}

/// Gaussian binomial coefficient `[n r]_q`, the number of `r`-dimensional
/// subspaces of `F_q^n`. Zero outside `0 <= r <= n`.
///
/// Evaluated with the q-Pascal recurrence `[n r] = [n-1 r-1] + q^r [n-1 r]`,
/// memoized per thread.
pub fn gaussian_binomial(n: i64, r: i64, q: u64) -> BigUint {
    assert!(q >= 2, "q must be at least 2");
    if n < 0 || r < 0 || r > n {
        return BigUint::zero();
    }
    let (n, r) = (n as usize, r as usize);
    QPASCAL.with(|cache| {
        let mut cache = cache.borrow_mut();
        let rows = cache.entry(q).or_insert_with(|| vec![vec![BigUint::one()]]);
        while rows.len() <= n {
            let prev = rows.last().expect("seeded with row 0");
            let k = prev.len();
            let mut next = Vec::with_capacity(k + 1);
            next.push(BigUint::one());
            let mut qr = BigUint::from(q);
            for j in 1..k {
                next.push(&prev[j - 1] + &qr * &prev[j]);
                qr *= q;
            }
            next.push(BigUint::one());
            rows.push(next);
        }
        rows[n][r].clone()
    })
}

/// Lower and upper bounds `q^{r(n-r)} <= [n r]_q <= gamma_q q^{r(n-r)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBounds {
    pub lower: BigUint,
    /// `gamma_q * lower` as a float; may be infinite for huge exponents.
    pub upper: f64,
    gamma: f64,
}

impl GaussianBounds {
    /// Exact on the lower side; the upper side compares `value / lower` with
    /// `gamma_q`, which avoids converting the count itself to a float.
    pub fn contains(&self, value: &BigUint) -> bool {
        if value < &self.lower {
            return false;
        }
        let ratio = BigRational::new(value.clone().into(), self.lower.clone().into());
        ratio.to_f64().is_some_and(|x| x <= self.gamma)
    }
}

pub fn gaussian_binomial_bounds(n: usize, r: usize, q: u64) -> Result<GaussianBounds> {
    if r > n {
        return Err(Error::OutOfRange(format!(
            "bounds need r <= n, got r = {r}, n = {n}"
        )));
    }
    let lower = big_pow(q, r * (n - r));
    let gamma = gamma_q(q);
    let upper = lower.to_f64().unwrap_or(f64::INFINITY) * gamma;
    Ok(GaussianBounds {
        lower,
        upper,
        gamma,
    })
}

/// `gamma_q = prod_{i>=1} 1 / (1 - q^{-i})`.
///
/// Truncated at the first factor within 1e-15 of one, or after 10^4 terms.
pub fn gamma_q(q: u64) -> f64 {
    assert!(q >= 2, "q must be at least 2");
    let inv_q = 1.0 / q as f64;
    let mut term = 1.0;
    let mut acc = 1.0;
    for _ in 0..10_000 {
        term *= inv_q;
        let factor = 1.0 / (1.0 - term);
        if factor - 1.0 < 1e-15 {
            break;
        }
        acc *= factor;
    }
    acc
}

/// Brawley-Carlitz count: the number of rank-`r` matrices in `F_q^{m x n}`
/// whose left `m x u` block is a fixed matrix of rank `v`.
///
/// `phi = (|T(F_q^{m x r})| / |T(F_q^{m x v})|) [n-u r-v]_q q^{v(n-u-r+v)}`.
/// Returns zero whenever no such completion exists.
pub fn phi_q(m: usize, n: usize, u: usize, r: usize, v: usize, q: u64) -> BigUint {
    if u > n || v > u.min(m) || r > m || v > r {
        return BigUint::zero();
    }
    let gb = gaussian_binomial((n - u) as i64, (r - v) as i64, q);
    if gb.is_zero() {
        return gb;
    }
    // r - v <= n - u here, so the exponent is nonnegative.
    let exp = v * (n - u - (r - v));
    // |T(m x r)| / |T(m x v)| is the tail of the same falling product.
    falling_product(m, v, r, q) * gb * big_pow(q, exp)
}

/// For a fixed rank-`u` matrix `X`, the number of rank-`v` matrices `Y` with
/// `m` rows and row space inside that of `X`: `|T_v(F_q^{m x u})|`.
pub fn count_sub_in_span(u: usize, v: usize, m: usize, q: u64) -> BigUint {
    count_rank_class(m, u, v, q)
}

/// For a fixed rank-`v` matrix `Y in F_q^{m x l}`, the number of rank-`u`
/// matrices `X in F_q^{n x l}` whose row space contains that of `Y`:
/// `|T_v(F_q^{m x u})| |T_u(F_q^{n x l})| / |T_v(F_q^{m x l})|`.
pub fn count_super_of_span(u: usize, v: usize, n: usize, m: usize, l: usize, q: u64) -> BigUint {
    let denom = count_rank_class(m, l, v, q);
    if denom.is_zero() {
        return denom;
    }
    let num = count_rank_class(m, u, v, q) * count_rank_class(n, l, u, q);
    let (quot, rem) = (&num / &denom, &num % &denom);
    debug_assert!(rem.is_zero(), "superspace count is not integral");
    quot
}

/// Natural logarithm of a big integer; `-inf` for zero.
pub fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().expect("fits in f64").ln()
    } else {
        let shift = bits - 64;
        let top: BigUint = x >> shift;
        top.to_f64().expect("64-bit value").ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// `log_q(x)` of an exact count.
pub fn log_q(x: &BigUint, q: u64) -> f64 {
    ln_big(x) / (q as f64).ln()
}
