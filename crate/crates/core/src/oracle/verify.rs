use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{pow, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::{product_index, row_images, MatrixSpace};
use crate::enumeration::{
    count_rank_class, count_sub_in_span, count_super_of_span, gaussian_binomial,
    gaussian_binomial_bounds, phi_q,
};
use crate::error::Result;
use crate::gf::{Field, FqMatrix, Subspace};
use crate::rank_channel::rank_transition_exact;

/// One comparison between a closed form and an exhaustive count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub params: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    fn push(&mut self, name: &str, params: String, expected: impl ToString, observed: impl ToString) {
        let expected = expected.to_string();
        let observed = observed.to_string();
        let pass = expected == observed;
        self.checks.push(Check {
            name: name.to_string(),
            params,
            expected,
            observed,
            pass,
        });
    }
}

/// Summarizes a set of observed values: the single value if they all agree,
/// otherwise every distinct value.
fn agreed<T: Ord + ToString>(values: impl IntoIterator<Item = T>) -> String {
    let distinct: std::collections::BTreeSet<T> = values.into_iter().collect();
    match distinct.len() {
        0 => "none".into(),
        1 => distinct.into_iter().next().unwrap().to_string(),
        _ => distinct
            .into_iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" | "),
    }
}

/// Exhaustively checks `p(v|u,r)`: for every `X` in `F_q^{n x l}` and every
/// `G` in `F_q^{m x n}`, tallies `rank(GX)` by `rank(G)` and compares the
/// frequency within each rank class to the closed form.
pub fn verify_rank_kernel(q: u32, n: usize, m: usize, l: usize, cap: u64) -> Result<VerificationReport> {
    let field = Field::new(q)?;
    let xs = MatrixSpace::new(field, n, l, cap)?;
    let gs = MatrixSpace::new(field, m, n, cap)?;
    let ys = MatrixSpace::new(field, m, l, cap)?;
    let g_rank = gs.rank_table();
    let y_rank = ys.rank_table();
    let x_rank = xs.rank_table();
    let width = n.min(m) + 1;
    let out_width = m.min(l) + 1;
    let n_radix = gs.row_radix();
    let l_radix = xs.row_radix();

    let tallies: Vec<Vec<u64>> = (0..xs.size())
        .into_par_iter()
        .map(|x| {
            let images = row_images(&xs.matrix(x));
            let mut t = vec![0u64; width * out_width];
            for (g, &r) in g_rank.iter().enumerate() {
                let y = product_index(g as u64, n_radix, m, &images, l_radix);
                t[r as usize * out_width + y_rank[y as usize] as usize] += 1;
            }
            t
        })
        .collect();

    let mut by_rank: BTreeMap<usize, HashMap<&[u64], usize>> = BTreeMap::new();
    for (x, t) in tallies.iter().enumerate() {
        *by_rank
            .entry(x_rank[x] as usize)
            .or_default()
            .entry(t.as_slice())
            .or_default() += 1;
    }

    let qq = q as u64;
    let mut report = VerificationReport::default();
    for (u, patterns) in &by_rank {
        let reps: usize = patterns.values().sum();
        for r in 0..width {
            let class = BigInt::from(count_rank_class(m, n, r, qq));
            let expected: Vec<String> = (0..out_width)
                .map(|v| rank_transition_exact(qq, n, *u, r, v).to_string())
                .collect();
            let observed = agreed(patterns.keys().map(|t| {
                (0..out_width)
                    .map(|v| {
                        BigRational::new(BigInt::from(t[r * out_width + v]), class.clone()).to_string()
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            }));
            report.push(
                "rank-transition",
                format!("q={q} n={n} m={m} l={l} u={u} r={r} inputs={reps}"),
                expected.join(" "),
                observed,
            );
        }
    }
    Ok(report)
}

/// Number of `G` of rank `r` with `GX = Y`, by scanning every `G`.
pub fn count_solutions(x: &FqMatrix, y: &FqMatrix, r: usize) -> Result<u64> {
    let gs = MatrixSpace::new(x.field(), y.rows(), x.rows(), u64::MAX)?;
    let target = y.to_index();
    let images = row_images(x);
    let l_radix = (x.field().order() as u64).pow(x.cols() as u32);
    Ok((0..gs.size())
        .filter(|&g| product_index(g, gs.row_radix(), y.rows(), &images, l_radix) == target)
        .filter(|&g| gs.matrix(g).rank() == r)
        .count() as u64)
}

/// Row-space classification of every matrix with `rows <= max_rows` and `l`
/// columns, sharing one list of subspaces of `F_q^l`.
struct SpanTables {
    subspaces: Vec<Subspace>,
    /// `class[rows - 1][index]` is the subspace id of that matrix's row space.
    class: Vec<Vec<u32>>,
    /// `members[rows - 1][id]` counts matrices with that row space.
    members: Vec<Vec<u64>>,
    /// `contains[a][b]`: subspace `b` lies inside subspace `a`.
    contains: Vec<Vec<bool>>,
}

impl SpanTables {
    fn build(field: Field, max_rows: usize, l: usize, cap: u64) -> Result<Self> {
        let mut ids: HashMap<Subspace, u32> = HashMap::new();
        let mut subspaces = Vec::new();
        let mut class = Vec::new();
        for rows in 1..=max_rows {
            let space = MatrixSpace::new(field, rows, l, cap)?;
            let spans: Vec<Subspace> = (0..space.size())
                .into_par_iter()
                .map(|i| space.matrix(i).row_space())
                .collect();
            class.push(
                spans
                    .into_iter()
                    .map(|s| {
                        *ids.entry(s.clone()).or_insert_with(|| {
                            subspaces.push(s);
                            (subspaces.len() - 1) as u32
                        })
                    })
                    .collect::<Vec<u32>>(),
            );
        }
        let members = class
            .iter()
            .map(|c| {
                let mut counts = vec![0u64; subspaces.len()];
                for &id in c {
                    counts[id as usize] += 1;
                }
                counts
            })
            .collect();
        let contains = subspaces
            .par_iter()
            .map(|a| subspaces.iter().map(|b| b.is_subspace_of(a)).collect())
            .collect();
        Ok(Self {
            subspaces,
            class,
            members,
            contains,
        })
    }
}

/// Exhaustive checks of the counting identities behind the rank kernel, for
/// all dimensions up to `max_dim` and packet lengths up to `max_len`:
/// rank-class census, Gaussian binomial bounds (up to `n = 8`), subspace and
/// superspace counts, the Brawley-Carlitz completion count and the number of
/// solutions of `GX = Y`.
pub fn verify_lemma_counts(q: u32, max_dim: usize, max_len: usize, cap: u64) -> Result<VerificationReport> {
    let field = Field::new(q)?;
    let qq = q as u64;
    let mut report = VerificationReport::default();

    for rows in 1..=max_dim {
        for cols in 1..=max_dim {
            let space = MatrixSpace::new(field, rows, cols, cap)?;
            let mut census = vec![0u64; rows.min(cols) + 1];
            for r in space.rank_table() {
                census[r as usize] += 1;
            }
            for (r, &c) in census.iter().enumerate() {
                report.push(
                    "rank-class-size",
                    format!("q={q} m={rows} n={cols} r={r}"),
                    count_rank_class(rows, cols, r, qq),
                    c,
                );
            }
            let total: BigUint = (0..=rows.min(cols)).map(|r| count_rank_class(rows, cols, r, qq)).sum();
            report.push(
                "rank-census-total",
                format!("q={q} m={rows} n={cols}"),
                pow(BigUint::from(qq), rows * cols),
                total,
            );
        }
    }

    for n in 0..=8usize {
        for r in 0..=n {
            let value = gaussian_binomial(n as i64, r as i64, qq);
            let bounds = gaussian_binomial_bounds(n, r, qq)?;
            report.push(
                "gaussian-binomial-bounds",
                format!("q={q} n={n} r={r} value={value}"),
                true,
                bounds.contains(&value),
            );
        }
    }

    lemma_completions(field, max_dim, cap, &mut report)?;

    for l in 1..=max_len {
        let max_rows = max_dim.min(l);
        let tables = SpanTables::build(field, max_rows, l, cap)?;
        for n in 1..=max_rows {
            for m in 1..=max_rows {
                lemma_spans(&tables, q, n, m, l, &mut report);
                lemma_solutions(field, &tables, n, m, l, cap, &mut report)?;
            }
        }
    }
    Ok(report)
}

/// Subspace and superspace counts, summed over row-space classes.
fn lemma_spans(t: &SpanTables, q: u32, n: usize, m: usize, l: usize, report: &mut VerificationReport) {
    let qq = q as u64;
    let xs = &t.members[n - 1];
    let ys = &t.members[m - 1];
    let ids = 0..t.subspaces.len();

    for u in 0..=n.min(l) {
        for v in 0..=u.min(m) {
            let observed = agreed(ids.clone().filter(|&s| xs[s] > 0 && t.subspaces[s].dim() == u).map(|s| {
                ids.clone()
                    .filter(|&w| t.contains[s][w] && t.subspaces[w].dim() == v)
                    .map(|w| ys[w])
                    .sum::<u64>()
            }));
            report.push(
                "subspace-count",
                format!("q={q} n={n} m={m} l={l} u={u} v={v}"),
                count_sub_in_span(u, v, m, qq),
                observed,
            );
        }
    }
    for v in 0..=m.min(l) {
        for u in v..=n.min(l) {
            let observed = agreed(ids.clone().filter(|&s| ys[s] > 0 && t.subspaces[s].dim() == v).map(|s| {
                ids.clone()
                    .filter(|&w| t.contains[w][s] && t.subspaces[w].dim() == u)
                    .map(|w| xs[w])
                    .sum::<u64>()
            }));
            report.push(
                "superspace-count",
                format!("q={q} n={n} m={m} l={l} u={u} v={v}"),
                count_super_of_span(u, v, n, m, l, qq),
                observed,
            );
        }
    }
}

/// Rank-`r` completions of a fixed left block.
fn lemma_completions(field: Field, max_dim: usize, cap: u64, report: &mut VerificationReport) -> Result<()> {
    let q = field.order();
    for m in 1..=max_dim {
        for n in 1..=max_dim {
            let gs = MatrixSpace::new(field, m, n, cap)?;
            let max_r = m.min(n);
            let matrices: Vec<(FqMatrix, usize)> = (0..gs.size())
                .into_par_iter()
                .map(|g| {
                    let gm = gs.matrix(g);
                    let r = gm.rank();
                    (gm, r)
                })
                .collect();
            for u in 0..=n {
                let mut tally: HashMap<u64, Vec<u64>> = HashMap::new();
                let mut block_rank: HashMap<u64, usize> = HashMap::new();
                for (gm, r) in &matrices {
                    let block = gm.left_columns(u);
                    let key = block.to_index();
                    block_rank.entry(key).or_insert_with(|| block.rank());
                    tally.entry(key).or_insert_with(|| vec![0; max_r + 1])[*r] += 1;
                }
                for v in 0..=u.min(m) {
                    for r in 0..=max_r {
                        let observed = agreed(
                            tally
                                .iter()
                                .filter(|(k, _)| block_rank[*k] == v)
                                .map(|(_, t)| t[r]),
                        );
                        report.push(
                            "completion-count",
                            format!("q={q} m={m} n={n} u={u} r={r} v={v}"),
                            phi_q(m, n, u, r, v, q as u64),
                            observed,
                        );
                    }
                }
            }
        }
    }
    Ok(())
}

/// Inputs used for the `GX = Y` scan: every `X` when the space is small,
/// otherwise the first and last two of each rank in index order.
fn representatives(ranks: &[u8], max_rank: usize) -> Vec<u64> {
    if ranks.len() <= 512 {
        return (0..ranks.len() as u64).collect();
    }
    let mut out = Vec::new();
    for u in 0..=max_rank {
        let of_rank: Vec<u64> = (0..ranks.len() as u64)
            .filter(|&i| ranks[i as usize] as usize == u)
            .collect();
        let k = of_rank.len();
        let mut pick: Vec<u64> = of_rank.iter().take(2).chain(of_rank.iter().skip(k.saturating_sub(2))).copied().collect();
        pick.dedup();
        out.extend(pick);
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// For each representative `X`, counts the rank-`r` solutions of `GX = Y`
/// for every `Y` at once.
fn lemma_solutions(
    field: Field,
    t: &SpanTables,
    n: usize,
    m: usize,
    l: usize,
    cap: u64,
    report: &mut VerificationReport,
) -> Result<()> {
    let q = field.order();
    let qq = q as u64;
    let xs = MatrixSpace::new(field, n, l, cap)?;
    let gs = MatrixSpace::new(field, m, n, cap)?;
    let ys = MatrixSpace::new(field, m, l, cap)?;
    let x_rank = xs.rank_table();
    let g_rank = gs.rank_table();
    let y_rank = ys.rank_table();
    let max_r = m.min(n);
    let n_radix = gs.row_radix();
    let l_radix = xs.row_radix();
    let x_class = &t.class[n - 1];
    let y_class = &t.class[m - 1];

    // (u, r, v, contained) -> distinct observed counts
    let results: Vec<BTreeMap<(usize, usize, usize, bool), std::collections::BTreeSet<u64>>> =
        representatives(&x_rank, n.min(l))
            .into_par_iter()
            .map(|x| {
                let u = x_rank[x as usize] as usize;
                let images = row_images(&xs.matrix(x));
                let mut tally = vec![0u32; ys.size() as usize * (max_r + 1)];
                for (g, &r) in g_rank.iter().enumerate() {
                    let y = product_index(g as u64, n_radix, m, &images, l_radix);
                    tally[y as usize * (max_r + 1) + r as usize] += 1;
                }
                let span_x = x_class[x as usize] as usize;
                let mut seen: BTreeMap<_, std::collections::BTreeSet<u64>> = BTreeMap::new();
                for y in 0..ys.size() as usize {
                    let inside = t.contains[span_x][y_class[y] as usize];
                    let v = y_rank[y] as usize;
                    for r in 0..=max_r {
                        seen.entry((u, r, v, inside))
                            .or_default()
                            .insert(tally[y * (max_r + 1) + r] as u64);
                    }
                }
                seen
            })
            .collect();

    let mut merged: BTreeMap<(usize, usize, usize, bool), std::collections::BTreeSet<u64>> = BTreeMap::new();
    for part in results {
        for (k, s) in part {
            merged.entry(k).or_default().extend(s);
        }
    }
    for ((u, r, v, inside), counts) in merged {
        let expected = if inside { phi_q(m, n, u, r, v, qq) } else { BigUint::zero() };
        report.push(
            "solution-count",
            format!("q={q} n={n} m={m} l={l} u={u} r={r} v={v} contained={inside}"),
            expected,
            agreed(counts),
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Field {
        Field::new(2).unwrap()
    }

    #[test]
    fn kernel_small_cases_pass() {
        for (n, m, l) in [(1, 1, 1), (2, 2, 2), (2, 1, 2), (1, 2, 2)] {
            let report = verify_rank_kernel(2, n, m, l, 1 << 16).unwrap();
            assert!(report.all_pass(), "{:?}", report.failures().collect::<Vec<_>>());
        }
    }

    #[test]
    fn solutions_vanish_outside_the_span() {
        let x = FqMatrix::from_rows(f2(), &[[1u32, 0, 0], [0, 0, 0]]).unwrap();
        let y = FqMatrix::from_rows(f2(), &[[0u32, 1, 0], [0, 0, 0]]).unwrap();
        for r in 0..=2 {
            assert_eq!(count_solutions(&x, &y, r).unwrap(), 0);
        }
    }

    #[test]
    fn solutions_for_a_rank_one_pair() {
        let x = FqMatrix::from_rows(f2(), &[[1u32, 1, 0], [0, 0, 0]]).unwrap();
        let y = FqMatrix::from_rows(f2(), &[[1u32, 1, 0], [1, 1, 0]]).unwrap();
        // G must have first column (1, 1); the second column is free but
        // must not raise the rank: (0,0) or (1,1).
        assert_eq!(count_solutions(&x, &y, 1).unwrap(), 2);
        assert_eq!(phi_q(2, 2, 1, 1, 1, 2), BigUint::from(2u32));
    }

    #[test]
    fn lemma_suite_binary_small() {
        let report = verify_lemma_counts(2, 2, 3, 1 << 16).unwrap();
        assert!(report.all_pass(), "{:?}", report.failures().collect::<Vec<_>>());
        for name in ["subspace-count", "superspace-count", "completion-count", "solution-count"] {
            assert!(report.checks.iter().any(|c| c.name == name), "{name}");
        }
        // Both span counts are present for every (u, v) at n = m = 2, l = 3.
        let spans = report
            .checks
            .iter()
            .filter(|c| c.params.starts_with("q=2 n=2 m=2 l=3 ") && c.name.ends_with("space-count"))
            .count();
        assert_eq!(spans, 12);
    }

    #[test]
    fn mismatch_is_reported() {
        let mut r = VerificationReport::default();
        r.push("x", String::new(), 3, 4);
        assert!(!r.all_pass());
        assert_eq!(r.failures().count(), 1);
    }
}
