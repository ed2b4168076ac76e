use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use super::{product_index, row_images, MatrixSpace, TransferDist};
use crate::enumeration::{count_full_rank, count_rank_class};
use crate::error::{Error, Result};
use crate::gf::{Field, Subspace};
use crate::rank_channel::ChannelDims;

/// `Y = GX` written out as an explicit `q^{nl} x q^{ml}` table.
#[derive(Debug, Clone)]
pub struct ExplicitChannel {
    dims: ChannelDims,
    transfer: TransferDist,
    inputs: MatrixSpace,
    outputs: MatrixSpace,
    rows: Vec<Vec<(u64, BigRational)>>,
    rows_f64: Vec<Vec<(usize, f64)>>,
}

/// Builds the transition table by summing the transfer distribution over
/// every `G` with `GX = Y`.
pub fn build_explicit_channel(
    dims: ChannelDims,
    transfer: TransferDist,
    cap: u64,
) -> Result<ExplicitChannel> {
    let field = Field::new(u32::try_from(dims.q()).map_err(|_| Error::FieldTooSmall(dims.q()))?)?;
    let tspace = *transfer.space();
    if tspace.field() != field || tspace.rows() != dims.m() || tspace.cols() != dims.n() {
        return Err(Error::DimensionMismatch(format!(
            "transfer matrices are {}x{} over F_{}, channel needs {}x{} over F_{}",
            tspace.rows(),
            tspace.cols(),
            tspace.field().order(),
            dims.m(),
            dims.n(),
            dims.q()
        )));
    }
    let inputs = MatrixSpace::new(field, dims.n(), dims.l(), cap)?;
    let outputs = MatrixSpace::new(field, dims.m(), dims.l(), cap)?;
    let support: Vec<(u64, BigRational)> = transfer.support().map(|(g, p)| (g, p.clone())).collect();
    let n_radix = tspace.row_radix();
    let l_radix = inputs.row_radix();

    let rows: Vec<Vec<(u64, BigRational)>> = (0..inputs.size())
        .into_par_iter()
        .map(|x| {
            let images = row_images(&inputs.matrix(x));
            let mut acc: BTreeMap<u64, BigRational> = BTreeMap::new();
            for (g, p) in &support {
                let y = product_index(*g, n_radix, dims.m(), &images, l_radix);
                *acc.entry(y).or_insert_with(BigRational::zero) += p;
            }
            acc.into_iter().collect()
        })
        .collect();
    let rows_f64 = rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|(y, p)| (*y as usize, p.to_f64().unwrap_or(0.0)))
                .collect()
        })
        .collect();
    Ok(ExplicitChannel {
        dims,
        transfer,
        inputs,
        outputs,
        rows,
        rows_f64,
    })
}

impl ExplicitChannel {
    pub fn dims(&self) -> &ChannelDims {
        &self.dims
    }

    pub fn transfer(&self) -> &TransferDist {
        &self.transfer
    }

    pub fn inputs(&self) -> &MatrixSpace {
        &self.inputs
    }

    pub fn outputs(&self) -> &MatrixSpace {
        &self.outputs
    }

    /// Nonzero entries of `p(. | X)`, sorted by output index.
    pub fn row(&self, x: u64) -> &[(u64, BigRational)] {
        &self.rows[x as usize]
    }

    pub fn prob(&self, x: u64, y: u64) -> BigRational {
        let row = &self.rows[x as usize];
        match row.binary_search_by_key(&y, |(k, _)| *k) {
            Ok(i) => row[i].1.clone(),
            Err(_) => BigRational::zero(),
        }
    }

    pub fn prob_f64(&self, x: u64, y: u64) -> f64 {
        let row = &self.rows_f64[x as usize];
        match row.binary_search_by_key(&(y as usize), |(k, _)| *k) {
            Ok(i) => row[i].1,
            Err(_) => 0.0,
        }
    }

    /// `I(X;Y)` in base `q`.
    pub fn mutual_information(&self, px: &[f64]) -> f64 {
        let py = self.output_distribution(px);
        let d = self.divergences(&py);
        px.iter().zip(&d).map(|(p, d)| p * d).sum()
    }

    fn output_distribution(&self, px: &[f64]) -> Vec<f64> {
        let mut py = vec![0.0; self.outputs.size() as usize];
        for (row, &p) in self.rows_f64.iter().zip(px) {
            if p > 0.0 {
                for &(y, w) in row {
                    py[y] += p * w;
                }
            }
        }
        py
    }

    /// `D(p(.|X) || p_Y)` for every input, base `q`.
    fn divergences(&self, py: &[f64]) -> Vec<f64> {
        let ln_q = (self.dims.q() as f64).ln();
        self.rows_f64
            .par_iter()
            .map(|row| {
                row.iter()
                    .filter(|(_, w)| *w > 0.0)
                    .map(|&(y, w)| w * (w / py[y]).ln())
                    .sum::<f64>()
                    / ln_q
            })
            .collect()
    }
}

/// Blahut–Arimoto output.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ExactCapacity {
    pub capacity: f64,
    pub input: Vec<f64>,
    pub iterations: usize,
    /// `max_X D(p(.|X) || p_Y) - I`, an upper bound on the distance to capacity.
    pub gap: f64,
}

/// Classical Blahut–Arimoto over the whole matrix alphabet, started from the
/// uniform input.
pub fn exact_capacity(channel: &ExplicitChannel, tol: f64, max_iter: usize) -> Result<ExactCapacity> {
    if !(tol > 0.0) {
        return Err(Error::OutOfRange(format!("tolerance must be positive, got {tol}")));
    }
    let size = channel.inputs.size() as usize;
    let ln_q = (channel.dims.q() as f64).ln();
    let mut px = vec![1.0 / size as f64; size];
    let mut gap = f64::INFINITY;
    for it in 1..=max_iter {
        let py = channel.output_distribution(&px);
        let d = channel.divergences(&py);
        let info: f64 = px.iter().zip(&d).map(|(p, d)| p * d).sum();
        let top = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        gap = top - info;
        if gap < tol {
            return Ok(ExactCapacity {
                capacity: info,
                input: px,
                iterations: it,
                gap,
            });
        }
        for (p, d) in px.iter_mut().zip(&d) {
            *p *= ((d - top) * ln_q).exp();
        }
        let z: f64 = px.iter().sum();
        px.iter_mut().for_each(|p| *p /= z);
    }
    Err(Error::OracleNotConverged {
        iterations: max_iter,
        gap,
    })
}

/// Input distribution uniform within each rank class, from rank weights.
pub fn ugr_input_distribution(space: &MatrixSpace, rank_probs: &[f64]) -> Result<Vec<f64>> {
    let q = space.field().order() as u64;
    let max_rank = space.rows().min(space.cols());
    if rank_probs.len() > max_rank + 1 && rank_probs[max_rank + 1..].iter().any(|&p| p > 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "rank weight above {max_rank} for {}x{} inputs",
            space.rows(),
            space.cols()
        )));
    }
    let per: Vec<f64> = (0..=max_rank)
        .map(|u| {
            let p = rank_probs.get(u).copied().unwrap_or(0.0);
            p / count_rank_class(space.rows(), space.cols(), u, q)
                .to_f64()
                .unwrap_or(f64::INFINITY)
        })
        .collect();
    Ok(space
        .rank_table()
        .iter()
        .map(|&r| per[r as usize])
        .collect())
}

/// The channel seen between row spaces.
#[derive(Debug, Clone)]
pub struct SubspaceChannel {
    inputs: Vec<Subspace>,
    outputs: Vec<Subspace>,
    input_class: Vec<usize>,
    transition: Vec<Vec<(usize, BigRational)>>,
    transition_f64: Vec<Vec<(usize, f64)>>,
    q: u64,
}

fn classify(space: &MatrixSpace) -> (Vec<Subspace>, Vec<usize>) {
    let spaces: Vec<Subspace> = (0..space.size())
        .into_par_iter()
        .map(|i| space.matrix(i).row_space())
        .collect();
    let mut ids: HashMap<Subspace, usize> = HashMap::new();
    let mut list = Vec::new();
    let class = spaces
        .into_iter()
        .map(|s| {
            *ids.entry(s.clone()).or_insert_with(|| {
                list.push(s);
                list.len() - 1
            })
        })
        .collect();
    (list, class)
}

/// Groups inputs and outputs by row space and checks the grouped law against
/// `p(V|U) = |T(F_q^{m x dim V})| p(Y|X)`.
pub fn build_subspace_channel(channel: &ExplicitChannel) -> Result<SubspaceChannel> {
    let q = channel.dims.q();
    let m = channel.dims.m();
    let (inputs, input_class) = classify(&channel.inputs);
    let (outputs, output_class) = classify(&channel.outputs);

    let mut class_size = vec![0u64; outputs.len()];
    for &c in &output_class {
        class_size[c] += 1;
    }
    for (v, space) in outputs.iter().enumerate() {
        let expected = count_full_rank(m, space.dim(), q)?;
        if BigInt::from(class_size[v]) != BigInt::from(expected.clone()) {
            return Err(Error::GroupingInconsistency(format!(
                "{} outputs span a {}-dimensional space, expected {expected}",
                class_size[v],
                space.dim()
            )));
        }
    }

    let mut representative = vec![None; inputs.len()];
    for (x, &u) in input_class.iter().enumerate() {
        if representative[u].is_none() {
            representative[u] = Some(x as u64);
        }
    }

    let mut transition = Vec::with_capacity(inputs.len());
    for (u, rep) in representative.iter().enumerate() {
        let rep = rep.expect("every class has a member");
        let row = channel.row(rep);
        // Every Y spanning the same V must carry the same probability.
        let mut grouped: BTreeMap<usize, (u64, BigRational)> = BTreeMap::new();
        for (y, p) in row {
            let v = output_class[*y as usize];
            match grouped.get_mut(&v) {
                None => {
                    grouped.insert(v, (1, p.clone()));
                }
                Some((count, first)) => {
                    if first != p {
                        return Err(Error::GroupingInconsistency(format!(
                            "outputs spanning the same space have probabilities {first} and {p} (input class {u})"
                        )));
                    }
                    *count += 1;
                }
            }
        }
        let mut out = Vec::with_capacity(grouped.len());
        for (v, (count, p)) in grouped {
            if count != class_size[v] {
                return Err(Error::GroupingInconsistency(format!(
                    "only {count} of {} outputs spanning space {v} are reachable from input class {u}",
                    class_size[v]
                )));
            }
            let closed = &p * BigRational::from_integer(count_full_rank(m, outputs[v].dim(), q)?.into());
            out.push((v, closed));
        }
        transition.push(out);
    }

    // Inputs with the same row space must see identical rows.
    for (x, &u) in input_class.iter().enumerate() {
        let rep = representative[u].unwrap();
        if x as u64 != rep && channel.row(x as u64) != channel.row(rep) {
            return Err(Error::GroupingInconsistency(format!(
                "inputs {x} and {rep} share a row space but not a transition row"
            )));
        }
    }

    // The closed form must agree with summing p(Y|X) over the class.
    for (u, row) in transition.iter().enumerate() {
        let rep = representative[u].unwrap();
        let mut summed: BTreeMap<usize, BigRational> = BTreeMap::new();
        for (y, p) in channel.row(rep) {
            *summed.entry(output_class[*y as usize]).or_insert_with(BigRational::zero) += p;
        }
        let direct: Vec<(usize, BigRational)> = summed.into_iter().collect();
        if &direct != row {
            return Err(Error::GroupingInconsistency(format!(
                "closed form disagrees with the grouped sum for input class {u}"
            )));
        }
    }

    let transition_f64 = transition
        .iter()
        .map(|row| row.iter().map(|(v, p)| (*v, p.to_f64().unwrap_or(0.0))).collect())
        .collect();
    Ok(SubspaceChannel {
        inputs,
        outputs,
        input_class,
        transition,
        transition_f64,
        q,
    })
}

impl SubspaceChannel {
    pub fn inputs(&self) -> &[Subspace] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Subspace] {
        &self.outputs
    }

    /// Row-space class of each input matrix, by matrix index.
    pub fn input_class(&self) -> &[usize] {
        &self.input_class
    }

    pub fn row(&self, u: usize) -> &[(usize, BigRational)] {
        &self.transition[u]
    }

    pub fn prob(&self, u: usize, v: usize) -> BigRational {
        self.transition[u]
            .iter()
            .find(|(k, _)| *k == v)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(BigRational::zero)
    }

    /// Pushes a matrix input distribution onto row spaces.
    pub fn group_input(&self, px: &[f64]) -> Vec<f64> {
        let mut pu = vec![0.0; self.inputs.len()];
        for (&c, &p) in self.input_class.iter().zip(px) {
            pu[c] += p;
        }
        pu
    }

    /// `I(U;V)` in base `q`.
    pub fn mutual_information(&self, pu: &[f64]) -> f64 {
        let mut pv = vec![0.0; self.outputs.len()];
        for (row, &p) in self.transition_f64.iter().zip(pu) {
            for &(v, w) in row {
                pv[v] += p * w;
            }
        }
        let ln_q = (self.q as f64).ln();
        self.transition_f64
            .iter()
            .zip(pu)
            .filter(|(_, &p)| p > 0.0)
            .map(|(row, &p)| {
                p * row
                    .iter()
                    .filter(|(_, w)| *w > 0.0)
                    .map(|&(v, w)| w * (w / pv[v]).ln())
                    .sum::<f64>()
            })
            .sum::<f64>()
            / ln_q
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{optimize_capacity, OptimizerConfig};
    use crate::gf::FqMatrix;
    use crate::oracle::DEFAULT_CAP;
    use crate::rank_channel::{jafari_exact, kernel, matrix_transition_prob, RankDistribution};
    use num_traits::One;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f2() -> Field {
        Field::new(2).unwrap()
    }

    fn uniform_channel() -> (ChannelDims, ExplicitChannel) {
        let dims = ChannelDims::new(2, 2, 2, 3).unwrap();
        let space = MatrixSpace::new(f2(), 2, 2, DEFAULT_CAP).unwrap();
        let t = TransferDist::ugr(space, &jafari_exact(&dims)).unwrap();
        (dims, build_explicit_channel(dims, t, DEFAULT_CAP).unwrap())
    }

    #[test]
    fn identity_transfer_gives_identity_channel() {
        let dims = ChannelDims::new(2, 2, 2, 3).unwrap();
        let t = TransferDist::point(&FqMatrix::identity(f2(), 2)).unwrap();
        let ch = build_explicit_channel(dims, t, DEFAULT_CAP).unwrap();
        for x in 0..64 {
            assert_eq!(ch.row(x), &[(x, BigRational::one())]);
        }
    }

    #[test]
    fn zero_transfer_sends_everything_to_zero() {
        let dims = ChannelDims::new(2, 2, 2, 3).unwrap();
        let t = TransferDist::point(&FqMatrix::zeros(f2(), 2, 2)).unwrap();
        let ch = build_explicit_channel(dims, t, DEFAULT_CAP).unwrap();
        for x in 0..64 {
            assert_eq!(ch.row(x), &[(0, BigRational::one())]);
        }
        let cap = exact_capacity(&ch, 1e-12, 1000).unwrap();
        assert!(cap.capacity.abs() < 1e-12);
    }

    #[test]
    fn table_matches_closed_form_transition() {
        let (dims, ch) = uniform_channel();
        let rd = RankDistribution::jafari(&dims);
        let k = kernel(&dims, &rd).unwrap();
        for x in 0..64 {
            let xm = ch.inputs().matrix(x);
            let mut total = BigRational::zero();
            for y in 0..64 {
                let ym = ch.outputs().matrix(y);
                let closed = matrix_transition_prob(&k, &xm, &ym).unwrap();
                assert!((closed - ch.prob_f64(x, y)).abs() < 1e-12, "x={x} y={y}");
                total += ch.prob(x, y);
            }
            assert!(total.is_one());
        }
    }

    #[test]
    fn noiseless_binary_channel_has_unit_capacity() {
        let dims = ChannelDims::new(2, 1, 1, 1).unwrap();
        let t = TransferDist::point(&FqMatrix::identity(f2(), 1)).unwrap();
        let ch = build_explicit_channel(dims, t, DEFAULT_CAP).unwrap();
        let cap = exact_capacity(&ch, 1e-12, 1000).unwrap();
        assert!((cap.capacity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_transfer_capacity_matches_rank_optimizer() {
        let (dims, ch) = uniform_channel();
        let exact = exact_capacity(&ch, 1e-9, 1_000_000).unwrap();
        let k = kernel(&dims, &RankDistribution::jafari(&dims)).unwrap();
        let ugr = optimize_capacity(&k, &OptimizerConfig::default()).unwrap();
        assert!((exact.capacity - ugr.capacity).abs() < 1e-5, "{} vs {}", exact.capacity, ugr.capacity);
    }

    #[test]
    fn cap_is_enforced() {
        let dims = ChannelDims::new(2, 2, 2, 3).unwrap();
        let space = MatrixSpace::new(f2(), 2, 2, DEFAULT_CAP).unwrap();
        let t = TransferDist::ugr(space, &jafari_exact(&dims)).unwrap();
        assert!(matches!(
            build_explicit_channel(dims, t, 32),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn zero_transfer_subspace_channel() {
        let dims = ChannelDims::new(2, 2, 2, 3).unwrap();
        let t = TransferDist::point(&FqMatrix::zeros(f2(), 2, 2)).unwrap();
        let ch = build_explicit_channel(dims, t, DEFAULT_CAP).unwrap();
        let sc = build_subspace_channel(&ch).unwrap();
        let zero = sc.outputs().iter().position(|s| s.dim() == 0).unwrap();
        for u in 0..sc.inputs().len() {
            assert_eq!(sc.row(u), &[(zero, BigRational::one())]);
        }
    }

    #[test]
    fn subspace_channel_preserves_information() {
        let (_, ch) = uniform_channel();
        let sc = build_subspace_channel(&ch).unwrap();
        // 1 + 7 + 7 subspaces of F_2^3 of dimension at most 2.
        assert_eq!(sc.inputs().len(), 15);
        for u in 0..sc.inputs().len() {
            let total: BigRational = sc.row(u).iter().map(|(_, p)| p).sum();
            assert!(total.is_one());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let w: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
            let z: f64 = w.iter().sum();
            let pu: Vec<f64> = w.iter().map(|x| x / z).collect();
            let px = ugr_input_distribution(ch.inputs(), &pu).unwrap();
            let a = ch.mutual_information(&px);
            let b = sc.mutual_information(&sc.group_input(&px));
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn non_ugr_transfer_fails_grouping() {
        let dims = ChannelDims::new(2, 2, 2, 3).unwrap();
        let g = FqMatrix::from_rows(f2(), &[[1u32, 0], [0, 0]]).unwrap();
        let ch = build_explicit_channel(dims, TransferDist::point(&g).unwrap(), DEFAULT_CAP).unwrap();
        assert!(matches!(
            build_subspace_channel(&ch),
            Err(Error::GroupingInconsistency(_))
        ));
    }
}
