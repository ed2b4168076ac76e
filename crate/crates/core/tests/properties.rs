use num_bigint::BigUint;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mmc_core::capacity::{optimize_capacity, CapacityModel};
use mmc_core::enumeration::{count_rank_class, gaussian_binomial, gaussian_binomial_bounds};
use mmc_core::gf::{rank_gf2_packed, sample_uniform};
use mmc_core::oracle::{
    build_explicit_channel, exact_capacity, randomize_channel, MatrixSpace, TransferDist, DEFAULT_CAP,
    DEFAULT_GL_CAP,
};
use mmc_core::rank_channel::kernel;
use mmc_core::{ChannelDims, Field, FqMatrix, OptimizerConfig, RankDistribution};

fn field() -> impl Strategy<Value = Field> {
    prop::sample::select(vec![2u32, 3, 5, 7]).prop_map(|q| Field::new(q).unwrap())
}

fn matrix(f: Field, rows: usize, cols: usize, seed: u64) -> FqMatrix {
    sample_uniform(rows, cols, f, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn weights(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, len).prop_filter("nonzero mass", |w| w.iter().sum::<f64>() > 1e-3)
}

fn normalized(w: &[f64]) -> RankDistribution {
    let total: f64 = w.iter().sum();
    RankDistribution::new(w.iter().map(|x| x / total).collect()).unwrap()
}

proptest! {
    #[test]
    fn packed_gf2_rank_matches_elimination(rows in 1usize..9, cols in 1usize..9, seed: u64) {
        let a = matrix(Field::new(2).unwrap(), rows, cols, seed);
        let packed: Vec<u64> = (0..rows)
            .map(|i| a.row(i).iter().enumerate().fold(0u64, |w, (j, &b)| w | (u64::from(b) << j)))
            .collect();
        prop_assert_eq!(rank_gf2_packed(&packed), a.rank_generic());
        prop_assert_eq!(a.rank(), a.rank_generic());
    }

    #[test]
    fn multiplication_is_associative(f in field(), (a, b, c, d) in (1usize..5, 1usize..5, 1usize..5, 1usize..5), seed: u64) {
        let x = matrix(f, a, b, seed);
        let y = matrix(f, b, c, seed ^ 1);
        let z = matrix(f, c, d, seed ^ 2);
        prop_assert_eq!(x.mul(&y).unwrap().mul(&z).unwrap(), x.mul(&y.mul(&z).unwrap()).unwrap());
    }

    #[test]
    fn product_rank_obeys_sylvester(f in field(), (a, k, b) in (1usize..6, 1usize..6, 1usize..6), seed: u64) {
        let x = matrix(f, a, k, seed);
        let y = matrix(f, k, b, seed.wrapping_add(7));
        let (rx, ry, rxy) = (x.rank(), y.rank(), x.mul(&y).unwrap().rank());
        prop_assert!(rxy <= rx.min(ry));
        prop_assert!(rx + ry <= rxy + k);
    }

    #[test]
    fn output_row_space_lies_in_input_row_space(f in field(), (m, n, l) in (1usize..5, 1usize..5, 1usize..6), seed: u64) {
        let g = matrix(f, m, n, seed);
        let x = matrix(f, n, l, seed ^ 0xabc);
        let y = g.mul(&x).unwrap();
        prop_assert!(y.row_space().is_subspace_of(&x.row_space()));
        prop_assert_eq!(y.row_space().dim(), y.rank());
    }

    #[test]
    fn index_round_trips(f in field(), rows in 1usize..4, cols in 1usize..4, seed: u64) {
        let a = matrix(f, rows, cols, seed);
        prop_assert_eq!(FqMatrix::from_index(f, rows, cols, a.to_index()), a);
    }

    #[test]
    fn rank_classes_partition_the_matrix_space(q in prop::sample::select(vec![2u64, 3, 4, 5, 8, 9]), m in 0usize..5, n in 0usize..5) {
        let total: BigUint = (0..=m.min(n)).map(|r| count_rank_class(m, n, r, q)).sum();
        prop_assert_eq!(total, num_traits::pow(BigUint::from(q), m * n));
    }

    #[test]
    fn gaussian_binomial_is_symmetric_and_bounded(q in prop::sample::select(vec![2u64, 3, 5, 7]), n in 0usize..9, r in 0usize..9) {
        prop_assume!(r <= n);
        let g = gaussian_binomial(n as i64, r as i64, q);
        prop_assert_eq!(&g, &gaussian_binomial(n as i64, (n - r) as i64, q));
        prop_assert!(gaussian_binomial_bounds(n, r, q).unwrap().contains(&g));
    }

    #[test]
    fn kernel_rows_are_distributions(q in prop::sample::select(vec![2u64, 3, 5]), (n, m, extra) in (1usize..5, 1usize..5, 0usize..3), w in weights(5)) {
        let l = n.max(m) + extra;
        let dims = ChannelDims::new(q, n, m, l).unwrap();
        let rd = normalized(&w[..=n.min(m)]);
        let k = kernel(&dims, &rd).unwrap();
        for u in 0..=n {
            let row = k.row(u);
            prop_assert!(row.iter().all(|&p| p >= 0.0));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(row.iter().enumerate().all(|(v, &p)| v <= u || p == 0.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn capacity_lies_between_constant_rank_and_sandwich_top(q in prop::sample::select(vec![2u64, 3, 4]), (n, m, extra) in (1usize..5, 1usize..5, 0usize..5), w in weights(5)) {
        let l = n.max(m) + extra;
        let dims = ChannelDims::new(q, n, m, l).unwrap();
        let rd = normalized(&w[..=n.min(m)]);
        let k = kernel(&dims, &rd).unwrap();
        let res = CapacityModel::new(&k).optimize(&OptimizerConfig::default()).unwrap();
        let cu = res.per_rank_capacity[res.u_star];
        let top = cu + ((n + 1) as f64).ln() / (q as f64).ln();
        prop_assert!(res.capacity >= cu - 1e-9);
        prop_assert!(res.capacity <= top + 1e-9);
        prop_assert!(res.capacity <= (l * n.min(m)) as f64 + 1e-9);
    }
}

fn transfer_from_weights(w: &[u32]) -> TransferDist {
    let space = MatrixSpace::new(Field::new(2).unwrap(), 2, 2, DEFAULT_CAP).unwrap();
    let total: u32 = w.iter().sum();
    let probs = w.iter().map(|&x| BigRational::new(x.into(), total.into())).collect();
    TransferDist::new(space, probs).unwrap()
}

fn transfer_weights() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0u32..5, 16).prop_filter("nonzero mass", |w| w.iter().any(|&x| x > 0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn randomization_yields_ugr_with_same_marginal(w in transfer_weights()) {
        let t = transfer_from_weights(&w);
        let r = randomize_channel(&t, DEFAULT_GL_CAP).unwrap();
        prop_assert!(r.is_ugr());
        prop_assert_eq!(r.rank_marginal(), t.rank_marginal());
    }

    #[test]
    fn any_transfer_law_does_at_least_as_well_as_ugr(w in transfer_weights()) {
        let t = transfer_from_weights(&w);
        let dims = ChannelDims::new(2, 2, 2, 2).unwrap();
        let marginal = RankDistribution::from_exact(&t.rank_marginal()).unwrap();
        let ugr = optimize_capacity(&kernel(&dims, &marginal).unwrap(), &OptimizerConfig::default()).unwrap();
        let channel = build_explicit_channel(dims, t, DEFAULT_CAP).unwrap();
        let exact = exact_capacity(&channel, 1e-9, 10_000_000).unwrap();
        prop_assert!(exact.capacity >= ugr.capacity - 1e-8, "exact {} ugr {}", exact.capacity, ugr.capacity);
    }
}
