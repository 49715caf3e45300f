mod common;

use common::*;
use hjsr_core::set_radius::power_count;
use hjsr_core::*;
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn small_set() -> impl Strategy<Value = MatrixSet> {
    (2usize..=4).prop_flat_map(|d| set(d, 1..=3))
}

fn pair_of_sets() -> impl Strategy<Value = (MatrixSet, MatrixSet)> {
    (2usize..=3).prop_flat_map(|d| (set(d, 1..=3), set(d, 1..=3)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pruned_matches_exhaustive(s in small_set(), depth in 1usize..=6) {
        let exh = radius_bracket_detailed(&s, &EnumerationBudget::with_depth(depth)).unwrap();
        let pr = radius_bracket_detailed(&s, &EnumerationBudget::with_depth(depth).pruned(None)).unwrap();
        let delta = pr.stats.delta.unwrap_or(0.0);
        prop_assert!(pr.bracket.upper <= exh.bracket.upper + delta + TOL);
        prop_assert!(pr.bracket.lower >= exh.bracket.lower - delta - TOL);
        prop_assert!(pr.stats.products_evaluated <= exh.stats.products_evaluated);
    }

    #[test]
    fn lower_never_exceeds_upper(s in small_set(), m in 1usize..=4, m2 in 1usize..=4) {
        let lo = gsr_lower(&s, m, 1 << 20).unwrap();
        let hi = jsr_upper(&s, m2, 1 << 20).unwrap();
        prop_assert!(lo <= hi + TOL, "gsr_lower({}) = {} > jsr_upper({}) = {}", m, lo, m2, hi);
        let b = radius_bracket(&s, &EnumerationBudget::with_depth(4)).unwrap();
        prop_assert!(b.lower <= b.upper);
        prop_assert!(lo <= b.upper + TOL && b.lower <= hi + TOL);
    }

    #[test]
    fn power_identity(s in (2usize..=3).prop_flat_map(|d| set(d, 1..=2)), k in 1usize..=3, j in 1usize..=3, m in 1usize..=2) {
        let sk = set_power(&s, k, 1 << 20).unwrap();
        let kf = k as i32;
        prop_assert!(gsr_lower(&sk, m, 1 << 20).unwrap() <= jsr_upper(&s, j, 1 << 20).unwrap().powi(kf) * (1.0 + TOL) + TOL);
        prop_assert!(gsr_lower(&s, j, 1 << 20).unwrap().powi(kf) <= jsr_upper(&sk, m, 1 << 20).unwrap() * (1.0 + TOL) + TOL);
    }

    #[test]
    fn product_order_commutes((p, s) in pair_of_sets()) {
        let budget = EnumerationBudget::with_depth(4);
        let ps = radius_bracket(&set_product(&p, &s).unwrap(), &budget).unwrap();
        let sp = radius_bracket(&set_product(&s, &p).unwrap(), &budget).unwrap();
        prop_assert!(ps.lower <= sp.upper + TOL);
        prop_assert!(sp.lower <= ps.upper + TOL);
    }

    #[test]
    fn homogeneous(s in small_set(), c in 0.1f64..10.0) {
        let budget = EnumerationBudget::with_depth(3);
        let a = radius_bracket(&s, &budget).unwrap();
        let b = radius_bracket(&s.scale(c).unwrap(), &budget).unwrap();
        prop_assert!((b.upper - c * a.upper).abs() <= 1e-12 * b.upper.max(1e-300));
        prop_assert!((b.lower - c * a.lower).abs() <= 1e-9 * b.lower.max(1e-300));
    }

    #[test]
    fn set_sizes_multiply((p, s) in pair_of_sets(), m in 1usize..=3) {
        prop_assert_eq!(set_product(&p, &s).unwrap().len(), p.len() * s.len());
        prop_assert_eq!(set_power(&s, m, 1 << 20).unwrap().len() as u128, power_count(s.len(), m));
        let half = WeightVector::strict(vec![0.5, 0.5]).unwrap();
        prop_assert_eq!(hadamard_mean_of_sets(&[&p, &s], &half).unwrap().len(), p.len() * s.len());
    }
}

#[test]
fn deterministic_across_worker_counts() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let sets: Vec<MatrixSet> = (0..6).map(|i| sampling::random_set(&mut rng, 2 + i % 3, 2 + i % 2)).collect();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            sets.iter()
                .flat_map(|s| {
                    [EnumerationBudget::with_depth(7), EnumerationBudget::with_depth(7).pruned(None)]
                        .map(|b| radius_bracket_detailed(s, &b).unwrap())
                })
                .collect::<Vec<_>>()
        })
    };
    let one = run(1);
    let four = run(4);
    for (a, b) in one.iter().zip(&four) {
        assert_eq!(a.bracket.lower.to_bits(), b.bracket.lower.to_bits());
        assert_eq!(a.bracket.upper.to_bits(), b.bracket.upper.to_bits());
        assert_eq!(a.stats, b.stats);
    }
}

#[test]
fn singleton_bracket_is_sharp_at_depth_eight() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let a = sampling::random_positive_matrix(&mut rng, 4, 0.01);
        let b = radius_bracket(&MatrixSet::singleton(a), &EnumerationBudget::with_depth(8)).unwrap();
        assert!(b.width() <= 0.05 * b.upper);
    }
}

#[test]
fn depth_refines_monotonically() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let s = sampling::random_set(&mut rng, 3, 3);
        let mut prev = radius_bracket(&s, &EnumerationBudget::with_depth(1)).unwrap();
        for d in 2..=6 {
            let b = radius_bracket(&s, &EnumerationBudget::with_depth(d)).unwrap();
            assert!(b.lower >= prev.lower && b.upper <= prev.upper);
            prev = b;
        }
    }
}
