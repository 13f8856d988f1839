use std::collections::HashMap;

use ccs_core::analyzer::*;
use ccs_core::dyadic::Dyadic;
use num_bigint::BigUint;
use proptest::prelude::*;

fn s(v: &[usize]) -> PatternSequence {
    PatternSequence::new(v.to_vec()).unwrap()
}

/// Restricted-growth strings counted directly, independent of the pattern code.
fn count_set_partitions(n: usize) -> u64 {
    fn go(pos: usize, n: usize, blocks: usize) -> u64 {
        if pos == n {
            return 1;
        }
        (0..=blocks)
            .map(|b| go(pos + 1, n, blocks.max(b + 1)))
            .sum()
    }
    if n == 0 {
        1
    } else {
        go(1, n, 1)
    }
}

#[test]
fn pattern_counts_are_bell_numbers() {
    for j in 1..=8 {
        let pats = enumerate_patterns(j);
        assert_eq!(BigUint::from(pats.len()), bell(j));
        assert_eq!(pats.len() as u64, count_set_partitions(j));
        for p in &pats {
            assert!(PatternSequence::new(p.entries().to_vec()).is_ok());
        }
        let mut sorted = pats.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), pats.len());
    }
}

#[test]
fn small_pattern_sets_are_listed_in_order() {
    let show = |j| {
        enumerate_patterns(j)
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
    };
    assert_eq!(show(1), ["(1)"]);
    assert_eq!(show(2), ["(1,1)", "(1,2)"]);
    assert_eq!(
        show(3),
        ["(1,1,1)", "(1,1,3)", "(1,2,1)", "(1,2,2)", "(1,2,3)"]
    );
}

#[test]
fn class_sizes_sum_to_path_count() {
    for j in 1..=6 {
        let pats = enumerate_patterns(j);
        for k in 1..=10usize {
            let total: BigUint = pats.iter().map(|p| class_size(p, k)).sum();
            assert_eq!(total, BigUint::from(k).pow(j as u32 - 1), "j={j} K={k}");
        }
    }
}

#[test]
fn pattern_fibers_have_class_size() {
    for k in 1..=5usize {
        for j in 1..=4usize {
            let mut fibers: HashMap<PatternSequence, u64> = HashMap::new();
            // index sequences with i_0 fixed
            let total = k.pow(j as u32 - 1);
            for code in 0..total {
                let mut idx = vec![0usize];
                let mut c = code;
                for _ in 1..j {
                    idx.push(c % k);
                    c /= k;
                }
                *fibers.entry(pattern_of(&idx)).or_default() += 1;
            }
            for p in enumerate_patterns(j) {
                let got = fibers.get(&p).copied().unwrap_or(0);
                assert_eq!(BigUint::from(got), class_size(&p, k), "{p} K={k}");
            }
        }
    }
}

#[test]
fn events_partition_the_space() {
    let mut rng = ccs_core::seed::SeedPath::new(8).rng();
    use rand::Rng;
    for _ in 0..20 {
        let m: Vec<usize> = (0..5).map(|_| rng.random_range(0..=12)).collect();
        for j in 1..=5 {
            for p in enumerate_patterns(j) {
                let total: Dyadic = StageSet::subsets(j)
                    .map(|set| prob_e(&p, set, &m).unwrap())
                    .sum();
                assert!(total.is_one(), "{p} {m:?}: {total}");
            }
        }
    }
}

#[test]
fn block_sets_partition_their_universe() {
    for j in 2..=6 {
        for p in enumerate_patterns(j) {
            for set in StageSet::subsets(j) {
                for q in 1..j {
                    let b = block_sets(q, set, &p).unwrap();
                    let comp: StageSet = (1..j).filter(|&k| k != q && !set.contains(k)).collect();
                    let below: StageSet = (1..q).filter(|&k| set.contains(k)).collect();
                    assert_eq!(b.complement_union(), Some(comp));
                    assert_eq!(b.tilde_union(), Some(below));
                }
            }
        }
    }
}

#[test]
fn exact_expectation_matches_oracle() {
    let configs: [(usize, &[usize], &[usize], usize); 5] = [
        (3, &[2, 2, 2], &[0, 1, 1, 2], 3),
        (2, &[3, 2], &[0, 1, 2], 2),
        (4, &[2, 3, 2], &[0, 2, 2, 3], 3),
        (3, &[1, 1, 1, 1], &[0, 1, 1, 1, 1], 4),
        (4, &[2], &[0, 1], 1),
    ];
    for (i, (k, m, l, stage)) in configs.into_iter().enumerate() {
        let exact = expected_survivors_exact(k, m, l, stage).unwrap();
        let est = mc_survivor_oracle(k, m, l, stage, 20_000, 100 + i as u64).unwrap();
        assert!(
            (est.mean - exact).abs() <= 3.0 * est.stderr,
            "config {i}: oracle {} ± {} vs exact {exact}",
            est.mean,
            est.stderr
        );
    }
}

#[test]
fn oracle_without_parity_counts_every_path() {
    let est = mc_survivor_oracle(4, &[3, 3, 3], &[0, 0, 0, 0], 3, 10, 1).unwrap();
    assert_eq!((est.mean, est.stderr), (63.0, 0.0));
}

#[test]
fn exact_converges_to_approx_for_wide_fragments() {
    let m = [60usize; 5];
    for l in [[0usize, 1, 2, 1, 3], [0, 6, 8, 8, 8]] {
        for k in 2..=6 {
            for stage in 1..=4 {
                let exact = expected_survivors_exact(k, &m, &l, stage).unwrap();
                let approx = expected_survivors_approx(k, &l, stage);
                assert!(
                    ((exact - approx) / approx).abs() <= 1e-6,
                    "K={k} stage={stage}"
                );
            }
        }
    }
}

#[test]
fn exact_is_monotone_in_allocations() {
    let k = 4;
    let base_m = [2usize, 2, 2];
    let base_l = [0usize, 1, 1, 1];
    let stage = 3;
    let base = expected_survivors_exact(k, &base_m, &base_l, stage).unwrap();
    for q in 0..3 {
        let mut m = base_m;
        m[q] += 2;
        assert!(expected_survivors_exact(k, &m, &base_l, stage).unwrap() <= base + 1e-15);
    }
    for q in 1..4 {
        let mut l = base_l;
        l[q] += 2;
        assert!(expected_survivors_exact(k, &base_m, &l, stage).unwrap() <= base + 1e-15);
    }
}

#[test]
fn documented_pgfs() {
    let one = pgf(&s(&[1, 1, 1]), &[4, 4], &[0, 3, 3]).unwrap();
    assert_eq!(one.terms().len(), 1);
    assert!(one.coefficient(0).is_one());
    assert_eq!(one.eval(0.5), 1.0);
}

proptest! {
    #[test]
    fn closed_form_pgfs(m0 in 0usize..=16, m1 in 0usize..=16, l1 in 1usize..=16, l2 in 1usize..=16) {
        let m = [m0, m1];
        let l = [0, l1, l2];
        let f113 = pgf(&s(&[1, 1, 3]), &m, &l).unwrap();
        let a = Dyadic::pow2_neg((m0 + m1) as u32);
        prop_assert_eq!(f113.coefficient(l2 as u64), a.complement());
        prop_assert_eq!(f113.coefficient(0), a);
        let f122 = pgf(&s(&[1, 2, 2]), &m, &l).unwrap();
        let b = Dyadic::pow2_neg(m0 as u32);
        prop_assert_eq!(f122.coefficient((l1 + l2) as u64), b.complement());
        prop_assert_eq!(f122.coefficient(0), b);
    }

    #[test]
    fn pgfs_are_normalised(seed in any::<u64>(), j in 1usize..=6) {
        use rand::Rng;
        let mut rng = ccs_core::seed::SeedPath::new(seed).rng();
        let m: Vec<usize> = (0..j).map(|_| rng.random_range(0..8)).collect();
        let l: Vec<usize> = (0..=j).map(|_| rng.random_range(0..8)).collect();
        for p in enumerate_patterns(j) {
            let f = pgf(&p, &m, &l).unwrap();
            prop_assert!(f.total().is_one());
            prop_assert_eq!(f.eval_pow2_neg(1), survival_probability(&p, &m, &l).unwrap());
        }
    }

    #[test]
    fn pattern_is_permutation_invariant(idx in prop::collection::vec(0usize..6, 1..9), shift in 1usize..6) {
        let perm: Vec<usize> = idx.iter().map(|i| (i * 5 + shift) % 6).collect();
        let p = pattern_of(&idx);
        prop_assert_eq!(&p, &pattern_of(&perm));
        prop_assert!(enumerate_patterns(idx.len()).contains(&p));
    }
}
