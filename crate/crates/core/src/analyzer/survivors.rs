//! Expected number of erroneous surviving paths and the column-reduction ratio.

use num_bigint::BigUint;

use crate::analyzer::events::survival_probability;
use crate::analyzer::patterns::{falling, for_each_pattern, PatternSequence};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// Longest pattern the exact computation will enumerate (`B_12` classes).
pub const MAX_EXACT_PATTERN_LEN: usize = 12;

/// Exact `E[L_stage]` per root: erroneous paths from one root that satisfy every
/// parity constraint up to and including slot `stage`.
///
/// Messages are i.i.d. uniform and `G` is uniformly random. `m` must cover slots
/// `0..stage` and `l` slots `0..=stage`.
pub fn expected_survivors_exact_dyadic(
    k: usize,
    m: &[usize],
    l: &[usize],
    stage: usize,
) -> Result<Dyadic> {
    let j = stage + 1;
    if j > MAX_EXACT_PATTERN_LEN {
        return Err(Error::GuardExceeded {
            what: "pattern length (stage + 1)",
            value: j,
            limit: MAX_EXACT_PATTERN_LEN,
        });
    }
    if m.len() < stage || l.len() < j {
        return Err(Error::DimensionMismatch {
            context: "profile length for requested stage",
            expected: j,
            actual: l.len().min(m.len() + 1),
        });
    }
    if k == 0 {
        return Ok(Dyadic::zero());
    }
    // Σ_s n(s) Φ_s(1/2), grouped by d(s) since n(s) depends on d(s) only
    let mut by_distinct = vec![Dyadic::zero(); j + 1];
    let mut failure = None;
    for_each_pattern(j, |s| {
        if failure.is_some() {
            return;
        }
        let d = s.iter().enumerate().filter(|&(i, &v)| v == i + 1).count();
        if d > k {
            return;
        }
        let pattern = PatternSequence::new(s.to_vec()).expect("enumerated patterns are valid");
        match survival_probability(&pattern, m, l) {
            Ok(p) => by_distinct[d] += &p,
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let total: Dyadic = by_distinct
        .iter()
        .enumerate()
        .skip(1)
        .map(|(d, sum)| &Dyadic::from_integer(falling(k, d)) * sum)
        .sum();
    Ok(total
        .checked_sub(&Dyadic::one())
        .expect("the valid path always survives"))
}

pub fn expected_survivors_exact(k: usize, m: &[usize], l: &[usize], stage: usize) -> Result<f64> {
    expected_survivors_exact_dyadic(k, m, l, stage).map(|d| d.to_f64())
}

/// `E[L_stage] ≈ Σ_{q=1}^{stage} K^{stage-q} (K-1) Π_{ℓ=q}^{stage} 2^{-l_ℓ}`,
/// valid when fragments of distinct messages never coincide.
pub fn expected_survivors_approx(k: usize, l: &[usize], stage: usize) -> f64 {
    assert!(stage < l.len(), "stage {stage} beyond parity profile");
    let k = k as f64;
    if k == 0.0 {
        return 0.0;
    }
    (1..=stage)
        .map(|q| {
            let survive: f64 = (q..=stage).map(|ell| (-(l[ell] as f64)).exp2()).product();
            k.powi((stage - q) as i32) * (k - 1.0) * survive
        })
        .sum()
}

/// Expected live paths over all roots after `stage`: `K (1 + E[L_stage])`.
pub fn expected_live_paths(k: usize, l: &[usize], stage: usize) -> f64 {
    k as f64 * (1.0 + expected_survivors_approx(k, l, stage))
}

fn ratio(l_j: usize, paths: f64) -> f64 {
    if paths <= 0.0 {
        return 0.0;
    }
    if l_j == 0 {
        return 1.0;
    }
    // 1 - (1 - 2^-l)^P without cancellation for large l
    -(paths * (-(-(l_j as f64)).exp2()).ln_1p()).exp_m1()
}

/// Fraction of slot-`slot` columns kept after pruning, `1 - (1 - 2^{-l_j})^{P_j}`
/// with `P_j = K (1 + E[L_j])`.
pub fn reduction_ratio(k: usize, l: &[usize], slot: usize) -> f64 {
    if slot == 0 {
        return 1.0;
    }
    ratio(l[slot], expected_live_paths(k, l, slot))
}

/// The same ratio with the exponent counted on paths entering the slot,
/// `P_{j-1} = K (1 + E[L_{j-1}])` and `P_0 = K`.
pub fn reduction_ratio_entering(k: usize, l: &[usize], slot: usize) -> f64 {
    if slot == 0 {
        return 1.0;
    }
    ratio(l[slot], expected_live_paths(k, l, slot - 1))
}

/// The ratio with `E[L_j]` reduced to its `q = j` term, `(K-1) 2^{-l_j}`.
pub fn reduction_ratio_last_stage(k: usize, l: &[usize], slot: usize) -> f64 {
    if slot == 0 {
        return 1.0;
    }
    let k_f = k as f64;
    let e = if k == 0 {
        0.0
    } else {
        (k_f - 1.0) * (-(l[slot] as f64)).exp2()
    };
    ratio(l[slot], k_f * (1.0 + e))
}

/// Bell number of the pattern length used by [`expected_survivors_exact`].
pub fn exact_class_count(stage: usize) -> BigUint {
    crate::analyzer::patterns::bell(stage + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_user_has_no_survivors() {
        let (m, l) = ([3, 3, 3], [0, 2, 2, 2]);
        for stage in 0..4 {
            assert!(expected_survivors_exact_dyadic(1, &m, &l, stage)
                .unwrap()
                .is_zero());
            assert_eq!(expected_survivors_approx(1, &l, stage), 0.0);
        }
    }

    #[test]
    fn stage_one_hand_expansion() {
        // P_2 = {(1,1), (1,2)}: n = 1, K-1; Φ_(1,2)(1/2) = 2^{-l_1}(1-2^{-m_0}) + 2^{-m_0}
        for (k, m0, l1) in [(3usize, 2usize, 1usize), (5, 4, 3), (2, 1, 6)] {
            let expected = (k as f64 - 1.0)
                * ((-(l1 as f64)).exp2() * (1.0 - (-(m0 as f64)).exp2()) + (-(m0 as f64)).exp2());
            let got = expected_survivors_exact(k, &[m0], &[0, l1], 1).unwrap();
            assert!((got - expected).abs() < 1e-15, "{got} vs {expected}");
        }
    }

    #[test]
    fn guard_and_profile_errors() {
        let m = vec![4; 13];
        let l = vec![2; 13];
        assert!(matches!(
            expected_survivors_exact(3, &m, &l, 12),
            Err(Error::GuardExceeded { .. })
        ));
        assert!(expected_survivors_exact(3, &m[..1], &l, 3).is_err());
    }

    #[test]
    fn reduction_first_slot_value() {
        let l = [0, 6, 8, 8, 8, 8, 8, 8, 8, 13, 15];
        assert_eq!(expected_survivors_approx(25, &l, 1), 0.375);
        assert_eq!(reduction_ratio(25, &l, 0), 1.0);
        assert!((reduction_ratio(25, &l, 1) - 0.41804).abs() < 5e-6);
        let entering = reduction_ratio_entering(25, &l, 1);
        assert!((entering - (1.0 - (63.0f64 / 64.0).powi(25))).abs() < 1e-12);
    }

    #[test]
    fn last_stage_ratio_agrees_on_first_slot() {
        let l = [0, 6, 8, 8, 8, 8, 8, 8, 8, 13, 15];
        assert_eq!(
            reduction_ratio_last_stage(25, &l, 1),
            reduction_ratio(25, &l, 1)
        );
        assert!(reduction_ratio_last_stage(100, &l, 9) < reduction_ratio(100, &l, 9));
    }
}
