//! Brute-force Monte Carlo count of surviving erroneous paths.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seed::SeedPath;

pub const ORACLE_MAX_USERS: usize = 6;
pub const ORACLE_MAX_STAGE: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Samples i.i.d. messages and a random generator per trial, then counts the
/// erroneous paths rooted at message 0 that pass every check through `stage`.
pub fn mc_survivor_oracle(
    k: usize,
    m: &[usize],
    l: &[usize],
    stage: usize,
    trials: usize,
    seed: u64,
) -> Result<OracleEstimate> {
    if k > ORACLE_MAX_USERS || k == 0 {
        return Err(Error::GuardExceeded {
            what: "oracle user count",
            value: k,
            limit: ORACLE_MAX_USERS,
        });
    }
    if stage > ORACLE_MAX_STAGE {
        return Err(Error::GuardExceeded {
            what: "oracle stage",
            value: stage,
            limit: ORACLE_MAX_STAGE,
        });
    }
    if m.len() < stage || l.len() <= stage {
        return Err(Error::DimensionMismatch {
            context: "profile length for requested stage",
            expected: stage + 1,
            actual: l.len().min(m.len() + 1),
        });
    }
    if m[..stage].iter().chain(&l[..=stage]).any(|&b| b > 64) {
        return Err(Error::InvalidConfig(
            "oracle fragments are limited to 64 bits".into(),
        ));
    }
    if trials == 0 {
        return Err(Error::InvalidConfig(
            "at least one trial is required".into(),
        ));
    }
    let root = SeedPath::new(seed).push("survivor-oracle");
    let counts: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| one_trial(k, m, l, stage, &root.child(t)) as f64)
        .collect();
    let n = trials as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let var = if trials > 1 {
        counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(OracleEstimate {
        mean,
        stderr: (var / n).sqrt(),
        trials,
    })
}

fn mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

fn one_trial(k: usize, m: &[usize], l: &[usize], stage: usize, path: &SeedPath) -> u64 {
    let mut rng = path.rng();
    // w[i][ℓ]: fragment ℓ of message i
    let w: Vec<Vec<u64>> = (0..k)
        .map(|_| {
            (0..stage)
                .map(|ell| rng.random::<u64>() & mask(m[ell]))
                .collect()
        })
        .collect();
    // g[ℓ][q]: rows of the block mapping fragment ℓ to the parity of stage q
    let g: Vec<Vec<Vec<u64>>> = (0..stage)
        .map(|ell| {
            (0..=stage)
                .map(|q| {
                    if q <= ell {
                        Vec::new()
                    } else {
                        (0..m[ell])
                            .map(|_| rng.random::<u64>() & mask(l[q]))
                            .collect()
                    }
                })
                .collect()
        })
        .collect();
    let times = |x: u64, rows: &[u64]| -> u64 {
        rows.iter()
            .enumerate()
            .filter(|&(b, _)| x >> b & 1 == 1)
            .fold(0, |acc, (_, r)| acc ^ r)
    };
    // contrib[i][ℓ][q] = w_i(ℓ) G_{ℓ,q-1}
    let contrib: Vec<Vec<Vec<u64>>> = (0..k)
        .map(|i| {
            (0..stage)
                .map(|ell| {
                    (0..=stage)
                        .map(|q| {
                            if q > ell {
                                times(w[i][ell], &g[ell][q])
                            } else {
                                0
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    // own parity of message i at stage q
    let own: Vec<Vec<u64>> = (0..k)
        .map(|i| {
            (0..=stage)
                .map(|q| (0..q).fold(0, |acc, ell| acc ^ contrib[i][ell][q]))
                .collect()
        })
        .collect();

    let mut idx = vec![0usize; stage + 1];
    let mut survivors = 0u64;
    loop {
        let ok = (1..=stage).all(|q| {
            let predicted = (0..q).fold(0, |acc, ell| acc ^ contrib[idx[ell]][ell][q]);
            predicted == own[idx[q]][q]
        });
        if ok {
            survivors += 1;
        }
        // odometer over idx[1..=stage]; idx[0] stays at the root
        let mut pos = stage;
        loop {
            if pos == 0 {
                return survivors - 1;
            }
            idx[pos] += 1;
            if idx[pos] < k {
                break;
            }
            idx[pos] = 0;
            pos -= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_parity_means_every_path_survives() {
        let est = mc_survivor_oracle(3, &[2, 2, 2], &[0, 0, 0, 0], 3, 50, 1).unwrap();
        assert_eq!(est.mean, 26.0);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn single_user_never_has_survivors() {
        let est = mc_survivor_oracle(1, &[2, 2], &[0, 1, 1], 2, 100, 3).unwrap();
        assert_eq!(est.mean, 0.0);
    }

    #[test]
    fn guards() {
        assert!(mc_survivor_oracle(7, &[2; 3], &[0, 1, 1, 1], 2, 10, 0).is_err());
        assert!(mc_survivor_oracle(2, &[2; 6], &[1; 7], 6, 10, 0).is_err());
    }

    #[test]
    fn deterministic() {
        let a = mc_survivor_oracle(3, &[2, 3], &[0, 1, 2], 2, 200, 9).unwrap();
        let b = mc_survivor_oracle(3, &[2, 3], &[0, 1, 2], 2, 200, 9).unwrap();
        assert_eq!(a, b);
    }
}
