//! Set-partition combinatorics and j-pattern sequences.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Stirling number of the second kind `S_n^{(j)}`.
pub fn stirling2(n: usize, j: usize) -> BigUint {
    if j > n {
        return BigUint::zero();
    }
    // row-by-row recursion, only columns 0..=j are needed
    let mut row = vec![BigUint::zero(); j + 1];
    row[0] = BigUint::one();
    for i in 1..=n {
        for k in (1..=j.min(i)).rev() {
            row[k] = &row[k - 1] + BigUint::from(k) * &row[k];
        }
        row[0] = BigUint::zero();
    }
    row[j].clone()
}

/// Bell number `B_n = Σ_j S_n^{(j)}`.
pub fn bell(n: usize) -> BigUint {
    (0..=n).map(|j| stirling2(n, j)).sum()
}

/// Canonical representative of an index-sequence equivalence class.
///
/// `s(0) = 1`, and each later entry is either `ℓ + 1` (first visit of a new
/// message) or repeats an earlier entry.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternSequence {
    entries: Vec<usize>,
}

impl PatternSequence {
    pub fn new(entries: Vec<usize>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidProfile(
                "a pattern sequence is non-empty".into(),
            ));
        }
        for (ell, &v) in entries.iter().enumerate() {
            if v != ell + 1 && !entries[..ell].contains(&v) {
                return Err(Error::InvalidProfile(format!(
                    "entry {ell} is {v}: neither {} nor an earlier value",
                    ell + 1
                )));
            }
        }
        Ok(PatternSequence { entries })
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Level of sub-block `q`.
    pub fn level(&self, q: usize) -> usize {
        self.entries[q]
    }

    /// Number of distinct levels `d(s)`.
    pub fn distinct(&self) -> usize {
        self.entries
            .iter()
            .enumerate()
            .filter(|&(ell, &v)| v == ell + 1)
            .count()
    }
}

impl fmt::Debug for PatternSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PatternSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Visits every j-pattern in lexicographic order without materialising the set.
pub fn for_each_pattern(j: usize, mut f: impl FnMut(&[usize])) {
    if j == 0 {
        return;
    }
    let mut buf = Vec::with_capacity(j);
    buf.push(1);
    // distinct values seen so far, ascending
    let mut levels = vec![1];
    recurse(j, &mut buf, &mut levels, &mut f);
}

fn recurse(j: usize, buf: &mut Vec<usize>, levels: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if buf.len() == j {
        f(buf);
        return;
    }
    for i in 0..levels.len() {
        buf.push(levels[i]);
        recurse(j, buf, levels, f);
        buf.pop();
    }
    let fresh = buf.len() + 1;
    buf.push(fresh);
    levels.push(fresh);
    recurse(j, buf, levels, f);
    levels.pop();
    buf.pop();
}

/// All j-patterns, lexicographically ordered; `|P_j| = B_j`.
pub fn enumerate_patterns(j: usize) -> Vec<PatternSequence> {
    let mut out = Vec::new();
    for_each_pattern(j, |s| {
        out.push(PatternSequence {
            entries: s.to_vec(),
        })
    });
    out
}

/// Canonical pattern of an index sequence `i_0 .. i_{j-1}`.
pub fn pattern_of<T: PartialEq>(indices: &[T]) -> PatternSequence {
    let entries = indices
        .iter()
        .enumerate()
        .map(|(q, x)| indices.iter().position(|y| y == x).unwrap_or(q) + 1)
        .collect();
    PatternSequence { entries }
}

/// Class size `n(s) = (K-1)(K-2)..(K-d(s)+1)`; zero when `K < d(s)`.
pub fn class_size(s: &PatternSequence, k: usize) -> BigUint {
    falling(k, s.distinct())
}

pub(crate) fn falling(k: usize, d: usize) -> BigUint {
    if k < d || k == 0 {
        return BigUint::zero();
    }
    (1..d).map(|i| BigUint::from(k - i)).product()
}
