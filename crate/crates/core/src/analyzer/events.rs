//! Discriminating-parity events of a pattern class and their generating functions.

use std::collections::BTreeMap;
use std::fmt;

use crate::analyzer::patterns::PatternSequence;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// A subset of the stage indices `[1:j-1]`, stored as a bit mask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StageSet(u64);

impl StageSet {
    pub const EMPTY: StageSet = StageSet(0);

    pub fn from_mask(mask: u64) -> Self {
        StageSet(mask)
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn contains(self, q: usize) -> bool {
        q < 64 && self.0 >> q & 1 == 1
    }

    pub fn insert(&mut self, q: usize) {
        assert!(q < 64, "stage index {q} exceeds the set capacity");
        self.0 |= 1 << q;
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn max(self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&q| self.contains(q))
    }

    /// Every subset of `[1:j-1]`, in binary-counter order.
    pub fn subsets(j: usize) -> impl Iterator<Item = StageSet> {
        let count = 1u64 << j.saturating_sub(1);
        (0..count).map(|c| StageSet(c << 1))
    }

    fn disjoint_union(self, other: StageSet) -> Option<StageSet> {
        (self.0 & other.0 == 0).then_some(StageSet(self.0 | other.0))
    }
}

impl FromIterator<usize> for StageSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = StageSet::EMPTY;
        for q in iter {
            s.insert(q);
        }
        s
    }
}

impl fmt::Debug for StageSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// The six index sets attached to stage `q` of class `s` under discriminating set `S`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockSets {
    /// Earlier stages outside `S` at a different level.
    pub under_g: StageSet,
    /// Earlier stages outside `S` at the same level.
    pub under_q: StageSet,
    /// Later stages outside `S` at a different level.
    pub over_g: StageSet,
    /// Later stages outside `S` at the same level.
    pub over_q: StageSet,
    /// Earlier stages inside `S` at a different level.
    pub under_g_tilde: StageSet,
    /// Earlier stages inside `S` at the same level.
    pub under_q_tilde: StageSet,
}

impl BlockSets {
    /// `under_g ⊎ under_q ⊎ over_g ⊎ over_q`, or `None` if the parts overlap.
    pub fn complement_union(&self) -> Option<StageSet> {
        self.under_g
            .disjoint_union(self.under_q)?
            .disjoint_union(self.over_g)?
            .disjoint_union(self.over_q)
    }

    /// `under_g_tilde ⊎ under_q_tilde`, or `None` if the parts overlap.
    pub fn tilde_union(&self) -> Option<StageSet> {
        self.under_g_tilde.disjoint_union(self.under_q_tilde)
    }
}

fn check_stage_set(s: &PatternSequence, set: StageSet) -> Result<()> {
    let j = s.len();
    if set.contains(0) || set.max().is_some_and(|q| q >= j) {
        return Err(Error::InvalidConfig(format!(
            "stage set {set:?} is not a subset of [1:{}]",
            j - 1
        )));
    }
    Ok(())
}

pub fn block_sets(q: usize, set: StageSet, s: &PatternSequence) -> Result<BlockSets> {
    let j = s.len();
    if q == 0 || q >= j {
        return Err(Error::StageOutOfRange {
            stage: q,
            min: 1,
            max: j.saturating_sub(1),
        });
    }
    check_stage_set(s, set)?;
    let mut b = BlockSets {
        under_g: StageSet::EMPTY,
        under_q: StageSet::EMPTY,
        over_g: StageSet::EMPTY,
        over_q: StageSet::EMPTY,
        under_g_tilde: StageSet::EMPTY,
        under_q_tilde: StageSet::EMPTY,
    };
    let level = s.level(q);
    for k in 1..j {
        if k == q {
            continue;
        }
        let same = s.level(k) == level;
        let target = match (k < q, set.contains(k), same) {
            (true, false, false) => &mut b.under_g,
            (true, false, true) => &mut b.under_q,
            (false, false, false) => &mut b.over_g,
            (false, false, true) => &mut b.over_q,
            (true, true, false) => &mut b.under_g_tilde,
            (true, true, true) => &mut b.under_q_tilde,
            (false, true, _) => continue,
        };
        target.insert(k);
    }
    Ok(b)
}

/// `Σ_{j<q, s(j) ≠ s(q)} m_j`: information bits that must coincide for the
/// parity of stage `q` to be blind to the erroneous path.
fn mismatch_bits(s: &PatternSequence, q: usize, m: &[usize]) -> u32 {
    let level = s.level(q);
    (0..q)
        .filter(|&j| s.level(j) != level)
        .map(|j| m[j] as u32)
        .sum()
}

fn check_info_profile(s: &PatternSequence, m: &[usize]) -> Result<()> {
    let need = s.len().saturating_sub(1);
    if m.len() < need {
        return Err(Error::DimensionMismatch {
            context: "information-bit profile length",
            expected: need,
            actual: m.len(),
        });
    }
    Ok(())
}

/// Probability that the parity of stage `q` is non-discriminating for class `s`.
pub fn prob_a(q: usize, s: &PatternSequence, m: &[usize]) -> Result<Dyadic> {
    if q == 0 || q >= s.len() {
        return Err(Error::StageOutOfRange {
            stage: q,
            min: 1,
            max: s.len().saturating_sub(1),
        });
    }
    check_info_profile(s, m)?;
    Ok(Dyadic::pow2_neg(mismatch_bits(s, q, m)))
}

/// Probability that exactly the stages in `S` carry discriminating parity.
pub fn prob_e(s: &PatternSequence, set: StageSet, m: &[usize]) -> Result<Dyadic> {
    check_info_profile(s, m)?;
    check_stage_set(s, set)?;
    let mut prob = Dyadic::one();
    for q in 1..s.len() {
        let b = block_sets(q, set, s)?;
        let base = b.under_q.max().map_or(0, |p| mismatch_bits(s, p, m));
        let cond = Dyadic::pow2_neg(mismatch_bits(s, q, m) - base);
        let factor = if !set.contains(q) {
            cond
        } else if !b.over_q.is_empty() {
            Dyadic::zero()
        } else if !b.under_q_tilde.is_empty() {
            Dyadic::one()
        } else {
            cond.complement()
        };
        if factor.is_zero() {
            return Ok(Dyadic::zero());
        }
        prob *= &factor;
    }
    Ok(prob)
}

/// A probability generating function `Σ_t c_t x^t` with exact coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparsePgf {
    terms: BTreeMap<u64, Dyadic>,
}

impl SparsePgf {
    pub fn new() -> Self {
        SparsePgf::default()
    }

    /// Adds `c x^t`, merging equal exponents. Zero coefficients are dropped.
    pub fn add_term(&mut self, t: u64, c: Dyadic) {
        if c.is_zero() {
            return;
        }
        *self.terms.entry(t).or_insert_with(Dyadic::zero) += &c;
    }

    pub fn coefficient(&self, t: u64) -> Dyadic {
        self.terms.get(&t).cloned().unwrap_or_else(Dyadic::zero)
    }

    pub fn terms(&self) -> &BTreeMap<u64, Dyadic> {
        &self.terms
    }

    /// `Φ(1)`.
    pub fn total(&self) -> Dyadic {
        self.terms.values().cloned().sum()
    }

    /// `Φ(2^-e)`, exact.
    pub fn eval_pow2_neg(&self, e: u32) -> Dyadic {
        self.terms.iter().map(|(&t, c)| c.shr(e * t as u32)).sum()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&t, c)| c.to_f64() * x.powi(t as i32))
            .sum()
    }
}

fn check_parity_profile(s: &PatternSequence, l: &[usize]) -> Result<()> {
    if l.len() < s.len() {
        return Err(Error::DimensionMismatch {
            context: "parity-bit profile length",
            expected: s.len(),
            actual: l.len(),
        });
    }
    Ok(())
}

/// `Φ_s(x) = Σ_S Pr(E_{s,S}) x^{Σ_{q∈S} l_q}` by enumeration of all `2^{j-1}` subsets.
pub fn pgf(s: &PatternSequence, m: &[usize], l: &[usize]) -> Result<SparsePgf> {
    check_parity_profile(s, l)?;
    if s.len() > 21 {
        return Err(Error::GuardExceeded {
            what: "pattern length for subset enumeration",
            value: s.len(),
            limit: 21,
        });
    }
    let mut out = SparsePgf::new();
    for set in StageSet::subsets(s.len()) {
        let p = prob_e(s, set, m)?;
        let t: u64 = set.iter().map(|q| l[q] as u64).sum();
        out.add_term(t, p);
    }
    Ok(out)
}

/// `Φ_s(1/2)`, the probability that an erroneous path of class `s` survives.
///
/// Non-discriminating events nest along each level, so only subsets that are a
/// suffix of every level's stages carry mass and the sum factorises per level.
pub fn survival_probability(s: &PatternSequence, m: &[usize], l: &[usize]) -> Result<Dyadic> {
    check_info_profile(s, m)?;
    check_parity_profile(s, l)?;
    let j = s.len();
    let mut prob = Dyadic::one();
    let mut seen = vec![false; j + 1];
    for start in 1..j {
        let level = s.level(start);
        if seen[level] {
            continue;
        }
        seen[level] = true;
        let stages: Vec<usize> = (start..j).filter(|&q| s.level(q) == level).collect();
        let bits: Vec<u32> = stages.iter().map(|&q| mismatch_bits(s, q, m)).collect();
        // suffix[t] = Σ_{i>=t} l_{q_i}
        let mut suffix = vec![0u32; stages.len() + 1];
        for i in (0..stages.len()).rev() {
            suffix[i] = suffix[i + 1] + l[stages[i]] as u32;
        }
        // first discriminating stage at index t, or none (t = r)
        let mut level_sum = Dyadic::pow2_neg(*bits.last().unwrap());
        for t in 0..stages.len() {
            let before = if t == 0 { 0 } else { bits[t - 1] };
            let term = &Dyadic::pow2_neg(before) * &Dyadic::pow2_neg(bits[t] - before).complement();
            level_sum += &term.shr(suffix[t]);
        }
        prob *= &level_sum;
    }
    Ok(prob)
}
