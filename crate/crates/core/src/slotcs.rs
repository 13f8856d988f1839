//! Slot-level compressed sensing: seeded Gaussian sensing matrices, the AWGN
//! slot model `y = X b + z`, column pruning and non-negative OMP.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::SeedPath;

/// Widest slot (in sub-block bits) whose columns may be materialised at once.
pub const MAX_MATERIALIZED_WIDTH: usize = 24;

#[derive(Clone, Debug)]
enum Active {
    All,
    Subset(Arc<Vec<u64>>),
}

/// The sensing matrix of one slot. Column `i` is a deterministic function of
/// `(seed, slot, i)`, so pruned and unpruned views share identical columns.
#[derive(Clone, Debug)]
pub struct SensingMatrix {
    slot: usize,
    rows: usize,
    width_bits: usize,
    seed: u64,
    active: Active,
    cache: Option<Arc<Vec<f64>>>,
}

impl SensingMatrix {
    pub fn new(slot: usize, rows: usize, width_bits: usize, seed: u64) -> Result<Self> {
        if rows == 0 {
            return Err(Error::InvalidConfig(format!(
                "slot {slot} has no channel uses"
            )));
        }
        if width_bits == 0 || width_bits > 63 {
            return Err(Error::InvalidConfig(format!(
                "slot {slot} width of {width_bits} bits is not supported"
            )));
        }
        Ok(SensingMatrix {
            slot,
            rows,
            width_bits,
            seed,
            active: Active::All,
            cache: None,
        })
    }

    /// Generates every column once and keeps them for fast access.
    pub fn materialized(mut self) -> Result<Self> {
        if self.width_bits > MAX_MATERIALIZED_WIDTH {
            return Err(Error::GuardExceeded {
                what: "materialised slot width",
                value: self.width_bits,
                limit: MAX_MATERIALIZED_WIDTH,
            });
        }
        let mut data = Vec::with_capacity(self.total_columns() as usize * self.rows);
        for i in 0..self.total_columns() {
            data.extend(self.generate(i));
        }
        self.cache = Some(Arc::new(data));
        Ok(self)
    }

    pub fn slot(&self) -> usize {
        self.slot
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn width_bits(&self) -> usize {
        self.width_bits
    }

    /// `2^{m_j + l_j}`.
    pub fn total_columns(&self) -> u64 {
        1u64 << self.width_bits
    }

    pub fn active_count(&self) -> u64 {
        match &self.active {
            Active::All => self.total_columns(),
            Active::Subset(v) => v.len() as u64,
        }
    }

    pub fn active_columns(&self) -> Box<dyn Iterator<Item = u64> + '_> {
        match &self.active {
            Active::All => Box::new(0..self.total_columns()),
            Active::Subset(v) => Box::new(v.iter().copied()),
        }
    }

    pub fn is_active(&self, index: u64) -> bool {
        match &self.active {
            Active::All => index < self.total_columns(),
            Active::Subset(v) => v.binary_search(&index).is_ok(),
        }
    }

    fn check_index(&self, index: u64) -> Result<()> {
        if index >= self.total_columns() {
            return Err(Error::IndexOutOfRange {
                index,
                width: self.width_bits as u32,
            });
        }
        Ok(())
    }

    fn generate(&self, index: u64) -> Vec<f64> {
        let mut rng = SeedPath::new(self.seed)
            .push("column")
            .push(self.slot)
            .push(index)
            .rng();
        let mut v: Vec<f64> = (0..self.rows)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut v {
            *x /= norm;
        }
        v
    }

    /// Column `index`, unit Euclidean norm.
    pub fn column(&self, index: u64) -> Result<Vec<f64>> {
        self.check_index(index)?;
        Ok(match &self.cache {
            Some(c) => self.cached(c, index).to_vec(),
            None => self.generate(index),
        })
    }

    fn cached<'a>(&self, cache: &'a [f64], index: u64) -> &'a [f64] {
        let start = index as usize * self.rows;
        &cache[start..start + self.rows]
    }

    fn with_column<T>(&self, index: u64, f: impl FnOnce(&[f64]) -> T) -> T {
        match &self.cache {
            Some(c) => f(self.cached(c, index)),
            None => f(&self.generate(index)),
        }
    }

    /// Restricts the active set to `keep`, which must lie inside the current one.
    pub fn prune(&self, keep: &[u64]) -> Result<SensingMatrix> {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if let Some(&bad) = keep.iter().find(|&&i| !self.is_active(i)) {
            self.check_index(bad)?;
            return Err(Error::InvalidConfig(format!(
                "column {bad} is not active in slot {}",
                self.slot
            )));
        }
        let mut out = self.clone();
        out.active = if keep.len() as u64 == self.total_columns() {
            Active::All
        } else {
            Active::Subset(Arc::new(keep))
        };
        Ok(out)
    }
}

/// Noise level and signal-to-noise ratio of the AWGN channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// `σ²` per real dimension.
    pub noise_variance: f64,
    /// `E_b/N_0` in dB, with `N_0 = 2σ²`.
    pub eb_n0_db: f64,
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_variance > 0.0 && self.noise_variance.is_finite()) {
            return Err(Error::InvalidConfig(
                "noise variance must be positive".into(),
            ));
        }
        if !self.eb_n0_db.is_finite() {
            return Err(Error::InvalidConfig("E_b/N_0 must be finite".into()));
        }
        Ok(())
    }

    /// Per-slot amplitude and noise level for a `message_bits`-bit message spread
    /// over `slots` unit-norm columns: `E_b = slots A² / B`.
    pub fn channel(&self, message_bits: usize, slots: usize) -> Channel {
        let eb_n0 = 10f64.powf(self.eb_n0_db / 10.0);
        let eb = eb_n0 * 2.0 * self.noise_variance;
        Channel {
            amplitude: (eb * message_bits as f64 / slots as f64).sqrt(),
            noise_std: self.noise_variance.sqrt(),
        }
    }

    /// Inverse of [`ChannelParams::channel`].
    pub fn eb_n0_db_for(
        amplitude: f64,
        noise_variance: f64,
        message_bits: usize,
        slots: usize,
    ) -> f64 {
        let eb = slots as f64 * amplitude * amplitude / message_bits as f64;
        10.0 * (eb / (2.0 * noise_variance)).log10()
    }
}

/// Resolved per-slot channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Channel {
    pub amplitude: f64,
    pub noise_std: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlotObservation {
    pub y: Vec<f64>,
    /// Transmitted column indices with multiplicity, for scoring only.
    pub true_support: Vec<u64>,
}

/// `y = A Σ_i x_{idx_i} + z`.
pub fn transmit_slot<R: Rng + ?Sized>(
    indices: &[u64],
    x: &SensingMatrix,
    channel: &Channel,
    rng: &mut R,
) -> Result<SlotObservation> {
    let mut y = vec![0.0; x.rows()];
    for &i in indices {
        x.check_index(i)?;
        x.with_column(i, |c| {
            for (yi, ci) in y.iter_mut().zip(c) {
                *yi += channel.amplitude * ci;
            }
        });
    }
    if channel.noise_std > 0.0 {
        for yi in &mut y {
            let z: f64 = StandardNormal.sample(rng);
            *yi += channel.noise_std * z;
        }
    }
    Ok(SlotObservation {
        y,
        true_support: indices.to_vec(),
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Non-negative orthogonal matching pursuit: up to `k` picks of the candidate with
/// the largest positive correlation to the residual (lowest index on ties), each
/// followed by a least-squares re-projection of `y` onto the selected columns.
///
/// Candidates are `pruned` when given, else every active column. Indices are
/// returned in selection order.
pub fn recover_support(
    y: &[f64],
    x: &SensingMatrix,
    k: usize,
    pruned: Option<&[u64]>,
) -> Result<Vec<u64>> {
    if y.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            context: "observation length",
            expected: x.rows(),
            actual: y.len(),
        });
    }
    let candidates: Vec<u64> = match pruned {
        Some(p) => {
            if let Some(&bad) = p.iter().find(|&&i| !x.is_active(i)) {
                x.check_index(bad)?;
                return Err(Error::InvalidConfig(format!(
                    "pruned column {bad} is not active in slot {}",
                    x.slot()
                )));
            }
            let mut c = p.to_vec();
            c.sort_unstable();
            c.dedup();
            c
        }
        None => x.active_columns().collect(),
    };
    let mut residual = y.to_vec();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut chosen: Vec<u64> = Vec::new();
    let mut taken = vec![false; candidates.len()];
    for _ in 0..k.min(candidates.len()) {
        let mut best: Option<(usize, f64)> = None;
        for (pos, &idx) in candidates.iter().enumerate() {
            if taken[pos] {
                continue;
            }
            let c = x.with_column(idx, |col| dot(col, &residual));
            if c > 0.0 && best.is_none_or(|(_, b)| c > b) {
                best = Some((pos, c));
            }
        }
        let Some((pos, _)) = best else { break };
        taken[pos] = true;
        let idx = candidates[pos];
        // modified Gram-Schmidt against the current basis
        let mut q = x.column(idx)?;
        for b in &basis {
            let proj = dot(&q, b);
            for (qi, bi) in q.iter_mut().zip(b) {
                *qi -= proj * bi;
            }
        }
        let norm = dot(&q, &q).sqrt();
        chosen.push(idx);
        if norm < 1e-10 {
            continue;
        }
        for qi in &mut q {
            *qi /= norm;
        }
        let proj = dot(&residual, &q);
        for (ri, qi) in residual.iter_mut().zip(&q) {
            *ri -= proj * qi;
        }
        basis.push(q);
    }
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const NOISELESS: Channel = Channel {
        amplitude: 1.0,
        noise_std: 0.0,
    };

    #[test]
    fn columns_have_unit_norm_and_are_reproducible() {
        let x = SensingMatrix::new(2, 32, 6, 11).unwrap();
        let m = x.clone().materialized().unwrap();
        for i in [0u64, 5, 63] {
            let c = x.column(i).unwrap();
            assert!((dot(&c, &c) - 1.0).abs() < 1e-9);
            assert_eq!(c, m.column(i).unwrap());
        }
        assert!(x.column(64).is_err());
        let other_slot = SensingMatrix::new(3, 32, 6, 11).unwrap();
        assert_ne!(x.column(0).unwrap(), other_slot.column(0).unwrap());
    }

    #[test]
    fn prune_keeps_column_values() {
        let x = SensingMatrix::new(0, 16, 5, 3).unwrap();
        let all: Vec<u64> = (0..32).collect();
        let same = x.prune(&all).unwrap();
        assert_eq!(same.active_count(), 32);
        let p = x.prune(&[9, 3, 3]).unwrap();
        assert_eq!(p.active_columns().collect::<Vec<_>>(), vec![3, 9]);
        assert_eq!(p.column(9).unwrap(), x.column(9).unwrap());
        assert!(p.prune(&[4]).is_err());
    }

    #[test]
    fn noiseless_single_column() {
        let x = SensingMatrix::new(1, 24, 6, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let obs = transmit_slot(&[17], &x, &NOISELESS, &mut rng).unwrap();
        assert!((dot(&obs.y, &x.column(17).unwrap()) - 1.0).abs() < 1e-12);
        assert_eq!(recover_support(&obs.y, &x, 1, None).unwrap(), vec![17]);
        let empty = transmit_slot(&[], &x, &NOISELESS, &mut rng).unwrap();
        assert!(empty.y.iter().all(|&v| v == 0.0));
        assert!(recover_support(&empty.y, &x, 3, None).unwrap().is_empty());
    }

    #[test]
    fn pruned_recovery_stays_inside_candidates() {
        let x = SensingMatrix::new(1, 24, 6, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let obs = transmit_slot(&[17, 40], &x, &NOISELESS, &mut rng).unwrap();
        let keep = [3u64, 17, 22, 50];
        let got = recover_support(&obs.y, &x, 4, Some(&keep)).unwrap();
        assert_eq!(got[0], 17);
        assert!(got.iter().all(|i| keep.contains(i)));
        let p = x.prune(&keep).unwrap();
        assert_eq!(recover_support(&obs.y, &p, 1, None).unwrap(), vec![17]);
        assert!(recover_support(&obs.y, &p, 1, Some(&[40])).is_err());
    }

    #[test]
    fn amplitude_round_trip() {
        let ch = ChannelParams {
            noise_variance: 1.0,
            eb_n0_db: 3.0,
        };
        let c = ch.channel(33, 5);
        let back = ChannelParams::eb_n0_db_for(c.amplitude, 1.0, 33, 5);
        assert!((back - 3.0).abs() < 1e-12);
    }
}
