//! Deterministic, hierarchical seed derivation.
//!
//! Every random object in an experiment (a parity generator, a trial's messages,
//! the noise of one slot) gets its own ChaCha stream keyed by the master seed and
//! a path of labels. Streams are reproducible in isolation and never shared
//! between tasks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// The generator handed out by [`SeedPath::rng`].
pub type StreamRng = ChaCha8Rng;

const DOMAIN: &[u8] = b"ccs-seed-v1";

/// One component of a derivation path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Label {
    Name(String),
    Index(u64),
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::Name(s.to_owned())
    }
}

impl From<u64> for Label {
    fn from(i: u64) -> Self {
        Label::Index(i)
    }
}

impl From<usize> for Label {
    fn from(i: usize) -> Self {
        Label::Index(i as u64)
    }
}

impl From<u32> for Label {
    fn from(i: u32) -> Self {
        Label::Index(i as u64)
    }
}

/// A master seed plus a path of labels, e.g. `("trial", 0, "slot", 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedPath {
    master: u64,
    labels: Vec<Label>,
}

impl SeedPath {
    pub fn new(master: u64) -> Self {
        SeedPath {
            master,
            labels: Vec::new(),
        }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Returns a child path with `label` appended.
    pub fn child(&self, label: impl Into<Label>) -> SeedPath {
        let mut next = self.clone();
        next.labels.push(label.into());
        next
    }

    /// Appends `label` in place.
    pub fn push(mut self, label: impl Into<Label>) -> SeedPath {
        self.labels.push(label.into());
        self
    }

    /// The 32-byte key of this path: SHA-256 over an unambiguous encoding of the
    /// master seed and every label (tag byte, length, payload).
    pub fn key(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(DOMAIN);
        h.update(self.master.to_le_bytes());
        for label in &self.labels {
            match label {
                Label::Name(s) => {
                    h.update([0x01]);
                    h.update((s.len() as u64).to_le_bytes());
                    h.update(s.as_bytes());
                }
                Label::Index(i) => {
                    h.update([0x02]);
                    h.update(i.to_le_bytes());
                }
            }
        }
        h.finalize().into()
    }

    /// The first eight key bytes as a little-endian integer, for APIs that take a `u64` seed.
    pub fn key_u64(&self) -> u64 {
        let key = self.key();
        u64::from_le_bytes(key[..8].try_into().expect("eight bytes"))
    }

    pub fn rng(&self) -> StreamRng {
        StreamRng::from_seed(self.key())
    }
}

/// Derives the stream for `(master, labels)`.
pub fn seed_derivation(master: u64, labels: &[Label]) -> StreamRng {
    let mut path = SeedPath::new(master);
    path.labels.extend_from_slice(labels);
    path.rng()
}
