//! Fragmented tree code: encoder, list stitcher and admissible-parity export.
//!
//! A `B`-bit message is cut into fragments `w(0) .. w(n-1)` of `m_0 .. m_{n-1}`
//! bits. Slot `j >= 1` carries the sub-block `w(j) ‖ p(j)` where
//! `p(j) = Σ_{ℓ<j} w(ℓ) G_{ℓ,j-1}` has `l_j` bits; slot 0 carries `w(0)` alone.
//! As an integer, a sub-block puts the information field in the high bits and the
//! parity field in the low `l_j` bits.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{accumulate_product, random_matrix, BinaryMatrix, BitBlock};

/// Default cap on live partial paths per root before a decode is abandoned.
pub const DEFAULT_PATH_CAP: usize = 100_000;

/// Bit allocation of the tree code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct CodeProfile {
    active: usize,
    info_bits: Vec<usize>,
    parity_bits: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawProfile {
    k: usize,
    m: Vec<usize>,
    l: Vec<usize>,
}

impl TryFrom<RawProfile> for CodeProfile {
    type Error = Error;

    fn try_from(raw: RawProfile) -> Result<Self> {
        CodeProfile::new(raw.k, raw.m, raw.l)
    }
}

impl From<CodeProfile> for RawProfile {
    fn from(p: CodeProfile) -> Self {
        RawProfile {
            k: p.active,
            m: p.info_bits,
            l: p.parity_bits,
        }
    }
}

impl CodeProfile {
    /// `k` active messages, information bits `m_0..m_{n-1}`, parity bits
    /// `l_0..l_{n-1}` with `l_0 = 0`.
    pub fn new(k: usize, m: Vec<usize>, l: Vec<usize>) -> Result<Self> {
        if m.is_empty() {
            return Err(Error::InvalidProfile(
                "at least one slot is required".into(),
            ));
        }
        if m.len() != l.len() {
            return Err(Error::InvalidProfile(format!(
                "m has {} slots but l has {}",
                m.len(),
                l.len()
            )));
        }
        if l[0] != 0 {
            return Err(Error::InvalidProfile("l_0 must be 0".into()));
        }
        if let Some(j) = (0..m.len()).find(|&j| m[j] + l[j] == 0) {
            return Err(Error::InvalidProfile(format!("slot {j} has zero width")));
        }
        Ok(CodeProfile {
            active: k,
            info_bits: m,
            parity_bits: l,
        })
    }

    /// Number of slots `n`.
    pub fn slots(&self) -> usize {
        self.info_bits.len()
    }

    /// Number of active messages `K`.
    pub fn active(&self) -> usize {
        self.active
    }

    pub fn with_active(&self, k: usize) -> CodeProfile {
        CodeProfile {
            active: k,
            ..self.clone()
        }
    }

    pub fn info_bits(&self) -> &[usize] {
        &self.info_bits
    }

    pub fn parity_bits(&self) -> &[usize] {
        &self.parity_bits
    }

    pub fn m(&self, j: usize) -> usize {
        self.info_bits[j]
    }

    pub fn l(&self, j: usize) -> usize {
        self.parity_bits[j]
    }

    /// Sub-block width `m_j + l_j`.
    pub fn width(&self, j: usize) -> usize {
        self.info_bits[j] + self.parity_bits[j]
    }

    /// Total information bits `B`.
    pub fn message_bits(&self) -> usize {
        self.info_bits.iter().sum()
    }

    /// Splits a `B`-bit message into its fragments.
    pub fn fragments(&self, message: &BitBlock) -> Result<Vec<BitBlock>> {
        if message.len() != self.message_bits() {
            return Err(Error::DimensionMismatch {
                context: "message length",
                expected: self.message_bits(),
                actual: message.len(),
            });
        }
        let mut start = 0;
        Ok(self
            .info_bits
            .iter()
            .map(|&m| {
                let f = message.slice(start, start + m);
                start += m;
                f
            })
            .collect())
    }
}

/// The block upper-triangular parity generator: block `(ℓ, j)` is `G_{ℓ,j}` of
/// shape `m_ℓ x l_{j+1}` for `0 <= ℓ <= j <= n-2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityGenerator {
    blocks: Vec<Vec<BinaryMatrix>>,
}

impl ParityGenerator {
    /// Independent Rademacher blocks.
    pub fn random<R: Rng + ?Sized>(profile: &CodeProfile, rng: &mut R) -> Self {
        let n = profile.slots();
        let blocks = (0..n.saturating_sub(1))
            .map(|ell| {
                (ell..n - 1)
                    .map(|j| random_matrix(profile.m(ell), profile.l(j + 1), rng))
                    .collect()
            })
            .collect();
        ParityGenerator { blocks }
    }

    /// Builds a generator from explicit blocks, `f(ℓ, j) = G_{ℓ,j}`.
    pub fn from_fn(
        profile: &CodeProfile,
        mut f: impl FnMut(usize, usize) -> BinaryMatrix,
    ) -> Result<Self> {
        let n = profile.slots();
        let mut blocks = Vec::new();
        for ell in 0..n.saturating_sub(1) {
            let mut row = Vec::new();
            for j in ell..n - 1 {
                let b = f(ell, j);
                if b.nrows() != profile.m(ell) || b.ncols() != profile.l(j + 1) {
                    return Err(Error::DimensionMismatch {
                        context: "parity generator block",
                        expected: profile.m(ell) * profile.l(j + 1),
                        actual: b.nrows() * b.ncols(),
                    });
                }
                row.push(b);
            }
            blocks.push(row);
        }
        Ok(ParityGenerator { blocks })
    }

    /// `G_{ℓ,j}`.
    pub fn block(&self, ell: usize, j: usize) -> &BinaryMatrix {
        assert!(ell <= j, "only upper-triangular blocks exist");
        &self.blocks[ell][j - ell]
    }

    fn check(&self, profile: &CodeProfile) -> Result<()> {
        let n = profile.slots();
        let expected = n.saturating_sub(1);
        if self.blocks.len() != expected {
            return Err(Error::DimensionMismatch {
                context: "parity generator block rows",
                expected,
                actual: self.blocks.len(),
            });
        }
        for (ell, row) in self.blocks.iter().enumerate() {
            for (off, b) in row.iter().enumerate() {
                let j = ell + off;
                if b.nrows() != profile.m(ell) || b.ncols() != profile.l(j + 1) {
                    return Err(Error::DimensionMismatch {
                        context: "parity generator block",
                        expected: profile.m(ell) * profile.l(j + 1),
                        actual: b.nrows() * b.ncols(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Expected parity `p(j)` of a partial path `w(0) .. w(j-1)`.
pub fn compute_parity(fragments: &[BitBlock], g: &ParityGenerator, j: usize) -> Result<BitBlock> {
    let n = g.blocks.len() + 1;
    if j == 0 || j >= n {
        return Err(Error::StageOutOfRange {
            stage: j,
            min: 1,
            max: n - 1,
        });
    }
    if fragments.len() < j {
        return Err(Error::DimensionMismatch {
            context: "partial path length",
            expected: j,
            actual: fragments.len(),
        });
    }
    let mut p = BitBlock::zeros(g.block(0, j - 1).ncols());
    for (ell, w) in fragments[..j].iter().enumerate() {
        let block = g.block(ell, j - 1);
        if w.len() != block.nrows() {
            return Err(Error::DimensionMismatch {
                context: "fragment length",
                expected: block.nrows(),
                actual: w.len(),
            });
        }
        accumulate_product(&mut p, w, block);
    }
    Ok(p)
}

/// A tree-encoded message: one sub-block per slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codeword {
    subblocks: Vec<BitBlock>,
}

impl Codeword {
    pub fn subblocks(&self) -> &[BitBlock] {
        &self.subblocks
    }

    /// Sub-block `j` read as a column index of slot `j`.
    pub fn index(&self, j: usize) -> u64 {
        self.subblocks[j].to_index()
    }

    /// Checks `p(j) = Σ_{ℓ<j} w(ℓ) G_{ℓ,j-1}` for every slot.
    pub fn is_consistent(&self, profile: &CodeProfile, g: &ParityGenerator) -> bool {
        if self.subblocks.len() != profile.slots() {
            return false;
        }
        let info: Vec<BitBlock> = (0..profile.slots())
            .map(|j| self.subblocks[j].slice(0, profile.m(j)))
            .collect();
        (1..profile.slots()).all(|j| {
            let sb = &self.subblocks[j];
            compute_parity(&info, g, j)
                .map(|p| p == sb.slice(profile.m(j), sb.len()))
                .unwrap_or(false)
        })
    }
}

/// Tree-encodes a `B`-bit message.
pub fn encode(message: &BitBlock, profile: &CodeProfile, g: &ParityGenerator) -> Result<Codeword> {
    g.check(profile)?;
    let info = profile.fragments(message)?;
    let mut subblocks = Vec::with_capacity(profile.slots());
    subblocks.push(info[0].clone());
    for j in 1..profile.slots() {
        let p = compute_parity(&info, g, j)?;
        subblocks.push(info[j].concat(&p));
    }
    Ok(Codeword { subblocks })
}

/// The decoded sub-blocks of one slot, as a set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotList {
    slot: usize,
    entries: BTreeSet<BitBlock>,
}

impl SlotList {
    pub fn new(
        slot: usize,
        profile: &CodeProfile,
        entries: impl IntoIterator<Item = BitBlock>,
    ) -> Result<Self> {
        let width = profile.width(slot);
        let entries: BTreeSet<BitBlock> = entries.into_iter().collect();
        if let Some(bad) = entries.iter().find(|e| e.len() != width) {
            return Err(Error::DimensionMismatch {
                context: "slot list entry width",
                expected: width,
                actual: bad.len(),
            });
        }
        Ok(SlotList { slot, entries })
    }

    pub fn from_indices(
        slot: usize,
        profile: &CodeProfile,
        indices: impl IntoIterator<Item = u64>,
    ) -> Result<Self> {
        let width = profile.width(slot);
        let mut blocks = Vec::new();
        for idx in indices {
            if width < 64 && idx >> width != 0 {
                return Err(Error::IndexOutOfRange {
                    index: idx,
                    width: width as u32,
                });
            }
            blocks.push(BitBlock::from_index(idx, width));
        }
        SlotList::new(slot, profile, blocks)
    }

    /// The error-free list of slot `j` for a set of codewords.
    pub fn from_codewords<'a>(
        slot: usize,
        profile: &CodeProfile,
        codewords: impl IntoIterator<Item = &'a Codeword>,
    ) -> Result<Self> {
        SlotList::new(
            slot,
            profile,
            codewords.into_iter().map(|c| c.subblocks[slot].clone()),
        )
    }

    pub fn slot(&self) -> usize {
        self.slot
    }

    pub fn entries(&self) -> &BTreeSet<BitBlock> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeMode {
    /// Plain stitching.
    Standard,
    /// Stitching that also records the admissible parity set of every stage.
    Enhanced,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeStatus {
    Complete,
    /// A root exceeded the live-path cap at `stage`; the decode was abandoned.
    BlowUp {
        stage: usize,
        root: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub recovered: BTreeSet<BitBlock>,
    /// Live partial paths (all roots) after each stage; entry 0 is the root count.
    pub survivors_per_stage: Vec<usize>,
    /// Roots that ended with zero or several full paths.
    pub roots_failed: usize,
    /// Admissible parity sets for stages `1..n` (enhanced mode only).
    pub admissible: Vec<BTreeSet<BitBlock>>,
    pub status: DecodeStatus,
}

impl DecodeOutcome {
    pub fn blew_up(&self) -> bool {
        matches!(self.status, DecodeStatus::BlowUp { .. })
    }
}

/// The set `{compute_parity(path, G, j)}` over the given active paths.
pub fn admissible_patterns(
    active_paths: &[Vec<BitBlock>],
    g: &ParityGenerator,
    j: usize,
) -> Result<BTreeSet<BitBlock>> {
    active_paths
        .iter()
        .map(|p| compute_parity(p, g, j))
        .collect()
}

/// Column indices of slot `j` whose parity field is admissible, ascending.
pub fn prune_column_index_set(
    profile: &CodeProfile,
    j: usize,
    admissible: &BTreeSet<BitBlock>,
) -> Vec<u64> {
    let (m, l) = (profile.m(j), profile.l(j));
    let mut parity: Vec<u64> = admissible
        .iter()
        .inspect(|p| debug_assert_eq!(p.len(), l))
        .map(BitBlock::to_index)
        .collect();
    parity.sort_unstable();
    let mut out = Vec::with_capacity(parity.len() << m);
    for w in 0..(1u64 << m) {
        out.extend(parity.iter().map(|&p| (w << l) | p));
    }
    out
}

/// Incremental stitcher. Slot lists are fed one stage at a time so that the
/// admissible parity set of the next stage can be queried in between.
pub struct TreeDecoder<'a> {
    profile: &'a CodeProfile,
    g: &'a ParityGenerator,
    mode: DecodeMode,
    path_cap: usize,
    // per root: live paths, each a sequence of information fragments
    roots: Vec<Vec<Vec<BitBlock>>>,
    stage: usize,
    survivors: Vec<usize>,
    admissible: Vec<BTreeSet<BitBlock>>,
    status: DecodeStatus,
}

impl<'a> TreeDecoder<'a> {
    /// Starts a decode from the root list (slot 0).
    pub fn new(
        profile: &'a CodeProfile,
        g: &'a ParityGenerator,
        roots: &SlotList,
        mode: DecodeMode,
    ) -> Result<Self> {
        g.check(profile)?;
        if roots.slot() != 0 {
            return Err(Error::StageOutOfRange {
                stage: roots.slot(),
                min: 0,
                max: 0,
            });
        }
        let roots: Vec<Vec<Vec<BitBlock>>> = roots
            .entries()
            .iter()
            .map(|w| vec![vec![w.clone()]])
            .collect();
        let survivors = vec![roots.len()];
        Ok(TreeDecoder {
            profile,
            g,
            mode,
            path_cap: DEFAULT_PATH_CAP,
            roots,
            stage: 0,
            survivors,
            admissible: Vec::new(),
            status: DecodeStatus::Complete,
        })
    }

    pub fn with_path_cap(mut self, cap: usize) -> Self {
        self.path_cap = cap;
        self
    }

    /// The next slot to be stitched.
    pub fn next_stage(&self) -> usize {
        self.stage + 1
    }

    pub fn is_done(&self) -> bool {
        self.next_stage() >= self.profile.slots() || self.blew_up()
    }

    pub fn blew_up(&self) -> bool {
        matches!(self.status, DecodeStatus::BlowUp { .. })
    }

    /// Live partial paths across all roots.
    pub fn live_paths(&self) -> usize {
        self.roots.iter().map(Vec::len).sum()
    }

    /// Parity patterns predicted for the next stage by the live paths.
    pub fn admissible_patterns(&self) -> Result<BTreeSet<BitBlock>> {
        let j = self.next_stage();
        let mut out = BTreeSet::new();
        for paths in &self.roots {
            for p in paths {
                out.insert(compute_parity(p, self.g, j)?);
            }
        }
        Ok(out)
    }

    /// Attaches the entries of list `j` to every live path whose predicted
    /// parity matches the entry's parity field.
    pub fn extend(&mut self, list: &SlotList) -> Result<()> {
        let j = self.next_stage();
        if list.slot() != j || j >= self.profile.slots() {
            return Err(Error::StageOutOfRange {
                stage: list.slot(),
                min: j,
                max: j,
            });
        }
        if self.blew_up() {
            return Ok(());
        }
        if self.mode == DecodeMode::Enhanced {
            let adm = self.admissible_patterns()?;
            self.admissible.push(adm);
        }
        let m = self.profile.m(j);
        let mut by_parity: HashMap<BitBlock, Vec<BitBlock>> = HashMap::new();
        for e in list.entries() {
            by_parity
                .entry(e.slice(m, e.len()))
                .or_default()
                .push(e.slice(0, m));
        }
        for (r, paths) in self.roots.iter_mut().enumerate() {
            let mut next = Vec::new();
            for path in paths.iter() {
                let p = compute_parity(path, self.g, j)?;
                if let Some(infos) = by_parity.get(&p) {
                    for w in infos {
                        let mut extended = path.clone();
                        extended.push(w.clone());
                        next.push(extended);
                    }
                }
            }
            if next.len() > self.path_cap {
                self.status = DecodeStatus::BlowUp { stage: j, root: r };
                for paths in &mut self.roots {
                    paths.clear();
                }
                self.stage = j;
                self.survivors.push(0);
                return Ok(());
            }
            *paths = next;
        }
        self.stage = j;
        self.survivors.push(self.live_paths());
        Ok(())
    }

    pub fn finish(self) -> DecodeOutcome {
        let mut recovered = BTreeSet::new();
        let mut roots_failed = 0;
        let complete = !self.blew_up() && self.stage + 1 == self.profile.slots();
        for paths in &self.roots {
            if complete && paths.len() == 1 {
                let msg = paths[0]
                    .iter()
                    .fold(BitBlock::zeros(0), |acc, f| acc.concat(f));
                recovered.insert(msg);
            } else {
                roots_failed += 1;
            }
        }
        DecodeOutcome {
            recovered,
            survivors_per_stage: self.survivors,
            roots_failed,
            admissible: self.admissible,
            status: self.status,
        }
    }
}

/// Stitches a full set of slot lists.
pub fn tree_decode(
    lists: &[SlotList],
    profile: &CodeProfile,
    g: &ParityGenerator,
    mode: DecodeMode,
) -> Result<DecodeOutcome> {
    tree_decode_capped(lists, profile, g, mode, DEFAULT_PATH_CAP)
}

pub fn tree_decode_capped(
    lists: &[SlotList],
    profile: &CodeProfile,
    g: &ParityGenerator,
    mode: DecodeMode,
    path_cap: usize,
) -> Result<DecodeOutcome> {
    if lists.len() != profile.slots() {
        return Err(Error::DimensionMismatch {
            context: "number of slot lists",
            expected: profile.slots(),
            actual: lists.len(),
        });
    }
    let mut dec = TreeDecoder::new(profile, g, &lists[0], mode)?.with_path_cap(path_cap);
    for list in &lists[1..] {
        dec.extend(list)?;
    }
    Ok(dec.finish())
}
