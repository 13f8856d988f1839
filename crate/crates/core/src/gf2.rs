//! Linear algebra over GF(2).
//!
//! Bits are packed 64 to a word. Row vectors multiply matrices from the left:
//! a parity block is `p = w G` with `G` of shape `m x l`.

use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use rand::Rng;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

const WORD: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// A fixed-length bit string.
///
/// Bit `0` is the leftmost symbol: when a block is read as an integer
/// ([`BitBlock::to_index`]) it is the most significant bit.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitBlock {
    words: Vec<u64>,
    len: usize,
}

impl BitBlock {
    pub fn zeros(len: usize) -> Self {
        BitBlock {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut out = BitBlock::zeros(0);
        for b in bits {
            out.push(b);
        }
        out
    }

    /// Uniform random block.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut words: Vec<u64> = (0..words_for(len)).map(|_| rng.random()).collect();
        mask_tail(&mut words, len);
        BitBlock { words, len }
    }

    /// The `len`-bit big-endian binary expansion of `value`.
    ///
    /// # Panics
    ///
    /// Panics if `len > 64` or `value` does not fit.
    pub fn from_index(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_index supports at most 64 bits");
        assert!(
            len == 64 || value >> len == 0,
            "value does not fit in {len} bits"
        );
        BitBlock::from_bits((0..len).map(|i| (value >> (len - 1 - i)) & 1 == 1))
    }

    /// Reads the block as a big-endian integer.
    ///
    /// # Panics
    ///
    /// Panics if the block is longer than 64 bits.
    pub fn to_index(&self) -> u64 {
        assert!(self.len <= 64, "to_index supports at most 64 bits");
        (0..self.len).fold(0u64, |acc, i| (acc << 1) | self.get(i) as u64)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn push(&mut self, value: bool) {
        if self.len.is_multiple_of(WORD) {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, value);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// `self ‖ other`.
    pub fn concat(&self, other: &BitBlock) -> BitBlock {
        let mut out = self.clone();
        for b in other.iter() {
            out.push(b);
        }
        out
    }

    /// Bits `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> BitBlock {
        assert!(
            start <= end && end <= self.len,
            "slice {start}..{end} out of range"
        );
        BitBlock::from_bits((start..end).map(|i| self.get(i)))
    }

    /// Symbol-wise XOR with an equal-length block.
    pub fn xor_assign(&mut self, other: &BitBlock) -> Result<()> {
        if self.len != other.len {
            return Err(Error::DimensionMismatch {
                context: "bit block addition",
                expected: self.len,
                actual: other.len,
            });
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }
}

fn mask_tail(words: &mut [u64], len: usize) {
    let rem = len % WORD;
    if rem != 0 {
        if let Some(last) = words.last_mut() {
            *last &= (1u64 << rem) - 1;
        }
    }
}

impl Add<&BitBlock> for &BitBlock {
    type Output = BitBlock;

    /// # Panics
    ///
    /// Panics on a length mismatch; use [`BitBlock::xor_assign`] to get an error.
    fn add(self, rhs: &BitBlock) -> BitBlock {
        let mut out = self.clone();
        out.xor_assign(rhs)
            .expect("adding bit blocks of different length");
        out
    }
}

impl AddAssign<&BitBlock> for BitBlock {
    fn add_assign(&mut self, rhs: &BitBlock) {
        self.xor_assign(rhs)
            .expect("adding bit blocks of different length");
    }
}

impl fmt::Display for BitBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitBlock({self})")
    }
}

impl FromStr for BitBlock {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidConfig(format!(
                    "invalid bit character {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitBlock::from_bits)
    }
}

/// A dense binary matrix stored as packed rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    rows: Vec<BitBlock>,
    cols: usize,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BinaryMatrix {
            rows: vec![BitBlock::zeros(cols); rows],
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BinaryMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: Vec<BitBlock>, cols: usize) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                context: "matrix row length",
                expected: cols,
                actual: bad.len(),
            });
        }
        Ok(BinaryMatrix { rows, cols })
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value);
    }

    pub fn row(&self, r: usize) -> &BitBlock {
        &self.rows[r]
    }

    /// GF(2) row rank by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut rows: Vec<Vec<u64>> = self.rows.iter().map(|r| r.words().to_vec()).collect();
        let mut rank = 0;
        for col in 0..self.cols {
            let (w, bit) = (col / WORD, 1u64 << (col % WORD));
            let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][w] & bit != 0) else {
                continue;
            };
            rows.swap(rank, pivot);
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[w] & bit != 0 {
                    for (a, b) in row.iter_mut().zip(&pivot_row) {
                        *a ^= b;
                    }
                }
            }
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rank
    }

    /// `rows - rank`: the dimension of the left null space.
    pub fn nullity(&self) -> usize {
        self.nrows() - self.rank()
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMatrix {}x{} [", self.nrows(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        write!(f, "]")
    }
}

/// A `rows x cols` matrix of independent fair Bernoulli entries.
pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> BinaryMatrix {
    BinaryMatrix {
        rows: (0..rows).map(|_| BitBlock::random(cols, rng)).collect(),
        cols,
    }
}

/// `w G` over GF(2).
pub fn mul_vec_mat(w: &BitBlock, g: &BinaryMatrix) -> Result<BitBlock> {
    if w.len() != g.nrows() {
        return Err(Error::DimensionMismatch {
            context: "vector-matrix product",
            expected: g.nrows(),
            actual: w.len(),
        });
    }
    let mut out = BitBlock::zeros(g.ncols());
    accumulate_product(&mut out, w, g);
    Ok(out)
}

/// `acc += w G`, lengths already checked by the caller.
pub(crate) fn accumulate_product(acc: &mut BitBlock, w: &BitBlock, g: &BinaryMatrix) {
    debug_assert_eq!(w.len(), g.nrows());
    debug_assert_eq!(acc.len(), g.ncols());
    for (wi, &word) in w.words().iter().enumerate() {
        let mut bits = word;
        while bits != 0 {
            let b = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let row = &g.rows[wi * WORD + b];
            for (a, r) in acc.words.iter_mut().zip(&row.words) {
                *a ^= r;
            }
        }
    }
}

/// Probability that a uniformly random information vector produces the same
/// parity as any fixed one under `G`: exactly `2^-rank(G)`.
pub fn collision_prob_fixed_g(g: &BinaryMatrix) -> Dyadic {
    Dyadic::pow2_neg(g.rank() as u32)
}

/// Probability that a fixed erroneous vector shares the parity of a fixed valid
/// one when `G` is an `m x l` Rademacher matrix: `2^-l`.
pub fn collision_prob_random_g(l: usize) -> Dyadic {
    Dyadic::pow2_neg(l as u32)
}
