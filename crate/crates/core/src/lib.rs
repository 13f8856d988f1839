//! Coded compressed sensing (CCS) for the unsourced multiple access channel.
//!
//! The crate is organised bottom-up:
//!
//! * [`gf2`]: packed bit vectors and matrices over GF(2), rank, and the
//!   collision probabilities of random linear parity codes.
//! * [`dyadic`]: exact rationals with power-of-two denominators, used for every
//!   probability computed by the analyzer.
//! * [`treecode`]: the fragmented tree encoder, the list stitcher, and the
//!   admissible-parity bookkeeping that drives sensing-matrix pruning.
//! * [`analyzer`]: pattern-sequence equivalence classes, per-class generating
//!   functions and the expected number of surviving erroneous paths.
//! * [`slotcs`]: lazily generated sensing matrices, the per-slot AWGN model and a
//!   non-negative orthogonal matching pursuit solver.
//! * [`sim`]: seeded end-to-end Monte Carlo experiments.

pub mod analyzer;
pub mod dyadic;
pub mod error;
pub mod gf2;
pub mod seed;
pub mod sim;
pub mod slotcs;
pub mod treecode;

pub use dyadic::Dyadic;
pub use error::{Error, Result};
pub use gf2::{BinaryMatrix, BitBlock};
pub use treecode::{CodeProfile, ParityGenerator};
