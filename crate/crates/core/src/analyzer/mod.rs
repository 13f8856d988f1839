//! Exact and approximate analysis of erroneous-path survival in the tree code.
//!
//! Candidate paths from one root are grouped into equivalence classes by their
//! j-pattern sequence. Each class has a probability generating function for the
//! number of discriminating parity bits; evaluating it at `1/2` gives the class
//! survival probability, and weighting by class sizes gives `E[L]`.

mod events;
mod oracle;
mod patterns;
mod survivors;

pub use events::{
    block_sets, pgf, prob_a, prob_e, survival_probability, BlockSets, SparsePgf, StageSet,
};
pub use oracle::{mc_survivor_oracle, OracleEstimate, ORACLE_MAX_STAGE, ORACLE_MAX_USERS};
pub use patterns::{
    bell, class_size, enumerate_patterns, for_each_pattern, pattern_of, stirling2, PatternSequence,
};
pub use survivors::{
    exact_class_count, expected_live_paths, expected_survivors_approx, expected_survivors_exact,
    expected_survivors_exact_dyadic, reduction_ratio, reduction_ratio_entering,
    reduction_ratio_last_stage, MAX_EXACT_PATTERN_LEN,
};
