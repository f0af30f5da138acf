//! Query-complexity laboratory for algorithms that talk to an oracle in a
//! bounded number of rounds.
//!
//! The crate implements ordered search (Locate), unordered search (Select),
//! sorting with rank queries and proportional cake cutting, each driven
//! through a round-disciplined oracle that records every batch of queries.
//! The [`harness`] module measures those transcripts against the closed-form
//! bounds known for each problem.
//!
//! Conventions used throughout:
//!
//! * items are addressed by 0-based indices,
//! * ranks and thresholds are 1-based (`1..=n`),
//! * exact quantities use [`Rational`] (arbitrary precision).

pub mod cake;
pub mod harness;
pub mod locate;
pub mod math;
pub mod oracle;
pub mod reductions;
pub mod select;
pub mod sort;

/// Arbitrary precision rational used for every exact quantity in the crate.
pub type Rational = num_rational::BigRational;

pub use oracle::{
    Answer, HiddenInstance, OracleError, OracleSession, Operand, Query, RankOracle, RankQuery,
    RoundTranscript,
};
