//! Cake cutting with exact piecewise-constant valuations and
//! Robertson-Webb queries.

mod density;
pub mod format;
mod protocol;

use thiserror::Error;

pub use density::{random_density, PiecewiseDensity};
pub use protocol::{
    assign_subcakes, balanced_sizes, proportional_protocol, verify_proportional, AgentMarks, Allocation,
    DensityOracle, Piece, ProtocolRun, RwOracle, RwQuery, Subcake,
};

use crate::oracle::OracleError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CakeError {
    #[error("invalid density: {0}")]
    BadDensity(String),
    #[error("malformed allocation: {0}")]
    MalformedAllocation(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("round budget must be at least 1")]
    ZeroRounds,
    #[error("all {0} rounds have been used")]
    RoundLimitExceeded(usize),
    #[error("no agent {0}")]
    AgentOutOfRange(usize),
    #[error("rounds ran out with a subcake of {0} agents")]
    Unfinished(usize),
    #[error("cut at {0} is not a multiple of 1/n")]
    ProtocolNotPrimitive(String),
    #[error("eval query at a point that was never cut")]
    UnknownPoint,
    #[error("allocation is not proportional")]
    NotProportional,
    #[error(transparent)]
    Oracle(#[from] OracleError),
}
