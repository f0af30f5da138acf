//! Equivalences between the query models: comparison searches as rank
//! oracles, and sorting through proportional cake cutting.

mod adapters;
mod adversary_cake;

use thiserror::Error;

pub use adapters::{OrderedSearchAdapter, QueryBijection, UnorderedSearchAdapter, SOUGHT_RANK};
pub use adversary_cake::{
    build_adversary_cake, recover_permutation, sort_via_cake, AdversaryCakeInstance, CakeSortRun, RankDrivenCake,
    SlotBook,
};

use crate::cake::CakeError;
use crate::oracle::OracleError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Cake(#[from] CakeError),
    #[error("ordered search needs a sorted array")]
    NotSorted,
    #[error("hidden order is not a permutation of 1..=n")]
    NotAPermutation,
    #[error("boundary y_{index} is not on its grid")]
    BoundaryOffGrid { index: usize },
    #[error("allocation is not proportional")]
    NotProportional,
}
