//! Comparison-model searches seen through the rank-query interface.
//!
//! Each adapter turns every rank query into exactly one comparison query on
//! the wrapped session and keeps the pairing, so transcripts line up round
//! for round.

use std::cmp::Ordering;

use super::ReductionError;
use crate::oracle::{Answer, ComparisonQuery, Operand, OracleError, OracleSession, Query, RankOracle, RankQuery};

/// Record of which comparison query stood in for which rank query.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryBijection {
    pairs: Vec<Vec<(RankQuery, ComparisonQuery)>>,
}

impl QueryBijection {
    pub fn rounds(&self) -> &[Vec<(RankQuery, ComparisonQuery)>] {
        &self.pairs
    }

    pub fn round_sizes(&self) -> Vec<usize> {
        self.pairs.iter().map(Vec::len).collect()
    }

    /// Distinct rank queries never share a comparison query.
    pub fn is_injective(&self) -> bool {
        let mut seen = std::collections::HashMap::new();
        self.pairs.iter().flatten().all(|(r, c)| *seen.entry(*c).or_insert(*r) == *r)
    }
}

fn submit(
    session: &mut OracleSession,
    bijection: &mut QueryBijection,
    pairs: Vec<(RankQuery, ComparisonQuery)>,
) -> Result<Vec<Answer>, OracleError> {
    let batch: Vec<Query> = pairs.iter().map(|(_, c)| Query::Compare(*c)).collect();
    let answers = session.submit_round(&batch)?;
    bijection.pairs.push(pairs);
    Ok(answers)
}

/// Ordered search (sorted array plus promised element) as a Locate oracle.
///
/// The rank query "rank(z) vs t" becomes "z vs y_t": in a sorted array the
/// element at position `t` has rank `t`.
pub struct OrderedSearchAdapter<'a> {
    session: &'a mut OracleSession,
    bijection: QueryBijection,
}

impl<'a> OrderedSearchAdapter<'a> {
    pub fn new(session: &'a mut OracleSession) -> Result<Self, ReductionError> {
        let inst = session.instance();
        if inst.ranks().iter().enumerate().any(|(i, &r)| r != i + 1) {
            return Err(ReductionError::NotSorted);
        }
        if inst.target().is_none() {
            return Err(OracleError::MissingTarget.into());
        }
        Ok(Self { session, bijection: QueryBijection::default() })
    }

    pub fn bijection(&self) -> &QueryBijection {
        &self.bijection
    }

    fn translate(q: &RankQuery) -> Result<ComparisonQuery, OracleError> {
        let right = Operand::Item(q.threshold.wrapping_sub(1));
        if q.item == right {
            return Err(OracleError::MalformedQuery { query: Query::Rank(*q), reason: "would compare an element with itself" });
        }
        Ok(ComparisonQuery { left: q.item, right })
    }
}

impl RankOracle for OrderedSearchAdapter<'_> {
    fn len(&self) -> usize {
        self.session.len()
    }

    fn round_limit(&self) -> usize {
        self.session.transcript().k_limit()
    }

    fn rounds_used(&self) -> usize {
        self.session.transcript().rounds_used()
    }

    fn ask(&mut self, queries: &[RankQuery]) -> Result<Vec<Answer>, OracleError> {
        let pairs = queries
            .iter()
            .map(|q| Ok((*q, Self::translate(q)?)))
            .collect::<Result<Vec<_>, OracleError>>()?;
        submit(self.session, &mut self.bijection, pairs)
    }
}

/// Unordered search (arbitrary array plus promised element) as a Select oracle.
///
/// The simulated Select instance gives the promised element rank
/// [`SOUGHT_RANK`] and every other slot a larger rank, so "rank(x_i) vs 1"
/// becomes "x_i vs z": `Equal` stays `Equal`, anything else is `Greater`.
pub struct UnorderedSearchAdapter<'a> {
    session: &'a mut OracleSession,
    bijection: QueryBijection,
}

/// Rank the Select algorithm should look for through [`UnorderedSearchAdapter`].
pub const SOUGHT_RANK: usize = 1;

impl<'a> UnorderedSearchAdapter<'a> {
    pub fn new(session: &'a mut OracleSession) -> Result<Self, ReductionError> {
        if session.instance().target().is_none() {
            return Err(OracleError::MissingTarget.into());
        }
        Ok(Self { session, bijection: QueryBijection::default() })
    }

    pub fn bijection(&self) -> &QueryBijection {
        &self.bijection
    }
}

impl RankOracle for UnorderedSearchAdapter<'_> {
    fn len(&self) -> usize {
        self.session.len()
    }

    fn round_limit(&self) -> usize {
        self.session.transcript().k_limit()
    }

    fn rounds_used(&self) -> usize {
        self.session.transcript().rounds_used()
    }

    fn ask(&mut self, queries: &[RankQuery]) -> Result<Vec<Answer>, OracleError> {
        let pairs = queries
            .iter()
            .map(|q| match q.item {
                Operand::Item(_) if q.threshold == SOUGHT_RANK => {
                    Ok((*q, ComparisonQuery { left: q.item, right: Operand::Target }))
                }
                _ => Err(OracleError::MalformedQuery { query: Query::Rank(*q), reason: "only probes for the sought rank translate" }),
            })
            .collect::<Result<Vec<_>, OracleError>>()?;
        let answers = submit(self.session, &mut self.bijection, pairs)?;
        Ok(answers
            .into_iter()
            .map(|a| if a == Ordering::Equal { Ordering::Equal } else { Ordering::Greater })
            .collect())
    }
}
