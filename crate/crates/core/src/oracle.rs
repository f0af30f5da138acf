//! Round-disciplined oracle over a hidden permutation.
//!
//! An [`OracleSession`] owns a [`HiddenInstance`] and accepts whole batches of
//! queries. Every batch consumes one round (empty batches included) and is
//! appended to a [`RoundTranscript`]. Algorithms only ever see the answers.

use std::cmp::Ordering;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

/// Three-way answer: `<`, `=` or `>`.
pub type Answer = Ordering;

/// Something a query can point at: an array slot or the promised element `z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operand {
    Item(usize),
    Target,
}

/// "How is rank(item) compared to threshold?"
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RankQuery {
    pub item: Operand,
    pub threshold: usize,
}

impl RankQuery {
    pub fn new(item: usize, threshold: usize) -> Self {
        Self { item: Operand::Item(item), threshold }
    }

    pub fn target(threshold: usize) -> Self {
        Self { item: Operand::Target, threshold }
    }
}

/// "How is left compared to right?"
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ComparisonQuery {
    pub left: Operand,
    pub right: Operand,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Query {
    Rank(RankQuery),
    Compare(ComparisonQuery),
}

impl From<RankQuery> for Query {
    fn from(q: RankQuery) -> Self {
        Query::Rank(q)
    }
}

impl From<ComparisonQuery> for Query {
    fn from(q: ComparisonQuery) -> Self {
        Query::Compare(q)
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Item(i) => write!(f, "x[{i}]"),
            Operand::Target => write!(f, "z"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("round limit must be at least 1")]
    ZeroRoundLimit,
    #[error("all {limit} rounds have been used")]
    RoundLimitExceeded { limit: usize },
    #[error("malformed query {query:?}: {reason}")]
    MalformedQuery { query: Query, reason: &'static str },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("instance has no promised target element")]
    MissingTarget,
}

/// The secret the oracle answers from: the rank of every slot plus an
/// optional slot holding the promised element.
///
/// Keys are the ranks themselves, so all keys are distinct.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HiddenInstance {
    ranks: Vec<usize>,
    target: Option<usize>,
}

impl HiddenInstance {
    /// `ranks[i]` is the 1-based rank of slot `i`; must be a permutation of `1..=n`.
    pub fn new(ranks: Vec<usize>, target: Option<usize>) -> Result<Self, OracleError> {
        let n = ranks.len();
        if n == 0 {
            return Err(OracleError::InvalidInstance("empty instance".into()));
        }
        let mut seen = vec![false; n];
        for &r in &ranks {
            if r == 0 || r > n || seen[r - 1] {
                return Err(OracleError::InvalidInstance(format!(
                    "ranks are not a permutation of 1..={n}"
                )));
            }
            seen[r - 1] = true;
        }
        if let Some(t) = target {
            if t >= n {
                return Err(OracleError::InvalidInstance(format!("target slot {t} out of range")));
            }
        }
        Ok(Self { ranks, target })
    }

    /// Sorted array: slot `i` has rank `i + 1`.
    pub fn sorted(n: usize, target: Option<usize>) -> Result<Self, OracleError> {
        Self::new((1..=n).collect(), target)
    }

    /// Uniformly random permutation with a uniformly random target slot.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        assert!(n >= 1);
        let mut ranks: Vec<usize> = (1..=n).collect();
        ranks.shuffle(rng);
        let target = rng.gen_range(0..n);
        Self { ranks, target: Some(target) }
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn target(&self) -> Option<usize> {
        self.target
    }

    pub fn rank_of(&self, item: usize) -> usize {
        self.ranks[item]
    }

    /// Slot holding rank `rank`.
    pub fn item_with_rank(&self, rank: usize) -> Option<usize> {
        self.ranks.iter().position(|&r| r == rank)
    }

    pub fn with_target(&self, target: Option<usize>) -> Result<Self, OracleError> {
        Self::new(self.ranks.clone(), target)
    }

    fn resolve(&self, op: Operand, query: Query) -> Result<usize, OracleError> {
        match op {
            Operand::Item(i) if i < self.ranks.len() => Ok(self.ranks[i]),
            Operand::Item(_) => Err(OracleError::MalformedQuery { query, reason: "item index out of range" }),
            Operand::Target => match self.target {
                Some(t) => Ok(self.ranks[t]),
                None => Err(OracleError::MalformedQuery { query, reason: "instance has no target" }),
            },
        }
    }

    /// Answers a single query from the hidden ranks.
    pub fn answer(&self, query: &Query) -> Result<Answer, OracleError> {
        match *query {
            Query::Rank(RankQuery { item, threshold }) => {
                if threshold == 0 || threshold > self.ranks.len() {
                    return Err(OracleError::MalformedQuery { query: *query, reason: "threshold out of range" });
                }
                Ok(self.resolve(item, *query)?.cmp(&threshold))
            }
            Query::Compare(ComparisonQuery { left, right }) => {
                if left == right {
                    return Err(OracleError::MalformedQuery { query: *query, reason: "comparison of an operand with itself" });
                }
                let l = self.resolve(left, *query)?;
                let r = self.resolve(right, *query)?;
                Ok(l.cmp(&r))
            }
        }
    }

    /// Binary rank query "is rank(item) <= t?" for `t` in `0..=n`.
    pub fn rank_at_most(&self, item: Operand, t: usize) -> Result<bool, OracleError> {
        let query = Query::Rank(RankQuery { item, threshold: t.max(1) });
        if t > self.ranks.len() {
            return Err(OracleError::MalformedQuery { query, reason: "threshold out of range" });
        }
        Ok(self.resolve(item, query)? <= t)
    }

    /// Answers a three-way rank query from the two binary queries at `t` and `t - 1`.
    pub fn answer_via_binary(&self, query: &RankQuery) -> Result<Answer, OracleError> {
        if query.threshold == 0 || query.threshold > self.ranks.len() {
            return Err(OracleError::MalformedQuery { query: (*query).into(), reason: "threshold out of range" });
        }
        let at = self.rank_at_most(query.item, query.threshold)?;
        let below = self.rank_at_most(query.item, query.threshold - 1)?;
        Ok(three_way_from_binary(at, below))
    }
}

/// Combines "rank <= t" and "rank <= t-1" into the three-way answer at `t`.
pub fn three_way_from_binary(at_most_t: bool, at_most_prev: bool) -> Answer {
    match (at_most_t, at_most_prev) {
        (true, true) => Ordering::Less,
        (true, false) => Ordering::Equal,
        (false, _) => Ordering::Greater,
    }
}

/// Per-round record of `(query, answer)` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundTranscript<Q = Query, A = Answer> {
    rounds: Vec<Vec<(Q, A)>>,
    k_limit: usize,
    total_queries: usize,
}

impl<Q, A> RoundTranscript<Q, A> {
    pub fn new(k_limit: usize) -> Self {
        Self { rounds: Vec::new(), k_limit, total_queries: 0 }
    }

    /// Appends a batch; panics if the round limit would be exceeded.
    pub fn push_round(&mut self, batch: Vec<(Q, A)>) {
        assert!(self.rounds.len() < self.k_limit, "transcript round limit exceeded");
        self.total_queries += batch.len();
        self.rounds.push(batch);
    }

    pub fn rounds(&self) -> &[Vec<(Q, A)>] {
        &self.rounds
    }

    pub fn rounds_used(&self) -> usize {
        self.rounds.len()
    }

    pub fn k_limit(&self) -> usize {
        self.k_limit
    }

    pub fn total_queries(&self) -> usize {
        self.total_queries
    }

    pub fn round_sizes(&self) -> Vec<usize> {
        self.rounds.iter().map(Vec::len).collect()
    }
}

impl RoundTranscript<Query, Answer> {
    /// Replays every recorded pair against `instance`.
    pub fn consistent_with(&self, instance: &HiddenInstance) -> bool {
        self.rounds
            .iter()
            .flatten()
            .all(|(q, a)| instance.answer(q) == Ok(*a))
    }
}

/// What an algorithm may do with a rank-query oracle: learn `n`, and submit
/// whole rounds of rank queries.
pub trait RankOracle {
    fn len(&self) -> usize;

    fn round_limit(&self) -> usize;

    fn rounds_used(&self) -> usize;

    fn rounds_left(&self) -> usize {
        self.round_limit().saturating_sub(self.rounds_used())
    }

    fn ask(&mut self, queries: &[RankQuery]) -> Result<Vec<Answer>, OracleError>;
}

#[derive(Clone, Debug)]
pub struct OracleSession {
    instance: HiddenInstance,
    transcript: RoundTranscript,
}

impl OracleSession {
    pub fn open(instance: HiddenInstance, k_limit: usize) -> Result<Self, OracleError> {
        if k_limit == 0 {
            return Err(OracleError::ZeroRoundLimit);
        }
        Ok(Self { instance, transcript: RoundTranscript::new(k_limit) })
    }

    pub fn instance(&self) -> &HiddenInstance {
        &self.instance
    }

    pub fn len(&self) -> usize {
        self.instance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instance.is_empty()
    }

    /// Submits one batch. Either every query is answered and the batch is
    /// recorded, or nothing changes.
    pub fn submit_round(&mut self, queries: &[Query]) -> Result<Vec<Answer>, OracleError> {
        if self.transcript.rounds_used() >= self.transcript.k_limit() {
            return Err(OracleError::RoundLimitExceeded { limit: self.transcript.k_limit() });
        }
        let answers = queries
            .iter()
            .map(|q| self.instance.answer(q))
            .collect::<Result<Vec<_>, _>>()?;
        self.transcript
            .push_round(queries.iter().copied().zip(answers.iter().copied()).collect());
        Ok(answers)
    }

    pub fn transcript(&self) -> &RoundTranscript {
        &self.transcript
    }

    pub fn into_transcript(self) -> RoundTranscript {
        self.transcript
    }
}

impl RankOracle for OracleSession {
    fn len(&self) -> usize {
        self.instance.len()
    }

    fn round_limit(&self) -> usize {
        self.transcript.k_limit()
    }

    fn rounds_used(&self) -> usize {
        self.transcript.rounds_used()
    }

    fn ask(&mut self, queries: &[RankQuery]) -> Result<Vec<Answer>, OracleError> {
        let batch: Vec<Query> = queries.iter().copied().map(Query::Rank).collect();
        self.submit_round(&batch)
    }
}
