//! Adaptive adversary for rank-query sorters.
//!
//! The adversary keeps the hidden order undecided for as long as possible.
//! When a round touches a block of undecided items, it finds the largest `x`
//! such that `x` items of the block were not asked about any of the block's
//! lowest `x` ranks, places those items (the set `S`) at the bottom, pins one
//! more item just above them, and repeats on what is left. Items in `S` have
//! learned nothing this round and must be sorted with the rounds that remain.

use std::cmp::Ordering;

use thiserror::Error;

use super::{RankBlock, SortError};
use crate::oracle::{Answer, Operand, OracleError, Query, RankOracle, RankQuery, RoundTranscript};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdversaryError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error("algorithm output {claimed} for item {item}, but the adversary can still make it wrong")]
    AlgorithmIncorrect { item: usize, claimed: usize },
}

/// One split announced by the adversary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Announcement {
    pub round: usize,
    /// Items placed below everything else in the block.
    pub low_set: Vec<usize>,
    /// Item pinned right above `low_set`, and its rank.
    pub mid: usize,
    pub mid_rank: usize,
}

#[derive(Clone, Debug)]
pub struct AdversaryState {
    n: usize,
    blocks: Vec<RankBlock>,
    fixed: Vec<Option<usize>>,
    announcements: Vec<Announcement>,
    transcript: RoundTranscript<RankQuery, Answer>,
}

impl AdversaryState {
    pub fn new(n: usize, k_limit: usize) -> Self {
        let mut state = Self {
            n,
            blocks: Vec::new(),
            fixed: vec![None; n],
            announcements: Vec::new(),
            transcript: RoundTranscript::new(k_limit),
        };
        state.add_block(RankBlock { lo: 1, hi: n, items: (0..n).collect() });
        state
    }

    fn add_block(&mut self, block: RankBlock) {
        match block.items.len() {
            0 => {}
            1 => self.fixed[block.items[0]] = Some(block.lo),
            _ => self.blocks.push(block),
        }
    }

    pub fn blocks(&self) -> &[RankBlock] {
        &self.blocks
    }

    pub fn fixed_rank(&self, item: usize) -> Option<usize> {
        self.fixed[item]
    }

    pub fn announcements(&self) -> &[Announcement] {
        &self.announcements
    }

    pub fn transcript(&self) -> &RoundTranscript<RankQuery, Answer> {
        &self.transcript
    }

    /// One total order compatible with everything announced so far: fixed
    /// items keep their rank, each block is filled in index order.
    pub fn witness(&self) -> Vec<usize> {
        let mut ranks: Vec<usize> = self.fixed.iter().map(|r| r.unwrap_or(0)).collect();
        for b in &self.blocks {
            let mut items = b.items.clone();
            items.sort_unstable();
            for (offset, i) in items.into_iter().enumerate() {
                ranks[i] = b.lo + offset;
            }
        }
        ranks
    }

    /// Replays every answer against [`witness`](Self::witness).
    pub fn witness_is_consistent(&self) -> bool {
        let w = self.witness();
        let mut seen = vec![false; self.n];
        for &r in &w {
            if r == 0 || r > self.n || seen[r - 1] {
                return false;
            }
            seen[r - 1] = true;
        }
        self.transcript.rounds().iter().flatten().all(|(q, a)| match q.item {
            Operand::Item(i) => w[i].cmp(&q.threshold) == *a,
            Operand::Target => false,
        })
    }

    fn check(&self, q: &RankQuery) -> Result<usize, OracleError> {
        let malformed = |reason| OracleError::MalformedQuery { query: Query::Rank(*q), reason };
        let item = match q.item {
            Operand::Item(i) if i < self.n => i,
            Operand::Item(_) => return Err(malformed("item index out of range")),
            Operand::Target => return Err(malformed("sorting instances have no target")),
        };
        if q.threshold == 0 || q.threshold > self.n {
            return Err(malformed("threshold out of range"));
        }
        Ok(item)
    }

    /// Answers one round of queries, committing to as little as possible.
    pub fn adversary_round(&mut self, queries: &[RankQuery]) -> Result<Vec<Answer>, OracleError> {
        if self.transcript.rounds_used() >= self.transcript.k_limit() {
            return Err(OracleError::RoundLimitExceeded { limit: self.transcript.k_limit() });
        }
        let mut asked: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for q in queries {
            let item = self.check(q)?;
            asked[item].push(q.threshold);
        }
        let round = self.transcript.rounds_used() + 1;
        let blocks = std::mem::take(&mut self.blocks);
        for block in blocks {
            self.split(block, &asked, round);
        }
        let answers: Vec<Answer> = queries.iter().map(|q| self.answer(q)).collect();
        self.transcript.push_round(queries.iter().copied().zip(answers.iter().copied()).collect());
        Ok(answers)
    }

    fn split(&mut self, mut block: RankBlock, asked: &[Vec<usize>], round: usize) {
        loop {
            if block.items.len() <= 1 {
                self.add_block(block);
                return;
            }
            // lowest in-block threshold asked about each item, relative to block.lo (1-based)
            let first_hit: Vec<Option<usize>> = block
                .items
                .iter()
                .map(|&i| {
                    asked[i]
                        .iter()
                        .filter(|&&t| t >= block.lo && t <= block.hi)
                        .map(|&t| t + 1 - block.lo)
                        .min()
                })
                .collect();
            if first_hit.iter().all(Option::is_none) {
                self.add_block(block);
                return;
            }
            let m = block.items.len();
            // free_above[x] = items with nothing asked in [1, x]
            let mut hist = vec![0usize; m + 2];
            for h in &first_hit {
                hist[h.unwrap_or(m + 1).min(m + 1)] += 1;
            }
            let mut x = 0;
            let mut free = m; // items whose first hit is above x
            for cand in 1..=m {
                free -= hist[cand];
                if free >= cand {
                    x = cand;
                }
            }
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by_key(|&j| block.items[j]);
            let low: Vec<usize> = order
                .iter()
                .filter(|&&j| first_hit[j].is_none_or(|h| h > x))
                .take(x)
                .map(|&j| block.items[j])
                .collect();
            let mid = *order
                .iter()
                .map(|&j| block.items[j])
                .filter(|i| !low.contains(i))
                .collect::<Vec<_>>()
                .first()
                .expect("x < m leaves an item for the middle");
            let mid_rank = block.lo + x;
            self.fixed[mid] = Some(mid_rank);
            self.announcements.push(Announcement { round, low_set: low.clone(), mid, mid_rank });
            let rest: Vec<usize> = block.items.iter().copied().filter(|i| *i != mid && !low.contains(i)).collect();
            self.add_block(RankBlock { lo: block.lo, hi: mid_rank - 1, items: low });
            block = RankBlock { lo: mid_rank + 1, hi: block.hi, items: rest };
        }
    }

    fn answer(&self, q: &RankQuery) -> Answer {
        let Operand::Item(i) = q.item else { unreachable!("validated") };
        if let Some(r) = self.fixed[i] {
            return r.cmp(&q.threshold);
        }
        let b = self.blocks.iter().find(|b| b.items.contains(&i)).expect("unfixed item sits in a block");
        if q.threshold < b.lo {
            Ordering::Greater
        } else if q.threshold > b.hi {
            Ordering::Less
        } else {
            unreachable!("blocks left open have no queries inside their range")
        }
    }
}

/// [`AdversaryState`] behind the [`RankOracle`] interface.
#[derive(Clone, Debug)]
pub struct AdversaryOracle {
    pub state: AdversaryState,
}

impl AdversaryOracle {
    pub fn new(n: usize, k: usize) -> Self {
        Self { state: AdversaryState::new(n, k) }
    }
}

impl RankOracle for AdversaryOracle {
    fn len(&self) -> usize {
        self.state.n
    }

    fn round_limit(&self) -> usize {
        self.state.transcript.k_limit()
    }

    fn rounds_used(&self) -> usize {
        self.state.transcript.rounds_used()
    }

    fn ask(&mut self, queries: &[RankQuery]) -> Result<Vec<Answer>, OracleError> {
        self.state.adversary_round(queries)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdversaryReport {
    pub total_queries: usize,
    pub round_sizes: Vec<usize>,
    /// The order the adversary ends up committing to.
    pub order: Vec<usize>,
}

/// Plays the adversary against a sorter and returns how many queries it
/// needed. Fails if the sorter's output is not forced by the answers.
pub fn forced_query_count<F>(n: usize, k: usize, algorithm: F) -> Result<AdversaryReport, AdversaryError>
where
    F: FnOnce(&mut AdversaryOracle) -> Result<Vec<usize>, SortError>,
{
    let mut oracle = AdversaryOracle::new(n, k);
    let claimed = algorithm(&mut oracle)?;
    let state = &oracle.state;
    for (item, &c) in claimed.iter().enumerate() {
        match state.fixed[item] {
            Some(r) if r == c => {}
            _ => return Err(AdversaryError::AlgorithmIncorrect { item, claimed: c }),
        }
    }
    Ok(AdversaryReport {
        total_queries: state.transcript.total_queries(),
        round_sizes: state.transcript.round_sizes(),
        order: state.witness(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sort::{sort_rank, sorting_lower_bound};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn no_queries_no_split() {
        let mut st = AdversaryState::new(4, 3);
        assert_eq!(st.adversary_round(&[]).unwrap(), vec![]);
        assert!(st.announcements().is_empty());
        assert_eq!(st.blocks().len(), 1);
        assert_eq!(st.transcript().rounds_used(), 1);
    }

    #[test]
    fn everyone_asked_at_one() {
        let mut st = AdversaryState::new(4, 2);
        let qs: Vec<RankQuery> = (0..4).map(|i| RankQuery::new(i, 1)).collect();
        let answers = st.adversary_round(&qs).unwrap();
        let first = &st.announcements()[0];
        assert!(first.low_set.is_empty());
        assert_eq!((first.mid, first.mid_rank), (0, 1));
        assert_eq!(answers, vec![Ordering::Equal, Ordering::Greater, Ordering::Greater, Ordering::Greater]);
        assert_eq!(st.transcript().total_queries(), 4);
        assert!(st.witness_is_consistent());
    }

    #[test]
    fn two_free_items_go_low() {
        // items 1 and 3 never asked about ranks 1..=2; the others asked at 1, 2, 3
        let mut st = AdversaryState::new(5, 2);
        let mut qs = Vec::new();
        for i in [0, 2, 4] {
            qs.extend((1..=3).map(|t| RankQuery::new(i, t)));
        }
        st.adversary_round(&qs).unwrap();
        let first = &st.announcements()[0];
        assert_eq!(first.low_set, vec![1, 3]);
        assert_eq!((first.mid, first.mid_rank), (0, 3));
        assert!(st.witness_is_consistent());
    }

    #[test]
    fn singleton_forces_nothing() {
        let report = forced_query_count(1, 3, |o| sort_rank(o, 3)).unwrap();
        assert_eq!(report.total_queries, 0);
    }

    #[test]
    fn block_sort_pays_at_least_the_bound() {
        for (n, k) in [(16, 2), (64, 1), (64, 2), (64, 3), (128, 2), (256, 2)] {
            let report = forced_query_count(n, k, |o| sort_rank(o, k)).unwrap();
            assert!(report.total_queries as f64 >= sorting_lower_bound(k, n).max(0.0), "n={n} k={k}");
            assert!(report.round_sizes.len() <= k);
        }
    }

    #[test]
    fn lazy_sorter_is_caught() {
        // one round of a two-round plan cannot sort 8 items
        let err = forced_query_count(8, 1, |o| {
            let qs: Vec<RankQuery> = (0..8).map(|i| RankQuery::new(i, 4)).collect();
            o.ask(&qs)?;
            Ok((1..=8).collect())
        })
        .unwrap_err();
        assert!(matches!(err, AdversaryError::AlgorithmIncorrect { .. }));
    }

    proptest! {
        #[test]
        fn always_has_a_consistent_order(n in 1usize..30, rounds in 1usize..5, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut st = AdversaryState::new(n, rounds);
            for _ in 0..rounds {
                let count = rng.gen_range(0..3 * n);
                let qs: Vec<RankQuery> = (0..count)
                    .map(|_| RankQuery::new(rng.gen_range(0..n), rng.gen_range(1..=n)))
                    .collect();
                st.adversary_round(&qs).unwrap();
                prop_assert!(st.witness_is_consistent());
                let placed: usize = st.blocks().iter().map(|b| b.items.len()).sum::<usize>()
                    + (0..n).filter(|&i| st.fixed_rank(i).is_some()).count();
                prop_assert_eq!(placed, n);
            }
        }
    }
}
