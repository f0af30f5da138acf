//! Sorting with rank queries in `k` rounds.
//!
//! Each round every unresolved item is probed at the same evenly spaced
//! thresholds of its current rank block; an `Equal` answer pins the item, any
//! other pattern drops it into a smaller block for the next round.

pub mod adversary;

use std::cmp::Ordering;

use thiserror::Error;

use crate::locate::BlockPlan;
use crate::math::ceil_root;
use crate::oracle::{OracleError, RankOracle, RankQuery};

pub use adversary::{forced_query_count, AdversaryError, AdversaryOracle, AdversaryReport, AdversaryState};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SortError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("round budget must be at least 1")]
    ZeroRounds,
    #[error("ran out of rounds with {0} items unresolved")]
    Unresolved(usize),
}

/// A run of consecutive ranks `lo..=hi` together with the items known to
/// occupy exactly those ranks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankBlock {
    pub lo: usize,
    pub hi: usize,
    pub items: Vec<usize>,
}

impl RankBlock {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// What the sorter knows between rounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SortState {
    pub blocks: Vec<RankBlock>,
    pub resolved: Vec<Option<usize>>,
}

impl SortState {
    pub fn new(n: usize) -> Self {
        let mut state = Self { blocks: Vec::new(), resolved: vec![None; n] };
        state.push_block(RankBlock { lo: 1, hi: n, items: (0..n).collect() });
        state
    }

    /// Adds a block, resolving it on the spot when it holds a single item.
    fn push_block(&mut self, block: RankBlock) {
        debug_assert_eq!(block.items.len(), block.hi + 1 - block.lo);
        match block.items.len() {
            0 => {}
            1 => self.resolved[block.items[0]] = Some(block.lo),
            _ => self.blocks.push(block),
        }
    }

    pub fn unresolved(&self) -> usize {
        self.blocks.iter().map(RankBlock::len).sum()
    }

    /// Every item is resolved or in exactly one block whose size matches its range.
    pub fn is_consistent(&self) -> bool {
        let n = self.resolved.len();
        let mut seen = vec![false; n];
        for (i, r) in self.resolved.iter().enumerate() {
            if r.is_some() {
                seen[i] = true;
            }
        }
        for b in &self.blocks {
            if b.items.len() != b.hi + 1 - b.lo {
                return false;
            }
            for &i in &b.items {
                if seen[i] {
                    return false;
                }
                seen[i] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Thresholds used for a block with `left` rounds to go.
fn block_thresholds(block: &RankBlock, left: usize) -> Vec<usize> {
    let m = block.len();
    if left == 1 {
        // last chance: every rank but the top one, which is implied
        (block.lo..block.hi).collect()
    } else {
        let z = ceil_root(m as u64, left as u32) as usize;
        BlockPlan::new(block.lo, block.hi, z).probes
    }
}

/// Runs one round of the block sort on `state`.
pub fn sort_round<O: RankOracle + ?Sized>(oracle: &mut O, state: &mut SortState, left: usize) -> Result<(), SortError> {
    let plans: Vec<Vec<usize>> = state.blocks.iter().map(|b| block_thresholds(b, left)).collect();
    let mut queries = Vec::new();
    for (block, probes) in state.blocks.iter().zip(&plans) {
        for &item in &block.items {
            queries.extend(probes.iter().map(|&t| RankQuery::new(item, t)));
        }
    }
    let answers = oracle.ask(&queries)?;
    let mut cursor = 0;
    let blocks = std::mem::take(&mut state.blocks);
    for (block, probes) in blocks.into_iter().zip(plans) {
        let plan = BlockPlan { lo: block.lo, hi: block.hi, probes: probes.clone() };
        let ranges = plan.blocks();
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); ranges.len()];
        for &item in &block.items {
            let got = &answers[cursor..cursor + probes.len()];
            cursor += probes.len();
            match got.iter().position(|a| *a != Ordering::Greater) {
                Some(j) if got[j] == Ordering::Equal => state.resolved[item] = Some(probes[j]),
                Some(j) => buckets[j].push(item),
                None => buckets[ranges.len() - 1].push(item),
            }
        }
        for (range, items) in ranges.into_iter().zip(buckets) {
            if let Some((lo, hi)) = range {
                state.push_block(RankBlock { lo, hi, items });
            }
        }
    }
    Ok(())
}

/// Sorts all `n` items in at most `k` rounds; `result[i]` is the rank of item `i`.
pub fn sort_rank<O: RankOracle + ?Sized>(oracle: &mut O, k: usize) -> Result<Vec<usize>, SortError> {
    Ok(sort_rank_traced(oracle, k)?.0)
}

/// Like [`sort_rank`], also returning the largest block population after each round.
pub fn sort_rank_traced<O: RankOracle + ?Sized>(oracle: &mut O, k: usize) -> Result<(Vec<usize>, Vec<usize>), SortError> {
    if k == 0 {
        return Err(SortError::ZeroRounds);
    }
    let n = oracle.len();
    let mut state = SortState::new(n);
    let rounds = k.min(oracle.rounds_left());
    let mut largest = Vec::new();
    for j in 0..rounds {
        if state.blocks.is_empty() {
            break;
        }
        sort_round(oracle, &mut state, rounds - j)?;
        debug_assert!(state.is_consistent());
        largest.push(state.blocks.iter().map(RankBlock::len).max().unwrap_or(1));
    }
    if !state.blocks.is_empty() {
        return Err(SortError::Unresolved(state.unresolved()));
    }
    Ok((state.resolved.into_iter().map(|r| r.expect("all resolved")).collect(), largest))
}

/// `(k/2e) n^(1+1/k) - kn`; negative values mean the bound says nothing.
pub fn sorting_lower_bound(k: usize, n: usize) -> f64 {
    let (k, n) = (k as f64, n as f64);
    k / (2.0 * std::f64::consts::E) * n.powf(1.0 + 1.0 / k) - k * n
}

/// `2k n^(1+1/k)`, the budget the block sort stays under.
pub fn sorting_upper_budget(k: usize, n: usize) -> f64 {
    let (k, n) = (k as f64, n as f64);
    2.0 * k * n.powf(1.0 + 1.0 / k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{HiddenInstance, OracleSession};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run(ranks: Vec<usize>, k: usize) -> (Vec<usize>, OracleSession) {
        let mut s = OracleSession::open(HiddenInstance::new(ranks, None).unwrap(), k).unwrap();
        let out = sort_rank(&mut s, k).unwrap();
        (out, s)
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn nine_items_two_rounds() {
        let (out, s) = run((1..=9).collect(), 2);
        assert_eq!(out, (1..=9).collect::<Vec<_>>());
        assert_eq!(s.transcript().round_sizes(), vec![18, 10]);
        assert_eq!(s.transcript().total_queries(), 28);
    }

    #[test]
    fn one_round_asks_all_thresholds() {
        let (out, s) = run(vec![5, 3, 9, 1, 2, 8, 7, 4, 6], 1);
        assert_eq!(out, vec![5, 3, 9, 1, 2, 8, 7, 4, 6]);
        assert_eq!(s.transcript().total_queries(), 72);
    }

    #[test]
    fn singleton_is_free() {
        for k in 1..4 {
            let (out, s) = run(vec![1], k);
            assert_eq!(out, vec![1]);
            assert_eq!(s.transcript().total_queries(), 0);
        }
    }

    #[test]
    fn exhaustive_small() {
        for n in 1..=7 {
            for perm in permutations(n) {
                for k in 1..=3 {
                    let (out, s) = run(perm.clone(), k);
                    assert_eq!(out, perm);
                    assert!(s.transcript().rounds_used() <= k);
                    assert!(s.transcript().total_queries() as f64 <= sorting_upper_budget(k, n));
                }
            }
        }
    }

    #[test]
    fn lower_bound_values() {
        assert!((sorting_lower_bound(2, 100) - (1000.0 / std::f64::consts::E - 200.0)).abs() < 1e-9);
        assert!((sorting_lower_bound(2, 100) - 167.88).abs() < 0.01);
        assert!((sorting_lower_bound(1, 2) + 1.264).abs() < 0.001);
        for k in 1..10 {
            assert!(sorting_lower_bound(k, 1) < 0.0);
        }
        assert!((sorting_lower_bound(2, 256) - 994.9).abs() < 0.1);
    }

    #[test]
    fn state_tracks_partition() {
        let mut s = OracleSession::open(HiddenInstance::new(vec![3, 1, 2, 6, 5, 4, 8, 7, 9], None).unwrap(), 2).unwrap();
        let mut state = SortState::new(9);
        sort_round(&mut s, &mut state, 2).unwrap();
        assert!(state.is_consistent());
        assert_eq!(state.blocks.iter().map(|b| (b.lo, b.hi)).collect::<Vec<_>>(), vec![(1, 3), (5, 6), (8, 9)]);
    }

    proptest! {
        #[test]
        fn sorts_random_permutations(n in 1usize..120, k in 1usize..6, seed in any::<u64>()) {
            let inst = HiddenInstance::random(n, &mut ChaCha8Rng::seed_from_u64(seed));
            let ranks = inst.ranks().to_vec();
            let (out, s) = run(ranks.clone(), k);
            prop_assert_eq!(out, ranks);
            prop_assert!(s.transcript().total_queries() as f64 <= sorting_upper_budget(k, n));
        }
    }
}
