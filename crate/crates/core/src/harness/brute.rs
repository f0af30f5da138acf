//! Exhaustive optimizers for tiny instances, used to sanity-check the bands.

use super::HarnessError;
use crate::math::rat;
use crate::Rational;

/// Optimal Select strategy found by exhaustive search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectOptimum {
    pub expected_queries: Rational,
    /// Probe sets per round (sorted slot indices) of one optimal strategy.
    pub rounds: Vec<Vec<usize>>,
    /// Slot guessed when no probe hits, if any.
    pub guess: Option<usize>,
}

const SELECT_MAX_N: usize = 5;
const SELECT_MAX_K: usize = 2;

/// Minimum expected query count of any deterministic `k`-round Select strategy
/// that returns the target with probability at least `p` when the target slot
/// is uniform over `0..n`.
///
/// A strategy only learns "hit" or "miss" each round and stops at the first
/// hit, so it is fully described by one probe set per round plus a fallback
/// guess. Every such combination is enumerated, overlapping sets included.
pub fn brute_force_select(n: usize, k: usize, p: &Rational) -> Result<SelectOptimum, HarnessError> {
    if n == 0 || k == 0 || n > SELECT_MAX_N || k > SELECT_MAX_K {
        return Err(HarnessError::SearchSpaceTooLarge(format!("select needs 1 <= n <= {SELECT_MAX_N}, 1 <= k <= {SELECT_MAX_K}")));
    }
    if !crate::math::is_probability(p) {
        return Err(HarnessError::BadConfig("p must lie in [0, 1]".into()));
    }
    let subsets = 1usize << n;
    let mut best: Option<SelectOptimum> = None;
    let mut masks = vec![0usize; k];
    loop {
        // cost[t] for target slot t, success mask
        let mut total = 0usize;
        let mut probed = 0usize;
        let mut spent = 0usize;
        let mut hit_cost = vec![None; n];
        for &m in &masks {
            spent += m.count_ones() as usize;
            for (t, c) in hit_cost.iter_mut().enumerate() {
                if c.is_none() && m >> t & 1 == 1 {
                    *c = Some(spent);
                }
            }
            probed |= m;
        }
        for c in &hit_cost {
            total += c.unwrap_or(spent);
        }
        let expected = rat(total as i64, n as i64);
        let guesses = std::iter::once(None).chain((0..n).map(Some));
        for guess in guesses {
            let covered = probed | guess.map_or(0, |g| 1 << g);
            if rat(covered.count_ones() as i64, n as i64) < *p {
                continue;
            }
            let better = best.as_ref().is_none_or(|b| expected < b.expected_queries);
            if better {
                best = Some(SelectOptimum {
                    expected_queries: expected.clone(),
                    rounds: masks.iter().map(|&m| (0..n).filter(|t| m >> t & 1 == 1).collect()).collect(),
                    guess,
                });
            }
        }
        // next combination of masks
        let mut j = 0;
        loop {
            if j == k {
                return Ok(best.expect("probing everything always qualifies"));
            }
            masks[j] += 1;
            if masks[j] < subsets {
                break;
            }
            masks[j] = 0;
            j += 1;
        }
    }
}

const LOCATE_MAX_N: usize = 32;
const LOCATE_MAX_K: usize = 3;

/// Worst-case query count of the best deterministic `k`-round Locate strategy
/// on `n` candidates, found by searching over every threshold set per round.
///
/// After any round the surviving ranks form an interval, so the game value
/// depends only on the interval length and the rounds left. A round that
/// queries `q` thresholds inside an interval of length `m` splits the other
/// `m - q` ranks into `q + 1` gaps of any sizes; every split is tried.
pub fn brute_force_locate(n: usize, k: usize) -> Result<usize, HarnessError> {
    if n == 0 || k == 0 || n > LOCATE_MAX_N || k > LOCATE_MAX_K {
        return Err(HarnessError::SearchSpaceTooLarge(format!("locate needs 1 <= n <= {LOCATE_MAX_N}, 1 <= k <= {LOCATE_MAX_K}")));
    }
    const NEVER: usize = usize::MAX / 4;
    // value[r][m]: best worst case for m candidates and r rounds
    let mut value = vec![vec![NEVER; n + 1]; k + 1];
    value[0][0] = 0;
    value[0][1] = 0;
    for r in 1..=k {
        value[r][0] = 0;
        value[r][1] = 0;
        for m in 2..=n {
            let mut best = NEVER;
            for q in 1..=m {
                let worst_gap = best_split(&value[r - 1], m - q, q + 1);
                best = best.min(q.saturating_add(worst_gap));
            }
            value[r][m] = best;
        }
    }
    Ok(value[k][n])
}

/// Smallest possible max of `prev[size]` over splits of `total` into `parts` gaps.
fn best_split(prev: &[usize], total: usize, parts: usize) -> usize {
    // split[p][s]: best worst gap value for s ranks in p gaps
    let mut split: Vec<usize> = prev[..=total].to_vec();
    for _ in 1..parts {
        let mut next = vec![usize::MAX; total + 1];
        for s in 0..=total {
            for first in 0..=s {
                next[s] = next[s].min(prev[first].max(split[s - first]));
            }
        }
        split = next;
    }
    split[total]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::rat_int;

    #[test]
    fn locate_values() {
        assert_eq!(brute_force_locate(1, 1).unwrap(), 0);
        assert_eq!(brute_force_locate(2, 1).unwrap(), 1);
        assert!(brute_force_locate(9, 2).unwrap() <= 6);
        // probing every other rank pins the rest by elimination
        assert_eq!(brute_force_locate(16, 1).unwrap(), 8);
        assert!(brute_force_locate(33, 2).is_err());
    }

    #[test]
    fn select_values() {
        let opt = brute_force_select(3, 1, &rat(1, 1)).unwrap();
        assert_eq!(opt.expected_queries, rat_int(2));
        let opt = brute_force_select(1, 1, &rat(1, 1)).unwrap();
        assert_eq!(opt.expected_queries, rat_int(0));
        assert!(brute_force_select(6, 1, &rat(1, 1)).is_err());
        let free = brute_force_select(5, 2, &rat(1, 5)).unwrap();
        assert_eq!(free.expected_queries, rat_int(0));
    }

    #[test]
    fn two_rounds_beat_one() {
        // rounds of 2 then 2: 2*2/5 + 4*3/5 = 16/5
        let opt = brute_force_select(5, 2, &rat(1, 1)).unwrap();
        assert_eq!(opt.expected_queries, rat(16, 5));
    }
}
