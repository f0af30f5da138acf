//! Ordered search: find the rank of the promised element in `k` rounds.
//!
//! Every algorithm here talks to a [`RankOracle`] with queries of the form
//! "how does rank(z) compare to t?".

use num_traits::{One, Signed, Zero};
use rand::Rng;
use thiserror::Error;

use crate::math::{bernoulli, ceil_i64, ceil_log2, ceil_root, is_probability, rat_int};
use crate::oracle::{Answer, OracleError, RankOracle, RankQuery};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LocateError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("round budget must be at least 1")]
    ZeroRounds,
    #[error("answers contradict the promise that the target is present")]
    PromiseBroken,
    #[error("probability must lie in the stated range")]
    BadProbability,
    #[error("rank subset is empty")]
    EmptySubset,
    #[error("rank {0} is outside 1..=n")]
    RankOutOfRange(usize),
    #[error("distribution has {got} weights, expected {want}")]
    DistributionLength { got: usize, want: usize },
}

/// Probes splitting the rank interval `[lo, hi]` into blocks whose sizes
/// differ by at most one, larger blocks first. Blocks may be empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockPlan {
    pub lo: usize,
    pub hi: usize,
    pub probes: Vec<usize>,
}

impl BlockPlan {
    /// Plan with `blocks - 1` probes over `[lo, hi]`; needs `1 <= blocks <= hi - lo + 2`.
    pub fn new(lo: usize, hi: usize, blocks: usize) -> Self {
        let len = hi + 1 - lo;
        assert!(blocks >= 1 && blocks <= len + 1, "cannot place {blocks} blocks in {len} ranks");
        let free = len - (blocks - 1);
        let (base, extra) = (free / blocks, free % blocks);
        let mut probes = Vec::with_capacity(blocks - 1);
        let mut at = lo;
        for b in 0..blocks - 1 {
            at += base + usize::from(b < extra);
            probes.push(at);
            at += 1;
        }
        Self { lo, hi, probes }
    }

    /// Inclusive block ranges; an empty block is `(s, s - 1)`, reported as `None`.
    pub fn blocks(&self) -> Vec<Option<(usize, usize)>> {
        let mut out = Vec::with_capacity(self.probes.len() + 1);
        let mut start = self.lo;
        for &p in self.probes.iter().chain(std::iter::once(&(self.hi + 1))) {
            out.push(if p > start { Some((start, p - 1)) } else { None });
            start = p + 1;
        }
        out
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks()
            .into_iter()
            .map(|b| b.map_or(0, |(s, e)| e + 1 - s))
            .collect()
    }
}

/// What happened in one run: the answer plus the candidate count left after
/// every round (the first entry is the starting count).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocateTrace {
    pub rank: Option<usize>,
    pub survivors: Vec<usize>,
    pub rounds: usize,
}

/// Core block search over a sorted candidate list.
///
/// With `promised` the target is known to sit at one of the candidates, so a
/// single survivor needs no query.
fn block_search<O: RankOracle + ?Sized>(
    oracle: &mut O,
    mut cands: Vec<usize>,
    rounds: usize,
    promised: bool,
) -> Result<LocateTrace, LocateError> {
    let mut survivors = vec![cands.len()];
    let mut left = rounds;
    let mut used = 0;
    loop {
        let m = cands.len();
        if m == 0 {
            return Ok(LocateTrace { rank: None, survivors, rounds: used });
        }
        if m == 1 && promised {
            return Ok(LocateTrace { rank: Some(cands[0]), survivors, rounds: used });
        }
        if left == 0 {
            return Err(LocateError::PromiseBroken);
        }
        if left == 1 || m == 1 {
            let qs: Vec<RankQuery> = cands.iter().map(|&t| RankQuery::target(t)).collect();
            let answers = oracle.ask(&qs)?;
            used += 1;
            let hit = answers.iter().position(|a| *a == Answer::Equal).map(|i| cands[i]);
            survivors.push(usize::from(hit.is_some()));
            if hit.is_none() && promised {
                return Err(LocateError::PromiseBroken);
            }
            return Ok(LocateTrace { rank: hit, survivors, rounds: used });
        }
        let z = ceil_root(m as u64, left as u32) as usize;
        let plan = BlockPlan::new(0, m - 1, z);
        let qs: Vec<RankQuery> = plan.probes.iter().map(|&pos| RankQuery::target(cands[pos])).collect();
        let answers = oracle.ask(&qs)?;
        used += 1;
        left -= 1;
        let blocks = plan.blocks();
        let decided = answers.iter().position(|a| *a != Answer::Greater);
        let next = match decided {
            Some(i) if answers[i] == Answer::Equal => {
                survivors.push(1);
                return Ok(LocateTrace { rank: Some(cands[plan.probes[i]]), survivors, rounds: used });
            }
            Some(i) => blocks[i],
            None => blocks[blocks.len() - 1],
        };
        cands = match next {
            Some((s, e)) => cands[s..=e].to_vec(),
            None => Vec::new(),
        };
        survivors.push(cands.len());
    }
}

/// Rounds actually worth spending on `m` candidates.
fn effective_rounds(k: usize, m: usize) -> usize {
    k.min((ceil_log2(m.max(1) as u64) as usize).max(1))
}

/// Deterministic block search with a full trace.
pub fn locate_traced<O: RankOracle + ?Sized>(oracle: &mut O, k: usize) -> Result<LocateTrace, LocateError> {
    if k == 0 {
        return Err(LocateError::ZeroRounds);
    }
    let n = oracle.len();
    let rounds = effective_rounds(k, n).min(oracle.rounds_left());
    block_search(oracle, (1..=n).collect(), rounds, true)
}

/// Returns the rank of the promised element using at most `k` rounds and at
/// most `k * ⌈n^(1/k)⌉` queries.
pub fn locate_det<O: RankOracle + ?Sized>(oracle: &mut O, k: usize) -> Result<usize, LocateError> {
    locate_traced(oracle, k)?.rank.ok_or(LocateError::PromiseBroken)
}

/// Runs [`locate_det`] with probability `p`, otherwise gives up without asking anything.
pub fn locate_rand<O: RankOracle + ?Sized, R: Rng + ?Sized>(
    oracle: &mut O,
    k: usize,
    p: &Rational,
    rng: &mut R,
) -> Result<Option<usize>, LocateError> {
    if !is_probability(p) {
        return Err(LocateError::BadProbability);
    }
    if !bernoulli(rng, p) {
        return Ok(None);
    }
    locate_det(oracle, k).map(Some)
}

/// Searches only the ranks in `subset`. Finds the target iff its rank is in
/// the subset, using at most `k * ⌈|S|^(1/k)⌉` queries either way.
pub fn locate_det_subset<O: RankOracle + ?Sized>(
    oracle: &mut O,
    k: usize,
    subset: &[usize],
) -> Result<Option<usize>, LocateError> {
    Ok(locate_subset_traced(oracle, k, subset)?.rank)
}

pub fn locate_subset_traced<O: RankOracle + ?Sized>(
    oracle: &mut O,
    k: usize,
    subset: &[usize],
) -> Result<LocateTrace, LocateError> {
    if k == 0 {
        return Err(LocateError::ZeroRounds);
    }
    let n = oracle.len();
    if subset.is_empty() {
        return Err(LocateError::EmptySubset);
    }
    if let Some(&bad) = subset.iter().find(|&&r| r == 0 || r > n) {
        return Err(LocateError::RankOutOfRange(bad));
    }
    let mut cands = subset.to_vec();
    cands.sort_unstable();
    cands.dedup();
    let rounds = effective_rounds(k, cands.len()).min(oracle.rounds_left());
    block_search(oracle, cands, rounds, false)
}

/// Prior over the target's rank (index `r - 1` holds the weight of rank `r`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankDistribution {
    weights: Vec<Rational>,
}

impl RankDistribution {
    pub fn new(weights: Vec<Rational>) -> Option<Self> {
        if weights.is_empty() || weights.iter().any(|w| w.is_negative()) {
            return None;
        }
        let total: Rational = weights.iter().sum();
        total.is_one().then_some(Self { weights })
    }

    pub fn uniform(n: usize) -> Self {
        let w = Rational::new(1.into(), n.into());
        Self { weights: vec![w; n] }
    }

    pub fn point_mass(n: usize, rank: usize) -> Self {
        let mut weights = vec![Rational::zero(); n];
        weights[rank - 1] = Rational::one();
        Self { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, rank: usize) -> &Rational {
        &self.weights[rank - 1]
    }

    /// The `count` heaviest ranks, ties going to the smaller rank.
    pub fn heaviest(&self, count: usize) -> Vec<usize> {
        let mut ranks: Vec<usize> = (1..=self.weights.len()).collect();
        ranks.sort_by(|&a, &b| self.weights[b - 1].cmp(&self.weights[a - 1]).then(a.cmp(&b)));
        ranks.truncate(count);
        ranks
    }

    pub fn mass_of(&self, ranks: &[usize]) -> Rational {
        ranks.iter().map(|&r| self.weights[r - 1].clone()).sum()
    }
}

/// Rank set searched by [`locate_det_dist`]: the `⌈pn⌉` heaviest ranks.
pub fn dist_subset(dist: &RankDistribution, p: &Rational) -> Result<Vec<usize>, LocateError> {
    if !p.is_positive() || *p > Rational::one() {
        return Err(LocateError::BadProbability);
    }
    let n = dist.len();
    let size = ceil_i64(&(p * rat_int(n as i64))).max(1) as usize;
    Ok(dist.heaviest(size))
}

/// Deterministic search tuned to a prior: succeeds with probability at least
/// `p` over `dist`.
pub fn locate_det_dist<O: RankOracle + ?Sized>(
    oracle: &mut O,
    k: usize,
    p: &Rational,
    dist: &RankDistribution,
) -> Result<Option<usize>, LocateError> {
    if dist.len() != oracle.len() {
        return Err(LocateError::DistributionLength { got: dist.len(), want: oracle.len() });
    }
    let subset = dist_subset(dist, p)?;
    locate_det_subset(oracle, k, &subset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{at_most_ceil_pow, rat};
    use crate::oracle::{HiddenInstance, OracleSession};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Sorted instance whose target sits at `rank`.
    fn session(n: usize, rank: usize, k: usize) -> OracleSession {
        OracleSession::open(HiddenInstance::sorted(n, Some(rank - 1)).unwrap(), k).unwrap()
    }

    fn worst_case(n: usize, k: usize) -> usize {
        (1..=n)
            .map(|r| {
                let mut s = session(n, r, k);
                assert_eq!(locate_det(&mut s, k).unwrap(), r);
                s.transcript().total_queries()
            })
            .max()
            .unwrap()
    }

    #[test]
    fn block_plan_shapes() {
        let plan = BlockPlan::new(1, 16, 4);
        assert_eq!(plan.probes, vec![5, 9, 13]);
        assert_eq!(plan.block_sizes(), vec![4, 3, 3, 3]);
        let tight = BlockPlan::new(1, 3, 4);
        assert_eq!(tight.probes, vec![1, 2, 3]);
        assert_eq!(tight.block_sizes(), vec![0, 0, 0, 0]);
        let plan = BlockPlan::new(1, 9, 3);
        assert_eq!(plan.probes, vec![4, 7]);
    }

    #[test]
    fn sixteen_two_rounds_worst_case_is_seven() {
        assert_eq!(worst_case(16, 2), 7);
    }

    #[test]
    fn singleton_needs_no_query() {
        let mut s = session(1, 1, 1);
        assert_eq!(locate_det(&mut s, 1).unwrap(), 1);
        assert_eq!(s.transcript().total_queries(), 0);
    }

    #[test]
    fn thousand_three_rounds_within_thirty() {
        assert!(worst_case(1000, 3) <= 30);
    }

    #[test]
    fn randomized_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut s = session(16, 11, 2);
        assert_eq!(locate_rand(&mut s, 2, &rat(0, 1), &mut rng).unwrap(), None);
        assert_eq!(s.transcript().rounds_used(), 0);
        let mut s = session(16, 11, 2);
        let mut twin = session(16, 11, 2);
        assert_eq!(locate_rand(&mut s, 2, &rat(1, 1), &mut rng).unwrap(), Some(11));
        locate_det(&mut twin, 2).unwrap();
        assert_eq!(s.transcript(), twin.transcript());
    }

    #[test]
    fn randomized_half_costs_half() {
        // rank 1 is a worst case for n=16, k=2 (7 queries)
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let trials = 20_000;
        let mut total = 0;
        let mut hits = 0;
        for _ in 0..trials {
            let mut s = session(16, 1, 2);
            if locate_rand(&mut s, 2, &rat(1, 2), &mut rng).unwrap().is_some() {
                hits += 1;
            }
            total += s.transcript().total_queries();
        }
        let mean = total as f64 / trials as f64;
        assert!((mean - 3.5).abs() < 0.1, "mean {mean}");
        assert!((hits as f64 / trials as f64 - 0.5).abs() < 0.02);
    }

    #[test]
    fn subset_examples() {
        let s_low: Vec<usize> = (1..=25).collect();
        let mut s = session(100, 10, 2);
        assert_eq!(locate_det_subset(&mut s, 2, &s_low).unwrap(), Some(10));
        for r in 26..=100 {
            let mut s = session(100, r, 2);
            assert_eq!(locate_det_subset(&mut s, 2, &s_low).unwrap(), None);
            assert!(s.transcript().total_queries() <= 10);
        }
        // the full set behaves like the plain search
        let all: Vec<usize> = (1..=16).collect();
        for r in 1..=16 {
            let mut a = session(16, r, 2);
            assert_eq!(locate_det_subset(&mut a, 2, &all).unwrap(), Some(r));
            assert!(a.transcript().total_queries() <= 8);
        }
    }

    #[test]
    fn subset_miss_costs_like_some_hit() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.gen_range(2..80);
            let k = rng.gen_range(1..4);
            let size = rng.gen_range(1..=n);
            let mut pool: Vec<usize> = (1..=n).collect();
            rand::seq::SliceRandom::shuffle(pool.as_mut_slice(), &mut rng);
            let subset = &pool[..size];
            let cost = |r: usize| {
                let mut s = session(n, r, k);
                let found = locate_det_subset(&mut s, k, subset).unwrap();
                assert_eq!(found.is_some(), subset.contains(&r));
                s.transcript().total_queries()
            };
            let hit_costs: Vec<usize> = subset.iter().map(|&r| cost(r)).collect();
            let bound = k * ceil_root(size as u64, k as u32) as usize;
            for r in (1..=n).filter(|r| !subset.contains(r)) {
                let c = cost(r);
                assert!(c <= bound);
                assert!(hit_costs.contains(&c) || c == 0, "miss cost {c} not seen among hits {hit_costs:?}");
            }
        }
    }

    #[test]
    fn distribution_examples() {
        let mut s = session(100, 7, 2);
        let dist = RankDistribution::point_mass(100, 7);
        assert_eq!(dist_subset(&dist, &rat(1, 100)).unwrap(), vec![7]);
        assert_eq!(locate_det_dist(&mut s, 2, &rat(1, 100), &dist).unwrap(), Some(7));

        let uni = RankDistribution::uniform(100);
        let mut success = Rational::zero();
        for r in 1..=100 {
            let mut s = session(100, r, 2);
            if locate_det_dist(&mut s, 2, &rat(1, 4), &uni).unwrap() == Some(r) {
                success += uni.weight(r);
            }
        }
        assert_eq!(success, rat(25, 100));

        for r in 1..=20 {
            let mut s = session(20, r, 3);
            assert_eq!(locate_det_dist(&mut s, 3, &rat(1, 1), &RankDistribution::uniform(20)).unwrap(), Some(r));
        }
        assert!(RankDistribution::new(vec![rat(1, 2), rat(1, 3)]).is_none());
        assert!(dist_subset(&uni, &rat(0, 1)).is_err());
    }

    #[test]
    fn survivors_shrink_by_the_block_rule() {
        for n in 1..=300usize {
            for k in 1..=ceil_log2(n as u64).max(1) as usize {
                for r in 1..=n {
                    let mut s = session(n, r, k);
                    let trace = locate_traced(&mut s, k).unwrap();
                    assert_eq!(trace.rank, Some(r));
                    let rounds = effective_rounds(k, n);
                    for (j, w) in trace.survivors.windows(2).enumerate() {
                        let left = rounds - j;
                        if left >= 2 {
                            assert!(at_most_ceil_pow(w[1] as u64, w[0] as u64, left as u32 - 1, left as u32));
                        }
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn correct_and_bounded(n in 1usize..=512, k_seed in 0usize..16, r_seed in any::<usize>()) {
            let k = 1 + k_seed % ceil_log2(n as u64).max(1) as usize;
            let r = 1 + r_seed % n;
            let mut s = session(n, r, k);
            prop_assert_eq!(locate_det(&mut s, k).unwrap(), r);
            prop_assert!(s.transcript().total_queries() <= k * ceil_root(n as u64, k as u32) as usize);
            prop_assert!(s.transcript().rounds_used() <= k);
        }

        #[test]
        fn extra_rounds_are_harmless(n in 1usize..200, k in 1usize..30, r_seed in any::<usize>()) {
            let r = 1 + r_seed % n;
            let mut s = session(n, r, k);
            prop_assert_eq!(locate_det(&mut s, k).unwrap(), r);
        }
    }
}
