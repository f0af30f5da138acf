//! Unordered search: find the slot holding a sought rank in `k` rounds.
//!
//! Probes are rank queries `(item, sought)`; only an `Equal` answer carries
//! information, so the whole game is choosing how many fresh items to probe
//! in each round.

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::math::{bernoulli, ceil_i64, is_probability, rat, rat_int};
use crate::oracle::{Answer, OracleError, RankOracle, RankQuery};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SelectError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("need n >= 1, got 0")]
    EmptyInstance,
    #[error("round count {k} must lie in 1..={n}")]
    BadRounds { n: usize, k: usize },
    #[error("probability must lie in [0, 1]")]
    BadProbability,
    #[error("probe order is not a permutation of 0..{0}")]
    BadProbeOrder(usize),
    #[error("schedule is for n = {schedule}, oracle has n = {oracle}")]
    SizeMismatch { schedule: usize, oracle: usize },
    #[error("distribution is not a probability vector of length {0}")]
    BadDistribution(usize),
}

/// How many fresh items to probe in each round.
///
/// Round `j` probes `⌈(np-1)j/k⌉ - ⌈(np-1)(j-1)/k⌉` items (nothing at all when
/// `np < 1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectSchedule {
    pub n: usize,
    pub k: usize,
    pub p: Rational,
    pub round_sizes: Vec<usize>,
}

impl SelectSchedule {
    pub fn total(&self) -> usize {
        self.round_sizes.iter().sum()
    }

    /// Items probed by the end of each round.
    pub fn cumulative(&self) -> Vec<usize> {
        self.round_sizes
            .iter()
            .scan(0, |acc, &s| {
                *acc += s;
                Some(*acc)
            })
            .collect()
    }

    /// Items that can be the answer: every probe plus the final guess.
    pub fn covered(&self) -> usize {
        (self.total() + 1).min(self.n)
    }
}

pub fn build_schedule(n: usize, k: usize, p: &Rational) -> Result<SelectSchedule, SelectError> {
    if n == 0 {
        return Err(SelectError::EmptyInstance);
    }
    if k == 0 || k > n {
        return Err(SelectError::BadRounds { n, k });
    }
    if !is_probability(p) {
        return Err(SelectError::BadProbability);
    }
    let reach = p * rat_int(n as i64) - Rational::one();
    let round_sizes = if reach.is_negative() {
        vec![0; k]
    } else {
        let upto = |j: usize| ceil_i64(&(&reach * rat(j as i64, k as i64))) as usize;
        (1..=k).map(|j| upto(j) - upto(j - 1)).collect()
    };
    Ok(SelectSchedule { n, k, p: p.clone(), round_sizes })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectOutcome {
    /// Returned slot: the hit, or the guess when nothing matched.
    pub index: usize,
    /// Whether an oracle answer confirmed the slot.
    pub confirmed: bool,
}

fn check_order(order: &[usize], n: usize) -> Result<(), SelectError> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(SelectError::BadProbeOrder(n));
    }
    for &i in order {
        if i >= n || seen[i] {
            return Err(SelectError::BadProbeOrder(n));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Probes items in `order` round by round and stops after the round that hits.
/// Without a hit the first unprobed item in `order` is returned.
///
/// Rounds with nothing to probe are skipped rather than spent.
pub fn select_det<O: RankOracle + ?Sized>(
    oracle: &mut O,
    sought: usize,
    schedule: &SelectSchedule,
    order: &[usize],
) -> Result<SelectOutcome, SelectError> {
    let n = oracle.len();
    if schedule.n != n {
        return Err(SelectError::SizeMismatch { schedule: schedule.n, oracle: n });
    }
    check_order(order, n)?;
    let mut next = 0;
    for &size in &schedule.round_sizes {
        if size == 0 {
            continue;
        }
        let batch = &order[next..next + size];
        let qs: Vec<RankQuery> = batch.iter().map(|&i| RankQuery::new(i, sought)).collect();
        let answers = oracle.ask(&qs)?;
        if let Some(pos) = answers.iter().position(|a| *a == Answer::Equal) {
            return Ok(SelectOutcome { index: batch[pos], confirmed: true });
        }
        next += size;
    }
    // n' < n always, so there is an unprobed item left
    Ok(SelectOutcome { index: order[next.min(n - 1)], confirmed: false })
}

/// Per-slot prior that the slot holds the sought element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ItemDistribution {
    weights: Vec<Rational>,
}

impl ItemDistribution {
    pub fn new(weights: Vec<Rational>) -> Option<Self> {
        if weights.is_empty() || weights.iter().any(|w| w.is_negative()) {
            return None;
        }
        let total: Rational = weights.iter().sum();
        total.is_one().then_some(Self { weights })
    }

    pub fn uniform(n: usize) -> Self {
        Self { weights: vec![rat(1, n as i64); n] }
    }

    pub fn point_mass(n: usize, index: usize) -> Self {
        let mut weights = vec![Rational::zero(); n];
        weights[index] = Rational::one();
        Self { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    /// Slots by descending weight, ties by ascending index.
    pub fn probe_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.weights.len()).collect();
        order.sort_by(|&a, &b| self.weights[b].cmp(&self.weights[a]).then(a.cmp(&b)));
        order
    }
}

/// Heaviest slots first; succeeds with probability at least `p` over `dist`.
pub fn select_det_dist<O: RankOracle + ?Sized>(
    oracle: &mut O,
    sought: usize,
    k: usize,
    p: &Rational,
    dist: &ItemDistribution,
) -> Result<SelectOutcome, SelectError> {
    let n = oracle.len();
    if dist.len() != n {
        return Err(SelectError::BadDistribution(n));
    }
    let schedule = build_schedule(n, k, p)?;
    select_det(oracle, sought, &schedule, &dist.probe_order())
}

/// Probability that [`select_det`] returns the right slot when the target is
/// drawn from `dist`.
pub fn success_probability(schedule: &SelectSchedule, order: &[usize], dist: &ItemDistribution) -> Rational {
    order[..schedule.covered()].iter().map(|&i| dist.weights[i].clone()).sum()
}

/// Exact expected query count of [`select_det`] when slot `order[q]` holds the
/// target with probability `weights[q]`.
pub fn expected_queries_in_order(schedule: &SelectSchedule, weights_in_order: &[Rational]) -> Rational {
    let cumulative = schedule.cumulative();
    let total = *cumulative.last().unwrap_or(&0);
    let mut expected = Rational::zero();
    let mut start = 0;
    for &end in &cumulative {
        let mass: Rational = weights_in_order[start..end].iter().sum();
        expected += mass * rat_int(end as i64);
        start = end;
    }
    let rest: Rational = weights_in_order[total..].iter().sum();
    expected + rest * rat_int(total as i64)
}

/// Exact expected query count of [`select_det`] over a uniformly random target.
pub fn exact_expected_queries(schedule: &SelectSchedule) -> Rational {
    let n = schedule.n;
    expected_queries_in_order(schedule, &vec![rat(1, n as i64); n])
}

/// With probability `p` probe all but one item in a uniformly random order
/// (always finding the target), otherwise do nothing.
pub fn select_rand<O: RankOracle + ?Sized, R: Rng + ?Sized>(
    oracle: &mut O,
    sought: usize,
    k: usize,
    p: &Rational,
    rng: &mut R,
) -> Result<Option<usize>, SelectError> {
    if !is_probability(p) {
        return Err(SelectError::BadProbability);
    }
    let n = oracle.len();
    if !bernoulli(rng, p) {
        return Ok(None);
    }
    let schedule = build_schedule(n, k, &Rational::one())?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    Ok(Some(select_det(oracle, sought, &schedule, &order)?.index))
}

/// Expected cost of [`select_rand`] on any fixed input. The random order makes
/// every slot equally likely to hold the target, so this is the same for all
/// inputs.
pub fn select_rand_expected_queries(n: usize, k: usize, p: &Rational) -> Result<Rational, SelectError> {
    let schedule = build_schedule(n, k, &Rational::one())?;
    Ok(p * exact_expected_queries(&schedule))
}

/// `np(1 - (k-1)p/(2k))`, the centre of the deterministic band.
pub fn deterministic_centre(n: usize, k: usize, p: &Rational) -> Rational {
    let np = p * rat_int(n as i64);
    np * (Rational::one() - rat(k as i64 - 1, 2 * k as i64) * p)
}

/// `np(k+1)/(2k)`, the centre of the randomized band.
pub fn randomized_centre(n: usize, k: usize, p: &Rational) -> Rational {
    p * rat_int(n as i64) * rat(k as i64 + 1, 2 * k as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{HiddenInstance, OracleSession};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Identity ranks; the sought element (rank 1) sits at `slot`.
    fn session_with_hit(n: usize, slot: usize, k: usize) -> OracleSession {
        let mut ranks: Vec<usize> = (2..=n).collect();
        ranks.insert(slot, 1);
        OracleSession::open(HiddenInstance::new(ranks, Some(slot)).unwrap(), k).unwrap()
    }

    fn identity(n: usize) -> Vec<usize> {
        (0..n).collect()
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(build_schedule(10, 2, &rat(1, 1)).unwrap().round_sizes, vec![5, 4]);
        assert_eq!(build_schedule(10, 2, &rat(0, 1)).unwrap().round_sizes, vec![0, 0]);
        assert_eq!(build_schedule(5, 5, &rat(1, 1)).unwrap().round_sizes, vec![1, 1, 1, 1, 0]);
        assert!(matches!(build_schedule(3, 4, &rat(1, 1)), Err(SelectError::BadRounds { .. })));
        assert!(build_schedule(3, 1, &rat(3, 2)).is_err());
    }

    #[test]
    fn expected_cost_examples() {
        let s = build_schedule(10, 2, &rat(1, 1)).unwrap();
        assert_eq!(exact_expected_queries(&s), rat_int(7));
        assert!(exact_expected_queries(&s) <= deterministic_centre(10, 2, &rat(1, 1)) + rat_int(1));
        assert_eq!(deterministic_centre(10, 2, &rat(1, 1)) + rat_int(1), rat(17, 2));
        assert_eq!(exact_expected_queries(&build_schedule(1, 1, &rat(1, 1)).unwrap()), rat_int(0));
        assert_eq!(exact_expected_queries(&build_schedule(4, 1, &rat(1, 1)).unwrap()), rat_int(3));
    }

    #[test]
    fn enumeration_matches_closed_form() {
        for n in 1..=30 {
            for k in 1..=n.min(5) {
                for p in [rat(1, 4), rat(1, 2), rat(3, 4), rat(1, 1)] {
                    let s = build_schedule(n, k, &p).unwrap();
                    let mut total = 0usize;
                    let mut wins = 0usize;
                    for slot in 0..n {
                        let mut o = session_with_hit(n, slot, k);
                        let out = select_det(&mut o, 1, &s, &identity(n)).unwrap();
                        wins += usize::from(out.index == slot);
                        total += o.transcript().total_queries();
                    }
                    assert_eq!(rat(total as i64, n as i64), exact_expected_queries(&s));
                    assert_eq!(wins, s.covered());
                    assert!(rat(wins as i64, n as i64) >= p);
                }
            }
        }
    }

    #[test]
    fn hit_costs_the_whole_batch() {
        let s = build_schedule(10, 2, &rat(1, 1)).unwrap();
        let mut o = session_with_hit(10, 1, 2);
        let out = select_det(&mut o, 1, &s, &identity(10)).unwrap();
        assert_eq!(out, SelectOutcome { index: 1, confirmed: true });
        assert_eq!(o.transcript().total_queries(), 5);
    }

    #[test]
    fn half_probability_covers_five() {
        let s = build_schedule(10, 2, &rat(1, 2)).unwrap();
        assert_eq!(s.total(), 4);
        assert_eq!(s.covered(), 5);
        let uni = ItemDistribution::uniform(10);
        assert_eq!(success_probability(&s, &identity(10), &uni), rat(1, 2));
    }

    #[test]
    fn distribution_examples() {
        let dist = ItemDistribution::new(vec![rat(4, 10), rat(3, 10), rat(2, 10), rat(1, 10)]).unwrap();
        let s = build_schedule(4, 1, &rat(7, 10)).unwrap();
        assert_eq!(s.round_sizes, vec![2]);
        assert_eq!(success_probability(&s, &dist.probe_order(), &dist), rat(9, 10));
        let mut o = session_with_hit(4, 3, 1);
        let out = select_det_dist(&mut o, 1, 1, &rat(7, 10), &dist).unwrap();
        assert_eq!(out, SelectOutcome { index: 2, confirmed: false });

        let point = ItemDistribution::point_mass(6, 3);
        assert_eq!(point.probe_order()[0], 3);
        for p in [rat(1, 100), rat(1, 2), rat(1, 1)] {
            let mut o = session_with_hit(6, 3, 2);
            assert_eq!(select_det_dist(&mut o, 1, 2, &p, &point).unwrap().index, 3);
        }
        assert_eq!(ItemDistribution::uniform(5).probe_order(), identity(5));
    }

    #[test]
    fn randomized_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut o = session_with_hit(10, 4, 2);
        assert_eq!(select_rand(&mut o, 1, 2, &rat(0, 1), &mut rng).unwrap(), None);
        assert_eq!(o.transcript().total_queries(), 0);

        // fixed order, worst slot: 5 then 4
        let s = build_schedule(10, 2, &rat(1, 1)).unwrap();
        let mut o = session_with_hit(10, 9, 2);
        select_det(&mut o, 1, &s, &identity(10)).unwrap();
        assert_eq!(o.transcript().round_sizes(), vec![5, 4]);

        assert_eq!(select_rand_expected_queries(10, 2, &rat(1, 1)).unwrap(), rat_int(7));
        let half = select_rand_expected_queries(10, 2, &rat(1, 2)).unwrap();
        assert_eq!(half, rat(7, 2));
        assert!(half <= randomized_centre(10, 2, &rat(1, 2)) + rat_int(1));
        assert!(half >= randomized_centre(10, 2, &rat(1, 2)) - rat_int(1));

        let trials = 20_000;
        let mut total = 0;
        for _ in 0..trials {
            let mut o = session_with_hit(10, 9, 2);
            if let Some(i) = select_rand(&mut o, 1, 2, &rat(1, 2), &mut rng).unwrap() {
                assert_eq!(i, 9);
            }
            total += o.transcript().total_queries();
        }
        let mean = total as f64 / trials as f64;
        assert!((mean - 3.5).abs() < 0.1, "mean {mean}");
    }

    proptest! {
        #[test]
        fn schedule_invariants(n in 1usize..300, k_seed in 0usize..300, num in 0i64..=20) {
            let k = 1 + k_seed % n;
            let p = rat(num, 20);
            let s = build_schedule(n, k, &p).unwrap();
            prop_assert_eq!(s.round_sizes.len(), k);
            let reach = &p * rat_int(n as i64) - Rational::one();
            let want = if reach.is_negative() { 0 } else { ceil_i64(&reach) as usize };
            prop_assert_eq!(s.total(), want);
            prop_assert!(rat(s.covered() as i64, n as i64) >= p);
            let e = exact_expected_queries(&s);
            prop_assert!(e <= deterministic_centre(n, k, &p) + rat_int(1));
        }

        #[test]
        fn result_is_right_when_covered(n in 1usize..60, slot_seed in any::<usize>(), seed in any::<u64>()) {
            let slot = slot_seed % n;
            let mut order = identity(n);
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let s = build_schedule(n, 1.max(n / 7), &rat(1, 1)).unwrap();
            let mut o = session_with_hit(n, slot, s.k);
            let out = select_det(&mut o, 1, &s, &order).unwrap();
            prop_assert_eq!(out.index, slot);
        }
    }
}
