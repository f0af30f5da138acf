//! Sorting through a cake protocol.
//!
//! Every agent's value sits in narrow spikes around its `i/n`-points, and the
//! `i/n`-point of each agent is picked lazily from the grid
//! `X_i = { i/(n+1) + c*eps : c = 1..n }` the first time it matters. Which
//! grid slot it gets depends only on how the agent's hidden rank compares to
//! `i`, so one rank query answers each Cut. A proportional allocation then has
//! to hand out slices in rank order, which sorts the items.

use std::cmp::Ordering;

use num_traits::{One, ToPrimitive, Zero};

use super::ReductionError;
use crate::cake::{proportional_protocol, verify_proportional, Allocation, CakeError, PiecewiseDensity, RwOracle, RwQuery};
use crate::math::{rat, rat_int};
use crate::oracle::{RankOracle, RankQuery, RoundTranscript};
use crate::Rational;

/// Lazily fixed `i/n`-points of every agent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotBook {
    n: usize,
    epsilon: Rational,
    /// `slot[p][i - 1]` = grid index `c` of agent `p`'s `i/n`-point.
    slot: Vec<Vec<Option<usize>>>,
    /// `used[i - 1][c - 1]`.
    used: Vec<Vec<bool>>,
}

impl SlotBook {
    pub fn new(n: usize) -> Self {
        // 1/(n^4 + 1) is below 1/n^4; a single agent needs a smaller step so
        // its only grid point stays inside the cake
        let epsilon = if n >= 2 { rat(1, (n as i64).pow(4) + 1) } else { rat(1, 4) };
        Self {
            n,
            epsilon,
            slot: vec![vec![None; n]; n],
            used: vec![vec![false; n]; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    /// Point `i/(n+1) + c*eps` of `X_i`.
    pub fn grid_point(&self, i: usize, c: usize) -> Rational {
        rat(i as i64, self.n as i64 + 1) + &self.epsilon * rat_int(c as i64)
    }

    /// `(i, c)` if `y` is a point of some `X_i`.
    pub fn grid_index(&self, y: &Rational) -> Option<(usize, usize)> {
        let i = (y * rat_int(self.n as i64 + 1)).floor().to_integer().to_usize()?;
        if i == 0 || i > self.n {
            return None;
        }
        let c = (y - rat(i as i64, self.n as i64 + 1)) / &self.epsilon;
        if !c.is_integer() {
            return None;
        }
        let c = c.to_integer().to_usize()?;
        (1..=self.n).contains(&c).then_some((i, c))
    }

    pub fn slot(&self, agent: usize, i: usize) -> Option<usize> {
        self.slot[agent][i - 1]
    }

    pub fn point(&self, agent: usize, i: usize) -> Option<Rational> {
        self.slot(agent, i).map(|c| self.grid_point(i, c))
    }

    /// Fixes agent `p`'s `i/n`-point given how its rank compares to `i`:
    /// below takes the smallest free slot, above the largest, equal slot `i`.
    pub fn place(&mut self, p: usize, i: usize, rank_vs_i: Ordering) -> usize {
        if let Some(c) = self.slot[p][i - 1] {
            return c;
        }
        let free = &mut self.used[i - 1];
        let c = match rank_vs_i {
            Ordering::Less => free.iter().position(|u| !u).expect("slot available") + 1,
            Ordering::Greater => free.iter().rposition(|u| !u).expect("slot available") + 1,
            Ordering::Equal => i,
        };
        assert!(!free[c - 1], "slot {c} of X_{i} handed out twice");
        free[c - 1] = true;
        self.slot[p][i - 1] = Some(c);
        c
    }

    /// `(agent, i)` whose point a query depends on, if any.
    fn needs(&self, q: &RwQuery) -> Result<Option<(usize, usize)>, CakeError> {
        match q {
            RwQuery::Cut { agent, alpha } => {
                let scaled = alpha * rat_int(self.n as i64);
                if !scaled.is_integer() || scaled < Rational::zero() || scaled > rat_int(self.n as i64) {
                    return Err(CakeError::ProtocolNotPrimitive(alpha.to_string()));
                }
                let i = scaled.to_integer().to_usize().unwrap_or(0);
                Ok((i > 0).then_some((*agent, i)))
            }
            RwQuery::Eval { agent, y } => {
                if y.is_zero() || y.is_one() {
                    return Ok(None);
                }
                let (i, _) = self.grid_index(y).ok_or(CakeError::UnknownPoint)?;
                Ok(Some((*agent, i)))
            }
        }
    }

    /// Answer once the needed point is placed.
    fn answer(&self, q: &RwQuery) -> Rational {
        let n = self.n as i64;
        match q {
            RwQuery::Cut { agent, alpha } => {
                let i = (alpha * rat_int(n)).to_integer().to_usize().unwrap_or(0);
                if i == 0 {
                    Rational::zero()
                } else {
                    self.point(*agent, i).expect("placed before answering")
                }
            }
            RwQuery::Eval { agent, y } => {
                if y.is_zero() || y.is_one() {
                    return y.clone();
                }
                let (i, _) = self.grid_index(y).expect("checked");
                let own = self.point(*agent, i).expect("placed before answering");
                match y.cmp(&own) {
                    Ordering::Less => rat(i as i64, n + 1),
                    Ordering::Equal => rat(i as i64, n),
                    Ordering::Greater => rat(i as i64 + 1, n + 1),
                }
            }
        }
    }

    /// Answers a batch. `lookup` receives the distinct `(agent, i)` pairs not
    /// yet placed, in submission order, and must return how each agent's
    /// rank compares to `i`.
    fn answer_round<F>(&mut self, queries: &[RwQuery], lookup: F) -> Result<Vec<Rational>, ReductionError>
    where
        F: FnOnce(&[(usize, usize)]) -> Result<Vec<Ordering>, ReductionError>,
    {
        let mut needed: Vec<(usize, usize)> = Vec::new();
        let mut per_query = Vec::with_capacity(queries.len());
        for q in queries {
            if q.agent() >= self.n {
                return Err(CakeError::AgentOutOfRange(q.agent()).into());
            }
            let need = self.needs(q)?;
            if let Some((p, i)) = need {
                if self.slot(p, i).is_none() && !needed.contains(&(p, i)) {
                    needed.push((p, i));
                }
            }
            per_query.push(need);
        }
        let orders = lookup(&needed)?;
        let order_of = |pi: (usize, usize)| needed.iter().position(|x| *x == pi).map(|j| orders[j]);
        let mut answers = Vec::with_capacity(queries.len());
        for (q, need) in queries.iter().zip(per_query) {
            if let Some((p, i)) = need {
                if self.slot(p, i).is_none() {
                    let ord = order_of((p, i)).expect("looked up");
                    self.place(p, i, ord);
                }
            }
            answers.push(self.answer(q));
        }
        Ok(answers)
    }

    /// Places every remaining point using `ranks` and builds the densities.
    pub fn realize(&self, ranks: &[usize]) -> Vec<PiecewiseDensity> {
        let n = self.n;
        let mut book = self.clone();
        for p in 0..n {
            for i in 1..=n {
                book.place(p, i, ranks[p].cmp(&i));
            }
        }
        let w = &self.epsilon / rat_int(4);
        let unit = rat(1, (n * n + n) as i64);
        (0..n)
            .map(|p| {
                let mut breaks = vec![Rational::zero(), w.clone()];
                let mut heights = vec![&unit * rat_int(n as i64) / &w];
                for i in 1..=n {
                    let z = book.point(p, i).expect("all placed");
                    heights.push(Rational::zero());
                    breaks.push(&z - &w);
                    heights.push(&unit * rat_int(i as i64) / &w);
                    breaks.push(z.clone());
                    if i < n {
                        heights.push(&unit * rat_int((n - i) as i64) / &w);
                        breaks.push(&z + &w);
                    }
                }
                heights.push(Rational::zero());
                breaks.push(Rational::one());
                PiecewiseDensity::new(breaks, heights).expect("spike densities are normalized")
            })
            .collect()
    }
}

/// Adversarial cake whose hidden order is known up front.
#[derive(Clone, Debug)]
pub struct AdversaryCakeInstance {
    pub book: SlotBook,
    ranks: Vec<usize>,
    transcript: RoundTranscript<RwQuery, Rational>,
}

/// `ranks[p]` is the hidden rank of agent `p` (a permutation of `1..=n`).
pub fn build_adversary_cake(ranks: &[usize], k_limit: usize) -> Result<AdversaryCakeInstance, ReductionError> {
    let n = ranks.len();
    let mut seen = vec![false; n];
    for &r in ranks {
        if r == 0 || r > n || seen[r - 1] {
            return Err(ReductionError::NotAPermutation);
        }
        seen[r - 1] = true;
    }
    Ok(AdversaryCakeInstance { book: SlotBook::new(n), ranks: ranks.to_vec(), transcript: RoundTranscript::new(k_limit) })
}

impl AdversaryCakeInstance {
    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn transcript(&self) -> &RoundTranscript<RwQuery, Rational> {
        &self.transcript
    }

    pub fn realize(&self) -> Vec<PiecewiseDensity> {
        self.book.realize(&self.ranks)
    }
}

impl RwOracle for AdversaryCakeInstance {
    fn agents(&self) -> usize {
        self.book.n
    }

    fn ask_round(&mut self, queries: &[RwQuery]) -> Result<Vec<Rational>, CakeError> {
        if self.transcript.rounds_used() >= self.transcript.k_limit() {
            return Err(CakeError::RoundLimitExceeded(self.transcript.k_limit()));
        }
        let ranks = &self.ranks;
        let answers = self
            .book
            .answer_round(queries, |need| Ok(need.iter().map(|&(p, i)| ranks[p].cmp(&i)).collect()))
            .map_err(|e| match e {
                ReductionError::Cake(c) => c,
                other => CakeError::BadDensity(other.to_string()),
            })?;
        self.transcript.push_round(queries.iter().cloned().zip(answers.iter().cloned()).collect());
        Ok(answers)
    }
}

/// Adversarial cake that learns ranks only by asking a rank oracle, one rank
/// round per RW round.
pub struct RankDrivenCake<'a, O: RankOracle + ?Sized> {
    oracle: &'a mut O,
    pub book: SlotBook,
    transcript: RoundTranscript<RwQuery, Rational>,
}

impl<'a, O: RankOracle + ?Sized> RankDrivenCake<'a, O> {
    pub fn new(oracle: &'a mut O) -> Self {
        let n = oracle.len();
        let k = oracle.rounds_left();
        Self { oracle, book: SlotBook::new(n), transcript: RoundTranscript::new(k) }
    }

    pub fn transcript(&self) -> &RoundTranscript<RwQuery, Rational> {
        &self.transcript
    }
}

impl<O: RankOracle + ?Sized> RwOracle for RankDrivenCake<'_, O> {
    fn agents(&self) -> usize {
        self.book.n
    }

    fn ask_round(&mut self, queries: &[RwQuery]) -> Result<Vec<Rational>, CakeError> {
        if self.transcript.rounds_used() >= self.transcript.k_limit() {
            return Err(CakeError::RoundLimitExceeded(self.transcript.k_limit()));
        }
        let oracle = &mut *self.oracle;
        let answers = self
            .book
            .answer_round(queries, |need| {
                let qs: Vec<RankQuery> = need.iter().map(|&(p, i)| RankQuery::new(p, i)).collect();
                Ok(oracle.ask(&qs)?)
            })
            .map_err(|e| match e {
                ReductionError::Cake(c) => c,
                ReductionError::Oracle(o) => CakeError::Oracle(o),
                other => CakeError::BadDensity(other.to_string()),
            })?;
        self.transcript.push_round(queries.iter().cloned().zip(answers.iter().cloned()).collect());
        Ok(answers)
    }
}

/// Reads the hidden order off the allocation: slice `i` (left to right) goes
/// to the agent of rank `i`. Also checks that every internal boundary sits
/// on its grid `X_i`.
pub fn recover_permutation(allocation: &Allocation, book: &SlotBook) -> Result<Vec<usize>, ReductionError> {
    let n = book.n();
    allocation.check(n)?;
    for (j, y) in allocation.boundaries().iter().enumerate() {
        match book.grid_index(y) {
            Some((i, _)) if i == j + 1 => {}
            _ => return Err(ReductionError::BoundaryOffGrid { index: j + 1 }),
        }
    }
    let mut ranks = vec![0; n];
    for (pos, owner) in allocation.owners().into_iter().enumerate() {
        ranks[owner] = pos + 1;
    }
    Ok(ranks)
}

#[derive(Clone, Debug)]
pub struct CakeSortRun {
    /// `ranks[i]` = rank of item `i`.
    pub ranks: Vec<usize>,
    pub allocation: Allocation,
    pub rw_queries: usize,
    pub rw_round_sizes: Vec<usize>,
    pub book: SlotBook,
    pub densities: Vec<PiecewiseDensity>,
}

/// Sorts the items behind `oracle` by running the proportional protocol for
/// `k` rounds on the adversarial cake.
pub fn sort_via_cake<O: RankOracle + ?Sized>(oracle: &mut O, k: usize) -> Result<CakeSortRun, ReductionError> {
    let mut cake = RankDrivenCake::new(oracle);
    let run = proportional_protocol(&mut cake, k)?;
    let ranks = recover_permutation(&run.allocation, &cake.book)?;
    let densities = cake.book.realize(&ranks);
    if !verify_proportional(&run.allocation, &densities)?.0 {
        return Err(ReductionError::NotProportional);
    }
    Ok(CakeSortRun {
        ranks,
        allocation: run.allocation,
        rw_queries: cake.transcript.total_queries(),
        rw_round_sizes: cake.transcript.round_sizes(),
        book: cake.book,
        densities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{HiddenInstance, OracleSession};
    use crate::sort::sort_rank;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

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

    fn cut(agent: usize, i: i64, n: i64) -> RwQuery {
        RwQuery::Cut { agent, alpha: rat(i, n) }
    }

    #[test]
    fn slot_rules_for_two_agents() {
        let mut id = build_adversary_cake(&[1, 2], 2).unwrap();
        let a = id.ask_round(&[cut(0, 1, 2)]).unwrap();
        assert_eq!(a[0], id.book.grid_point(1, 1));

        let mut swapped = build_adversary_cake(&[2, 1], 2).unwrap();
        let a = swapped.ask_round(&[cut(0, 1, 2)]).unwrap();
        assert_eq!(a[0], swapped.book.grid_point(1, 2));
    }

    #[test]
    fn points_are_distinct_and_ordered() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let n = rng.gen_range(1..9);
            let mut ranks: Vec<usize> = (1..=n).collect();
            ranks.shuffle(&mut rng);
            let mut inst = build_adversary_cake(&ranks, 1).unwrap();
            let mut qs: Vec<RwQuery> = (0..n).flat_map(|p| (1..=n).map(move |i| cut(p, i as i64, n as i64))).collect();
            qs.shuffle(&mut rng);
            inst.ask_round(&qs).unwrap();
            for i in 1..=n {
                let mut pts: Vec<Rational> = (0..n).map(|p| inst.book.point(p, i).unwrap()).collect();
                for p in &pts {
                    assert_eq!(inst.book.grid_index(p).map(|x| x.0), Some(i));
                }
                if i < n {
                    let next_min = (0..n).map(|p| inst.book.point(p, i + 1).unwrap()).min().unwrap();
                    assert!(pts.iter().all(|x| *x < next_min));
                }
                pts.sort();
                pts.dedup();
                assert_eq!(pts.len(), n);
            }
            // ordering property: rank(p) <= i <= rank(q) puts p's point first
            for p in 0..n {
                for q in 0..n {
                    for i in 1..=n {
                        if p != q && ranks[p] <= i && i <= ranks[q] {
                            assert!(inst.book.point(p, i).unwrap() < inst.book.point(q, i).unwrap());
                        }
                    }
                }
            }
            // answers agree with the realized densities
            let dens = inst.realize();
            for p in 0..n {
                for i in 1..=n {
                    assert_eq!(dens[p].cut(&rat(i as i64, n as i64)), inst.book.point(p, i).unwrap());
                }
            }
        }
    }

    #[test]
    fn eval_at_foreign_cut_has_two_answers() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let n = rng.gen_range(2..7);
            let mut ranks: Vec<usize> = (1..=n).collect();
            ranks.shuffle(&mut rng);
            let mut inst = build_adversary_cake(&ranks, 2).unwrap();
            let cuts: Vec<RwQuery> = (0..n).flat_map(|p| (1..n).map(move |i| cut(p, i as i64, n as i64))).collect();
            let points = inst.ask_round(&cuts).unwrap();
            let mut evals = Vec::new();
            let mut meta = Vec::new();
            for (q, y) in cuts.iter().zip(&points) {
                let RwQuery::Cut { agent: owner, alpha } = q else { unreachable!() };
                let i = (alpha * rat_int(n as i64)).to_integer().to_usize().unwrap();
                for p in (0..n).filter(|p| p != owner) {
                    evals.push(RwQuery::Eval { agent: p, y: y.clone() });
                    meta.push(i);
                }
            }
            let answers = inst.ask_round(&evals).unwrap();
            let dens = inst.realize();
            for ((q, a), i) in evals.iter().zip(&answers).zip(meta) {
                let lo = rat(i as i64, n as i64 + 1);
                let hi = rat(i as i64 + 1, n as i64 + 1);
                assert!(*a == lo || *a == hi);
                let RwQuery::Eval { agent, y } = q else { unreachable!() };
                assert_eq!(dens[*agent].eval(y), *a);
            }
        }
    }

    #[test]
    fn non_primitive_cut_is_refused() {
        let mut inst = build_adversary_cake(&[1, 2, 3], 1).unwrap();
        assert!(matches!(inst.ask_round(&[cut(0, 1, 2)]), Err(CakeError::ProtocolNotPrimitive(_))));
    }

    #[test]
    fn recover_examples() {
        // two agents, agent 1 holds rank 1: slices in order (agent 1, agent 0)
        let mut s = OracleSession::open(HiddenInstance::new(vec![2, 1], None).unwrap(), 2).unwrap();
        let run = sort_via_cake(&mut s, 2).unwrap();
        assert_eq!(run.allocation.owners(), vec![1, 0]);
        assert_eq!(run.ranks, vec![2, 1]);

        let mut s = OracleSession::open(HiddenInstance::new(vec![1, 2, 3], None).unwrap(), 2).unwrap();
        let run = sort_via_cake(&mut s, 2).unwrap();
        assert_eq!(run.allocation.owners(), vec![0, 1, 2]);

        let mut s = OracleSession::open(HiddenInstance::new(vec![1], None).unwrap(), 1).unwrap();
        let run = sort_via_cake(&mut s, 1).unwrap();
        assert_eq!(run.ranks, vec![1]);
        assert_eq!(s.transcript().total_queries(), 0);
    }

    #[test]
    fn end_to_end_small() {
        for n in 1..=5 {
            for perm in permutations(n) {
                for k in 1..=3 {
                    let mut s = OracleSession::open(HiddenInstance::new(perm.clone(), None).unwrap(), k).unwrap();
                    let run = sort_via_cake(&mut s, k).unwrap();
                    assert_eq!(run.ranks, perm);
                    assert!(s.transcript().total_queries() <= run.rw_queries);
                    assert_eq!(s.transcript().rounds_used(), run.rw_round_sizes.len());
                    let mut plain = OracleSession::open(HiddenInstance::new(perm.clone(), None).unwrap(), k).unwrap();
                    assert_eq!(sort_rank(&mut plain, k).unwrap(), run.ranks);
                }
            }
        }
    }
}
