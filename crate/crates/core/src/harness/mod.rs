//! Experiment runner: drives the algorithms over enumerated or sampled
//! instances and compares the measured query counts with the closed forms.

mod bounds;
mod brute;
mod report;

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::cake::{proportional_protocol, random_density, verify_proportional, CakeError, DensityOracle, PiecewiseDensity};
use crate::locate::{locate_det, locate_det_dist, locate_rand, LocateError, RankDistribution};
use crate::math::{ceil_i64, ceil_root, format_fraction, is_probability, rat, rat_int, to_f64};
use crate::oracle::{HiddenInstance, OracleError, OracleSession};
use crate::reductions::{sort_via_cake, ReductionError};
use crate::select::{build_schedule, select_det, select_rand, select_rand_expected_queries, SelectError};
use crate::sort::{forced_query_count, sort_rank, sorting_upper_budget, AdversaryError, SortError};
use crate::Rational;

pub use bounds::{bounds, exact_bands, BoundRow, ExactBands};
pub use brute::{brute_force_locate, brute_force_select, SelectOptimum};
pub use report::{emit_report, to_csv, to_svg, BoundReport, Format, ReportRow, CSV_HEADER};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HarnessError {
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error("exact enumeration is infeasible: {0}")]
    InfeasibleExact(String),
    #[error("search space too large: {0}")]
    SearchSpaceTooLarge(String),
    #[error("report has no rows")]
    EmptyReport,
    #[error("i/o failure: {0}")]
    IoFailure(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Locate(#[from] LocateError),
    #[error(transparent)]
    Select(#[from] SelectError),
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Cake(#[from] CakeError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Problem {
    Locate,
    Select,
    Sort,
    Cake,
    Reduce,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::Locate => "locate",
            Problem::Select => "select",
            Problem::Sort => "sort",
            Problem::Cake => "cake",
            Problem::Reduce => "reduce",
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "locate" => Ok(Problem::Locate),
            "select" => Ok(Problem::Select),
            "sort" => Ok(Problem::Sort),
            "cake" => Ok(Problem::Cake),
            "reduce" => Ok(Problem::Reduce),
            _ => Err(HarnessError::BadConfig(format!("unknown problem {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    MonteCarlo,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::MonteCarlo => "mc",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub n: u64,
    pub k: usize,
    pub p: Rational,
    pub trials: u64,
    pub seed: u64,
    /// `None` picks exact enumeration when it fits the budget.
    pub mode: Option<Mode>,
}

impl ExperimentConfig {
    pub fn new(problem: Problem, n: u64, k: usize) -> Self {
        Self { problem, n, k, p: Rational::one(), trials: 100_000, seed: 0, mode: None }
    }

    fn validate(&self) -> Result<usize, HarnessError> {
        if self.n == 0 {
            return Err(HarnessError::BadConfig("n must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(HarnessError::BadConfig("k must be at least 1".into()));
        }
        if !is_probability(&self.p) {
            return Err(HarnessError::BadConfig("p must lie in [0, 1]".into()));
        }
        if self.trials == 0 {
            return Err(HarnessError::BadConfig("trials must be at least 1".into()));
        }
        usize::try_from(self.n).map_err(|_| HarnessError::BadConfig("n does not fit in memory".into()))
    }
}

pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// Work budget for exact enumeration, from `ROUNDS_LAB_BUDGET` if set.
pub fn exact_budget() -> u128 {
    std::env::var("ROUNDS_LAB_BUDGET").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_BUDGET)
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).try_fold(1u128, |acc, v| acc.checked_mul(v)).unwrap_or(u128::MAX)
}

/// Rough work estimate for enumerating every instance.
fn exact_cost(problem: Problem, n: usize) -> Option<u128> {
    let n128 = n as u128;
    match problem {
        Problem::Locate | Problem::Select => Some(n128 * n128),
        Problem::Sort | Problem::Reduce => Some(factorial(n).saturating_mul(n128 * n128)),
        Problem::Cake => None,
    }
}

/// Running totals of integer query counts; merging is exact, so the result
/// does not depend on how trials were split across threads.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub runs: u64,
    pub sum: u128,
    pub sum_sq: u128,
    pub max: u64,
    pub successes: u64,
    pub failures: Vec<String>,
}

impl Tally {
    fn record(&mut self, queries: usize, success: bool) {
        let q = queries as u128;
        self.runs += 1;
        self.sum += q;
        self.sum_sq += q * q;
        self.max = self.max.max(queries as u64);
        self.successes += u64::from(success);
    }

    fn fail(&mut self, why: String) {
        if self.failures.len() < 8 {
            self.failures.push(why);
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.runs += other.runs;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.max = self.max.max(other.max);
        self.successes += other.successes;
        for f in other.failures {
            self.fail(f);
        }
        self
    }

    pub fn exact_mean(&self) -> Rational {
        Rational::new(self.sum.into(), self.runs.max(1).into())
    }

    pub fn mean(&self) -> f64 {
        self.sum as f64 / self.runs.max(1) as f64
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.runs < 2 {
            return 0.0;
        }
        let n = self.runs as f64;
        let var = (self.sum_sq as f64 - (self.sum as f64).powi(2) / n) / (n - 1.0);
        (var.max(0.0) / n).sqrt()
    }

    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.runs.max(1) as f64
    }
}

/// RNG for trial `index`: the seeded generator on its own stream.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn monte_carlo<F>(trials: u64, seed: u64, trial: F) -> Result<Tally, HarnessError>
where
    F: Fn(&mut ChaCha8Rng, &mut Tally) -> Result<(), HarnessError> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut tally = Tally::default();
            trial(&mut trial_rng(seed, t), &mut tally)?;
            Ok(tally)
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
}

/// Three standard deviations of a Bernoulli(p) sample mean, plus rounding slack.
fn rate_slack(p: f64, runs: u64) -> f64 {
    3.0 * (p * (1.0 - p) / runs.max(1) as f64).sqrt() + 1e-9
}

/// Outcome of one experiment before it becomes a report row.
struct Measured {
    mode: Mode,
    k: usize,
    tally: Tally,
    pass: bool,
    note: String,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ReportRow, HarnessError> {
    let n = config.validate()?;
    let cost = exact_cost(config.problem, n);
    let fits = cost.is_some_and(|c| c <= exact_budget());
    let mode = match config.mode {
        Some(Mode::Exact) if cost.is_none() => {
            return Err(HarnessError::InfeasibleExact(format!("{} instances cannot be enumerated", config.problem)))
        }
        Some(Mode::Exact) if !fits => {
            return Err(HarnessError::InfeasibleExact(format!(
                "{} at n = {n} needs more than {} steps (raise ROUNDS_LAB_BUDGET)",
                config.problem,
                exact_budget()
            )))
        }
        Some(m) => m,
        None if fits => Mode::Exact,
        None => Mode::MonteCarlo,
    };
    let measured = match config.problem {
        Problem::Locate => run_locate(config, n, mode)?,
        Problem::Select => run_select(config, n, mode)?,
        Problem::Sort => run_sort(config, n, mode)?,
        Problem::Cake => run_cake(config, n)?,
        Problem::Reduce => run_reduce(config, n, mode)?,
    };
    Ok(row_from(config, measured))
}

fn row_from(config: &ExperimentConfig, m: Measured) -> ReportRow {
    let b = bounds(config.n, m.k, &config.p);
    let mut note = m.note;
    if note.is_empty() && !m.tally.failures.is_empty() {
        note = m.tally.failures.join("; ");
    }
    ReportRow {
        problem: config.problem.name().into(),
        n: config.n,
        k: m.k,
        p: format_fraction(&config.p),
        mode: m.mode.name().into(),
        trials: m.tally.runs,
        seed: config.seed,
        mean_queries: m.tally.mean(),
        ci95: if m.mode == Mode::Exact { 0.0 } else { 1.96 * m.tally.std_error() },
        success_rate: m.tally.success_rate(),
        rand_lo: b.rand_lo,
        rand_hi: b.rand_hi,
        det_lo: b.det_lo,
        det_hi: b.det_hi,
        ordered_rand: b.ordered_rand,
        ordered_det: b.ordered_det,
        sort_floor: b.sort_floor,
        pass: m.pass && m.tally.failures.is_empty(),
        max_queries: m.tally.max,
        note,
    }
}

/// `k * ⌈m^(1/k)⌉`, the per-run Locate budget on `m` candidates.
pub fn locate_budget(m: usize, k: usize) -> usize {
    k * ceil_root(m as u64, k.min(u32::MAX as usize) as u32) as usize
}

fn locate_one(n: usize, k: usize, p: &Rational, rank: usize, tally: &mut Tally, rng: Option<&mut ChaCha8Rng>) -> Result<(), HarnessError> {
    let mut s = OracleSession::open(HiddenInstance::sorted(n, Some(rank - 1))?, k)?;
    let found = match rng {
        Some(rng) => locate_rand(&mut s, k, p, rng)?,
        None if p.is_one() => Some(locate_det(&mut s, k)?),
        None if p.is_zero() => None,
        None => locate_det_dist(&mut s, k, p, &RankDistribution::uniform(n))?,
    };
    if found.is_some_and(|r| r != rank) {
        tally.fail(format!("returned rank {found:?} for target rank {rank}"));
    }
    tally.record(s.transcript().total_queries(), found == Some(rank));
    Ok(())
}

fn run_locate(c: &ExperimentConfig, n: usize, mode: Mode) -> Result<Measured, HarnessError> {
    let k = c.k;
    let budget = locate_budget(n, k);
    match mode {
        Mode::Exact => {
            let mut tally = Tally::default();
            for rank in 1..=n {
                locate_one(n, k, &c.p, rank, &mut tally, None)?;
            }
            let reach = ceil_i64(&(&c.p * rat_int(n as i64))).max(0) as usize;
            let bound = if reach == 0 { 0 } else { locate_budget(reach, k) };
            let rate_ok = rat(tally.successes as i64, n as i64) >= c.p;
            let pass = rate_ok && tally.max as usize <= bound;
            let note = if pass { String::new() } else { format!("max {} vs bound {bound}, success ok: {rate_ok}", tally.max) };
            Ok(Measured { mode, k, tally, pass, note })
        }
        Mode::MonteCarlo => {
            let tally = monte_carlo(c.trials, c.seed, |rng, t| {
                let rank = rand::Rng::gen_range(rng, 1..=n);
                locate_one(n, k, &c.p, rank, t, Some(rng))
            })?;
            let p = to_f64(&c.p);
            let pass = tally.max as usize <= budget && (tally.success_rate() - p).abs() <= rate_slack(p, tally.runs);
            Ok(Measured { mode, k, tally, pass, note: String::new() })
        }
    }
}

fn select_instance(n: usize, slot: usize) -> Result<HiddenInstance, OracleError> {
    // rank 1 at `slot`, the rest in order
    let ranks = (0..n).map(|i| if i == slot { 1 } else if i < slot { i + 2 } else { i + 1 }).collect();
    HiddenInstance::new(ranks, Some(slot))
}

fn run_select(c: &ExperimentConfig, n: usize, mode: Mode) -> Result<Measured, HarnessError> {
    let k = c.k.min(n);
    let bands = exact_bands(n as u64, k, &c.p);
    match mode {
        Mode::Exact => {
            let schedule = build_schedule(n, k, &c.p)?;
            let order: Vec<usize> = (0..n).collect();
            let mut tally = Tally::default();
            for slot in 0..n {
                let mut s = OracleSession::open(select_instance(n, slot)?, k)?;
                let out = select_det(&mut s, 1, &schedule, &order)?;
                tally.record(s.transcript().total_queries(), out.index == slot);
            }
            let mean = tally.exact_mean();
            let in_band = bands.deterministic.0 <= mean && mean <= bands.deterministic.1;
            let rate_ok = rat(tally.successes as i64, n as i64) >= c.p;
            let note = if in_band && rate_ok { String::new() } else { format!("mean {mean} outside band or success below p") };
            Ok(Measured { mode, k, tally, pass: in_band && rate_ok, note })
        }
        Mode::MonteCarlo => {
            let tally = monte_carlo(c.trials, c.seed, |rng, t| {
                let inst = HiddenInstance::random(n, rng);
                let slot = inst.item_with_rank(1).expect("rank 1 exists");
                let mut s = OracleSession::open(inst, k)?;
                let got = select_rand(&mut s, 1, k, &c.p, rng)?;
                if got.is_some_and(|g| g != slot) {
                    t.fail(format!("returned slot {got:?}, target at {slot}"));
                }
                t.record(s.transcript().total_queries(), got == Some(slot));
                Ok(())
            })?;
            let analytic = select_rand_expected_queries(n, k, &c.p)?;
            let in_band = bands.randomized.0 <= analytic && analytic <= bands.randomized.1;
            let close = (tally.mean() - to_f64(&analytic)).abs() <= 3.0 * tally.std_error() + 1e-9;
            let p = to_f64(&c.p);
            let rate_ok = (tally.success_rate() - p).abs() <= rate_slack(p, tally.runs);
            let note = format!("analytic mean {}", to_f64(&analytic));
            Ok(Measured { mode, k, tally, pass: in_band && close && rate_ok, note: if in_band && close && rate_ok { String::new() } else { note } })
        }
    }
}

/// Calls `f` on every permutation of `1..=n` (lexicographic order).
pub fn for_each_permutation<F>(n: usize, mut f: F) -> Result<(), HarnessError>
where
    F: FnMut(&[usize]) -> Result<(), HarnessError>,
{
    let mut perm: Vec<usize> = (1..=n).collect();
    loop {
        f(&perm)?;
        // next permutation
        let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else {
            return Ok(());
        };
        let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).expect("successor exists");
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
}

fn random_ranks(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    HiddenInstance::random(n, rng).ranks().to_vec()
}

fn sort_one(ranks: &[usize], k: usize, tally: &mut Tally) -> Result<(), HarnessError> {
    let mut s = OracleSession::open(HiddenInstance::new(ranks.to_vec(), None)?, k)?;
    let out = sort_rank(&mut s, k)?;
    if out != ranks {
        tally.fail(format!("sorted {ranks:?} as {out:?}"));
    }
    tally.record(s.transcript().total_queries(), out == ranks);
    Ok(())
}

fn run_sort(c: &ExperimentConfig, n: usize, mode: Mode) -> Result<Measured, HarnessError> {
    let k = c.k;
    let tally = match mode {
        Mode::Exact => {
            let mut tally = Tally::default();
            for_each_permutation(n, |perm| sort_one(perm, k, &mut tally))?;
            tally
        }
        Mode::MonteCarlo => monte_carlo(c.trials, c.seed, |rng, t| sort_one(&random_ranks(n, rng), k, t))?,
    };
    let budget = sorting_upper_budget(k, n);
    let forced = forced_query_count(n, k, |o| sort_rank(o, k))?.total_queries;
    let lower = bounds(c.n, k, &c.p).sort_floor.max(0.0);
    let pass = tally.max as f64 <= budget && forced as f64 >= lower;
    let note = if pass { String::new() } else { format!("max {} vs budget {budget}, adversary forced {forced} vs {lower}", tally.max) };
    Ok(Measured { mode, k, tally, pass, note })
}

/// `k n^(1+1/k) + kn`, the Cut budget of the proportional protocol.
pub fn cake_query_budget(k: usize, n: usize) -> f64 {
    let (k, n) = (k as f64, n as f64);
    k * n.powf(1.0 + 1.0 / k) + k * n
}

fn run_cake(c: &ExperimentConfig, n: usize) -> Result<Measured, HarnessError> {
    let k = c.k;
    let tally = monte_carlo(c.trials, c.seed, |rng, t| {
        let agents: Vec<PiecewiseDensity> = (0..n).map(|_| random_density(rng, 4, 48)).collect();
        let mut oracle = DensityOracle::new(&agents, k);
        let run = proportional_protocol(&mut oracle, k)?;
        let (fair, _) = verify_proportional(&run.allocation, &agents)?;
        if !fair {
            t.fail("allocation is not proportional".into());
        }
        t.record(run.queries, fair);
        Ok(())
    })?;
    let budget = cake_query_budget(k, n);
    let pass = tally.max as f64 <= budget;
    let note = if pass { String::new() } else { format!("max {} vs budget {budget}", tally.max) };
    Ok(Measured { mode: Mode::MonteCarlo, k, tally, pass, note })
}

/// Runs the proportional protocol on a given instance and checks the result.
pub fn run_cake_instance(agents: &[PiecewiseDensity], k: usize, seed: u64) -> Result<ReportRow, HarnessError> {
    if agents.is_empty() {
        return Err(HarnessError::BadConfig("instance has no agents".into()));
    }
    if k == 0 {
        return Err(HarnessError::BadConfig("k must be at least 1".into()));
    }
    let n = agents.len();
    let mut oracle = DensityOracle::new(agents, k);
    let run = proportional_protocol(&mut oracle, k)?;
    let (fair, _) = verify_proportional(&run.allocation, agents)?;
    let mut tally = Tally::default();
    tally.record(run.queries, fair);
    if !fair {
        tally.fail("allocation is not proportional".into());
    }
    let budget = cake_query_budget(k, n);
    let pass = tally.max as f64 <= budget;
    let config = ExperimentConfig { seed, ..ExperimentConfig::new(Problem::Cake, n as u64, k) };
    Ok(row_from(&config, Measured { mode: Mode::Exact, k, tally, pass, note: String::new() }))
}

/// The random instance the Monte-Carlo cake runs use for trial `index`.
pub fn random_cake_instance(n: usize, seed: u64, index: u64) -> Vec<PiecewiseDensity> {
    let mut rng = trial_rng(seed, index);
    (0..n).map(|_| random_density(&mut rng, 4, 48)).collect()
}

fn reduce_one(ranks: &[usize], k: usize, tally: &mut Tally) -> Result<(), HarnessError> {
    let mut s = OracleSession::open(HiddenInstance::new(ranks.to_vec(), None)?, k)?;
    let run = sort_via_cake(&mut s, k)?;
    let rank_queries = s.transcript().total_queries();
    let ok = run.ranks == ranks && rank_queries <= run.rw_queries;
    if !ok {
        tally.fail(format!("{ranks:?}: recovered {:?}, {rank_queries} rank vs {} RW queries", run.ranks, run.rw_queries));
    }
    tally.record(run.rw_queries, ok);
    Ok(())
}

fn run_reduce(c: &ExperimentConfig, n: usize, mode: Mode) -> Result<Measured, HarnessError> {
    let k = c.k;
    let tally = match mode {
        Mode::Exact => {
            let mut tally = Tally::default();
            for_each_permutation(n, |perm| reduce_one(perm, k, &mut tally))?;
            tally
        }
        Mode::MonteCarlo => monte_carlo(c.trials, c.seed, |rng, t| reduce_one(&random_ranks(n, rng), k, t))?,
    };
    Ok(Measured { mode, k, tally, pass: true, note: String::new() })
}

/// Closed-form rows for `p = 0, 1/steps, ..., 1`.
pub fn bound_sweep(n: u64, k: usize, steps: u32) -> BoundReport {
    let steps = steps.max(1);
    let ps: Vec<Rational> = (0..=steps).map(|i| rat(i as i64, steps as i64)).collect();
    bound_rows(n, k, &ps)
}

/// One closed-form row per probability in `ps`.
pub fn bound_rows(n: u64, k: usize, ps: &[Rational]) -> BoundReport {
    let rows = ps
        .iter()
        .map(|p| {
            let b = bounds(n, k, p);
            ReportRow {
                problem: "bounds".into(),
                n,
                k,
                p: format_fraction(p),
                mode: "formula".into(),
                trials: 0,
                seed: 0,
                mean_queries: 0.0,
                ci95: 0.0,
                success_rate: 0.0,
                rand_lo: b.rand_lo,
                rand_hi: b.rand_hi,
                det_lo: b.det_lo,
                det_hi: b.det_hi,
                ordered_rand: b.ordered_rand,
                ordered_det: b.ordered_det,
                sort_floor: b.sort_floor,
                pass: true,
                max_queries: 0,
                note: String::new(),
            }
        })
        .collect();
    BoundReport { rows }
}

/// Shape checks on a sweep: the randomized band is linear in `p`, the
/// deterministic one concave, and both share their endpoints.
pub fn check_sweep_shapes(report: &BoundReport) -> Result<(), String> {
    let rows = &report.rows;
    if rows.len() < 3 {
        return Err("need at least three points".into());
    }
    let centre1: Vec<f64> = rows.iter().map(|r| (r.rand_lo + r.rand_hi) / 2.0).collect();
    let centre2: Vec<f64> = rows.iter().map(|r| (r.det_lo + r.det_hi) / 2.0).collect();
    let scale = centre1.iter().chain(&centre2).fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale;
    for w in centre1.windows(3) {
        if (w[0] - 2.0 * w[1] + w[2]).abs() > tol {
            return Err(format!("randomized band is not linear near {}", w[1]));
        }
    }
    for w in centre2.windows(3) {
        if w[0] - 2.0 * w[1] + w[2] > tol {
            return Err(format!("deterministic band is not concave near {}", w[1]));
        }
    }
    let (first, last) = (0, rows.len() - 1);
    for i in [first, last] {
        if (centre1[i] - centre2[i]).abs() > 1.0 {
            return Err(format!("bands disagree at p = {}", rows[i].p));
        }
    }
    Ok(())
}

/// Mean and max sorting cost on `perms` random permutations, for each `k`.
pub fn sort_cost_by_rounds(n: usize, ks: &[usize], perms: u64, seed: u64) -> Result<Vec<(usize, f64, u64)>, HarnessError> {
    ks.iter()
        .map(|&k| {
            let t = monte_carlo(perms, seed, |rng, t| sort_one(&random_ranks(n, rng), k, t))?;
            Ok((k, t.mean(), t.max))
        })
        .collect()
}

/// Report rows for the two exhaustive optimizers.
pub fn brute_force_rows(n: usize, k: usize, p: &Rational) -> Result<BoundReport, HarnessError> {
    let b = bounds(n as u64, k, p);
    let bands = exact_bands(n as u64, k, p);
    let row = |problem: &str, mean: f64, pass: bool, note: String| ReportRow {
        problem: problem.into(),
        n: n as u64,
        k,
        p: format_fraction(p),
        mode: "exact".into(),
        trials: 1,
        seed: 0,
        mean_queries: mean,
        ci95: 0.0,
        success_rate: 1.0,
        rand_lo: b.rand_lo,
        rand_hi: b.rand_hi,
        det_lo: b.det_lo,
        det_hi: b.det_hi,
        ordered_rand: b.ordered_rand,
        ordered_det: b.ordered_det,
        sort_floor: b.sort_floor,
        pass,
        max_queries: mean.ceil() as u64,
        note,
    };
    let mut rows = Vec::new();
    let opt = brute_force_select(n, k, p)?;
    let e = &opt.expected_queries;
    let pass = bands.deterministic.0 <= *e && *e <= bands.deterministic.1;
    rows.push(row("brute-select", to_f64(e), pass, format!("optimum {e}")));
    let best = brute_force_locate(n, k)?;
    let mut ours = Tally::default();
    for rank in 1..=n {
        locate_one(n, k, &Rational::one(), rank, &mut ours, None)?;
    }
    let pass = best as u64 <= ours.max && ours.max as usize <= locate_budget(n, k);
    rows.push(row("brute-locate", best as f64, pass, format!("optimum {best}, block search {}", ours.max)));
    Ok(BoundReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(problem: Problem, n: u64, k: usize) -> ExperimentConfig {
        ExperimentConfig { trials: 200, seed: 7, ..ExperimentConfig::new(problem, n, k) }
    }

    #[test]
    fn locate_exact_row() {
        let row = run_experiment(&cfg(Problem::Locate, 16, 2)).unwrap();
        assert_eq!(row.mode, "exact");
        assert_eq!(row.max_queries, 7);
        assert_eq!(row.success_rate, 1.0);
        assert!(row.pass);
    }

    #[test]
    fn select_exact_row() {
        let row = run_experiment(&cfg(Problem::Select, 10, 2)).unwrap();
        assert_eq!(row.mean_queries, 7.0);
        assert!(row.pass, "{}", row.note);
        let row = run_experiment(&ExperimentConfig { p: rat(1, 2), ..cfg(Problem::Select, 100, 4) }).unwrap();
        assert!(row.pass, "{}", row.note);
    }

    #[test]
    fn monte_carlo_rows_pass_and_repeat() {
        for problem in [Problem::Locate, Problem::Select, Problem::Sort, Problem::Reduce] {
            let c = ExperimentConfig { mode: Some(Mode::MonteCarlo), p: rat(3, 4), ..cfg(problem, 5, 2) };
            let a = run_experiment(&c).unwrap();
            assert!(a.pass, "{problem}: {}", a.note);
            assert_eq!(a, run_experiment(&c).unwrap());
        }
    }

    #[test]
    fn cake_has_no_exact_mode() {
        let c = ExperimentConfig { mode: Some(Mode::Exact), ..cfg(Problem::Cake, 4, 2) };
        assert!(matches!(run_experiment(&c), Err(HarnessError::InfeasibleExact(_))));
        let row = run_experiment(&ExperimentConfig { trials: 5, ..cfg(Problem::Cake, 6, 2) }).unwrap();
        assert_eq!(row.mode, "mc");
        assert!(row.pass, "{}", row.note);
    }

    #[test]
    fn fixed_cake_instance() {
        let agents = random_cake_instance(5, 3, 0);
        let row = run_cake_instance(&agents, 2, 3).unwrap();
        assert!(row.pass && row.success_rate == 1.0);
        assert_eq!(row.trials, 1);
    }

    #[test]
    fn big_exact_sort_is_refused() {
        let c = ExperimentConfig { mode: Some(Mode::Exact), ..cfg(Problem::Sort, 20, 2) };
        assert!(matches!(run_experiment(&c), Err(HarnessError::InfeasibleExact(_))));
    }

    #[test]
    fn bad_configs() {
        assert!(run_experiment(&cfg(Problem::Locate, 0, 2)).is_err());
        assert!(run_experiment(&cfg(Problem::Locate, 4, 0)).is_err());
        let c = ExperimentConfig { p: rat(3, 2), ..cfg(Problem::Select, 4, 1) };
        assert!(matches!(run_experiment(&c), Err(HarnessError::BadConfig(_))));
    }

    #[test]
    fn permutations_are_enumerated() {
        let mut count = 0;
        for_each_permutation(4, |_| {
            count += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(count, 24);
    }

    #[test]
    fn sweep_shapes() {
        let sweep = bound_sweep(1 << 36, 4, 20);
        assert_eq!(sweep.rows.len(), 21);
        check_sweep_shapes(&sweep).unwrap();
    }

    #[test]
    fn brute_rows() {
        let rows = brute_force_rows(5, 2, &rat(1, 1)).unwrap();
        assert!(rows.all_pass(), "{:?}", rows);
    }

    #[test]
    fn csv_has_fixed_header() {
        let row = run_experiment(&cfg(Problem::Locate, 8, 2)).unwrap();
        let csv = to_csv(&BoundReport { rows: vec![row] }).unwrap();
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        assert!(to_csv(&BoundReport::default()).is_err());
        let svg = to_svg(&bound_sweep(1000, 2, 4)).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 4);
    }
}
