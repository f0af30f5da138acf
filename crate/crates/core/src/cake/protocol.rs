use num_traits::{One, Zero};

use super::{CakeError, PiecewiseDensity};
use crate::math::{ceil_root, rat};
use crate::oracle::RoundTranscript;
use crate::Rational;

/// Robertson-Webb query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RwQuery {
    /// Leftmost point where the agent's prefix value reaches `alpha`.
    Cut { agent: usize, alpha: Rational },
    /// The agent's value of `[0, y]`.
    Eval { agent: usize, y: Rational },
}

impl RwQuery {
    pub fn agent(&self) -> usize {
        match self {
            RwQuery::Cut { agent, .. } | RwQuery::Eval { agent, .. } => *agent,
        }
    }
}

/// Round-based access to the agents' valuations.
pub trait RwOracle {
    fn agents(&self) -> usize;

    fn ask_round(&mut self, queries: &[RwQuery]) -> Result<Vec<Rational>, CakeError>;
}

/// Answers RW queries from known densities and records the rounds.
#[derive(Clone, Debug)]
pub struct DensityOracle<'a> {
    densities: &'a [PiecewiseDensity],
    transcript: RoundTranscript<RwQuery, Rational>,
}

impl<'a> DensityOracle<'a> {
    pub fn new(densities: &'a [PiecewiseDensity], k_limit: usize) -> Self {
        Self { densities, transcript: RoundTranscript::new(k_limit) }
    }

    pub fn transcript(&self) -> &RoundTranscript<RwQuery, Rational> {
        &self.transcript
    }
}

impl RwOracle for DensityOracle<'_> {
    fn agents(&self) -> usize {
        self.densities.len()
    }

    fn ask_round(&mut self, queries: &[RwQuery]) -> Result<Vec<Rational>, CakeError> {
        if self.transcript.rounds_used() >= self.transcript.k_limit() {
            return Err(CakeError::RoundLimitExceeded(self.transcript.k_limit()));
        }
        let answers = queries
            .iter()
            .map(|q| {
                let d = self.densities.get(q.agent()).ok_or(CakeError::AgentOutOfRange(q.agent()))?;
                Ok(match q {
                    RwQuery::Cut { alpha, .. } => d.cut(alpha),
                    RwQuery::Eval { y, .. } => d.eval(y),
                })
            })
            .collect::<Result<Vec<_>, CakeError>>()?;
        self.transcript.push_round(queries.iter().cloned().zip(answers.iter().cloned()).collect());
        Ok(answers)
    }
}

/// Value window `[a, b]` an agent is working inside; `b - a = m/n` where `m`
/// is the population of the agent's subcake.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentMarks {
    pub a: Rational,
    pub b: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub start: Rational,
    pub end: Rational,
    pub owner: usize,
}

/// Contiguous pieces, left to right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Allocation {
    pub pieces: Vec<Piece>,
}

impl Allocation {
    /// Internal boundaries `y_1 .. y_{n-1}`.
    pub fn boundaries(&self) -> Vec<Rational> {
        self.pieces.iter().skip(1).map(|p| p.start.clone()).collect()
    }

    /// Owners in left-to-right order.
    pub fn owners(&self) -> Vec<usize> {
        self.pieces.iter().map(|p| p.owner).collect()
    }

    /// Pieces tile `[0, 1]` in order and each of the `n` agents owns exactly one.
    pub fn check(&self, n: usize) -> Result<(), CakeError> {
        let bad = |why: &str| Err(CakeError::MalformedAllocation(why.into()));
        if self.pieces.len() != n {
            return bad("piece count differs from agent count");
        }
        let mut at = Rational::zero();
        let mut owned = vec![false; n];
        for p in &self.pieces {
            if p.start != at {
                return bad("pieces overlap or leave a gap");
            }
            if p.end < p.start {
                return bad("piece ends before it starts");
            }
            if p.owner >= n || owned[p.owner] {
                return bad("agent owns zero or several pieces");
            }
            owned[p.owner] = true;
            at = p.end.clone();
        }
        if !at.is_one() {
            return bad("pieces do not reach 1");
        }
        Ok(())
    }
}

/// Exact proportionality check. Returns whether every agent gets at least
/// `1/n`, plus each agent's value for its own piece.
pub fn verify_proportional(allocation: &Allocation, agents: &[PiecewiseDensity]) -> Result<(bool, Vec<Rational>), CakeError> {
    let n = agents.len();
    allocation.check(n)?;
    let mut values = vec![Rational::zero(); n];
    for p in &allocation.pieces {
        values[p.owner] = agents[p.owner].value(&p.start, &p.end);
    }
    let share = rat(1, n as i64);
    let ok = values.iter().all(|v| *v >= share);
    Ok((ok, values))
}

/// Group sizes for splitting `m` agents into `z` groups, larger groups first.
pub fn balanced_sizes(m: usize, z: usize) -> Vec<usize> {
    let (base, extra) = (m / z, m % z);
    (0..z).map(|j| base + usize::from(j < extra)).collect()
}

/// Splits agents by their marks. `marks[i]` holds agent `agents[i]`'s marks
/// in order; group `j` gets the `targets[j]` unassigned agents with the
/// smallest `j`-th marks (ties to the lower agent index), and the cut is the
/// largest of those marks. The last group takes everyone left.
pub fn assign_subcakes(agents: &[usize], marks: &[Vec<Rational>], targets: &[usize]) -> (Vec<Rational>, Vec<Vec<usize>>) {
    let z = targets.len();
    let mut unassigned: Vec<usize> = (0..agents.len()).collect();
    let mut cuts = Vec::with_capacity(z.saturating_sub(1));
    let mut groups = Vec::with_capacity(z);
    for (j, &want) in targets.iter().enumerate().take(z.saturating_sub(1)) {
        unassigned.sort_by(|&x, &y| marks[x][j].cmp(&marks[y][j]).then(agents[x].cmp(&agents[y])));
        let rest = unassigned.split_off(want);
        let cut = match unassigned.last() {
            Some(&last) => marks[last][j].clone(),
            // an empty group keeps the previous boundary
            None => cuts.last().cloned().unwrap_or_else(Rational::zero),
        };
        let mut group: Vec<usize> = unassigned.iter().map(|&x| agents[x]).collect();
        group.sort_unstable();
        groups.push(group);
        cuts.push(cut);
        unassigned = rest;
    }
    let mut last: Vec<usize> = unassigned.iter().map(|&x| agents[x]).collect();
    last.sort_unstable();
    groups.push(last);
    (cuts, groups)
}

/// A stretch of cake shared by a group of agents with a common value window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subcake {
    pub start: Rational,
    pub end: Rational,
    pub agents: Vec<usize>,
    pub marks: AgentMarks,
}

/// What the protocol produced.
#[derive(Clone, Debug)]
pub struct ProtocolRun {
    pub allocation: Allocation,
    /// Largest subcake population after each round.
    pub populations: Vec<usize>,
    pub rounds: usize,
    pub queries: usize,
    /// Marks of each agent at the end (`b - a = 1/n`).
    pub marks: Vec<AgentMarks>,
    /// Every subcake after each round.
    pub history: Vec<Vec<Subcake>>,
}

/// Proportional protocol with contiguous pieces in at most `k` rounds.
///
/// Every round each subcake of `m` agents with `r` rounds to go is split into
/// `⌈m^(1/r)⌉` balanced groups. Every agent marks the group boundaries inside
/// its own value window `[a, b]`, and the groups are formed by
/// [`assign_subcakes`]. Only Cut queries are issued.
pub fn proportional_protocol<O: RwOracle + ?Sized>(oracle: &mut O, k: usize) -> Result<ProtocolRun, CakeError> {
    if k == 0 {
        return Err(CakeError::ZeroRounds);
    }
    let n = oracle.agents();
    let unit = rat(1, n as i64);
    let mut open = vec![Subcake {
        start: Rational::zero(),
        end: Rational::one(),
        agents: (0..n).collect(),
        marks: AgentMarks { a: Rational::zero(), b: Rational::one() },
    }];
    let mut done: Vec<Subcake> = Vec::new();
    let mut populations = Vec::new();
    let mut queries_total = 0;
    let mut rounds = 0;
    let mut history = Vec::new();

    for j in 0..k {
        open.retain(|s| {
            if s.agents.len() <= 1 {
                done.push(s.clone());
                false
            } else {
                true
            }
        });
        if open.is_empty() {
            break;
        }
        let left = k - j;
        let mut plans = Vec::with_capacity(open.len());
        let mut queries = Vec::new();
        for s in &open {
            let m = s.agents.len();
            let z = ceil_root(m as u64, left as u32) as usize;
            let sizes = balanced_sizes(m, z);
            let alphas: Vec<Rational> = sizes[..z - 1]
                .iter()
                .scan(s.marks.a.clone(), |acc, &sz| {
                    *acc += &unit * Rational::from_integer(sz.into());
                    Some(acc.clone())
                })
                .collect();
            for &agent in &s.agents {
                queries.extend(alphas.iter().map(|alpha| RwQuery::Cut { agent, alpha: alpha.clone() }));
            }
            plans.push((sizes, alphas));
        }
        let answers = oracle.ask_round(&queries)?;
        rounds += 1;
        queries_total += queries.len();

        let mut cursor = 0;
        let mut next = Vec::new();
        for (s, (sizes, alphas)) in open.iter().zip(plans) {
            let width = alphas.len();
            let marks: Vec<Vec<Rational>> = s
                .agents
                .iter()
                .map(|_| {
                    let row = answers[cursor..cursor + width].to_vec();
                    cursor += width;
                    row
                })
                .collect();
            let (cuts, groups) = assign_subcakes(&s.agents, &marks, &sizes);
            let mut a = s.marks.a.clone();
            for (g, group) in groups.into_iter().enumerate() {
                let start = if g == 0 { s.start.clone() } else { cuts[g - 1].clone() };
                let end = if g + 1 == sizes.len() { s.end.clone() } else { cuts[g].clone() };
                let b = &a + &unit * Rational::from_integer(sizes[g].into());
                next.push(Subcake { start, end, agents: group, marks: AgentMarks { a: a.clone(), b: b.clone() } });
                a = b;
            }
        }
        populations.push(next.iter().map(|s| s.agents.len()).max().unwrap_or(0));
        history.push(done.iter().chain(&next).cloned().collect());
        open = next;
    }
    done.extend(open);
    if let Some(s) = done.iter().find(|s| s.agents.len() > 1) {
        return Err(CakeError::Unfinished(s.agents.len()));
    }
    done.retain(|s| !s.agents.is_empty());
    done.sort_by(|x, y| x.start.cmp(&y.start).then(x.end.cmp(&y.end)));

    let mut marks = vec![AgentMarks { a: Rational::zero(), b: Rational::zero() }; n];
    let pieces: Vec<Piece> = done
        .iter()
        .map(|s| {
            marks[s.agents[0]] = s.marks.clone();
            Piece { start: s.start.clone(), end: s.end.clone(), owner: s.agents[0] }
        })
        .collect();
    Ok(ProtocolRun { allocation: Allocation { pieces }, populations, rounds, queries: queries_total, marks, history })
}
