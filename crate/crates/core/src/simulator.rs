//! Monte Carlo committees: sample utilities, offer and match trades, vote
//! sincerely with delegated ballots, and compare against the no-trade
//! outcome.
//!
//! Trial `k` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `k`, and
//! trials are folded in fixed-size chunks whose partial statistics are merged
//! in chunk order, so reports do not depend on the number of worker threads.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distributions::Distribution;
use crate::equilibrium::{pivot_probability, EquilibriumError};
use crate::game::{GameError, Issue, Quadrant, Role, StrategyProfile, TradeType, UtilityPair};
use crate::par;
use crate::welfare::WelfareBoundarySet;

/// Rejection draws allowed per conditional partner sample.
pub const MAX_REJECTIONS: usize = 100_000;

const CHUNK: u64 = 1024;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("no partner offering the complement of trade type {0} found after {MAX_REJECTIONS} draws")]
    NoPartner(usize),
}

/// Who may trade in a committee.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SimMode {
    /// Only voters 0 and 1 may trade.
    #[default]
    SingleTrade,
    /// Voters are paired uniformly at random, one left over, and every pair
    /// may trade.
    AllPairs,
}

impl std::str::FromStr for SimMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single-trade" | "single" => Ok(SimMode::SingleTrade),
            "all-pairs" => Ok(SimMode::AllPairs),
            other => Err(format!("unknown simulation mode `{other}` (expected single-trade or all-pairs)")),
        }
    }
}

/// An executed trade: `gives_t2` hands their t2 ballot to `gives_t1` and
/// receives their t1 ballot in return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutedTrade {
    pub gives_t2: usize,
    pub gives_t1: usize,
}

/// One played committee.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitteeRecord {
    pub utilities: Vec<[f64; 2]>,
    pub trades: Vec<ExecutedTrade>,
    /// Final ballots on (t1, t2), `true` for "for".
    pub ballots: Vec<[bool; 2]>,
    /// Outcomes ±1 on (t1, t2).
    pub outcome: [i8; 2],
    /// Outcomes had nobody traded.
    pub counterfactual: [i8; 2],
}

impl CommitteeRecord {
    fn welfare(&self, outcome: [i8; 2]) -> f64 {
        let (sx, sy) = self
            .utilities
            .iter()
            .fold((0.0, 0.0), |(a, b), u| (a + u[0], b + u[1]));
        outcome[0] as f64 * sx + outcome[1] as f64 * sy
    }

    /// Summed utility with trades minus summed utility without.
    pub fn group_delta(&self) -> f64 {
        self.welfare(self.outcome) - self.welfare(self.counterfactual)
    }

    /// Utility change of one voter caused by the trades.
    pub fn voter_delta(&self, voter: usize) -> f64 {
        let u = self.utilities[voter];
        (0..2)
            .map(|k| (self.outcome[k] - self.counterfactual[k]) as f64 * u[k])
            .sum()
    }
}

fn majority(ballots: impl Iterator<Item = bool>, n: usize) -> i8 {
    if ballots.filter(|&b| b).count() * 2 > n {
        1
    } else {
        -1
    }
}

/// Tallies sincere ballots, with traded ballots cast by the receiver's sign.
/// A utility of exactly zero votes against.
pub fn tally(utilities: &[[f64; 2]], trades: &[ExecutedTrade]) -> (Vec<[bool; 2]>, [i8; 2]) {
    let mut ballots: Vec<[bool; 2]> = utilities.iter().map(|u| [u[0] > 0.0, u[1] > 0.0]).collect();
    for t in trades {
        ballots[t.gives_t2][1] = utilities[t.gives_t1][1] > 0.0;
        ballots[t.gives_t1][0] = utilities[t.gives_t2][0] > 0.0;
    }
    let n = utilities.len();
    let outcome = [
        majority(ballots.iter().map(|b| b[0]), n),
        majority(ballots.iter().map(|b| b[1]), n),
    ];
    (ballots, outcome)
}

/// The trade two voters agree on, if any. A trade needs one give-t2 and one
/// give-t1 offer; when both directions are possible a coin decides.
pub fn match_pair<R: Rng + ?Sized>(
    theta: &StrategyProfile,
    utilities: &[[f64; 2]],
    a: usize,
    b: usize,
    rng: &mut R,
) -> Option<ExecutedTrade> {
    let oa = theta.offered_roles(utilities[a][0], utilities[a][1]);
    let ob = theta.offered_roles(utilities[b][0], utilities[b][1]);
    let a_gives_t2 = oa.gives_t2 && ob.gives_t1;
    let b_gives_t2 = ob.gives_t2 && oa.gives_t1;
    let first = match (a_gives_t2, b_gives_t2) {
        (false, false) => return None,
        (true, false) => true,
        (false, true) => false,
        (true, true) => rng.random_bool(0.5),
    };
    Some(if first {
        ExecutedTrade { gives_t2: a, gives_t1: b }
    } else {
        ExecutedTrade { gives_t2: b, gives_t1: a }
    })
}

/// Plays a committee with fixed utilities and a fixed pairing.
pub fn play_with_utilities<R: Rng + ?Sized>(
    utilities: Vec<[f64; 2]>,
    theta: &StrategyProfile,
    pairs: &[(usize, usize)],
    rng: &mut R,
) -> CommitteeRecord {
    let trades: Vec<ExecutedTrade> = pairs
        .iter()
        .filter_map(|&(a, b)| match_pair(theta, &utilities, a, b, rng))
        .collect();
    let (_, counterfactual) = tally(&utilities, &[]);
    let (ballots, outcome) = tally(&utilities, &trades);
    CommitteeRecord {
        utilities,
        trades,
        ballots,
        outcome,
        counterfactual,
    }
}

fn random_pairs<R: Rng + ?Sized>(voters: &mut [usize], rng: &mut R) -> Vec<(usize, usize)> {
    voters.shuffle(rng);
    voters.chunks_exact(2).map(|p| (p[0], p[1])).collect()
}

/// Samples `n` voters from `dist` and plays one committee.
pub fn play_committee<R: Rng + ?Sized>(
    dist: &Distribution,
    theta: &StrategyProfile,
    n: usize,
    mode: SimMode,
    rng: &mut R,
) -> CommitteeRecord {
    let utilities: Vec<[f64; 2]> = (0..n).map(|_| dist.sample(rng)).collect();
    let pairs = match mode {
        SimMode::SingleTrade => vec![(0, 1)],
        SimMode::AllPairs => {
            let mut voters: Vec<usize> = (0..n).collect();
            random_pairs(&mut voters, rng)
        }
    };
    play_with_utilities(utilities, theta, &pairs, rng)
}

/// The RNG for trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Running mean and sum of squared deviations, mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn estimate(&self) -> Estimate {
        let std_error = if self.count > 1 {
            (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
        } else {
            f64::NAN
        };
        Estimate {
            mean: if self.count > 0 { self.mean } else { f64::NAN },
            std_error,
            count: self.count,
        }
    }
}

/// A sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: u64,
}

impl Estimate {
    /// Whether `value` lies within `k` standard errors of the mean.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error
    }
}

/// Runs `trials` trials in fixed chunks and merges per-chunk accumulators in
/// order.
fn run_chunked<A, F>(trials: u64, seed: u64, init: impl Fn() -> A + Sync + Send, trial: F) -> Vec<A>
where
    A: Send,
    F: Fn(&mut A, &mut ChaCha8Rng) + Sync + Send,
{
    let chunks = trials.div_ceil(CHUNK);
    par::map_range(chunks, |c| {
        let mut acc = init();
        for k in c * CHUNK..((c + 1) * CHUNK).min(trials) {
            let mut rng = trial_rng(seed, k);
            trial(&mut acc, &mut rng);
        }
        acc
    })
}

fn merged<const N: usize>(parts: Vec<[Moments; N]>) -> [Moments; N] {
    let mut total = [Moments::default(); N];
    for p in &parts {
        for (t, m) in total.iter_mut().zip(p) {
            t.merge(m);
        }
    }
    total
}

/// Aggregated Monte Carlo estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub seed: u64,
    pub n: usize,
    pub mode: SimMode,
    pub trades_executed: u64,
    /// Utility change of each participant of each executed trade.
    pub trader_value: Estimate,
    /// Group welfare change per trial against the no-trade counterfactual.
    pub group_delta: Estimate,
    /// Group welfare change over trials with at least one trade.
    pub group_delta_given_trade: Estimate,
    /// Share of trials with trades whose realized group change is positive.
    pub positive_group_delta: Estimate,
    /// Share of executed trade sides that fall in their beneficial
    /// half-plane; present when a welfare boundary set was supplied.
    pub beneficial_fraction: Option<Estimate>,
    /// Rate at which trading flips the outcome of (t1, t2).
    pub flip_rate: [Estimate; 2],
}

const TRADER: usize = 0;
const GROUP: usize = 1;
const GROUP_TRADED: usize = 2;
const POSITIVE: usize = 3;
const BENEFICIAL: usize = 4;
const FLIP1: usize = 5;
const FLIP2: usize = 6;

fn record_stats(stats: &mut [Moments; 7], rec: &CommitteeRecord, welfare: Option<&WelfareBoundarySet>) {
    let delta = rec.group_delta();
    stats[GROUP].push(delta);
    stats[FLIP1].push((rec.outcome[0] != rec.counterfactual[0]) as u8 as f64);
    stats[FLIP2].push((rec.outcome[1] != rec.counterfactual[1]) as u8 as f64);
    if rec.trades.is_empty() {
        return;
    }
    stats[GROUP_TRADED].push(delta);
    stats[POSITIVE].push((delta > 0.0) as u8 as f64);
    for t in &rec.trades {
        for (voter, role) in [(t.gives_t2, Role::GivesT2), (t.gives_t1, Role::GivesT1)] {
            stats[TRADER].push(rec.voter_delta(voter));
            if let Some(w) = welfare {
                let [x, y] = rec.utilities[voter];
                let trade = TradeType::for_role(role, Quadrant::of(x, y));
                stats[BENEFICIAL].push(w.is_beneficial(trade, UtilityPair { x, y }) as u8 as f64);
            }
        }
    }
}

/// Plays `trials` committees and aggregates. Passing `welfare` adds the
/// share of executed trade sides that the boundary set classifies as
/// beneficial.
pub fn simulate(
    dist: &Distribution,
    theta: &StrategyProfile,
    n: usize,
    mode: SimMode,
    trials: u64,
    seed: u64,
    welfare: Option<&WelfareBoundarySet>,
) -> Result<SimulationReport, SimulationError> {
    if trials == 0 {
        return Err(SimulationError::NoTrials);
    }
    pivot_probability(0.5, 0.5, n)?;
    let parts = run_chunked(
        trials,
        seed,
        || (0u64, [Moments::default(); 7]),
        |(trades, stats), rng| {
            let rec = play_committee(dist, theta, n, mode, rng);
            *trades += rec.trades.len() as u64;
            record_stats(stats, &rec, welfare);
        },
    );
    let trades_executed = parts.iter().map(|p| p.0).sum();
    let stats = merged(parts.into_iter().map(|p| p.1).collect());
    Ok(SimulationReport {
        trials,
        seed,
        n,
        mode,
        trades_executed,
        trader_value: stats[TRADER].estimate(),
        group_delta: stats[GROUP].estimate(),
        group_delta_given_trade: stats[GROUP_TRADED].estimate(),
        positive_group_delta: stats[POSITIVE].estimate(),
        beneficial_fraction: welfare.map(|_| stats[BENEFICIAL].estimate()),
        flip_rate: [stats[FLIP1].estimate(), stats[FLIP2].estimate()],
    })
}

/// The first `count` trial records of a simulation run, for debugging dumps.
pub fn trial_records(
    dist: &Distribution,
    theta: &StrategyProfile,
    n: usize,
    mode: SimMode,
    count: u64,
    seed: u64,
) -> Vec<CommitteeRecord> {
    (0..count)
        .map(|k| play_committee(dist, theta, n, mode, &mut trial_rng(seed, k)))
        .collect()
}

fn sample_where<R: Rng + ?Sized>(
    dist: &Distribution,
    rng: &mut R,
    accept: impl Fn([f64; 2]) -> bool,
) -> Option<[f64; 2]> {
    (0..MAX_REJECTIONS).map(|_| dist.sample(rng)).find(|&u| accept(u))
}

/// Mean utility change of a trader fixed at `u` who offers `trade`, with the
/// partner drawn from the voters offering the complementary trade.
pub fn empirical_trade_value(
    dist: &Distribution,
    theta: &StrategyProfile,
    n: usize,
    trade: TradeType,
    u: UtilityPair,
    trials: u64,
    seed: u64,
) -> Result<Estimate, SimulationError> {
    if trials == 0 {
        return Err(SimulationError::NoTrials);
    }
    pivot_probability(0.5, 0.5, n)?;
    u.check_quadrant(trade)?;
    let role = trade.role();
    let parts = run_chunked(
        trials,
        seed,
        || Ok([Moments::default(); 1]),
        |acc: &mut Result<[Moments; 1], SimulationError>, rng| {
            let Ok(stats) = acc else { return };
            let partner = sample_where(dist, rng, |p| {
                let o = theta.offered_roles(p[0], p[1]);
                match role {
                    Role::GivesT2 => o.gives_t1,
                    Role::GivesT1 => o.gives_t2,
                }
            });
            let Some(partner) = partner else {
                *acc = Err(SimulationError::NoPartner(trade.index()));
                return;
            };
            let mut utilities = Vec::with_capacity(n);
            utilities.push([u.x, u.y]);
            utilities.push(partner);
            utilities.extend((2..n).map(|_| dist.sample(rng)));
            let executed = match role {
                Role::GivesT2 => ExecutedTrade { gives_t2: 0, gives_t1: 1 },
                Role::GivesT1 => ExecutedTrade { gives_t2: 1, gives_t1: 0 },
            };
            let (_, before) = tally(&utilities, &[]);
            let (_, after) = tally(&utilities, &[executed]);
            let delta: f64 = (0..2).map(|k| (after[k] - before[k]) as f64 * utilities[0][k]).sum();
            stats[0].push(delta);
        },
    );
    let parts = parts.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(merged(parts)[0].estimate())
}

/// Frequency with which voter 1 is the swing vote on `issue` when voters 0
/// and 1 disagree on it: flipping voter 1's ballot changes the outcome.
pub fn empirical_pivot_frequency(
    dist: &Distribution,
    n: usize,
    issue: Issue,
    trials: u64,
    seed: u64,
) -> Result<Estimate, SimulationError> {
    if trials == 0 {
        return Err(SimulationError::NoTrials);
    }
    pivot_probability(0.5, 0.5, n)?;
    let k = issue.axis();
    let parts = run_chunked(
        trials,
        seed,
        || [Moments::default(); 1],
        |stats, rng| {
            let mut utilities: Vec<[f64; 2]> = (0..n).map(|_| dist.sample(rng)).collect();
            if (utilities[0][k] > 0.0) == (utilities[1][k] > 0.0) {
                // Reflect voter 1's draw into the opposite half; only its
                // side matters for the swing event.
                utilities[1][k] = -utilities[1][k];
                if utilities[1][k] == 0.0 && utilities[0][k] <= 0.0 {
                    utilities[1][k] = f64::MIN_POSITIVE;
                }
            }
            let (ballots, outcome) = tally(&utilities, &[]);
            let flipped = ballots
                .iter()
                .enumerate()
                .map(|(i, b)| if i == 1 { !b[k] } else { b[k] });
            let swing = majority(flipped, n) != outcome[k];
            stats[0].push(swing as u8 as f64);
        },
    );
    Ok(merged(parts)[0].estimate())
}

/// Share of non-focal final ballots supporting (t1, t2) when voters 0 and 1
/// form the focal pair and the other n-2 are paired at random, one left
/// over, and trade at `theta`.
pub fn empirical_effective_q(
    dist: &Distribution,
    theta: &StrategyProfile,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<[Estimate; 2], SimulationError> {
    if trials == 0 {
        return Err(SimulationError::NoTrials);
    }
    pivot_probability(0.5, 0.5, n)?;
    let parts = run_chunked(
        trials,
        seed,
        || [Moments::default(); 2],
        |stats, rng| {
            let utilities: Vec<[f64; 2]> = (0..n).map(|_| dist.sample(rng)).collect();
            let mut others: Vec<usize> = (2..n).collect();
            let pairs = random_pairs(&mut others, rng);
            let trades: Vec<ExecutedTrade> = pairs
                .iter()
                .filter_map(|&(a, b)| match_pair(theta, &utilities, a, b, rng))
                .collect();
            let (ballots, _) = tally(&utilities, &trades);
            let m = (n - 2) as f64;
            for (k, s) in stats.iter_mut().enumerate() {
                s.push(ballots[2..].iter().filter(|b| b[k]).count() as f64 / m);
            }
        },
    );
    let m = merged(parts);
    Ok([m[0].estimate(), m[1].estimate()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::Mode;
    use crate::welfare::welfare_coefficients;
    use approx::assert_relative_eq;

    fn hand_utilities() -> Vec<[f64; 2]> {
        vec![[0.9, 0.1], [-0.2, 0.3], [-0.1, -0.5]]
    }

    #[test]
    fn three_voters_without_trade() {
        let mut rng = trial_rng(0, 0);
        let rec = play_with_utilities(hand_utilities(), &StrategyProfile::zero(), &[(0, 1)], &mut rng);
        assert!(rec.trades.is_empty());
        assert_eq!(rec.outcome, [-1, 1]);
        let w = rec.welfare(rec.outcome);
        assert_relative_eq!(w, -0.7, epsilon = 1e-12);
        assert_eq!(rec.group_delta(), 0.0);
    }

    #[test]
    fn three_voters_with_naive_trade() {
        let mut rng = trial_rng(0, 0);
        let rec = play_with_utilities(hand_utilities(), &StrategyProfile::naive(), &[(0, 1)], &mut rng);
        assert_eq!(rec.trades, vec![ExecutedTrade { gives_t2: 0, gives_t1: 1 }]);
        assert_eq!(rec.ballots[1], [true, true]);
        assert_eq!(rec.ballots[0], [true, true]);
        assert_eq!(rec.outcome, [1, 1]);
        assert_relative_eq!(rec.welfare(rec.outcome), 0.5, epsilon = 1e-12);
        assert_relative_eq!(rec.group_delta(), 1.2, epsilon = 1e-12);
        assert_relative_eq!(rec.voter_delta(0), 1.8, epsilon = 1e-12);
    }

    #[test]
    fn same_direction_offers_do_not_trade() {
        let mut rng = trial_rng(0, 0);
        let rec = play_with_utilities(vec![[0.9, 0.1], [0.8, -0.2], [0.1, 0.1]], &StrategyProfile::naive(), &[(0, 1)], &mut rng);
        assert!(rec.trades.is_empty());
    }

    #[test]
    fn both_direction_coin_is_fair() {
        let theta = StrategyProfile::uniform(std::f64::consts::FRAC_PI_2).unwrap();
        let u = vec![[0.5, 0.5], [-0.5, 0.5], [0.1, 0.1]];
        let mut first = 0;
        for k in 0..4000 {
            let mut rng = trial_rng(9, k);
            let t = match_pair(&theta, &u, 0, 1, &mut rng).unwrap();
            first += (t.gives_t2 == 0) as u32;
        }
        assert!((first as f64 / 4000.0 - 0.5).abs() < 0.03);
    }

    #[test]
    fn zero_utility_votes_against() {
        let (_, outcome) = tally(&[[0.0, 0.0], [0.0, 0.5], [0.3, -0.1]], &[]);
        assert_eq!(outcome, [-1, -1]);
    }

    #[test]
    fn replayed_trial_is_identical() {
        let d = Distribution::product_tent();
        let a = play_committee(&d, &StrategyProfile::naive(), 11, SimMode::AllPairs, &mut trial_rng(5, 17));
        let b = play_committee(&d, &StrategyProfile::naive(), 11, SimMode::AllPairs, &mut trial_rng(5, 17));
        assert_eq!(a, b);
    }

    #[test]
    fn zero_profile_matches_counterfactual() {
        let d = Distribution::uniform();
        for rec in trial_records(&d, &StrategyProfile::zero(), 11, SimMode::AllPairs, 500, 2) {
            assert_eq!(rec.outcome, rec.counterfactual);
            assert_eq!(rec.group_delta(), 0.0);
        }
        let r = simulate(&d, &StrategyProfile::zero(), 11, SimMode::SingleTrade, 2000, 2, None).unwrap();
        assert_eq!(r.trades_executed, 0);
        assert_eq!(r.group_delta.mean, 0.0);
    }

    #[test]
    fn majority_retally() {
        let d = Distribution::quadrant_constant([0.1, 0.4, 0.3, 0.2]).unwrap();
        for rec in trial_records(&d, &StrategyProfile::naive(), 9, SimMode::AllPairs, 1000, 4) {
            let mut votes = [0usize; 2];
            for (i, u) in rec.utilities.iter().enumerate() {
                let mut b = [u[0] > 0.0, u[1] > 0.0];
                for t in &rec.trades {
                    if t.gives_t1 == i {
                        b[0] = rec.utilities[t.gives_t2][0] > 0.0;
                    }
                    if t.gives_t2 == i {
                        b[1] = rec.utilities[t.gives_t1][1] > 0.0;
                    }
                }
                votes[0] += b[0] as usize;
                votes[1] += b[1] as usize;
            }
            let want = votes.map(|v| if v >= 5 { 1 } else { -1 });
            assert_eq!(rec.outcome, want);
        }
    }

    #[test]
    fn chunk_merge_matches_single_pass() {
        let mut whole = Moments::default();
        let mut parts = vec![Moments::default(); 3];
        for k in 0..3000 {
            let x = ((k * 7919) % 113) as f64 / 7.0;
            whole.push(x);
            parts[k / 1000].push(x);
        }
        let mut merged = Moments::default();
        for p in &parts {
            merged.merge(p);
        }
        assert_relative_eq!(merged.mean, whole.mean, max_relative = 1e-12);
        assert_relative_eq!(merged.m2, whole.m2, max_relative = 1e-10);
    }

    #[test]
    fn report_is_reproducible() {
        let d = Distribution::uniform();
        let w = welfare_coefficients(&d, &StrategyProfile::naive(), 11, Mode::Myopic).unwrap();
        let a = simulate(&d, &StrategyProfile::naive(), 11, SimMode::SingleTrade, 5000, 1, Some(&w)).unwrap();
        let b = simulate(&d, &StrategyProfile::naive(), 11, SimMode::SingleTrade, 5000, 1, Some(&w)).unwrap();
        assert_eq!(a, b);
        assert!(simulate(&d, &StrategyProfile::naive(), 11, SimMode::SingleTrade, 0, 1, None).is_err());
        assert!(simulate(&d, &StrategyProfile::naive(), 10, SimMode::SingleTrade, 10, 1, None).is_err());
    }

    #[test]
    fn boundary_trade_value_is_small() {
        let d = Distribution::uniform();
        let t1 = TradeType::new(1).unwrap();
        let e = empirical_trade_value(&d, &StrategyProfile::naive(), 11, t1, UtilityPair::new(0.5, 0.5).unwrap(), 40_000, 8)
            .unwrap();
        assert!(e.agrees_with(0.0, 4.0), "{e:?}");
        let e = empirical_trade_value(&d, &StrategyProfile::naive(), 11, t1, UtilityPair::new(0.2, 0.8).unwrap(), 40_000, 8)
            .unwrap();
        assert!(e.mean < 0.0);
    }
}
