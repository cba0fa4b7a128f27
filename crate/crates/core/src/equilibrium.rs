//! Expected trade values, the best-response map over the eight wedge angles,
//! and a damped, projected fixed-point solver for non-trivial equilibria.
//!
//! For a trade of type `i` the trader gains a vote on one issue and gives one
//! away on the other. With `a_i` the partner mass opposing the trader on the
//! gained issue times the pivot weight there, and `c_i` the same on the given
//! issue, the trader's expected gain is
//!
//! ```text
//! E = 2·C(n-2, (n-3)/2) / I_S' · (a_i |u_gain| - c_i |u_give|)
//! ```
//!
//! where `I_S'` is the partner role's total offer mass. The best response is
//! the wedge `|u_give| / |u_gain| < a_i / c_i`, i.e. `θ_i = atan(a_i / c_i)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distributions::Distribution;
use crate::game::{GameError, Issue, StrategyProfile, TradeType, UtilityPair, VoteShares};
use crate::geometry::{mass_table, GeometryError, RegionMassTable};
use crate::groupwide::{effective_q_from_table, plain_shares};
use crate::par;

/// Whether voters assume theirs is the only trade (myopic) or that all other
/// pairs trade too (group-wide).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Myopic,
    Groupwide,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "myopic" => Ok(Mode::Myopic),
            "groupwide" => Ok(Mode::Groupwide),
            other => Err(format!("unknown mode `{other}` (expected myopic or groupwide)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquilibriumError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("committee size must be odd and at least 3, got {0}")]
    InvalidCommitteeSize(usize),
    #[error("vote share Q{issue}{sign} is zero; trading cannot be profitable for some voters")]
    ZeroVoteShare { issue: u8, sign: char },
    #[error("no partner offers the complement of trade type {0}")]
    NoPartner(usize),
    #[error("invalid solver option: {0}")]
    InvalidOptions(String),
    #[error("no convergence after {} iterations, last residual {}", residuals.len(), residuals.last().copied().unwrap_or(f64::NAN))]
    NonConvergence {
        last: StrategyProfile,
        residuals: Vec<f64>,
    },
}

fn check_committee(n: usize) -> Result<(), EquilibriumError> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(EquilibriumError::InvalidCommitteeSize(n));
    }
    Ok(())
}

/// Binomial coefficient as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64)
}

/// q_many^((n-1)/2) · q_few^((n-3)/2): one particular split of the other
/// n-2 voters that makes the trade decisive.
fn pivot_weight(q_many: f64, q_few: f64, n: usize) -> f64 {
    q_many.powi(((n - 1) / 2) as i32) * q_few.powi(((n - 3) / 2) as i32)
}

/// Probability that exactly (n-1)/2 of the n-2 other voters fall on the
/// `q_minus` side: C(n-2, (n-3)/2) · q_minus^((n-1)/2) · q_plus^((n-3)/2).
pub fn pivot_probability(q_minus: f64, q_plus: f64, n: usize) -> Result<f64, EquilibriumError> {
    check_committee(n)?;
    Ok(binomial(n - 2, (n - 3) / 2) * pivot_weight(q_minus, q_plus, n))
}

/// The two weights of a trade type: `a` on the gained issue and `c` on the
/// given issue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeTerms {
    /// Partner offer mass with the opposite sign on the gained issue.
    pub gain_partner_mass: f64,
    /// Partner offer mass with the opposite sign on the given issue.
    pub give_partner_mass: f64,
    pub gain_pivot: f64,
    pub give_pivot: f64,
}

impl TradeTerms {
    pub fn a(&self) -> f64 {
        self.gain_partner_mass * self.gain_pivot
    }

    pub fn c(&self) -> f64 {
        self.give_partner_mass * self.give_pivot
    }
}

/// Partner trade types whose quadrant has sign `sign` on `issue`.
pub(crate) fn partner_types(trade: TradeType, issue: Issue, sign: f64) -> impl Iterator<Item = TradeType> {
    trade
        .role()
        .partner()
        .trade_types()
        .into_iter()
        .filter(move |t| t.quadrant().sign(issue) == sign)
}

/// Output of the best-response map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestResponse {
    /// Best-response angles; undefined components keep the input angle.
    pub profile: StrategyProfile,
    /// Components where both weights vanish (0/0).
    pub undefined: [bool; 8],
}

/// Everything derived from one profile: region masses and the vote shares
/// used in pivot probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEvaluation {
    pub profile: StrategyProfile,
    pub n: usize,
    pub mode: Mode,
    pub table: RegionMassTable,
    /// Q (myopic) or the effective shares (group-wide).
    pub pivot_shares: VoteShares,
}

impl ProfileEvaluation {
    pub fn terms(&self, trade: TradeType) -> TradeTerms {
        let role = trade.role();
        let q = trade.quadrant();
        let (gain, give) = (role.gain_issue(), role.give_issue());
        let (sg, sk) = (q.sign(gain), q.sign(give));
        let mass = |issue, sign| partner_types(trade, issue, sign).map(|t| self.table.mass(t)).sum::<f64>();
        let s = &self.pivot_shares;
        TradeTerms {
            gain_partner_mass: mass(gain, -sg),
            give_partner_mass: mass(give, -sk),
            // Gaining a vote is decisive when (n-1)/2 others oppose the trader.
            gain_pivot: pivot_weight(s.get(gain, -sg), s.get(gain, sg), self.n),
            // Losing one is decisive when (n-1)/2 others side with the trader.
            give_pivot: pivot_weight(s.get(give, sk), s.get(give, -sk), self.n),
        }
    }

    pub fn best_response(&self) -> BestResponse {
        let mut angles = *self.profile.angles();
        let mut undefined = [false; 8];
        for t in TradeType::ALL {
            let terms = self.terms(t);
            let (a, c) = (terms.a(), terms.c());
            angles[t.slot()] = if c > 0.0 {
                (a / c).atan()
            } else if a > 0.0 {
                FRAC_PI_2
            } else {
                undefined[t.slot()] = true;
                self.profile.angle(t)
            };
        }
        BestResponse {
            profile: StrategyProfile::new(angles).expect("atan lies in [0, pi/2]"),
            undefined,
        }
    }

    /// Sup-norm distance between the profile and its best response, over the
    /// defined components.
    pub fn residual(&self) -> f64 {
        let br = self.best_response();
        TradeType::ALL
            .iter()
            .filter(|t| !br.undefined[t.slot()])
            .map(|&t| (self.profile.angle(t) - br.profile.angle(t)).abs())
            .fold(0.0, f64::max)
    }

    /// The trader's expected utility change from offering `trade` at `u`.
    pub fn trade_expected_value(&self, trade: TradeType, u: UtilityPair) -> Result<f64, EquilibriumError> {
        u.check_quadrant(trade)?;
        let partner_mass = self.table.role_mass(trade.role().partner());
        if partner_mass <= 0.0 {
            return Err(EquilibriumError::NoPartner(trade.index()));
        }
        let terms = self.terms(trade);
        let scale = 2.0 * binomial(self.n - 2, (self.n - 3) / 2) / partner_mass;
        Ok(scale * (terms.a() * u.gain_utility(trade).abs() - terms.c() * u.give_utility(trade).abs()))
    }

    /// atan of the smallest ratio of gain to give pivot weights over the
    /// eight trade types; non-trivial equilibria keep at least two angles per
    /// role above it.
    pub fn theta_min(&self) -> f64 {
        TradeType::ALL
            .iter()
            .map(|&t| {
                let terms = self.terms(t);
                terms.gain_pivot / terms.give_pivot
            })
            .fold(f64::INFINITY, f64::min)
            .atan()
    }
}

/// A density, committee size, trading mode and quadrature tolerance.
#[derive(Debug, Clone, Copy)]
pub struct Game<'a> {
    pub dist: &'a Distribution,
    pub n: usize,
    pub mode: Mode,
    pub tolerance: f64,
}

impl<'a> Game<'a> {
    pub fn new(dist: &'a Distribution, n: usize, mode: Mode) -> Result<Game<'a>, EquilibriumError> {
        check_committee(n)?;
        Ok(Game {
            dist,
            n,
            mode,
            tolerance: dist.default_tolerance(),
        })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Game<'a> {
        self.tolerance = tol;
        self
    }

    pub fn evaluate(&self, profile: &StrategyProfile) -> Result<ProfileEvaluation, EquilibriumError> {
        let table = mass_table(self.dist, profile, self.tolerance)?;
        let plain = plain_shares(&table);
        for (issue, sign, q) in [
            (1, '+', plain.q1_plus),
            (1, '-', plain.q1_minus),
            (2, '+', plain.q2_plus),
            (2, '-', plain.q2_minus),
        ] {
            if q <= 1e-14 {
                return Err(EquilibriumError::ZeroVoteShare { issue, sign });
            }
        }
        let pivot_shares = match self.mode {
            Mode::Myopic => plain,
            Mode::Groupwide => effective_q_from_table(&table, self.n),
        };
        Ok(ProfileEvaluation {
            profile: *profile,
            n: self.n,
            mode: self.mode,
            table,
            pivot_shares,
        })
    }
}

pub fn best_response(
    dist: &Distribution,
    theta: &StrategyProfile,
    n: usize,
    mode: Mode,
) -> Result<BestResponse, EquilibriumError> {
    Ok(Game::new(dist, n, mode)?.evaluate(theta)?.best_response())
}

pub fn residual(dist: &Distribution, theta: &StrategyProfile, n: usize, mode: Mode) -> Result<f64, EquilibriumError> {
    Ok(Game::new(dist, n, mode)?.evaluate(theta)?.residual())
}

pub fn trade_expected_value(
    dist: &Distribution,
    theta: &StrategyProfile,
    n: usize,
    trade: TradeType,
    u: UtilityPair,
    mode: Mode,
) -> Result<f64, EquilibriumError> {
    Game::new(dist, n, mode)?.evaluate(theta)?.trade_expected_value(trade, u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub n: usize,
    /// Initial damping λ in θ ← (1-λ)θ + λ·BR(θ).
    pub damping: f64,
    pub max_iterations: usize,
    /// Residual (sup-norm, radians) at which iteration stops.
    pub tolerance: f64,
    pub starts: usize,
    pub seed: u64,
    /// Quadrature tolerance; the distribution's default when `None`.
    pub quadrature_tolerance: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            n: 11,
            damping: 0.5,
            max_iterations: 500,
            tolerance: 1e-8,
            starts: 1,
            seed: 0,
            quadrature_tolerance: None,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), EquilibriumError> {
        check_committee(self.n)?;
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(EquilibriumError::InvalidOptions(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(EquilibriumError::InvalidOptions("tolerance must be positive".into()));
        }
        if self.starts == 0 {
            return Err(EquilibriumError::InvalidOptions("starts must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(EquilibriumError::InvalidOptions("max_iterations must be at least 1".into()));
        }
        Ok(())
    }

    fn game<'a>(&self, dist: &'a Distribution, mode: Mode) -> Result<Game<'a>, EquilibriumError> {
        let game = Game::new(dist, self.n, mode)?;
        Ok(match self.quadrature_tolerance {
            Some(tol) => game.with_tolerance(tol),
            None => game,
        })
    }
}

/// A converged fixed point of the best-response map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    pub theta_star: StrategyProfile,
    pub residual: f64,
    pub iterations: usize,
    pub mode: Mode,
    pub n: usize,
    pub converged: bool,
    /// Components whose best response stayed 0/0 at the solution.
    pub undefined: [bool; 8],
    pub theta_min: f64,
    pub mass_table: RegionMassTable,
    pub pivot_shares: VoteShares,
}

impl EquilibriumSolution {
    /// Reconstructs the evaluation the solution was accepted at.
    pub fn evaluation(&self) -> ProfileEvaluation {
        ProfileEvaluation {
            profile: self.theta_star,
            n: self.n,
            mode: self.mode,
            table: self.mass_table.clone(),
            pivot_shares: self.pivot_shares,
        }
    }
}

const PAIRS: [(usize, usize); 4] = [(0, 2), (1, 3), (4, 6), (5, 7)];
const MIN_DAMPING: f64 = 1.0 / 1024.0;

/// Raises any opposite-quadrant pair θ_i + θ_{i+2} that falls below
/// `theta_min`, scaling the pair proportionally.
pub fn project_onto_feasible(theta: [f64; 8], theta_min: f64) -> [f64; 8] {
    let mut out = theta;
    for (i, j) in PAIRS {
        let sum = out[i] + out[j];
        if sum >= theta_min {
            continue;
        }
        if sum <= 0.0 {
            out[i] = theta_min / 2.0;
            out[j] = theta_min / 2.0;
        } else {
            let k = theta_min / sum;
            out[i] *= k;
            out[j] *= k;
        }
    }
    out.map(|t| t.clamp(0.0, FRAC_PI_2))
}

/// Whether every opposite-quadrant pair sums to at least `theta_min`.
pub fn in_feasible_set(theta: &StrategyProfile, theta_min: f64) -> bool {
    let t = theta.angles();
    PAIRS.iter().all(|&(i, j)| t[i] + t[j] >= theta_min)
}

/// At least two angles per role at or above `theta_min`.
pub fn satisfies_lower_bound(theta: &StrategyProfile, theta_min: f64) -> bool {
    let t = theta.angles();
    let count = |r: std::ops::Range<usize>| t[r].iter().filter(|&&a| a >= theta_min).count();
    count(0..4) >= 2 && count(4..8) >= 2
}

fn solve_from(game: &Game<'_>, start: StrategyProfile, opts: &SolverOptions) -> Result<EquilibriumSolution, EquilibriumError> {
    let mut theta = start;
    let mut damping = opts.damping;
    let mut residuals = Vec::new();
    let mut previous = f64::INFINITY;
    for iteration in 0..opts.max_iterations {
        let eval = game.evaluate(&theta)?;
        let br = eval.best_response();
        let res = TradeType::ALL
            .iter()
            .filter(|t| !br.undefined[t.slot()])
            .map(|&t| (theta.angle(t) - br.profile.angle(t)).abs())
            .fold(0.0, f64::max);
        residuals.push(res);
        if res <= opts.tolerance {
            let theta_min = eval.theta_min();
            return Ok(EquilibriumSolution {
                theta_star: theta,
                residual: res,
                iterations: iteration,
                mode: game.mode,
                n: game.n,
                converged: true,
                undefined: br.undefined,
                theta_min,
                mass_table: eval.table,
                pivot_shares: eval.pivot_shares,
            });
        }
        if res > previous {
            damping = (damping / 2.0).max(MIN_DAMPING);
        } else {
            damping = (damping * 1.25).min(opts.damping);
        }
        previous = res;
        let mut next = *theta.angles();
        for t in TradeType::ALL {
            if !br.undefined[t.slot()] {
                let k = t.slot();
                next[k] = (1.0 - damping) * next[k] + damping * br.profile.angle(t);
            }
        }
        theta = StrategyProfile::new(project_onto_feasible(next, eval.theta_min()))?;
    }
    Err(EquilibriumError::NonConvergence { last: theta, residuals })
}

/// Damped projected iteration from the naive profile.
pub fn solve_equilibrium(
    dist: &Distribution,
    opts: &SolverOptions,
    mode: Mode,
) -> Result<EquilibriumSolution, EquilibriumError> {
    opts.validate()?;
    let game = opts.game(dist, mode)?;
    solve_from(&game, StrategyProfile::naive(), opts)
}

/// Solves from an explicit starting profile.
pub fn solve_equilibrium_from(
    dist: &Distribution,
    start: StrategyProfile,
    opts: &SolverOptions,
    mode: Mode,
) -> Result<EquilibriumSolution, EquilibriumError> {
    opts.validate()?;
    let game = opts.game(dist, mode)?;
    solve_from(&game, start, opts)
}

/// Distinct equilibria found by multi-start solving.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSet {
    pub solutions: Vec<EquilibriumSolution>,
    /// Starts that did not converge: (start index, message).
    pub failures: Vec<(usize, String)>,
}

/// Profiles closer than this in sup-norm are reported as one equilibrium.
pub const DEDUP_TOLERANCE: f64 = 1e-4;

/// Random start uniformly distributed on the feasible set.
fn random_start(rng: &mut ChaCha8Rng, theta_min: f64) -> StrategyProfile {
    loop {
        let theta: [f64; 8] = std::array::from_fn(|_| rng.random_range(0.0..=FRAC_PI_2));
        let p = StrategyProfile::new(theta).expect("sampled in range");
        if in_feasible_set(&p, theta_min) {
            return p;
        }
    }
}

/// Runs the solver from the naive profile and `starts - 1` random feasible
/// profiles (seeded by `seed` and the start index) and deduplicates.
pub fn find_equilibria(
    dist: &Distribution,
    opts: &SolverOptions,
    mode: Mode,
) -> Result<EquilibriumSet, EquilibriumError> {
    opts.validate()?;
    let game = opts.game(dist, mode)?;
    let theta_min = game.evaluate(&StrategyProfile::naive())?.theta_min().min(FRAC_PI_4);
    let starts: Vec<StrategyProfile> = (0..opts.starts)
        .map(|k| {
            if k == 0 {
                StrategyProfile::naive()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                rng.set_stream(k as u64);
                random_start(&mut rng, theta_min)
            }
        })
        .collect();
    let results = par::map(&starts, |s| solve_from(&game, *s, opts));
    let mut set = EquilibriumSet {
        solutions: Vec::new(),
        failures: Vec::new(),
    };
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok(sol) => {
                if !set
                    .solutions
                    .iter()
                    .any(|s| s.theta_star.distance(&sol.theta_star) <= DEDUP_TOLERANCE)
                {
                    set.solutions.push(sol);
                }
            }
            Err(e) => set.failures.push((k, e.to_string())),
        }
    }
    Ok(set)
}
