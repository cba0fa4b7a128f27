//! Shared vocabulary of the two-issue trading game: issues, quadrants, the
//! eight trade types and the strategy profile that parameterizes them.
//!
//! Coordinates are `x` = utility on issue t1 and `y` = utility on issue t2.
//! Trade types 1..=4 belong to the player who gives away the t2 vote to gain a
//! second t1 vote; types 5..=8 belong to the player who gives away t1 to gain
//! t2. Type `k` and type `k + 4` both live in quadrant `k`.

use std::f64::consts::FRAC_PI_4;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One of the two issues being voted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Issue {
    T1,
    T2,
}

impl Issue {
    pub fn other(self) -> Issue {
        match self {
            Issue::T1 => Issue::T2,
            Issue::T2 => Issue::T1,
        }
    }

    /// Index into a `[x, y]` coordinate pair.
    pub fn axis(self) -> usize {
        match self {
            Issue::T1 => 0,
            Issue::T2 => 1,
        }
    }
}

/// Quadrants of the utility square, numbered counter-clockwise from (+,+).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quadrant {
    Q1,
    Q2,
    Q3,
    Q4,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [Quadrant::Q1, Quadrant::Q2, Quadrant::Q3, Quadrant::Q4];

    /// Zero-based index (Q1 → 0).
    pub fn index(self) -> usize {
        match self {
            Quadrant::Q1 => 0,
            Quadrant::Q2 => 1,
            Quadrant::Q3 => 2,
            Quadrant::Q4 => 3,
        }
    }

    pub fn from_index(i: usize) -> Quadrant {
        Quadrant::ALL[i % 4]
    }

    /// Sign of the utility on `issue` for points in this quadrant.
    pub fn sign(self, issue: Issue) -> f64 {
        let (sx, sy) = self.signs();
        match issue {
            Issue::T1 => sx,
            Issue::T2 => sy,
        }
    }

    pub fn signs(self) -> (f64, f64) {
        match self {
            Quadrant::Q1 => (1.0, 1.0),
            Quadrant::Q2 => (-1.0, 1.0),
            Quadrant::Q3 => (-1.0, -1.0),
            Quadrant::Q4 => (1.0, -1.0),
        }
    }

    /// Quadrant containing `(x, y)`. Zero coordinates count as negative,
    /// matching the sincere-voting rule that only `u > 0` votes in favour.
    pub fn of(x: f64, y: f64) -> Quadrant {
        match (x > 0.0, y > 0.0) {
            (true, true) => Quadrant::Q1,
            (false, true) => Quadrant::Q2,
            (false, false) => Quadrant::Q3,
            (true, false) => Quadrant::Q4,
        }
    }
}

/// Probabilities that a ballot on each issue is cast for (`plus`) or
/// against (`minus`) it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoteShares {
    pub q1_plus: f64,
    pub q1_minus: f64,
    pub q2_plus: f64,
    pub q2_minus: f64,
}

impl VoteShares {
    pub fn get(&self, issue: Issue, sign: f64) -> f64 {
        match (issue, sign > 0.0) {
            (Issue::T1, true) => self.q1_plus,
            (Issue::T1, false) => self.q1_minus,
            (Issue::T2, true) => self.q2_plus,
            (Issue::T2, false) => self.q2_minus,
        }
    }

    pub fn min(&self) -> f64 {
        self.q1_plus.min(self.q1_minus).min(self.q2_plus).min(self.q2_minus)
    }
}

/// The two roles in a trade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    /// Gives away the t2 vote, gains a t1 vote (trade types 1..=4).
    GivesT2,
    /// Gives away the t1 vote, gains a t2 vote (trade types 5..=8).
    GivesT1,
}

impl Role {
    pub fn gain_issue(self) -> Issue {
        match self {
            Role::GivesT2 => Issue::T1,
            Role::GivesT1 => Issue::T2,
        }
    }

    pub fn give_issue(self) -> Issue {
        self.gain_issue().other()
    }

    pub fn partner(self) -> Role {
        match self {
            Role::GivesT2 => Role::GivesT1,
            Role::GivesT1 => Role::GivesT2,
        }
    }

    pub fn trade_types(self) -> [TradeType; 4] {
        let base = match self {
            Role::GivesT2 => 1,
            Role::GivesT1 => 5,
        };
        [0, 1, 2, 3].map(|k| TradeType(base + k))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("trade type must be in 1..=8, got {0}")]
    InvalidTradeType(usize),
    #[error("angle {angle} for trade type {index} is outside [0, pi/2]")]
    AngleOutOfRange { index: usize, angle: f64 },
    #[error("utility pair ({x}, {y}) is outside [-1,1]^2")]
    UtilityOutOfRange { x: f64, y: f64 },
    #[error("utility pair ({x}, {y}) is not in the quadrant of trade type {trade}")]
    WrongQuadrant { trade: usize, x: f64, y: f64 },
}

/// A trade type `1..=8`, identifying both the offering role and the quadrant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct TradeType(u8);

impl TradeType {
    pub const ALL: [TradeType; 8] = [
        TradeType(1),
        TradeType(2),
        TradeType(3),
        TradeType(4),
        TradeType(5),
        TradeType(6),
        TradeType(7),
        TradeType(8),
    ];

    pub fn new(index: usize) -> Result<TradeType, GameError> {
        if (1..=8).contains(&index) {
            Ok(TradeType(index as u8))
        } else {
            Err(GameError::InvalidTradeType(index))
        }
    }

    /// One-based index as used in the equations.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Zero-based slot in an eight-element array.
    pub fn slot(self) -> usize {
        self.0 as usize - 1
    }

    pub fn role(self) -> Role {
        if self.0 <= 4 {
            Role::GivesT2
        } else {
            Role::GivesT1
        }
    }

    pub fn quadrant(self) -> Quadrant {
        Quadrant::from_index((self.0 as usize - 1) % 4)
    }

    /// Type of the same role living in `quadrant`.
    pub fn for_role(role: Role, quadrant: Quadrant) -> TradeType {
        role.trade_types()[quadrant.index()]
    }

    /// The other role's trade type in the same quadrant.
    pub fn counterpart(self) -> TradeType {
        TradeType::for_role(self.role().partner(), self.quadrant())
    }
}

impl TryFrom<usize> for TradeType {
    type Error = GameError;

    fn try_from(value: usize) -> Result<Self, Self::Error> {
        TradeType::new(value)
    }
}

impl From<TradeType> for usize {
    fn from(t: TradeType) -> usize {
        t.index()
    }
}

impl fmt::Display for TradeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}", self.0)
    }
}

/// Eight wedge angles θ1..θ8 in radians, each in `[0, π/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 8]", into = "[f64; 8]")]
pub struct StrategyProfile([f64; 8]);

impl StrategyProfile {
    pub fn new(theta: [f64; 8]) -> Result<StrategyProfile, GameError> {
        for (i, &angle) in theta.iter().enumerate() {
            if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&angle) {
                return Err(GameError::AngleOutOfRange { index: i + 1, angle });
            }
        }
        Ok(StrategyProfile(theta))
    }

    /// All θ = π/4: offer away the vote on whichever issue matters less.
    pub fn naive() -> StrategyProfile {
        StrategyProfile([FRAC_PI_4; 8])
    }

    /// The trivial no-trade profile.
    pub fn zero() -> StrategyProfile {
        StrategyProfile([0.0; 8])
    }

    pub fn uniform(angle: f64) -> Result<StrategyProfile, GameError> {
        StrategyProfile::new([angle; 8])
    }

    pub fn angles(&self) -> &[f64; 8] {
        &self.0
    }

    pub fn angle(&self, trade: TradeType) -> f64 {
        self.0[trade.slot()]
    }

    /// Boundary slopes tan θ_i (infinite at π/2).
    pub fn slopes(&self) -> [f64; 8] {
        self.0.map(|t| {
            if t >= crate::geometry::FULL_QUADRANT_ANGLE {
                f64::INFINITY
            } else {
                t.tan()
            }
        })
    }

    /// Sup-norm distance to another profile.
    pub fn distance(&self, other: &StrategyProfile) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// The profile of the issue-swapped game: reflecting the square across its
    /// diagonal exchanges the roles, mapping R1↔R5, R2↔R8, R3↔R7, R4↔R6.
    pub fn transposed(&self) -> StrategyProfile {
        let t = &self.0;
        StrategyProfile([t[4], t[7], t[6], t[5], t[0], t[3], t[2], t[1]])
    }

    /// Whether `(x, y)` lies inside the offer region of `trade`. Points on the
    /// wedge boundary are not offered.
    pub fn offers(&self, trade: TradeType, x: f64, y: f64) -> bool {
        if Quadrant::of(x, y) != trade.quadrant() {
            return false;
        }
        let role = trade.role();
        let u = [x, y];
        let gain = u[role.gain_issue().axis()].abs();
        let give = u[role.give_issue().axis()].abs();
        let angle = self.angle(trade);
        if angle >= crate::geometry::FULL_QUADRANT_ANGLE {
            return true;
        }
        give < gain * angle.tan()
    }

    /// Which roles a voter at `(x, y)` offers to play.
    pub fn offered_roles(&self, x: f64, y: f64) -> OfferSet {
        let q = Quadrant::of(x, y);
        OfferSet {
            gives_t2: self.offers(TradeType::for_role(Role::GivesT2, q), x, y),
            gives_t1: self.offers(TradeType::for_role(Role::GivesT1, q), x, y),
        }
    }
}

impl TryFrom<[f64; 8]> for StrategyProfile {
    type Error = GameError;

    fn try_from(value: [f64; 8]) -> Result<Self, Self::Error> {
        StrategyProfile::new(value)
    }
}

impl From<StrategyProfile> for [f64; 8] {
    fn from(p: StrategyProfile) -> [f64; 8] {
        p.0
    }
}

/// The offers a single voter makes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OfferSet {
    pub gives_t2: bool,
    pub gives_t1: bool,
}

impl OfferSet {
    pub fn any(&self) -> bool {
        self.gives_t1 || self.gives_t2
    }

    pub fn both(&self) -> bool {
        self.gives_t1 && self.gives_t2
    }
}

/// A voter's utilities `(x, y)` on (t1, t2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityPair {
    pub x: f64,
    pub y: f64,
}

impl UtilityPair {
    pub fn new(x: f64, y: f64) -> Result<UtilityPair, GameError> {
        if !(-1.0..=1.0).contains(&x) || !(-1.0..=1.0).contains(&y) {
            return Err(GameError::UtilityOutOfRange { x, y });
        }
        Ok(UtilityPair { x, y })
    }

    pub fn on(&self, issue: Issue) -> f64 {
        match issue {
            Issue::T1 => self.x,
            Issue::T2 => self.y,
        }
    }

    /// Utility on the issue a trade of type `trade` gains a vote on.
    pub fn gain_utility(&self, trade: TradeType) -> f64 {
        self.on(trade.role().gain_issue())
    }

    /// Utility on the issue a trade of type `trade` gives a vote away on.
    pub fn give_utility(&self, trade: TradeType) -> f64 {
        self.on(trade.role().give_issue())
    }

    /// Checks that the pair lies in the closed quadrant of `trade`.
    pub fn check_quadrant(&self, trade: TradeType) -> Result<(), GameError> {
        let (sx, sy) = trade.quadrant().signs();
        if self.x * sx < 0.0 || self.y * sy < 0.0 {
            return Err(GameError::WrongQuadrant {
                trade: trade.index(),
                x: self.x,
                y: self.y,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn trade_type_layout() {
        let t1 = TradeType::new(1).unwrap();
        assert_eq!(t1.role(), Role::GivesT2);
        assert_eq!(t1.quadrant(), Quadrant::Q1);
        assert_eq!(t1.counterpart().index(), 5);
        let t7 = TradeType::new(7).unwrap();
        assert_eq!(t7.role(), Role::GivesT1);
        assert_eq!(t7.quadrant(), Quadrant::Q3);
        assert_eq!(t7.counterpart().index(), 3);
        assert!(TradeType::new(0).is_err());
        assert!(TradeType::new(9).is_err());
    }

    #[test]
    fn profile_rejects_out_of_range_angles() {
        assert!(StrategyProfile::new([0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, FRAC_PI_2]).is_ok());
        let err = StrategyProfile::new([0.0, 0.1, -0.2, 0.3, 0.4, 0.5, 0.6, 0.7]).unwrap_err();
        assert_eq!(err, GameError::AngleOutOfRange { index: 3, angle: -0.2 });
        assert!(StrategyProfile::uniform(1.6).is_err());
    }

    #[test]
    fn naive_offers_the_less_valued_issue() {
        let p = StrategyProfile::naive();
        let o = p.offered_roles(0.9, 0.1);
        assert!(o.gives_t2 && !o.gives_t1);
        let o = p.offered_roles(-0.2, 0.3);
        assert!(o.gives_t1 && !o.gives_t2);
        let o = p.offered_roles(-0.1, -0.5);
        assert!(o.gives_t1 && !o.gives_t2);
        assert!(!StrategyProfile::zero().offered_roles(0.9, 0.1).any());
    }

    #[test]
    fn full_quadrant_offers_everything() {
        let p = StrategyProfile::uniform(FRAC_PI_2).unwrap();
        assert!(p.offered_roles(0.3, -0.9).both());
    }

    #[test]
    fn transpose_is_an_involution() {
        let p = StrategyProfile::new([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]).unwrap();
        assert_eq!(p.transposed().transposed(), p);
        assert_eq!(p.transposed().angles(), &[0.5, 0.8, 0.7, 0.6, 0.1, 0.4, 0.3, 0.2]);
    }

    #[test]
    fn utility_pair_quadrant_check() {
        let u = UtilityPair::new(0.8, 0.2).unwrap();
        let t1 = TradeType::new(1).unwrap();
        assert!(u.check_quadrant(t1).is_ok());
        assert_eq!(u.gain_utility(t1), 0.8);
        assert_eq!(u.give_utility(t1), 0.2);
        assert!(u.check_quadrant(TradeType::new(2).unwrap()).is_err());
        assert!(UtilityPair::new(1.2, 0.0).is_err());
    }
}
