//! Group welfare of offered trades.
//!
//! Replacing the trader's own utility change with the summed change of the
//! whole committee turns the trade value into
//!
//! ```text
//! G = 2·C(n-2, (n-3)/2) / I_S' · (a_i s_g (u_gain + b_i) - c_i s_k (u_give + d_i))
//! ```
//!
//! where `s_g`, `s_k` are the quadrant's signs on the gained and given issue,
//! `b_i` is the expected gained-issue utility of everyone but the trader when
//! the gained vote is decisive, and `d_i` the same on the given issue. The
//! zero set of `G` is a line parallel to the wedge boundary of type `i`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distributions::Distribution;
use crate::equilibrium::{binomial, partner_types, EquilibriumError, Game, Mode, ProfileEvaluation};
use crate::game::{Issue, StrategyProfile, TradeType, UtilityPair};
use crate::geometry::{region_integrals, wedge_region, GeometryError, HalfPlane, Region, RegionIntegrals};
use crate::par;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WelfareError {
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("no trade is offered at this profile")]
    NoOfferedMass,
}

impl From<crate::game::GameError> for WelfareError {
    fn from(e: crate::game::GameError) -> Self {
        WelfareError::Equilibrium(e.into())
    }
}

/// Boundary coefficients of one trade type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelfareCoefficients {
    pub trade: TradeType,
    pub a: f64,
    /// `None` when no partner type opposes the trader on the gained issue.
    pub b: Option<f64>,
    pub c: f64,
    /// `None` when no partner type opposes the trader on the given issue.
    pub d: Option<f64>,
    /// 2·C(n-2, (n-3)/2) / I_S' (zero if the partner role never offers).
    pub scale: f64,
}

impl WelfareCoefficients {
    fn signs(&self) -> (f64, f64) {
        let role = self.trade.role();
        let q = self.trade.quadrant();
        (q.sign(role.gain_issue()), q.sign(role.give_issue()))
    }

    /// Slope a/c of the boundary in (|u_gain|, |u_give|); compare with tan θ.
    pub fn slope(&self) -> f64 {
        if self.c > 0.0 {
            self.a / self.c
        } else {
            f64::INFINITY
        }
    }

    /// Intercept of the boundary written as u_give = ±(a/c)·u_gain + offset.
    pub fn offset(&self) -> Option<f64> {
        let (sg, sk) = self.signs();
        Some(sg * sk * self.slope() * self.b? - self.d?)
    }

    /// a s_g (u_gain + b) - c s_k (u_give + d) as an affine function of
    /// (x, y); terms whose weight is zero are dropped.
    fn affine(&self) -> (f64, f64, f64) {
        let (sg, sk) = self.signs();
        let role = self.trade.role();
        let wg = self.a * sg;
        let wk = -self.c * sk;
        let constant = wg * self.b.filter(|_| wg != 0.0).unwrap_or(0.0) + wk * self.d.filter(|_| wk != 0.0).unwrap_or(0.0);
        match role.gain_issue() {
            Issue::T1 => (wg, wk, constant),
            Issue::T2 => (wk, wg, constant),
        }
    }

    /// The closed half-plane where the group gains from this trade.
    pub fn half_plane(&self) -> HalfPlane {
        let (px, py, k) = self.affine();
        let norm = px.abs().max(py.abs()).max(f64::MIN_POSITIVE);
        HalfPlane::new(px / norm, py / norm, k / norm)
    }

    /// Expected change in summed committee utility from offering this trade.
    pub fn group_value(&self, u: UtilityPair) -> f64 {
        let (px, py, k) = self.affine();
        self.scale * (px * u.x + py * u.y + k)
    }

    /// Integral of the group value against a region's mass and moments.
    fn integrated_value(&self, r: &RegionIntegrals) -> f64 {
        let (px, py, k) = self.affine();
        self.scale * (px * r.moment_x + py * r.moment_y + k * r.mass)
    }
}

/// Coefficients of all eight trade types at one profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WelfareBoundarySet {
    pub n: usize,
    pub mode: Mode,
    pub profile: StrategyProfile,
    pub coefficients: [WelfareCoefficients; 8],
}

impl WelfareBoundarySet {
    /// Builds the coefficients from an evaluated profile. In group-wide mode
    /// only `a` and `c` see the effective shares; `b` and `d` use plain Q.
    pub fn from_evaluation(eval: &ProfileEvaluation) -> WelfareBoundarySet {
        let table = &eval.table;
        let n = eval.n;
        let many = (n - 1) as f64 / 2.0;
        let few = (n - 3) as f64 / 2.0;
        let half_mean = |issue: Issue, sign: f64| {
            let h = table.half_integrals(issue, sign);
            h.moment(issue.axis()) / h.mass
        };
        let coefficients = TradeType::ALL.map(|t| {
            let role = t.role();
            let (gain, give) = (role.gain_issue(), role.give_issue());
            let q = t.quadrant();
            let (sg, sk) = (q.sign(gain), q.sign(give));
            let partner_mean = |issue: Issue, sign: f64| {
                let r: RegionIntegrals = partner_types(t, issue, sign).map(|p| table.regions[p.slot()]).sum();
                (r.mass > 0.0).then(|| r.moment(issue.axis()) / r.mass)
            };
            let terms = eval.terms(t);
            let b = partner_mean(gain, -sg).map(|m| m + many * half_mean(gain, -sg) + few * half_mean(gain, sg));
            let d = partner_mean(give, -sk).map(|m| m + many * half_mean(give, sk) + few * half_mean(give, -sk));
            let partner_mass = table.role_mass(role.partner());
            WelfareCoefficients {
                trade: t,
                a: terms.a(),
                b,
                c: terms.c(),
                d,
                scale: if partner_mass > 0.0 {
                    2.0 * binomial(n - 2, (n - 3) / 2) / partner_mass
                } else {
                    0.0
                },
            }
        });
        WelfareBoundarySet {
            n,
            mode: eval.mode,
            profile: eval.profile,
            coefficients,
        }
    }

    pub fn get(&self, trade: TradeType) -> &WelfareCoefficients {
        &self.coefficients[trade.slot()]
    }

    pub fn half_plane(&self, trade: TradeType) -> HalfPlane {
        self.get(trade).half_plane()
    }

    pub fn slope(&self, trade: TradeType) -> f64 {
        self.get(trade).slope()
    }

    /// Whether an offer of `trade` at `u` raises expected group utility.
    pub fn is_beneficial(&self, trade: TradeType, u: UtilityPair) -> bool {
        self.get(trade).group_value(u) > 0.0
    }
}

pub fn welfare_coefficients(
    dist: &Distribution,
    theta: &StrategyProfile,
    n: usize,
    mode: Mode,
) -> Result<WelfareBoundarySet, WelfareError> {
    let eval = Game::new(dist, n, mode)?.evaluate(theta)?;
    Ok(WelfareBoundarySet::from_evaluation(&eval))
}

pub fn group_expected_value(
    dist: &Distribution,
    theta: &StrategyProfile,
    n: usize,
    trade: TradeType,
    u: UtilityPair,
    mode: Mode,
) -> Result<f64, WelfareError> {
    u.check_quadrant(trade)?;
    let set = welfare_coefficients(dist, theta, n, mode)?;
    Ok(set.get(trade).group_value(u))
}

pub const WEIGHTING: &str = "beneficial_probability averages, over the two roles, the share of that role's offer mass \
lying in its beneficial half-plane; offer_weighted_probability counts pairs offered in both directions half toward \
each direction over the total offered mass; unconditional_probability is the same numerator over all voters; \
executed_trade_probability is the share of executed trade sides that are beneficial when two random voters meet";

/// How often an offered trade raises expected group utility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WelfareReport {
    /// Mean over the two roles of P(beneficial | the role offers).
    pub beneficial_probability: f64,
    /// P(beneficial | offers away t2), P(beneficial | offers away t1).
    pub role_probabilities: [f64; 2],
    /// Both-direction pairs weighted ½ per direction, over offered mass.
    pub offer_weighted_probability: f64,
    /// The offer-weighted beneficial mass as a fraction of all voters.
    pub unconditional_probability: f64,
    /// Share of executed trade sides that are beneficial, with a coin
    /// deciding the direction when both directions are possible.
    pub executed_trade_probability: f64,
    /// Mass of R_i intersected with its beneficial half-plane.
    pub beneficial_masses: [f64; 8],
    /// The part of `beneficial_masses` that the other role also offers.
    pub beneficial_overlap_masses: [f64; 8],
    /// I_S1 and I_S2.
    pub role_masses: [f64; 2],
    /// Offered mass with both-direction pairs counted once.
    pub offered_mass: f64,
    pub total_mass: f64,
    /// Mean expected group value over offered utility pairs, both-direction
    /// pairs weighted ½ per direction.
    pub mean_group_value: f64,
    pub weighting: String,
    pub coefficients: WelfareBoundarySet,
}

impl WelfareReport {
    /// Builds the report for an evaluated profile, integrating at `tol`.
    pub fn from_evaluation(dist: &Distribution, eval: &ProfileEvaluation, tol: f64) -> Result<WelfareReport, WelfareError> {
        let set = WelfareBoundarySet::from_evaluation(eval);
        let wedges: Vec<Region> = TradeType::ALL
            .iter()
            .map(|&t| wedge_region(t, eval.profile.angle(t)))
            .collect::<Result<_, _>>()?;
        let mut jobs: Vec<Region> = Vec::with_capacity(20);
        for t in TradeType::ALL {
            let good = wedges[t.slot()].clip(&set.half_plane(t));
            let both = good.intersect(&wedges[t.counterpart().slot()]);
            jobs.push(good);
            jobs.push(both);
        }
        for t in &TradeType::ALL[..4] {
            jobs.push(wedges[t.slot()].intersect(&wedges[t.counterpart().slot()]));
        }
        let integrals = par::map(&jobs, |r| region_integrals(dist, r, tol))
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;

        let table = &eval.table;
        let mut beneficial_masses = [0.0; 8];
        let mut beneficial_overlap_masses = [0.0; 8];
        let mut value = 0.0;
        for t in TradeType::ALL {
            let k = t.slot();
            beneficial_masses[k] = integrals[2 * k].mass;
            beneficial_overlap_masses[k] = integrals[2 * k + 1].mass;
            let overlap = &integrals[16 + t.quadrant().index()];
            let c = set.get(t);
            value += c.integrated_value(&table.regions[k]) - 0.5 * c.integrated_value(overlap);
        }
        let overlap_mass: f64 = integrals[16..].iter().map(|r| r.mass).sum();
        let role_masses = [table.i_s1(), table.i_s2()];
        let offered_mass = role_masses[0] + role_masses[1] - overlap_mass;
        if offered_mass <= 0.0 {
            return Err(WelfareError::NoOfferedMass);
        }
        let good = [beneficial_masses[..4].iter().sum::<f64>(), beneficial_masses[4..].iter().sum::<f64>()];
        let good_both = [
            beneficial_overlap_masses[..4].iter().sum::<f64>(),
            beneficial_overlap_masses[4..].iter().sum::<f64>(),
        ];
        let share = |num: f64, den: f64| if den > 0.0 { (num / den).clamp(0.0, 1.0) } else { 0.0 };
        let role_probabilities = [share(good[0], role_masses[0]), share(good[1], role_masses[1])];
        let offered_roles = role_probabilities.iter().zip(role_masses).filter(|(_, m)| *m > 0.0).count();
        let beneficial_probability = if offered_roles == 0 {
            0.0
        } else {
            role_probabilities.iter().sum::<f64>() / offered_roles as f64
        };
        let weighted = good[0] + good[1] - 0.5 * (good_both[0] + good_both[1]);

        // Two random voters trade with the first giving away t2 with density
        // f(u)·(1[u offers t2]·I_S2 - ½·1[u offers both]·J); symmetrically for
        // the other direction. Each executed trade has one side of each role.
        let [s1, s2] = role_masses;
        let executed = s1 * s2 - 0.5 * overlap_mass * overlap_mass;
        let executed_trade_probability = if executed > 0.0 {
            let p1 = (s2 * good[0] - 0.5 * overlap_mass * good_both[0]) / executed;
            let p2 = (s1 * good[1] - 0.5 * overlap_mass * good_both[1]) / executed;
            (0.5 * (p1 + p2)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let total_mass = table.total_mass();
        Ok(WelfareReport {
            beneficial_probability,
            role_probabilities,
            offer_weighted_probability: share(weighted, offered_mass),
            unconditional_probability: share(weighted, total_mass),
            executed_trade_probability,
            beneficial_masses,
            beneficial_overlap_masses,
            role_masses,
            offered_mass,
            total_mass,
            mean_group_value: value / offered_mass,
            weighting: WEIGHTING.to_string(),
            coefficients: set,
        })
    }
}

pub fn beneficial_trade_probability(
    dist: &Distribution,
    theta: &StrategyProfile,
    n: usize,
    mode: Mode,
) -> Result<WelfareReport, WelfareError> {
    let game = Game::new(dist, n, mode)?;
    let eval = game.evaluate(theta)?;
    WelfareReport::from_evaluation(dist, &eval, game.tolerance)
}
