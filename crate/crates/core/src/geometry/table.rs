use serde::{Deserialize, Serialize};

use super::{region_integrals, wedge_region, GeometryError, Region, RegionIntegrals};
use crate::distributions::Distribution;
use crate::game::{Issue, Quadrant, Role, StrategyProfile, TradeType};
use crate::par;

/// Every region integral the equilibrium, welfare and group-wide equations
/// consume, evaluated at one strategy profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMassTable {
    /// Mass and moments of R1..R8.
    pub regions: [RegionIntegrals; 8],
    /// Mass and moments of the quadrants Q1..Q4.
    pub quadrants: [RegionIntegrals; 4],
    /// Overlap masses J1..J4 of R_q ∩ R_{q+4}.
    pub overlaps: [f64; 4],
    pub tolerance: f64,
}

impl RegionMassTable {
    /// I_k for a trade type.
    pub fn mass(&self, trade: TradeType) -> f64 {
        self.regions[trade.slot()].mass
    }

    /// I_k by one-based index.
    pub fn i(&self, k: usize) -> f64 {
        self.regions[k - 1].mass
    }

    /// Total offer mass of one role (I_S1 for gives-t2, I_S2 for gives-t1).
    pub fn role_mass(&self, role: Role) -> f64 {
        role.trade_types().iter().map(|&t| self.mass(t)).sum()
    }

    pub fn i_s1(&self) -> f64 {
        self.role_mass(Role::GivesT2)
    }

    pub fn i_s2(&self) -> f64 {
        self.role_mass(Role::GivesT1)
    }

    pub fn j(&self, q: usize) -> f64 {
        self.overlaps[q - 1]
    }

    pub fn total_mass(&self) -> f64 {
        self.quadrants.iter().map(|q| q.mass).sum()
    }

    /// Unnormalized integrals over the half of the square where `issue`
    /// utility has sign `sign`.
    pub fn half_integrals(&self, issue: Issue, sign: f64) -> RegionIntegrals {
        Quadrant::ALL
            .iter()
            .filter(|q| q.sign(issue) == sign)
            .map(|q| self.quadrants[q.index()])
            .sum()
    }

    /// Probability that a random voter's utility on `issue` has sign `sign`,
    /// normalized so the two halves sum to one.
    pub fn q(&self, issue: Issue, sign: f64) -> f64 {
        self.half_integrals(issue, sign).mass / self.total_mass()
    }

    pub fn q1_plus(&self) -> f64 {
        self.q(Issue::T1, 1.0)
    }
    pub fn q1_minus(&self) -> f64 {
        self.q(Issue::T1, -1.0)
    }
    pub fn q2_plus(&self) -> f64 {
        self.q(Issue::T2, 1.0)
    }
    pub fn q2_minus(&self) -> f64 {
        self.q(Issue::T2, -1.0)
    }
}

/// Integrates the density over every wedge, quadrant and overlap at
/// `profile`.
pub fn mass_table(dist: &Distribution, profile: &StrategyProfile, tol: f64) -> Result<RegionMassTable, GeometryError> {
    let mut jobs: Vec<Region> = Vec::with_capacity(16);
    for t in TradeType::ALL {
        jobs.push(wedge_region(t, profile.angle(t))?);
    }
    for q in Quadrant::ALL {
        jobs.push(Region::quadrant(q));
    }
    for q in Quadrant::ALL {
        let a = &jobs[TradeType::for_role(Role::GivesT2, q).slot()];
        let b = &jobs[TradeType::for_role(Role::GivesT1, q).slot()];
        jobs.push(a.intersect(b));
    }
    let results = par::map(&jobs, |r| region_integrals(dist, r, tol));
    let mut it = results.into_iter();
    let mut next = || it.next().expect("sixteen jobs");
    let mut regions = [RegionIntegrals::default(); 8];
    for r in regions.iter_mut() {
        *r = next()?;
    }
    let mut quadrants = [RegionIntegrals::default(); 4];
    for r in quadrants.iter_mut() {
        *r = next()?;
    }
    let mut overlaps = [0.0; 4];
    for r in overlaps.iter_mut() {
        *r = next()?.mass;
    }
    Ok(RegionMassTable {
        regions,
        quadrants,
        overlaps,
        tolerance: tol,
    })
}
