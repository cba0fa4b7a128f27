//! All-pairs trading approximation.
//!
//! When every voter is randomly paired and may trade, a non-focal voter's
//! ballot on an issue is no longer simply their own sign: with probability
//! (n-3)/(n-2) they are paired, and their ballot may have been delegated to a
//! partner of the opposite sign. The effective vote shares below account for
//! that delegation; they replace the plain shares Q inside the pivot
//! probabilities.

use crate::distributions::Distribution;
use crate::game::{StrategyProfile, VoteShares};
use crate::geometry::{mass_table, GeometryError, RegionMassTable};

/// Effective probabilities that a random non-focal ballot supports or
/// opposes each issue once all other pairs have traded.
pub type EffectiveQSet = VoteShares;

/// Lower clamp applied to effective shares before exponentiation.
pub const SHARE_FLOOR: f64 = 1e-12;

/// The plain shares Q₁±, Q₂± of a mass table.
pub fn plain_shares(table: &RegionMassTable) -> VoteShares {
    VoteShares {
        q1_plus: table.q1_plus(),
        q1_minus: table.q1_minus(),
        q2_plus: table.q2_plus(),
        q2_minus: table.q2_minus(),
    }
}

fn pairing_factor(n: usize) -> f64 {
    (n as f64 - 3.0) / (n as f64 - 2.0)
}

fn clamp_share(q: f64) -> f64 {
    q.clamp(SHARE_FLOOR, 1.0 - SHARE_FLOOR)
}

/// Net flows of ballots toward "for" on each issue, before the pairing
/// factor: (t1 gained − t1 lost, t2 gained − t2 lost).
fn net_flows(t: &RegionMassTable) -> (f64, f64) {
    let i = |k| t.i(k);
    let t1 = (i(6) + i(7)) * (i(1) + i(4)) - (i(5) + i(8)) * (i(2) + i(3));
    let t2 = (i(3) + i(4)) * (i(5) + i(6)) - (i(1) + i(2)) * (i(7) + i(8));
    (t1, t2)
}

/// Effective shares from the region masses alone; the overlap terms cancel.
/// At n = 3 nobody else can trade and the shares equal Q exactly.
pub fn effective_q_from_table(table: &RegionMassTable, n: usize) -> EffectiveQSet {
    let q = plain_shares(table);
    if n <= 3 {
        return q;
    }
    let f = pairing_factor(n);
    let (d1, d2) = net_flows(table);
    VoteShares {
        q1_plus: clamp_share(q.q1_plus + f * d1),
        q1_minus: clamp_share(q.q1_minus - f * d1),
        q2_plus: clamp_share(q.q2_plus + f * d2),
        q2_minus: clamp_share(q.q2_minus - f * d2),
    }
}

/// The same shares written out before cancellation: each delegation flow is
/// reduced by half the probability that both partners offered both
/// directions, where a coin decides who delegates.
pub fn effective_q_with_overlaps(table: &RegionMassTable, n: usize) -> EffectiveQSet {
    let q = plain_shares(table);
    let f = if n <= 3 { 0.0 } else { pairing_factor(n) };
    let i = |k| table.i(k);
    let j = |k| table.j(k);
    let t1_gain = (i(6) + i(7)) * (i(1) + i(4)) - 0.5 * (j(2) + j(3)) * (j(1) + j(4));
    let t1_loss = (i(5) + i(8)) * (i(2) + i(3)) - 0.5 * (j(1) + j(4)) * (j(2) + j(3));
    let t2_gain = (i(3) + i(4)) * (i(5) + i(6)) - 0.5 * (j(3) + j(4)) * (j(1) + j(2));
    let t2_loss = (i(1) + i(2)) * (i(7) + i(8)) - 0.5 * (j(1) + j(2)) * (j(3) + j(4));
    VoteShares {
        q1_plus: q.q1_plus + f * (t1_gain - t1_loss),
        q1_minus: q.q1_minus + f * (t1_loss - t1_gain),
        q2_plus: q.q2_plus + f * (t2_gain - t2_loss),
        q2_minus: q.q2_minus + f * (t2_loss - t2_gain),
    }
}

/// Effective shares of `dist` at `theta` for committee size `n`.
pub fn effective_q(dist: &Distribution, theta: &StrategyProfile, n: usize) -> Result<EffectiveQSet, GeometryError> {
    let table = mass_table(dist, theta, dist.default_tolerance())?;
    Ok(effective_q_from_table(&table, n))
}

/// Overlap masses J1..J4 of the two roles' wedges in each quadrant.
pub fn j_integrals(dist: &Distribution, theta: &StrategyProfile) -> Result<[f64; 4], GeometryError> {
    Ok(mass_table(dist, theta, dist.default_tolerance())?.overlaps)
}
