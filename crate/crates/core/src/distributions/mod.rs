//! Joint utility densities on the square [-1,1]².
//!
//! Every density is normalized to unit mass at construction. Builtin families
//! with closed-form normalization are evaluated directly; kernel-density and
//! tabulated families carry a normalization factor computed when they are
//! built.

mod grid;
mod kde;

pub use grid::GridDensity;
pub use kde::{kde_from_survey, Bandwidth, Kde, OrdinalScale, SurveyRecord};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::Quadrant;
use crate::geometry::{self, Region};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("point ({x}, {y}) lies outside [-1,1]^2")]
    OutsideDomain { x: f64, y: f64 },
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("kernel density estimation needs at least 2 records, got {0}")]
    TooFewRecords(usize),
    #[error("responses on issue t{issue} have zero variance; pass an explicit bandwidth")]
    ZeroVariance { issue: usize },
    #[error("line {line}: response {value} is outside the scale [{lo}, {hi}]")]
    OutOfScale { line: usize, value: i64, lo: i64, hi: i64 },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> DistributionError {
    DistributionError::InvalidParameter {
        field,
        reason: reason.into(),
    }
}

/// Family tag as it appears in distribution spec files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Uniform,
    QuadrantConstant,
    ProductPower,
    ProductTent,
    ProductVee,
    Kde,
    Grid,
}

/// A joint density f(x, y) of utilities on (t1, t2).
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    /// f = 1/4.
    Uniform,
    /// Constant on each open quadrant; weights ordered Q1..Q4.
    QuadrantConstant { weights: [f64; 4] },
    /// f(x,y) = g(x) g(y) with g(z) = (α+1)/2 z^α for z < 0 and
    /// (α+1)/2 (z-1)^α for z ≥ 0. Only even α keeps g nonnegative.
    ProductPower { alpha: u32 },
    /// g(z) = 1 - |z|.
    ProductTent,
    /// g(z) = |z|.
    ProductVee,
    Kde(Kde),
    Grid(GridDensity),
}

impl Distribution {
    pub fn uniform() -> Distribution {
        Distribution::Uniform
    }

    /// Quadrant weights in Q1..Q4 order; each quadrant has unit area, so the
    /// weights must sum to one.
    pub fn quadrant_constant(weights: [f64; 4]) -> Result<Distribution, DistributionError> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(invalid("weights", "weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid(
                "weights",
                format!("weights must sum to 1 (unit-area quadrants), got {total}"),
            ));
        }
        Ok(Distribution::QuadrantConstant { weights })
    }

    pub fn product_power(alpha: u32) -> Result<Distribution, DistributionError> {
        if !alpha.is_multiple_of(2) {
            return Err(invalid("alpha", format!("must be a nonnegative even integer, got {alpha}")));
        }
        Ok(Distribution::ProductPower { alpha })
    }

    pub fn product_tent() -> Distribution {
        Distribution::ProductTent
    }

    pub fn product_vee() -> Distribution {
        Distribution::ProductVee
    }

    pub fn family(&self) -> Family {
        match self {
            Distribution::Uniform => Family::Uniform,
            Distribution::QuadrantConstant { .. } => Family::QuadrantConstant,
            Distribution::ProductPower { .. } => Family::ProductPower,
            Distribution::ProductTent => Family::ProductTent,
            Distribution::ProductVee => Family::ProductVee,
            Distribution::Kde(_) => Family::Kde,
            Distribution::Grid(_) => Family::Grid,
        }
    }

    /// Normalized density at `(x, y)`.
    pub fn density(&self, x: f64, y: f64) -> Result<f64, DistributionError> {
        if !(-1.0..=1.0).contains(&x) || !(-1.0..=1.0).contains(&y) {
            return Err(DistributionError::OutsideDomain { x, y });
        }
        Ok(self.density_unchecked(x, y))
    }

    /// Density without the domain check; callers guarantee `(x, y)` is in the
    /// closed square.
    pub fn density_unchecked(&self, x: f64, y: f64) -> f64 {
        match self {
            Distribution::Uniform => 0.25,
            Distribution::QuadrantConstant { weights } => weights[Quadrant::of_closed(x, y).index()],
            Distribution::ProductPower { alpha } => power_marginal(*alpha, x) * power_marginal(*alpha, y),
            Distribution::ProductTent => (1.0 - x.abs()) * (1.0 - y.abs()),
            Distribution::ProductVee => x.abs() * y.abs(),
            Distribution::Kde(k) => k.density(x, y),
            Distribution::Grid(g) => g.density(x, y),
        }
    }

    /// One-dimensional factor g for product families.
    pub fn marginal_factor(&self, z: f64) -> Option<f64> {
        match self {
            Distribution::Uniform => Some(0.5),
            Distribution::ProductPower { alpha } => Some(power_marginal(*alpha, z)),
            Distribution::ProductTent => Some(1.0 - z.abs()),
            Distribution::ProductVee => Some(z.abs()),
            _ => None,
        }
    }

    /// Lines `x = c` and `y = c` across which the density may fail to be
    /// smooth. Quadrature splits regions along them.
    pub fn breaklines(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Distribution::Grid(g) => g.breaklines(),
            _ => (vec![0.0], vec![0.0]),
        }
    }

    /// Default absolute quadrature tolerance for this family.
    pub fn default_tolerance(&self) -> f64 {
        match self {
            Distribution::Kde(_) | Distribution::Grid(_) => 1e-7,
            _ => 1e-9,
        }
    }

    /// The density of the issue-swapped game, f'(x, y) = f(y, x).
    pub fn transposed(&self) -> Distribution {
        match self {
            Distribution::QuadrantConstant { weights } => Distribution::QuadrantConstant {
                weights: [weights[0], weights[3], weights[2], weights[1]],
            },
            Distribution::Kde(k) => Distribution::Kde(k.transposed()),
            Distribution::Grid(g) => Distribution::Grid(g.transposed()),
            other => other.clone(),
        }
    }

    /// Draws one utility pair.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        match self {
            Distribution::Uniform => [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)],
            Distribution::QuadrantConstant { weights } => {
                let q = pick_weighted(weights, rng.random::<f64>());
                let (sx, sy) = Quadrant::from_index(q).signs();
                // 1 - U lies in (0, 1], keeping the sample off the axes.
                [sx * (1.0 - rng.random::<f64>()), sy * (1.0 - rng.random::<f64>())]
            }
            Distribution::ProductPower { alpha } => {
                [sample_power(*alpha, rng), sample_power(*alpha, rng)]
            }
            Distribution::ProductTent => [sample_tent(rng), sample_tent(rng)],
            Distribution::ProductVee => [sample_vee(rng), sample_vee(rng)],
            Distribution::Kde(k) => k.sample(rng),
            Distribution::Grid(g) => g.sample(rng),
        }
    }
}

fn power_marginal(alpha: u32, z: f64) -> f64 {
    let c = (alpha as f64 + 1.0) / 2.0;
    let base = if z < 0.0 { z } else { z - 1.0 };
    c * base.powi(alpha as i32)
}

/// Index `i` with cumulative weight just above `u·Σw`.
fn pick_weighted(weights: &[f64], u: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return i;
        }
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

fn sample_power<R: Rng + ?Sized>(alpha: u32, rng: &mut R) -> f64 {
    // Each half carries mass 1/2; within a half the distance from the
    // density's zero has CDF t^(α+1).
    let t = (1.0 - rng.random::<f64>()).powf(1.0 / (alpha as f64 + 1.0));
    if rng.random_bool(0.5) {
        -t
    } else {
        1.0 - t
    }
}

fn sample_tent<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let t = 1.0 - (1.0 - rng.random::<f64>()).sqrt();
    if rng.random_bool(0.5) {
        -t
    } else {
        t
    }
}

fn sample_vee<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let t = (1.0 - rng.random::<f64>()).sqrt();
    if rng.random_bool(0.5) {
        -t
    } else {
        t
    }
}

impl Quadrant {
    /// Quadrant lookup for density evaluation on the closed square; zero
    /// coordinates are assigned to the positive side.
    fn of_closed(x: f64, y: f64) -> Quadrant {
        match (x >= 0.0, y >= 0.0) {
            (true, true) => Quadrant::Q1,
            (false, true) => Quadrant::Q2,
            (false, false) => Quadrant::Q3,
            (true, false) => Quadrant::Q4,
        }
    }
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub total_mass: f64,
    pub min_sampled_density: f64,
    /// Masses of Q1..Q4.
    pub quadrant_masses: [f64; 4],
    pub tolerance: f64,
    pub passed: bool,
    pub failures: Vec<String>,
}

/// Checks unit mass (to `tol`) and nonnegativity on a 101×101 lattice.
pub fn validate(dist: &Distribution, tol: f64) -> ValidationReport {
    let quad_tol = (tol * 0.1).max(1e-13);
    let mut failures = Vec::new();
    let mut quadrant_masses = [f64::NAN; 4];
    for q in Quadrant::ALL {
        match geometry::region_mass(dist, &Region::quadrant(q), quad_tol / 4.0) {
            Ok(m) => quadrant_masses[q.index()] = m,
            Err(e) => failures.push(format!("quadrant {q:?}: {e}")),
        }
    }
    let total_mass: f64 = quadrant_masses.iter().sum();
    if !(total_mass - 1.0).abs().le(&tol) {
        failures.push(format!("total mass {total_mass} differs from 1 by more than {tol}"));
    }
    const LATTICE: usize = 101;
    let mut min_sampled_density = f64::INFINITY;
    for j in 0..LATTICE {
        for i in 0..LATTICE {
            let x = -1.0 + 2.0 * i as f64 / (LATTICE - 1) as f64;
            let y = -1.0 + 2.0 * j as f64 / (LATTICE - 1) as f64;
            min_sampled_density = min_sampled_density.min(dist.density_unchecked(x, y));
        }
    }
    if min_sampled_density < 0.0 || min_sampled_density.is_nan() {
        failures.push(format!("negative density {min_sampled_density} on the sample lattice"));
    }
    ValidationReport {
        total_mass,
        min_sampled_density,
        quadrant_masses,
        tolerance: tol,
        passed: failures.is_empty(),
        failures,
    }
}
