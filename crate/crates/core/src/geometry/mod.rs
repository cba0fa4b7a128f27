//! Trading regions as convex polygons in the utility square, and integrals of
//! a density over them.

mod quadrature;
mod table;

pub use quadrature::{gauss_legendre, integrate_triangles, RegionIntegrals};
pub use table::{mass_table, RegionMassTable};

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distributions::Distribution;
use crate::game::{GameError, Quadrant, Role, TradeType};

/// Angles at or above this are treated as the full quadrant.
pub const FULL_QUADRANT_ANGLE: f64 = FRAC_PI_2 - 1e-12;

const EPS: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("quadrature did not converge: estimate {estimate}, error bound {error_bound}")]
    Quadrature { estimate: f64, error_bound: f64 },
}

/// Closed half-plane `a·x + b·y + c ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl HalfPlane {
    pub fn new(a: f64, b: f64, c: f64) -> HalfPlane {
        HalfPlane { a, b, c }
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        self.a * p[0] + self.b * p[1] + self.c
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.eval(p) >= 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }
}

/// A convex polygon inside the closed square, vertices counter-clockwise.
/// May be degenerate (a segment, a point, or empty).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub vertices: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrant: Option<Quadrant>,
}

impl Region {
    /// Builds a region from convex vertices in either orientation.
    pub fn new(vertices: Vec<[f64; 2]>) -> Region {
        let mut r = Region {
            vertices,
            quadrant: None,
        };
        if signed_area(&r.vertices) < 0.0 {
            r.vertices.reverse();
        }
        r
    }

    pub fn empty() -> Region {
        Region {
            vertices: Vec::new(),
            quadrant: None,
        }
    }

    pub fn square() -> Region {
        Region::new(vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
    }

    /// The closed unit quadrant.
    pub fn quadrant(q: Quadrant) -> Region {
        let (sx, sy) = q.signs();
        let mut r = Region::new(vec![[0.0, 0.0], [sx, 0.0], [sx, sy], [0.0, sy]]);
        r.quadrant = Some(q);
        r
    }

    /// Half of the square on one side of an axis: `sign·coord ≥ 0`.
    pub fn half_plane(axis: Axis, sign: f64) -> Region {
        Region::square().clip(&match axis {
            Axis::X => HalfPlane::new(sign, 0.0, 0.0),
            Axis::Y => HalfPlane::new(0.0, sign, 0.0),
        })
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices).abs()
    }

    pub fn is_degenerate(&self) -> bool {
        self.area() <= EPS
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= -1e-12
        })
    }

    /// Sutherland–Hodgman clip against a single half-plane.
    pub fn clip(&self, h: &HalfPlane) -> Region {
        let n = self.vertices.len();
        let mut out: Vec<[f64; 2]> = Vec::with_capacity(n + 1);
        for i in 0..n {
            let cur = self.vertices[i];
            let next = self.vertices[(i + 1) % n];
            let (dc, dn) = (h.eval(cur), h.eval(next));
            if dc >= 0.0 {
                out.push(cur);
            }
            if (dc >= 0.0) != (dn >= 0.0) {
                let t = dc / (dc - dn);
                out.push([cur[0] + t * (next[0] - cur[0]), cur[1] + t * (next[1] - cur[1])]);
            }
        }
        dedup_ring(&mut out);
        Region {
            vertices: out,
            quadrant: self.quadrant,
        }
    }

    /// Intersection of two convex regions.
    pub fn intersect(&self, other: &Region) -> Region {
        let n = other.vertices.len();
        if n < 3 || self.vertices.len() < 3 {
            return self.intersect_degenerate(other);
        }
        let mut out = self.clone();
        for i in 0..n {
            let a = other.vertices[i];
            let b = other.vertices[(i + 1) % n];
            // Left of a→b for a counter-clockwise polygon.
            let h = HalfPlane::new(-(b[1] - a[1]), b[0] - a[0], (b[1] - a[1]) * a[0] - (b[0] - a[0]) * a[1]);
            out = out.clip(&h);
            if out.vertices.is_empty() {
                break;
            }
        }
        if out.quadrant != other.quadrant {
            out.quadrant = None;
        }
        out
    }

    fn intersect_degenerate(&self, other: &Region) -> Region {
        let (thin, fat) = if self.vertices.len() < 3 { (self, other) } else { (other, self) };
        let kept: Vec<[f64; 2]> = thin.vertices.iter().copied().filter(|p| fat.contains(*p)).collect();
        Region {
            vertices: kept,
            quadrant: None,
        }
    }

    /// Splits along the vertical line `x = c` and the horizontal line
    /// `y = c` for each listed value, returning the nonempty convex pieces.
    pub fn split(&self, xs: &[f64], ys: &[f64]) -> Vec<Region> {
        let mut pieces = vec![self.clone()];
        for (axis, cuts) in [(Axis::X, xs), (Axis::Y, ys)] {
            for &c in cuts {
                let mut next = Vec::with_capacity(pieces.len() + 1);
                for p in pieces {
                    let (lo, hi) = p.bounds(axis);
                    if c <= lo + EPS || c >= hi - EPS {
                        next.push(p);
                        continue;
                    }
                    let (below, above) = match axis {
                        Axis::X => (HalfPlane::new(-1.0, 0.0, c), HalfPlane::new(1.0, 0.0, -c)),
                        Axis::Y => (HalfPlane::new(0.0, -1.0, c), HalfPlane::new(0.0, 1.0, -c)),
                    };
                    for piece in [p.clip(&below), p.clip(&above)] {
                        if !piece.is_degenerate() {
                            next.push(piece);
                        }
                    }
                }
                pieces = next;
            }
        }
        pieces
    }

    fn bounds(&self, axis: Axis) -> (f64, f64) {
        let k = axis.index();
        self.vertices
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v[k]), hi.max(v[k])))
    }

    /// Fan triangulation.
    pub fn triangles(&self) -> Vec<[[f64; 2]; 3]> {
        let v = &self.vertices;
        if v.len() < 3 {
            return Vec::new();
        }
        (1..v.len() - 1).map(|i| [v[0], v[i], v[i + 1]]).collect()
    }
}

fn signed_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    if n < 3 {
        return 0.0;
    }
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

fn dedup_ring(v: &mut Vec<[f64; 2]>) {
    let close = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).abs() <= EPS && (a[1] - b[1]).abs() <= EPS;
    v.dedup_by(|a, b| close(*a, *b));
    while v.len() > 1 && close(v[0], v[v.len() - 1]) {
        v.pop();
    }
}

/// The offer wedge of `trade` at angle `theta`, clipped to the square.
///
/// Gives-t2 wedges are measured from the x-axis (`|y| ≤ |x| tan θ`) and
/// gives-t1 wedges from the y-axis (`|x| ≤ |y| tan θ`).
pub fn wedge_region(trade: TradeType, theta: f64) -> Result<Region, GeometryError> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(GameError::AngleOutOfRange {
            index: trade.index(),
            angle: theta,
        }
        .into());
    }
    // Canonical frame: u along the gain axis, v along the give axis.
    let canonical: Vec<[f64; 2]> = if theta == 0.0 {
        vec![[0.0, 0.0], [1.0, 0.0]]
    } else if theta >= FULL_QUADRANT_ANGLE {
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
    } else {
        let t = theta.tan();
        if t <= 1.0 {
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, t]]
        } else {
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [1.0 / t, 1.0]]
        }
    };
    let (sx, sy) = trade.quadrant().signs();
    let vertices = canonical
        .into_iter()
        .map(|[u, v]| match trade.role() {
            Role::GivesT2 => [sx * u, sy * v],
            Role::GivesT1 => [sx * v, sy * u],
        })
        .collect();
    let mut r = Region::new(vertices);
    r.quadrant = Some(trade.quadrant());
    Ok(r)
}

/// Mass and first moments of `dist` over `region` to absolute accuracy `tol`.
pub fn region_integrals(dist: &Distribution, region: &Region, tol: f64) -> Result<RegionIntegrals, GeometryError> {
    if region.is_degenerate() {
        return Ok(RegionIntegrals::default());
    }
    let (xs, ys) = dist.breaklines();
    let triangles: Vec<_> = region.split(&xs, &ys).iter().flat_map(Region::triangles).collect();
    let f = |x: f64, y: f64| dist.density_unchecked(x.clamp(-1.0, 1.0), y.clamp(-1.0, 1.0));
    integrate_triangles(&f, &triangles, tol)
}

pub fn region_mass(dist: &Distribution, region: &Region, tol: f64) -> Result<f64, GeometryError> {
    Ok(region_integrals(dist, region, tol)?.mass)
}

/// ∬ over `region` of (axis coordinate)·f.
pub fn region_moment(dist: &Distribution, region: &Region, axis: Axis, tol: f64) -> Result<f64, GeometryError> {
    Ok(region_integrals(dist, region, tol)?.moment(axis.index()))
}

/// Intersection of two regions (convenience wrapper).
pub fn intersect(a: &Region, b: &Region) -> Region {
    a.intersect(b)
}
