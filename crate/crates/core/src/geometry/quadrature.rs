//! Adaptive Gauss–Legendre cubature on triangles.
//!
//! Each triangle is mapped from the unit square by the collapsed (Duffy)
//! transform and integrated with a tensor Gauss–Legendre rule. The error of a
//! triangle is estimated by comparing its rule value to the sum over its four
//! midpoint children; triangles that miss their share of the tolerance are
//! refined recursively.

use std::sync::OnceLock;

use super::GeometryError;

const ORDER: usize = 10;
const MAX_DEPTH: u32 = 9;

/// Integrals of `f`, `x f` and `y f` over a region.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct RegionIntegrals {
    pub mass: f64,
    pub moment_x: f64,
    pub moment_y: f64,
}

impl RegionIntegrals {
    pub fn moment(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.moment_x
        } else {
            self.moment_y
        }
    }

    fn add(self, o: RegionIntegrals) -> RegionIntegrals {
        RegionIntegrals {
            mass: self.mass + o.mass,
            moment_x: self.moment_x + o.moment_x,
            moment_y: self.moment_y + o.moment_y,
        }
    }

    fn max_abs_diff(&self, o: &RegionIntegrals) -> f64 {
        (self.mass - o.mass)
            .abs()
            .max((self.moment_x - o.moment_x).abs())
            .max((self.moment_y - o.moment_y).abs())
    }
}

impl std::ops::Add for RegionIntegrals {
    type Output = RegionIntegrals;
    fn add(self, rhs: RegionIntegrals) -> RegionIntegrals {
        RegionIntegrals::add(self, rhs)
    }
}

impl std::iter::Sum for RegionIntegrals {
    fn sum<I: Iterator<Item = RegionIntegrals>>(iter: I) -> RegionIntegrals {
        iter.fold(RegionIntegrals::default(), RegionIntegrals::add)
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [0, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let step = p1 / dp;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = 0.5 * (1.0 - z);
        weights[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (nodes, weights)
}

/// Collapsed-square rule on the reference triangle (0,0),(1,0),(0,1):
/// `(s, t, w)` with barycentric weights of the second and third vertex.
fn reference_rule() -> &'static [(f64, f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let (x, w) = gauss_legendre(ORDER);
        let mut rule = Vec::with_capacity(ORDER * ORDER);
        for i in 0..ORDER {
            for j in 0..ORDER {
                // (u, v) ∈ [0,1]² ↦ (u(1-v), uv), Jacobian u.
                let (u, v) = (x[i], x[j]);
                rule.push((u * (1.0 - v), u * v, w[i] * w[j] * u));
            }
        }
        rule
    })
}

type Tri = [[f64; 2]; 3];

fn tri_area(t: &Tri) -> f64 {
    0.5 * ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1])).abs()
}

fn apply_rule<F: Fn(f64, f64) -> f64>(f: &F, t: &Tri) -> RegionIntegrals {
    let area2 = 2.0 * tri_area(t);
    let mut out = RegionIntegrals::default();
    for &(s, r, w) in reference_rule() {
        let x = t[0][0] + s * (t[1][0] - t[0][0]) + r * (t[2][0] - t[0][0]);
        let y = t[0][1] + s * (t[1][1] - t[0][1]) + r * (t[2][1] - t[0][1]);
        let v = w * f(x, y);
        out.mass += v;
        out.moment_x += v * x;
        out.moment_y += v * y;
    }
    RegionIntegrals {
        mass: out.mass * area2,
        moment_x: out.moment_x * area2,
        moment_y: out.moment_y * area2,
    }
}

fn children(t: &Tri) -> [Tri; 4] {
    let mid = |a: [f64; 2], b: [f64; 2]| [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    let (a, b, c) = (t[0], t[1], t[2]);
    let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
    [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]
}

struct Accumulator {
    value: RegionIntegrals,
    error: f64,
}

fn refine<F: Fn(f64, f64) -> f64>(f: &F, t: &Tri, coarse: RegionIntegrals, tol: f64, depth: u32, acc: &mut Accumulator) {
    let kids = children(t);
    let fine: [RegionIntegrals; 4] = [
        apply_rule(f, &kids[0]),
        apply_rule(f, &kids[1]),
        apply_rule(f, &kids[2]),
        apply_rule(f, &kids[3]),
    ];
    let total: RegionIntegrals = fine.iter().copied().sum();
    let err = total.max_abs_diff(&coarse);
    // Relative floor so that round-off never forces refinement.
    let floor = 1e-14 * total.mass.abs().max(1e-300);
    if err <= tol.max(floor) || depth >= MAX_DEPTH {
        acc.value = acc.value + total;
        acc.error += err;
        return;
    }
    for (kid, value) in kids.iter().zip(fine) {
        refine(f, kid, value, tol / 4.0, depth + 1, acc);
    }
}

/// Integrates `f`, `x f`, `y f` over the union of `triangles` to absolute
/// accuracy `tol` (estimated).
pub fn integrate_triangles<F: Fn(f64, f64) -> f64>(
    f: &F,
    triangles: &[Tri],
    tol: f64,
) -> Result<RegionIntegrals, GeometryError> {
    let total_area: f64 = triangles.iter().map(tri_area).sum();
    if total_area <= 0.0 {
        return Ok(RegionIntegrals::default());
    }
    let mut acc = Accumulator {
        value: RegionIntegrals::default(),
        error: 0.0,
    };
    for t in triangles {
        let area = tri_area(t);
        if area <= 0.0 {
            continue;
        }
        let share = tol * area / total_area;
        let coarse = apply_rule(f, t);
        refine(f, t, coarse, share, 0, &mut acc);
    }
    if acc.error > tol {
        return Err(GeometryError::Quadrature {
            estimate: acc.value.mass,
            error_bound: acc.error,
        });
    }
    Ok(acc.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(ORDER);
        assert_relative_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        for p in 0..(2 * ORDER) {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
            assert_relative_eq!(q, 1.0 / (p as f64 + 1.0), epsilon = 1e-14);
        }
    }

    #[test]
    fn triangle_rule_integrates_monomials() {
        // ∫ over the unit right triangle of x^a y^b = a! b! / (a+b+2)!
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        let t: Tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        for a in 0..8u32 {
            for b in 0..8u32 {
                let r = apply_rule(&|x: f64, y: f64| x.powi(a as i32) * y.powi(b as i32), &t);
                assert_relative_eq!(r.mass, fact(a) * fact(b) / fact(a + b + 2), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn adaptive_refinement_handles_a_sharp_peak() {
        let f = |x: f64, y: f64| (-((x - 0.3).powi(2) + (y - 0.2).powi(2)) / (2.0 * 0.02f64.powi(2))).exp();
        let tris = [[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]], [[0.0, 0.0], [1.0, 1.0], [0.0, 1.0]]];
        let r = integrate_triangles(&f, &tris, 1e-10).unwrap();
        let exact = 2.0 * std::f64::consts::PI * 0.02f64.powi(2);
        assert_relative_eq!(r.mass, exact, epsilon = 1e-9);
    }

    #[test]
    fn discontinuity_exhausts_the_budget() {
        // A jump along a line the triangulation does not follow.
        let f = |x: f64, y: f64| if x + 0.37 * y > 0.5113 { 1.0 } else { 0.0 };
        let tris = [[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]];
        let err = integrate_triangles(&f, &tris, 1e-14).unwrap_err();
        match err {
            GeometryError::Quadrature { estimate, error_bound } => {
                assert!(estimate > 0.0 && error_bound > 1e-14);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
