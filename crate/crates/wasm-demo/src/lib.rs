//! Browser bindings: pick a density, solve for its equilibrium, and paint
//! the density, the offer regions and the welfare mask onto a canvas.
//!
//! Grids are row-major with y outer, x at cell centres, first row at
//! y = -1; the page flips them for display.

use votetrade_core::equilibrium::{solve_equilibrium, EquilibriumSolution, SolverOptions};
use votetrade_core::io::{cell_center, region_mask, welfare_mask};
use votetrade_core::welfare::{WelfareBoundarySet, WelfareReport};
use votetrade_core::{Distribution, Mode};
use wasm_bindgen::prelude::*;

fn build(family: &str, params: &[f64]) -> Result<Distribution, String> {
    let param = |k: usize| params.get(k).copied().ok_or_else(|| format!("{family} needs parameter {k}"));
    let dist = match family {
        "uniform" => Distribution::uniform(),
        "quadrant_constant" => {
            let w = [param(0)?, param(1)?, param(2)?, param(3)?];
            let total: f64 = w.iter().sum();
            if !(total > 0.0) {
                return Err("quadrant weights must have a positive sum".into());
            }
            Distribution::quadrant_constant(w.map(|v| v / total)).map_err(|e| e.to_string())?
        }
        "product_power" => {
            let alpha = param(0)?;
            if alpha.fract() != 0.0 || alpha < 0.0 {
                return Err(format!("alpha must be a nonnegative even integer, got {alpha}"));
            }
            Distribution::product_power(alpha as u32).map_err(|e| e.to_string())?
        }
        "product_tent" => Distribution::product_tent(),
        "product_vee" => Distribution::product_vee(),
        other => return Err(format!("unknown family {other:?}")),
    };
    Ok(dist)
}

fn lattice<T>(resolution: usize, f: impl Fn(f64, f64) -> T) -> Vec<T> {
    let mut out = Vec::with_capacity(resolution * resolution);
    for j in 0..resolution {
        let y = cell_center(j, resolution);
        for i in 0..resolution {
            out.push(f(cell_center(i, resolution), y));
        }
    }
    out
}

#[wasm_bindgen]
pub struct Demo {
    dist: Distribution,
    solved: Option<(EquilibriumSolution, WelfareReport)>,
}

#[wasm_bindgen]
impl Demo {
    /// `family` is one of uniform, quadrant_constant (four weights),
    /// product_power (alpha), product_tent, product_vee.
    #[wasm_bindgen(constructor)]
    pub fn new(family: &str, params: Vec<f64>) -> Result<Demo, String> {
        Ok(Demo {
            dist: build(family, &params)?,
            solved: None,
        })
    }

    pub fn heatmap(&self, resolution: usize) -> Vec<f32> {
        lattice(resolution, |x, y| self.dist.density_unchecked(x, y) as f32)
    }

    /// Solves in `mode` ("myopic" or "groupwide") and computes the welfare
    /// report. Returns the eight angles in radians.
    pub fn solve(&mut self, mode: &str, n: usize) -> Result<Vec<f64>, String> {
        let mode: Mode = mode.parse()?;
        let opts = SolverOptions { n, ..Default::default() };
        let sol = solve_equilibrium(&self.dist, &opts, mode).map_err(|e| e.to_string())?;
        let report = WelfareReport::from_evaluation(&self.dist, &sol.evaluation(), self.dist.default_tolerance())
            .map_err(|e| e.to_string())?;
        let angles = sol.theta_star.angles().to_vec();
        self.solved = Some((sol, report));
        Ok(angles)
    }

    pub fn beneficial_probability(&self) -> Option<f64> {
        self.solved.as_ref().map(|(_, r)| r.beneficial_probability)
    }

    /// Bit k-1 set inside R_k. Empty before `solve`.
    pub fn region_mask(&self, resolution: usize) -> Vec<u8> {
        match &self.solved {
            Some((sol, _)) => lattice(resolution, |x, y| region_mask(&sol.theta_star, x, y)),
            None => Vec::new(),
        }
    }

    /// Bits: 1 offers away t2, 2 offers away t1, 4 and 8 mark those offers
    /// as beneficial. Empty before `solve`.
    pub fn welfare_mask(&self, resolution: usize) -> Vec<u8> {
        match &self.solved {
            Some((sol, _)) => {
                let set = WelfareBoundarySet::from_evaluation(&sol.evaluation());
                lattice(resolution, |x, y| welfare_mask(&set, x, y))
            }
            None => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_heatmap_is_flat() {
        let d = Demo::new("uniform", vec![]).unwrap();
        let h = d.heatmap(6);
        assert_eq!(h.len(), 36);
        assert!(h.iter().all(|v| (*v - 0.25).abs() < 1e-7));
    }

    #[test]
    fn bad_inputs_are_reported() {
        assert!(Demo::new("cauchy", vec![]).is_err());
        assert!(Demo::new("product_power", vec![3.0]).is_err());
        assert!(Demo::new("quadrant_constant", vec![1.0, 1.0]).is_err());
        let mut d = Demo::new("uniform", vec![]).unwrap();
        assert!(d.solve("sideways", 11).is_err());
        assert!(d.solve("myopic", 4).is_err());
    }

    #[test]
    fn masks_follow_the_solution() {
        let mut d = Demo::new("quadrant_constant", vec![1.0, 4.0, 3.0, 2.0]).unwrap();
        assert!(d.region_mask(4).is_empty());
        let angles = d.solve("myopic", 11).unwrap();
        assert_eq!(angles.len(), 8);
        assert!((d.beneficial_probability().unwrap() - 0.1857).abs() < 1e-3);
        let regions = d.region_mask(20);
        let welfare = d.welfare_mask(20);
        assert_eq!(regions.len(), 400);
        // Beneficial bits only where the matching offer bit is set.
        for m in &welfare {
            assert!(m & 4 == 0 || m & 1 != 0);
            assert!(m & 8 == 0 || m & 2 != 0);
        }
        // Offer bits agree with the region mask: types 1..4 give t2.
        for (r, w) in regions.iter().zip(&welfare) {
            assert_eq!(r & 0x0f != 0, w & 1 != 0);
            assert_eq!(r & 0xf0 != 0, w & 2 != 0);
        }
    }
}
