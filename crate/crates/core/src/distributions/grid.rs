use rand::Rng;

use super::{invalid, DistributionError};

/// Density tabulated on a uniform lattice of nodes spanning [-1,1]² and
/// bilinearly interpolated between them.
///
/// `values` is row-major: node `(i, j)` at `x = -1 + 2i/(nx-1)`,
/// `y = -1 + 2j/(ny-1)` is stored at `values[j * nx + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    nx: usize,
    ny: usize,
    values: Vec<f64>,
    scale: f64,
}

impl GridDensity {
    /// Builds an unnormalized grid; call [`GridDensity::normalized`] to
    /// rescale to unit mass.
    pub fn new(nx: usize, ny: usize, values: Vec<f64>) -> Result<GridDensity, DistributionError> {
        if nx < 2 || ny < 2 {
            return Err(invalid("nx", "grid needs at least 2 nodes per axis"));
        }
        if values.len() != nx * ny {
            return Err(invalid(
                "values",
                format!("expected {} values for a {nx}x{ny} grid, got {}", nx * ny, values.len()),
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(invalid("values", format!("grid values must be finite and nonnegative, got {v}")));
        }
        Ok(GridDensity {
            nx,
            ny,
            values,
            scale: 1.0,
        })
    }

    /// Exact integral of the interpolant over the square (before scaling).
    pub fn raw_mass(&self) -> f64 {
        let cell = (2.0 / (self.nx - 1) as f64) * (2.0 / (self.ny - 1) as f64);
        let mut total = 0.0;
        for j in 0..self.ny - 1 {
            for i in 0..self.nx - 1 {
                total += 0.25
                    * (self.node(i, j) + self.node(i + 1, j) + self.node(i, j + 1) + self.node(i + 1, j + 1));
            }
        }
        total * cell
    }

    pub fn normalized(&self) -> Result<GridDensity, DistributionError> {
        let mass = self.raw_mass();
        if mass <= 0.0 {
            return Err(invalid("values", "grid has zero mass"));
        }
        Ok(GridDensity {
            scale: 1.0 / mass,
            ..self.clone()
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    fn node(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    fn locate(z: f64, n: usize) -> (usize, f64) {
        let t = (z + 1.0) / 2.0 * (n - 1) as f64;
        let i = (t.floor() as isize).clamp(0, n as isize - 2) as usize;
        (i, t - i as f64)
    }

    pub fn density(&self, x: f64, y: f64) -> f64 {
        let (i, fx) = Self::locate(x, self.nx);
        let (j, fy) = Self::locate(y, self.ny);
        let v = (1.0 - fx) * (1.0 - fy) * self.node(i, j)
            + fx * (1.0 - fy) * self.node(i + 1, j)
            + (1.0 - fx) * fy * self.node(i, j + 1)
            + fx * fy * self.node(i + 1, j + 1);
        self.scale * v
    }

    pub(super) fn breaklines(&self) -> (Vec<f64>, Vec<f64>) {
        let lines = |n: usize| -> Vec<f64> {
            let mut v: Vec<f64> = (1..n - 1).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
            if !v.iter().any(|c| c.abs() < 1e-15) {
                v.push(0.0);
            }
            v.sort_by(f64::total_cmp);
            v
        };
        (lines(self.nx), lines(self.ny))
    }

    pub(super) fn transposed(&self) -> GridDensity {
        let mut values = vec![0.0; self.values.len()];
        for j in 0..self.ny {
            for i in 0..self.nx {
                values[i * self.ny + j] = self.node(i, j);
            }
        }
        GridDensity {
            nx: self.ny,
            ny: self.nx,
            values,
            scale: self.scale,
        }
    }

    pub(super) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        let max = self.values.iter().cloned().fold(0.0, f64::max) * self.scale;
        loop {
            let x = rng.random_range(-1.0..=1.0);
            let y = rng.random_range(-1.0..=1.0);
            if rng.random::<f64>() * max < self.density(x, y) {
                return [x, y];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interpolates_nodes_and_midpoints() {
        let g = GridDensity::new(3, 2, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_relative_eq!(g.density(-1.0, -1.0), 0.0);
        assert_relative_eq!(g.density(1.0, 1.0), 5.0);
        assert_relative_eq!(g.density(0.0, -1.0), 1.0);
        assert_relative_eq!(g.density(-0.5, 0.0), 0.5 * (0.5 + 3.5));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(GridDensity::new(1, 3, vec![1.0; 3]).is_err());
        assert!(GridDensity::new(2, 2, vec![1.0; 3]).is_err());
        assert!(GridDensity::new(2, 2, vec![1.0, -1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn raw_mass_of_constant_grid_is_the_square_area() {
        let g = GridDensity::new(4, 7, vec![1.0; 28]).unwrap();
        assert_relative_eq!(g.raw_mass(), 4.0, epsilon = 1e-12);
        let n = g.normalized().unwrap();
        assert_relative_eq!(n.density(0.1, 0.2), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn transpose_matches_swapped_evaluation() {
        let values: Vec<f64> = (0..12).map(|k| k as f64).collect();
        let g = GridDensity::new(4, 3, values).unwrap();
        let t = g.transposed();
        for &(x, y) in &[(0.3, -0.2), (-0.9, 0.7), (0.0, 0.0)] {
            assert_relative_eq!(t.density(x, y), g.density(y, x), epsilon = 1e-12);
        }
    }
}
