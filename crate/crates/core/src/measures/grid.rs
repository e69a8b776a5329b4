use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Result};

/// Tolerance on the total mass of a [`GridDensity`].
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Piecewise-constant probability density on `[left, right]`, stored as
/// per-cell masses.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    left: f64,
    right: f64,
    mass: Vec<f64>,
}

impl GridDensity {
    /// Builds a density from cell masses that already sum to one.
    pub fn new(left: f64, right: f64, mass: Vec<f64>) -> Result<Self> {
        check_interval(left, right, mass.len())?;
        if let Some((i, m)) = mass.iter().enumerate().find(|(_, m)| !(**m >= 0.0)) {
            return invalid(format!("cell {i} has mass {m}; masses must be finite and nonnegative"));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return invalid(format!("masses sum to {total}, expected 1"));
        }
        Ok(Self { left, right, mass })
    }

    /// Normalizes arbitrary nonnegative weights into a density.
    pub fn from_weights(left: f64, right: f64, weights: Vec<f64>) -> Result<Self> {
        check_interval(left, right, weights.len())?;
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return invalid("weights must be finite and nonnegative");
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return invalid("weights have zero total mass");
        }
        let mass = weights.into_iter().map(|w| w / total).collect();
        Self::new(left, right, mass)
    }

    /// Projects a distribution onto the grid through its CDF, then
    /// renormalizes the part that fell inside the interval.
    pub fn from_cdf(left: f64, right: f64, cells: usize, cdf: impl Fn(f64) -> f64) -> Result<Self> {
        check_interval(left, right, cells)?;
        let dx = (right - left) / cells as f64;
        let weights = (0..cells)
            .map(|i| {
                let a = left + i as f64 * dx;
                let b = if i + 1 == cells { right } else { a + dx };
                (cdf(b) - cdf(a)).max(0.0)
            })
            .collect();
        Self::from_weights(left, right, weights)
    }

    /// Gaussian `N(mean, var)` projected onto the grid by exact cell
    /// probabilities. Upper-tail cells use the survival function so that
    /// tail masses keep their relative precision.
    pub fn gaussian(left: f64, right: f64, cells: usize, mean: f64, var: f64) -> Result<Self> {
        if !(var > 0.0) || !mean.is_finite() {
            return invalid(format!("gaussian needs finite mean and var > 0, got ({mean}, {var})"));
        }
        check_interval(left, right, cells)?;
        let normal = Normal::new(mean, var.sqrt()).map_err(|e| crate::Error::InvalidArgument(e.to_string()))?;
        let dx = (right - left) / cells as f64;
        let weights = (0..cells)
            .map(|i| {
                let a = left + i as f64 * dx;
                let b = if i + 1 == cells { right } else { a + dx };
                if a >= mean {
                    normal.sf(a) - normal.sf(b)
                } else {
                    normal.cdf(b) - normal.cdf(a)
                }
                .max(0.0)
            })
            .collect();
        Self::from_weights(left, right, weights)
    }

    /// Uniform density on the whole interval.
    pub fn uniform(left: f64, right: f64, cells: usize) -> Result<Self> {
        check_interval(left, right, cells)?;
        Self::new(left, right, vec![1.0 / cells as f64; cells])
    }

    /// Uniform density on `[a, b] ⊂ [left, right]`; partially covered cells
    /// get the covered fraction.
    pub fn uniform_on(left: f64, right: f64, cells: usize, a: f64, b: f64) -> Result<Self> {
        if !(b > a) {
            return invalid(format!("uniform support [{a}, {b}] is empty"));
        }
        Self::from_cdf(left, right, cells, |x| ((x - a) / (b - a)).clamp(0.0, 1.0))
    }

    /// All mass in a single cell.
    pub fn point_cell(left: f64, right: f64, cells: usize, cell: usize) -> Result<Self> {
        check_interval(left, right, cells)?;
        if cell >= cells {
            return invalid(format!("cell {cell} out of range 0..{cells}"));
        }
        let mut mass = vec![0.0; cells];
        mass[cell] = 1.0;
        Self::new(left, right, mass)
    }

    /// Cell containing `x`, clamped to the grid.
    pub fn cell_of(&self, x: f64) -> usize {
        let i = ((x - self.left) / self.dx()).floor();
        (i.max(0.0) as usize).min(self.cells() - 1)
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn right(&self) -> f64 {
        self.right
    }

    pub fn cells(&self) -> usize {
        self.mass.len()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn dx(&self) -> f64 {
        (self.right - self.left) / self.cells() as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.left + (i as f64 + 0.5) * self.dx()
    }

    /// Left edge of cell `i`; `edge(cells)` is the right endpoint.
    pub fn edge(&self, i: usize) -> f64 {
        if i == self.cells() {
            self.right
        } else {
            self.left + i as f64 * self.dx()
        }
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.cells()).map(|i| self.center(i)).collect()
    }

    /// Density values (mass divided by cell width).
    pub fn density_values(&self) -> Vec<f64> {
        let dx = self.dx();
        self.mass.iter().map(|m| m / dx).collect()
    }

    /// Mean with the mass of each cell spread uniformly over the cell.
    pub fn mean(&self) -> f64 {
        self.mass.iter().enumerate().map(|(i, m)| m * self.center(i)).sum()
    }

    /// Variance of the piecewise-uniform density (includes the `dx²/12`
    /// within-cell term).
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        let dx = self.dx();
        let spread: f64 = self
            .mass
            .iter()
            .enumerate()
            .map(|(i, m)| m * (self.center(i) - mean).powi(2))
            .sum();
        spread + dx * dx / 12.0
    }

    /// `Σ m log(m/dx)`, with empty cells contributing zero.
    pub fn entropy(&self) -> f64 {
        let dx = self.dx();
        self.mass
            .iter()
            .filter(|m| **m > 0.0)
            .map(|m| m * (m / dx).ln())
            .sum()
    }

    /// Whether two densities live on the same grid.
    pub fn same_grid(&self, other: &GridDensity) -> bool {
        self.left == other.left && self.right == other.right && self.cells() == other.cells()
    }

    pub(crate) fn from_raw(left: f64, right: f64, mass: Vec<f64>) -> Self {
        Self { left, right, mass }
    }
}

fn check_interval(left: f64, right: f64, cells: usize) -> Result<()> {
    if !(left.is_finite() && right.is_finite() && right > left) {
        return invalid(format!("interval [{left}, {right}] must satisfy right > left"));
    }
    if cells < 2 {
        return invalid(format!("grid needs at least 2 cells, got {cells}"));
    }
    Ok(())
}
