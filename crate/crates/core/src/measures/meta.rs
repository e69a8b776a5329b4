use crate::error::{invalid, Result};
use crate::measures::{EmpiricalMeasure, GridDensity};

/// A point of `P(Ω)`: either a grid density or an empirical measure.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Grid(GridDensity),
    Empirical(EmpiricalMeasure),
}

impl From<GridDensity> for Measure {
    fn from(g: GridDensity) -> Self {
        Measure::Grid(g)
    }
}

impl From<EmpiricalMeasure> for Measure {
    fn from(e: EmpiricalMeasure) -> Self {
        Measure::Empirical(e)
    }
}

/// Finitely supported element of `P(P(Ω))`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaMeasure {
    weights: Vec<f64>,
    atoms: Vec<Measure>,
}

impl MetaMeasure {
    pub fn new(weights: Vec<f64>, atoms: Vec<Measure>) -> Result<Self> {
        if weights.is_empty() || weights.len() != atoms.len() {
            return invalid(format!(
                "meta-measure needs matching nonempty weights/atoms, got {} and {}",
                weights.len(),
                atoms.len()
            ));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return invalid("meta-measure weights must be nonnegative");
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return invalid(format!("meta-measure weights sum to {total}, expected 1"));
        }
        Ok(Self { weights, atoms })
    }

    pub fn dirac(atom: impl Into<Measure>) -> Self {
        Self { weights: vec![1.0], atoms: vec![atom.into()] }
    }

    /// Equal weights `1/len` on every atom.
    pub fn uniform(atoms: Vec<Measure>) -> Result<Self> {
        let n = atoms.len();
        if n == 0 {
            return invalid("meta-measure needs at least one atom");
        }
        Self::new(vec![1.0 / n as f64; n], atoms)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atoms(&self) -> &[Measure] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &Measure)> {
        self.weights.iter().copied().zip(self.atoms.iter())
    }
}
