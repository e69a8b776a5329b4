use crate::error::{invalid, Result};

/// `(1/N) Σ δ_{x_i}` with atoms kept in ascending order.
///
/// Sorted order is the monotone (optimal) coupling in one dimension, so the
/// distance between two equal-size empirical measures is a single pass.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    atoms: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(mut atoms: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return invalid("empirical measure needs at least one atom");
        }
        if atoms.iter().any(|x| !x.is_finite()) {
            return invalid("empirical atoms must be finite");
        }
        atoms.sort_by(f64::total_cmp);
        Ok(Self { atoms })
    }

    pub fn dirac(x: f64) -> Result<Self> {
        Self::new(vec![x])
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().sum::<f64>() / self.len() as f64
    }
}

/// The lift `T^N`: a configuration mapped to its empirical measure.
pub fn empirical_lift(config: &[f64]) -> Result<EmpiricalMeasure> {
    EmpiricalMeasure::new(config.to_vec())
}
