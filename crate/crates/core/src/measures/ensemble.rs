use crate::error::{invalid, Result};
use crate::measures::EmpiricalMeasure;

/// `M` independent `N`-particle configurations: a Monte Carlo stand-in for a
/// symmetric law on `Ω^N`. Stored replica-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    n_particles: usize,
    n_replicas: usize,
    positions: Vec<f64>,
    rng_seed: u64,
}

impl ParticleEnsemble {
    pub fn new(n_particles: usize, n_replicas: usize, positions: Vec<f64>, rng_seed: u64) -> Result<Self> {
        if n_particles == 0 || n_replicas == 0 {
            return invalid("ensemble needs N ≥ 1 and M ≥ 1");
        }
        if positions.len() != n_particles * n_replicas {
            return invalid(format!(
                "expected {}×{} positions, got {}",
                n_replicas,
                n_particles,
                positions.len()
            ));
        }
        if let Some(x) = positions.iter().find(|x| !x.is_finite()) {
            return invalid(format!("non-finite position {x}"));
        }
        Ok(Self { n_particles, n_replicas, positions, rng_seed })
    }

    /// Builds an ensemble from explicit configurations of equal length.
    pub fn from_configurations(configs: &[Vec<f64>], rng_seed: u64) -> Result<Self> {
        let n = configs.first().map_or(0, Vec::len);
        if configs.iter().any(|c| c.len() != n) {
            return invalid("configurations have different lengths");
        }
        Self::new(n, configs.len(), configs.concat(), rng_seed)
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn n_replicas(&self) -> usize {
        self.n_replicas
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn configuration(&self, replica: usize) -> &[f64] {
        let n = self.n_particles;
        &self.positions[replica * n..(replica + 1) * n]
    }

    pub fn configurations(&self) -> impl Iterator<Item = &[f64]> {
        self.positions.chunks_exact(self.n_particles)
    }

    pub fn empirical(&self, replica: usize) -> EmpiricalMeasure {
        EmpiricalMeasure::new(self.configuration(replica).to_vec()).expect("ensemble positions are finite")
    }

    pub fn empiricals(&self) -> Vec<EmpiricalMeasure> {
        (0..self.n_replicas).map(|r| self.empirical(r)).collect()
    }

    pub fn within(&self, left: f64, right: f64) -> bool {
        self.positions.iter().all(|x| (left..=right).contains(x))
    }

    pub(crate) fn with_positions(&self, positions: Vec<f64>) -> Self {
        debug_assert_eq!(positions.len(), self.positions.len());
        Self { positions, ..*self }
    }
}
