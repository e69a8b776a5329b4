use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::measures::{GridDensity, ParticleEnsemble};

/// Draws `n_replicas × n_particles` i.i.d. samples of `rho` by inverse CDF,
/// uniform within each cell. Replica-major; bit-identical for a given seed.
pub fn sample_product(rho: &GridDensity, n_particles: usize, n_replicas: usize, seed: u64) -> Result<ParticleEnsemble> {
    if n_particles == 0 || n_replicas == 0 {
        return invalid("sample_product needs N ≥ 1 and M ≥ 1");
    }
    let sampler = InverseCdf::new(rho);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions = (0..n_particles * n_replicas)
        .map(|_| sampler.quantile(rng.random::<f64>()))
        .collect();
    ParticleEnsemble::new(n_particles, n_replicas, positions, seed)
}

/// Quantile function of a piecewise-uniform grid density.
#[derive(Debug, Clone)]
pub struct InverseCdf<'a> {
    rho: &'a GridDensity,
    cumulative: Vec<f64>,
}

impl<'a> InverseCdf<'a> {
    pub fn new(rho: &'a GridDensity) -> Self {
        let mut cumulative = Vec::with_capacity(rho.cells() + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for m in rho.mass() {
            acc += m;
            cumulative.push(acc);
        }
        Self { rho, cumulative }
    }

    /// `Q(u)` for `u ∈ [0, 1)`, clamped to the interval.
    pub fn quantile(&self, u: f64) -> f64 {
        let total = *self.cumulative.last().unwrap();
        let target = u * total;
        // first cell whose upper cumulative value exceeds the target
        let upper = self.cumulative[1..].partition_point(|c| *c <= target);
        let cell = self.skip_empty(upper.min(self.rho.cells() - 1));
        let m = self.rho.mass()[cell];
        let frac = if m > 0.0 { ((target - self.cumulative[cell]) / m).clamp(0.0, 1.0) } else { 0.5 };
        let x = self.rho.edge(cell) + frac * self.rho.dx();
        x.clamp(self.rho.left(), self.rho.right())
    }

    fn skip_empty(&self, cell: usize) -> usize {
        if self.rho.mass()[cell] > 0.0 {
            return cell;
        }
        // rounding can land on an empty cell at the very top; fall back to
        // the last cell with mass
        (0..=cell).rev().find(|&c| self.rho.mass()[c] > 0.0).unwrap_or(cell)
    }
}
