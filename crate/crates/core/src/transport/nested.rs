use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::measures::MetaMeasure;
use crate::transport::{solve_transport, w2_squared, TransportPlan};

/// Largest meta-measure accepted by [`nested_d2`].
pub const MAX_META_ATOMS: usize = 2048;

/// Result of a nested (meta-level) Wasserstein computation.
#[derive(Debug, Clone)]
pub struct NestedDistance {
    pub distance: f64,
    pub plan: TransportPlan,
}

impl NestedDistance {
    pub fn squared(&self) -> f64 {
        self.plan.cost()
    }
}

/// `𝔇₂(x, y)`: Wasserstein-2 on `P(P(Ω))` with ground metric `d₂`.
pub fn nested_d2(x: &MetaMeasure, y: &MetaMeasure) -> Result<NestedDistance> {
    if x.len() > MAX_META_ATOMS || y.len() > MAX_META_ATOMS {
        return invalid(format!("meta-measures are capped at {MAX_META_ATOMS} atoms"));
    }
    if x.weights().iter().all(|w| *w == 0.0) || y.weights().iter().all(|w| *w == 0.0) {
        return invalid("meta-measure weights are all zero");
    }
    let m = y.len();
    let cost: Vec<f64> = (0..x.len() * m)
        .into_par_iter()
        .map(|k| w2_squared(&x.atoms()[k / m], &y.atoms()[k % m]))
        .collect();
    let plan = solve_transport(x.weights(), y.weights(), &cost)?;
    Ok(NestedDistance { distance: plan.cost().max(0.0).sqrt(), plan })
}
