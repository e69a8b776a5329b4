//! Wasserstein-2 distances on `P(Ω)`, `Ω^N` and `P(P(Ω))`.

mod assignment;
mod isometry;
mod nested;
mod plan;
pub(crate) mod quantile;

pub use assignment::hungarian;
pub use isometry::{isometry_gap, IsometryGap};
pub use nested::{nested_d2, NestedDistance, MAX_META_ATOMS};
pub use plan::{solve_transport, TransportPlan};
pub use quantile::{w2_quantile, w2_squared};

use crate::error::{invalid, Result};

fn check_lengths(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() || x.is_empty() {
        return invalid(format!("configurations must have equal nonzero length, got {} and {}", x.len(), y.len()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return invalid("configurations must be finite");
    }
    Ok(())
}

/// `√(min_σ (1/N) Σ |x_i − y_σ(i)|²)`, by sorting.
pub fn w2_assignment(x: &[f64], y: &[f64]) -> Result<f64> {
    check_lengths(x, y)?;
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    Ok(quantile::sorted_mean_square(&xs, &ys).sqrt())
}

/// Same quantity through the Hungarian solver on the full `N × N` cost.
pub fn w2_assignment_solver(x: &[f64], y: &[f64]) -> Result<f64> {
    check_lengths(x, y)?;
    let n = x.len();
    let cost: Vec<f64> = x.iter().flat_map(|a| y.iter().map(move |b| (a - b) * (a - b))).collect();
    let (_, total) = hungarian(&cost, n)?;
    Ok((total / n as f64).sqrt())
}
