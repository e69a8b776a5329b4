use crate::error::{invalid, Result};
use crate::harness::CheckResult;
use crate::measures::{discrete_empirical_pushforward, injective_fraction, marginal, tensor_lift, DiscreteSymmetricMeasure};

/// Arithmetic tolerance for exact table comparisons.
const TABLE_TOLERANCE: f64 = 1e-12;

/// `Σ|μ^N_n − (μ̂^N)^n| ≤ 2n(n−1)/N`, by exhaustive enumeration.
///
/// Metadata also records the decomposition behind the bound:
/// `(μ̂^N)^n = c μ^N_n + (1 − c) ν` with `c = N!/((N−n)! N^n)` and `ν ≥ 0`,
/// reporting `c` and the smallest entry of `(μ̂^N)^n − c μ^N_n`.
pub fn df_check(m: &DiscreteSymmetricMeasure, n: usize) -> Result<CheckResult> {
    let big_n = m.n();
    if n == 0 || n > big_n {
        return invalid(format!("marginal order n = {n} must lie in 1..={big_n}"));
    }
    let exact = marginal(m, n)?;
    let lifted = tensor_lift(&discrete_empirical_pushforward(m), m.sites(), n)?;
    let tv = exact.l1_distance(&lifted)?;
    let bound = 2.0 * (n * (n - 1)) as f64 / big_n as f64;
    let coefficient = injective_fraction(big_n, n);
    let residual = lifted
        .table()
        .iter()
        .zip(exact.table())
        .map(|(q, p)| q - coefficient * p)
        .fold(f64::INFINITY, f64::min);
    Ok(CheckResult::inequality(format!("df(N={big_n},n={n},k={})", m.k()), tv, bound, TABLE_TOLERANCE)
        .with("N", big_n)
        .with("n", n)
        .with("k", m.k())
        .with("decomposition_coefficient", coefficient)
        .with("decomposition_min_residual", residual))
}
