use crate::error::{invalid, Result};
use crate::harness::CheckResult;
use crate::measures::GridDensity;
use crate::potentials::{free_energy_mf, free_energy_product, interaction_integral, Potential};

/// Formula-level tolerance for the product/mean-field gap.
const GAP_TOLERANCE: f64 = 1e-12;

/// For each `N`: the recovery-sequence gap
/// `F^N[ρ^⊗N]/N − F^MF[ρ] = −(1/2N) ∬H dρdρ` (identity), and, when
/// `∬H dρdρ ≥ 0`, monotone increase of `F^N[ρ^⊗N]/N` toward `F^MF[ρ]`
/// (inequalities).
pub fn gamma_check(rho: &GridDensity, n_list: &[usize], v: &Potential, h: &Potential) -> Result<Vec<CheckResult>> {
    if n_list.is_empty() || n_list.contains(&0) || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("N_list must be nonempty, positive and strictly increasing");
    }
    let mf = free_energy_mf(rho, v, h).total;
    let double = interaction_integral(rho, h);
    let mut out = Vec::new();
    let mut previous: Option<(usize, f64)> = None;
    for &n in n_list {
        let product = free_energy_product(rho, n, v, h)?;
        let expected = -double / (2.0 * n as f64);
        out.push(
            CheckResult::identity(format!("gamma.gap(N={n})"), product - mf, expected, GAP_TOLERANCE)
                .with("N", n)
                .with("free_energy_product", product)
                .with("free_energy_mf", mf)
                .with("interaction_double_integral", double),
        );
        if double >= 0.0 {
            if let Some((n_prev, f_prev)) = previous {
                out.push(
                    CheckResult::inequality(format!("gamma.monotone(N={n_prev}->{n})"), f_prev, product, GAP_TOLERANCE)
                        .with("N_small", n_prev)
                        .with("N_large", n),
                );
            }
            out.push(
                CheckResult::inequality(format!("gamma.below_limit(N={n})"), product, mf, GAP_TOLERANCE).with("N", n),
            );
        }
        previous = Some((n, product));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_square_interaction() {
        let rho = GridDensity::uniform(0.0, 1.0, 1024).unwrap();
        let h = Potential::quadratic(2.0).unwrap();
        let checks = gamma_check(&rho, &[1, 6, 100], &Potential::zero(), &h).unwrap();
        assert!(checks.iter().all(|c| c.passed));
        let six = checks.iter().find(|c| c.name == "gamma.gap(N=6)").unwrap();
        // ∬(x−y)² = 1/6 on the unit interval, so the gap is −1/72.
        assert!((six.lhs + 1.0 / 72.0).abs() < 1e-6);
    }

    #[test]
    fn zero_interaction_has_no_gap() {
        let rho = GridDensity::gaussian(-5.0, 5.0, 100, 0.0, 1.0).unwrap();
        let checks = gamma_check(&rho, &[1, 2, 3], &Potential::quadratic(1.0).unwrap(), &Potential::zero()).unwrap();
        assert!(checks.iter().filter(|c| c.name.starts_with("gamma.gap")).all(|c| c.lhs == 0.0 && c.passed));
        assert!(gamma_check(&rho, &[3, 2], &Potential::zero(), &Potential::zero()).is_err());
    }
}
