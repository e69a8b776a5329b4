use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::measures::{GridDensity, Measure, MetaMeasure};
use crate::potentials::Potential;

/// Largest tolerated `|H(x) − H(−x)|` for an interaction potential.
const SYMMETRY_TOLERANCE: f64 = 1e-12;

fn check_symmetric(h: &Potential, r: f64) -> Result<()> {
    let asym = h.asymmetry(r.max(1.0));
    if asym > SYMMETRY_TOLERANCE * (1.0 + h.value(r.max(1.0)).abs()) {
        return invalid(format!("interaction potential is not even: max |H(x) − H(−x)| = {asym:e}"));
    }
    Ok(())
}

fn spread(config: &[f64]) -> f64 {
    let (lo, hi) = config.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(*x), h.max(*x)));
    hi - lo
}

/// `Σ V(x_i) + (1/2N) Σ_{i≠j} H(x_i − x_j)` over ordered pairs.
pub fn w_n(config: &[f64], v: &Potential, h: &Potential) -> Result<f64> {
    if config.is_empty() {
        return invalid("configuration is empty");
    }
    check_symmetric(h, spread(config))?;
    Ok(w_n_unchecked(config, v, h))
}

fn w_n_unchecked(config: &[f64], v: &Potential, h: &Potential) -> f64 {
    let n = config.len();
    let confinement: f64 = config.iter().map(|x| v.value(*x)).sum();
    if h.is_zero() {
        return confinement;
    }
    // Each unordered pair appears twice in the ordered sum.
    let mut pairs = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            pairs += h.value(config[i] - config[j]);
        }
    }
    confinement + pairs / n as f64
}

fn check_direction(config: &[f64], dir: &[f64]) -> Result<()> {
    if config.is_empty() || config.len() != dir.len() {
        return invalid(format!("config and direction lengths differ: {} vs {}", config.len(), dir.len()));
    }
    if dir.iter().all(|d| *d == 0.0) {
        return invalid("direction must be nonzero");
    }
    Ok(())
}

/// `D²W^N[v, v] = Σ V''(x_i) v_i² + (1/2N) Σ_{i≠j} H''(x_i − x_j)(v_i − v_j)²`.
pub fn hessian_quadratic_form(config: &[f64], dir: &[f64], v: &Potential, h: &Potential) -> Result<f64> {
    check_direction(config, dir)?;
    let n = config.len();
    let own: f64 = config.iter().zip(dir).map(|(x, d)| v.hessian(*x) * d * d).sum();
    if h.is_zero() {
        return Ok(own);
    }
    let mut pairs = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let dv = dir[i] - dir[j];
            pairs += h.hessian(config[i] - config[j]) * dv * dv;
        }
    }
    Ok(own + pairs / n as f64)
}

/// Five-point second difference of `ε ↦ W^N(x + εv)` at 0. Exact up to
/// roundoff for polynomials of degree ≤ 5.
pub fn hessian_quadratic_form_fd(config: &[f64], dir: &[f64], v: &Potential, h: &Potential, eps: f64) -> Result<f64> {
    check_direction(config, dir)?;
    if !(eps > 0.0) {
        return invalid(format!("step must be positive, got {eps}"));
    }
    let w = |s: f64| {
        let shifted: Vec<f64> = config.iter().zip(dir).map(|(x, d)| x + s * eps * d).collect();
        w_n_unchecked(&shifted, v, h)
    };
    Ok((-w(2.0) + 16.0 * w(1.0) - 30.0 * w(0.0) + 16.0 * w(-1.0) - w(-2.0)) / (12.0 * eps * eps))
}

/// Minimum of the Hessian form over `trials` random configurations drawn
/// uniformly from `[left, right]^N` and random unit directions.
pub fn convexity_modulus_estimate(
    v: &Potential,
    h: &Potential,
    n: usize,
    trials: usize,
    seed: u64,
    (left, right): (f64, f64),
) -> Result<f64> {
    if n == 0 || trials == 0 {
        return invalid("need N ≥ 1 and trials ≥ 1");
    }
    if !(right > left) {
        return invalid(format!("configuration box [{left}, {right}] is empty"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for _ in 0..trials {
        let config: Vec<f64> = (0..n).map(|_| rng.random_range(left..=right)).collect();
        let mut dir: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        dir.iter_mut().for_each(|d| *d /= norm);
        best = best.min(hessian_quadratic_form(&config, &dir, v, h)?);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoublingResult {
    pub holds: bool,
    /// Smallest `C` with `H(x+y) ≤ C (1 + H(x) + H(y))` on the scan, after
    /// shifting `H` to be nonnegative.
    pub constant: f64,
    /// The shift subtracted from `H`.
    pub shift: f64,
}

/// Doubling constant of `H` over `x, y ∈ [left, right]` on a `points`-point grid.
pub fn doubling_check(h: &Potential, left: f64, right: f64, points: usize) -> Result<DoublingResult> {
    if !(right > left) || points < 2 {
        return invalid("doubling scan needs a nonempty interval and ≥ 2 points");
    }
    let step = (right - left) / (points - 1) as f64;
    let xs: Vec<f64> = (0..points).map(|i| left + i as f64 * step).collect();
    let sums: Vec<f64> = (0..2 * points - 1).map(|k| 2.0 * left + k as f64 * step).collect();

    // The minimum over the sum range must be attained in the interior or
    // with the potential increasing outward; otherwise H keeps decreasing
    // past the scan and no shift makes it nonnegative.
    let (lo, hi) = (sums[0], sums[sums.len() - 1]);
    let (argmin, shift) = sums
        .iter()
        .map(|x| h.value(*x))
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, v)| if v < bv { (i, v) } else { (bi, bv) });
    if !shift.is_finite()
        || (argmin == 0 && h.gradient(lo) > 0.0)
        || (argmin + 1 == sums.len() && h.gradient(hi) < 0.0)
    {
        return Err(crate::Error::InvalidArgument(format!(
            "interaction potential is unbounded below on the scan (minimum {shift} at its edge)"
        )));
    }

    let hx: Vec<f64> = xs.iter().map(|x| h.value(*x) - shift).collect();
    let constant = (0..points)
        .into_par_iter()
        .map(|i| {
            (0..points)
                .map(|j| (h.value(xs[i] + xs[j]) - shift) / (1.0 + hx[i] + hx[j]))
                .fold(0.0, f64::max)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max);
    Ok(DoublingResult { holds: constant.is_finite(), constant, shift })
}

/// Decomposition of the mean-field free energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub confinement: f64,
    /// `½ ∬ H(x − y) dρ dρ`.
    pub interaction: f64,
    pub entropy: f64,
    pub total: f64,
}

/// `∬ H(x − y) dρ dρ` by midpoint quadrature on the grid.
pub fn interaction_integral(rho: &GridDensity, h: &Potential) -> f64 {
    let m = rho.mass();
    let xs = rho.centers();
    if let Some(a) = h.quadratic_coefficient() {
        // ∬ a(x − y)²/2 = a Var(centers), computed two-pass.
        let mean: f64 = m.iter().zip(&xs).map(|(m, x)| m * x).sum();
        return a * m.iter().zip(&xs).map(|(m, x)| m * (x - mean) * (x - mean)).sum::<f64>();
    }
    let rows: Vec<f64> = (0..xs.len())
        .into_par_iter()
        .map(|i| {
            if m[i] == 0.0 {
                return 0.0;
            }
            m[i] * xs.iter().zip(m).map(|(y, my)| h.value(xs[i] - y) * my).sum::<f64>()
        })
        .collect();
    rows.iter().sum()
}

/// `∫V dρ + ½∬H(x−y) dρdρ + ∫ρ log ρ`.
pub fn free_energy_mf(rho: &GridDensity, v: &Potential, h: &Potential) -> EnergyReport {
    let confinement: f64 = rho.mass().iter().enumerate().map(|(i, m)| m * v.value(rho.center(i))).sum();
    let interaction = 0.5 * interaction_integral(rho, h);
    let entropy = rho.entropy();
    EnergyReport { confinement, interaction, entropy, total: confinement + interaction + entropy }
}

/// `F^N[ρ^{⊗N}]/N = ∫V dρ + ((N−1)/2N) ∬H dρdρ + ∫ρ log ρ`, in closed form.
pub fn free_energy_product(rho: &GridDensity, n: usize, v: &Potential, h: &Potential) -> Result<f64> {
    if n == 0 {
        return invalid("N must be ≥ 1");
    }
    let r = free_energy_mf(rho, v, h);
    let factor = (n - 1) as f64 / n as f64;
    Ok(r.confinement + factor * r.interaction + r.entropy)
}

/// `∫ F^MF dX` for a meta-measure whose atoms are all grid densities.
pub fn free_energy_meta(x: &MetaMeasure, v: &Potential, h: &Potential) -> Result<f64> {
    let mut total = 0.0;
    for (w, atom) in x.iter() {
        match atom {
            Measure::Grid(rho) => total += w * free_energy_mf(rho, v, h).total,
            Measure::Empirical(_) => return invalid("free energy is undefined for empirical atoms"),
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::EmpiricalMeasure;
    use proptest::prelude::*;
    use rand::Rng;

    fn quad(a: f64) -> Potential {
        Potential::quadratic(a).unwrap()
    }

    #[test]
    fn w_n_examples() {
        let zero = Potential::zero();
        assert_eq!(w_n(&[0.7], &quad(1.0), &quad(3.0)).unwrap(), 0.5 * 0.7 * 0.7);
        assert_eq!(w_n(&[0.0, 1.0], &zero, &quad(2.0)).unwrap(), 0.5);
        assert_eq!(w_n(&[1.0, 2.0], &quad(1.0), &zero).unwrap(), 2.5);
        let odd = Potential::polynomial(vec![0.0, 1.0], (-1.0, 1.0)).unwrap();
        assert!(w_n(&[0.0, 1.0], &zero, &odd).is_err());
        assert!(w_n(&[], &zero, &zero).is_err());
    }

    #[test]
    fn hessian_examples() {
        let x = [0.3, -1.0, 2.0];
        let v = [0.6, 0.0, -0.8];
        let form = hessian_quadratic_form(&x, &v, &quad(1.0), &quad(1.0)).unwrap();
        let cross: f64 = 2.0 * ((0.6f64).powi(2) + 1.4f64.powi(2) + 0.8f64.powi(2)) / 6.0;
        assert!((form - (1.0 + cross)).abs() < 1e-15);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let form = hessian_quadratic_form(&[0.0, 5.0], &[s, -s], &quad(-1.0), &quad(-1.0)).unwrap();
        assert!((form + 2.0).abs() < 1e-15);

        let dw = Potential::double_well(1.0, (-3.0, 3.0)).unwrap();
        let form = hessian_quadratic_form(&x, &v, &dw, &Potential::zero()).unwrap();
        let expect: f64 = x.iter().zip(&v).map(|(x, v)| dw.hessian(*x) * v * v).sum();
        assert_eq!(form, expect);
        assert!(hessian_quadratic_form(&x, &[0.0; 3], &dw, &dw).is_err());
    }

    proptest! {
        #[test]
        fn finite_differences_agree(
            config in prop::collection::vec(-2.0f64..2.0, 1..16),
            seed in 0u64..1000,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dir: Vec<f64> = config.iter().map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let v = Potential::double_well(1.0, (-2.0, 2.0)).unwrap();
            let h = Potential::double_well(0.5, (-4.0, 4.0)).unwrap();
            let a = hessian_quadratic_form(&config, &dir, &v, &h).unwrap();
            let f = hessian_quadratic_form_fd(&config, &dir, &v, &h, 1e-2).unwrap();
            prop_assert!((a - f).abs() <= 1e-7 * (1.0 + a.abs()), "{} vs {}", a, f);
        }
    }

    #[test]
    fn modulus_respects_lemma_bound() {
        for lambda in [1.0, -1.0] {
            let est = convexity_modulus_estimate(&quad(lambda), &quad(lambda), 6, 200, 7, (-2.0, 2.0)).unwrap();
            assert!(est >= f64::min(3.0 * lambda, 0.0) - 1e-8, "{lambda}: {est}");
        }
        let est = convexity_modulus_estimate(&quad(0.5), &Potential::zero(), 5, 50, 1, (-1.0, 1.0)).unwrap();
        assert!((est - 0.5).abs() < 1e-14);
    }

    #[test]
    fn doubling_examples() {
        let zero = doubling_check(&Potential::zero(), -2.0, 2.0, 41).unwrap();
        assert!(zero.holds && zero.constant == 0.0);
        let sq = doubling_check(&quad(2.0), -3.0, 3.0, 61).unwrap();
        assert!(sq.holds && sq.constant <= 2.0 && sq.constant > 1.5);
        let quartic = Potential::polynomial(vec![0.0, 0.0, 0.0, 0.0, 1.0], (-1.0, 1.0)).unwrap();
        let q = doubling_check(&quartic, -3.0, 3.0, 61).unwrap();
        assert!(q.holds && q.constant <= 8.0);
        assert!(doubling_check(&quad(-1.0), -3.0, 3.0, 61).is_err());
        // A double well dips below zero but is bounded below: shifted, not rejected.
        let dw = doubling_check(&Potential::double_well(1.0, (-1.0, 1.0)).unwrap(), -2.0, 2.0, 41).unwrap();
        assert!(dw.holds && dw.shift == 0.0);
    }

    #[test]
    fn free_energy_examples() {
        let zero = Potential::zero();
        let u01 = GridDensity::uniform(0.0, 1.0, 1024).unwrap();
        let r = free_energy_mf(&u01, &zero, &zero);
        assert!(r.total.abs() < 1e-12);

        let sq = quad(2.0);
        let r = free_energy_mf(&u01, &zero, &sq);
        let dx = u01.dx();
        assert!((r.interaction - 1.0 / 12.0).abs() < 1e-6);
        assert!((r.interaction - (1.0 - dx * dx) / 12.0).abs() < 1e-14);
        assert!((r.total - (r.confinement + r.interaction + r.entropy)).abs() < 1e-12);

        let u02 = GridDensity::uniform(0.0, 2.0, 512).unwrap();
        assert!((free_energy_mf(&u02, &zero, &zero).entropy + 2f64.ln()).abs() < 1e-12);

        let meta = MetaMeasure::new(vec![0.75, 0.25], vec![u01.clone().into(), u02.into()]).unwrap();
        assert!((free_energy_meta(&meta, &zero, &zero).unwrap() + 0.25 * 2f64.ln()).abs() < 1e-12);
        let bad = MetaMeasure::dirac(EmpiricalMeasure::dirac(0.0).unwrap());
        assert!(free_energy_meta(&bad, &zero, &zero).is_err());
    }

    #[test]
    fn quadratic_fast_path_matches_double_sum() {
        let rho = GridDensity::gaussian(-4.0, 4.0, 200, 0.4, 0.8).unwrap();
        let fast = interaction_integral(&rho, &quad(1.3));
        let poly = Potential::polynomial(vec![0.0, 0.0, 0.65], (-8.0, 8.0)).unwrap();
        let slow = interaction_integral(&rho, &poly);
        assert!((fast - slow).abs() < 1e-12);
    }

    #[test]
    fn product_gap_is_formula_exact() {
        let rho = GridDensity::gaussian(-5.0, 5.0, 256, 0.0, 1.0).unwrap();
        let (v, h) = (quad(1.0), Potential::double_well(0.3, (-10.0, 10.0)).unwrap());
        let mf = free_energy_mf(&rho, &v, &h);
        for n in [1, 2, 10, 100] {
            let gap = free_energy_product(&rho, n, &v, &h).unwrap() - mf.total;
            assert!((gap + 2.0 * mf.interaction / (2.0 * n as f64)).abs() < 1e-12);
        }
        assert!(free_energy_product(&rho, 0, &v, &h).is_err());
    }
}
