//! Exact symmetric laws on a finite state set `Ω₀^n`, used as brute-force
//! oracles for the structural operators (marginals, `T^N` pushforward,
//! tensor lifts).

use std::collections::BTreeMap;

use crate::error::{invalid, Result};
use crate::measures::{EmpiricalMeasure, Measure, MetaMeasure};

/// Largest table a [`DiscreteSymmetricMeasure`] may hold.
pub const MAX_TABLE_ENTRIES: usize = 10_000_000;

const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Probability table over `k^n` tuples of site indices, invariant under
/// permutation of the tuple. Index encoding puts the first variable in the
/// most significant base-`k` digit.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSymmetricMeasure {
    sites: Vec<f64>,
    n: usize,
    table: Vec<f64>,
}

fn table_len(k: usize, n: usize) -> Result<usize> {
    let mut len: usize = 1;
    for _ in 0..n {
        len = match len.checked_mul(k) {
            Some(l) if l <= MAX_TABLE_ENTRIES => l,
            _ => return invalid(format!("table {k}^{n} exceeds {MAX_TABLE_ENTRIES} entries")),
        };
    }
    Ok(len)
}

fn check_sites(sites: &[f64]) -> Result<()> {
    if sites.is_empty() {
        return invalid("site set is empty");
    }
    if sites.iter().any(|s| !s.is_finite()) {
        return invalid("sites must be finite");
    }
    for (i, a) in sites.iter().enumerate() {
        if sites[i + 1..].contains(a) {
            return invalid(format!("duplicate site {a}"));
        }
    }
    Ok(())
}

impl DiscreteSymmetricMeasure {
    /// Validates a full table: nonnegative, normalized and symmetric.
    pub fn new(sites: Vec<f64>, n: usize, table: Vec<f64>) -> Result<Self> {
        check_sites(&sites)?;
        if n == 0 {
            return invalid("number of variables must be positive");
        }
        let len = table_len(sites.len(), n)?;
        if table.len() != len {
            return invalid(format!("table has {} entries, expected {len}", table.len()));
        }
        if table.iter().any(|p| !(*p >= 0.0)) {
            return invalid("table entries must be nonnegative");
        }
        let total: f64 = table.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return invalid(format!("table sums to {total}, expected 1"));
        }
        let m = Self { sites, n, table };
        for idx in 0..len {
            let c = m.canonical(idx);
            if (m.table[idx] - m.table[c]).abs() > SYMMETRY_TOLERANCE {
                return invalid(format!("table is not symmetric at tuple {:?}", m.decode(idx)));
            }
        }
        Ok(m)
    }

    /// Fills the table from a function of the tuple. The function is only
    /// evaluated on sorted tuples, so the result is symmetric bit for bit.
    pub fn from_symmetric_fn(sites: Vec<f64>, n: usize, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        check_sites(&sites)?;
        if n == 0 {
            return invalid("number of variables must be positive");
        }
        let len = table_len(sites.len(), n)?;
        let mut m = Self { sites, n, table: vec![0.0; len] };
        let mut digits = vec![0usize; n];
        for idx in 0..len {
            m.decode_into(idx, &mut digits);
            digits.sort_unstable();
            let c = m.encode(&digits);
            // sorted digits give the smallest index in the orbit
            m.table[idx] = if c == idx { f(&digits) } else { m.table[c] };
        }
        if m.table.iter().any(|p| !(*p >= 0.0)) {
            return invalid("table entries must be nonnegative");
        }
        let total: f64 = m.table.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return invalid(format!("table sums to {total}, expected 1"));
        }
        Ok(m)
    }

    /// `ρ^⊗n` for a law `probs` on the sites.
    pub fn product(sites: Vec<f64>, probs: &[f64], n: usize) -> Result<Self> {
        Self::mixture(sites, &[(1.0, probs.to_vec())], n)
    }

    /// `Σ_a w_a ρ_a^⊗n`.
    pub fn mixture(sites: Vec<f64>, components: &[(f64, Vec<f64>)], n: usize) -> Result<Self> {
        if components.is_empty() {
            return invalid("mixture needs at least one component");
        }
        for (w, p) in components {
            if p.len() != sites.len() {
                return invalid(format!("component has {} probabilities for {} sites", p.len(), sites.len()));
            }
            if !(*w >= 0.0) || p.iter().any(|q| !(*q >= 0.0)) {
                return invalid("mixture weights and probabilities must be nonnegative");
            }
        }
        Self::from_symmetric_fn(sites, n, |t| {
            components
                .iter()
                .map(|(w, p)| w * t.iter().map(|&s| p[s]).product::<f64>())
                .sum()
        })
    }

    /// Uniform law over the distinct rearrangements of `tuple` (site
    /// indices). `[0, 1]` gives `½δ₍₀,₁₎ + ½δ₍₁,₀₎`.
    pub fn permutations_of(sites: Vec<f64>, tuple: &[usize]) -> Result<Self> {
        if tuple.iter().any(|&s| s >= sites.len()) {
            return invalid("tuple refers to a missing site");
        }
        let mut target = tuple.to_vec();
        target.sort_unstable();
        let n = tuple.len();
        // number of distinct rearrangements = n! / Π(multiplicity!)
        let mut orbit = factorial(n);
        let mut i = 0;
        while i < n {
            let j = target[i..].iter().take_while(|&&s| s == target[i]).count();
            orbit /= factorial(j);
            i += j;
        }
        Self::from_symmetric_fn(sites, n, |t| if t == target.as_slice() { 1.0 / orbit } else { 0.0 })
    }

    /// Averages an arbitrary table over all permutations of its variables.
    pub fn symmetrize(sites: Vec<f64>, n: usize, table: &[f64]) -> Result<Self> {
        let k = sites.len();
        let len = table_len(k, n)?;
        if table.len() != len {
            return invalid(format!("table has {} entries, expected {len}", table.len()));
        }
        let mut orbit_sum: BTreeMap<Vec<usize>, (f64, usize)> = BTreeMap::new();
        let mut digits = vec![0usize; n];
        for (idx, p) in table.iter().enumerate() {
            decode_digits(idx, k, &mut digits);
            let mut key = digits.clone();
            key.sort_unstable();
            let e = orbit_sum.entry(key).or_insert((0.0, 0));
            e.0 += p;
            e.1 += 1;
        }
        Self::from_symmetric_fn(sites, n, |t| {
            let (s, c) = orbit_sum[t];
            s / c as f64
        })
    }

    pub fn sites(&self) -> &[f64] {
        &self.sites
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn k(&self) -> usize {
        self.sites.len()
    }

    pub fn prob(&self, tuple: &[usize]) -> f64 {
        self.table[self.encode(tuple)]
    }

    pub fn encode(&self, tuple: &[usize]) -> usize {
        tuple.iter().fold(0, |acc, &d| acc * self.k() + d)
    }

    pub fn decode(&self, idx: usize) -> Vec<usize> {
        let mut d = vec![0; self.n];
        self.decode_into(idx, &mut d);
        d
    }

    fn decode_into(&self, idx: usize, out: &mut [usize]) {
        decode_digits(idx, self.k(), out)
    }

    fn canonical(&self, idx: usize) -> usize {
        let mut d = self.decode(idx);
        d.sort_unstable();
        self.encode(&d)
    }

    /// `Σ|p − q|` between tables on the same sites and arity.
    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        if self.sites != other.sites || self.n != other.n {
            return invalid("tables live on different state spaces");
        }
        Ok(self.table.iter().zip(&other.table).map(|(p, q)| (p - q).abs()).sum())
    }
}

fn decode_digits(mut idx: usize, k: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = idx % k;
        idx /= k;
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `N!/((N−n)!·N^n)`: the fraction of maps `{1..n} → {1..N}` that are
/// injective. It is the weight of `μ^N_n` inside `(μ̂^N)^n`.
pub fn injective_fraction(big_n: usize, n: usize) -> f64 {
    if n > big_n {
        return 0.0;
    }
    (0..n).map(|i| (big_n - i) as f64 / big_n as f64).product()
}

/// The `n`-variable marginal, summing out the last `m.n − n` variables.
pub fn marginal(m: &DiscreteSymmetricMeasure, n: usize) -> Result<DiscreteSymmetricMeasure> {
    if n == 0 || n > m.n {
        return invalid(format!("marginal order {n} must lie in 1..={}", m.n));
    }
    let block = table_len(m.k(), m.n - n)?;
    let table = m.table.chunks_exact(block).map(|c| c.iter().sum()).collect();
    Ok(DiscreteSymmetricMeasure { sites: m.sites.clone(), n, table })
}

/// Exact pushforward of `m` under the empirical lift `T^N`: tuples are
/// grouped by the multiset of their entries.
pub fn discrete_empirical_pushforward(m: &DiscreteSymmetricMeasure) -> MetaMeasure {
    let mut groups: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut digits = vec![0usize; m.n];
    for (idx, &p) in m.table.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        m.decode_into(idx, &mut digits);
        let mut key = digits.clone();
        key.sort_unstable();
        *groups.entry(key).or_insert(0.0) += p;
    }
    let total: f64 = groups.values().sum();
    let (weights, atoms) = groups
        .into_iter()
        .map(|(key, w)| {
            let atoms = key.iter().map(|&s| m.sites[s]).collect();
            (w / total, Measure::from(EmpiricalMeasure::new(atoms).expect("sites are finite")))
        })
        .unzip();
    MetaMeasure::new(weights, atoms).expect("pushforward of a normalized table is normalized")
}

/// `∫ ρ^⊗n dX(ρ)` for a meta-measure whose atoms are empirical measures
/// supported on `sites`.
pub fn tensor_lift(x: &MetaMeasure, sites: &[f64], n: usize) -> Result<DiscreteSymmetricMeasure> {
    check_sites(sites)?;
    let mut laws = Vec::with_capacity(x.len());
    for (w, atom) in x.iter() {
        let Measure::Empirical(e) = atom else {
            return invalid("tensor lift needs finitely supported (empirical) atoms");
        };
        let mut probs = vec![0.0; sites.len()];
        let unit = 1.0 / e.len() as f64;
        for a in e.atoms() {
            let Some(s) = sites.iter().position(|s| (s - a).abs() <= 1e-12) else {
                return invalid(format!("atom at {a} is not one of the sites {sites:?}"));
            };
            probs[s] += unit;
        }
        laws.push((w, probs));
    }
    DiscreteSymmetricMeasure::mixture(sites.to_vec(), &laws, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uniform01(n: usize) -> DiscreteSymmetricMeasure {
        DiscreteSymmetricMeasure::product(vec![0.0, 1.0], &[0.5, 0.5], n).unwrap()
    }

    fn swap01() -> DiscreteSymmetricMeasure {
        DiscreteSymmetricMeasure::permutations_of(vec![0.0, 1.0], &[0, 1]).unwrap()
    }

    /// `(μ̂^N)^n` by summing `Π_j (#{i: z_i = t_j}/N)` over tuples `z`.
    fn empirical_moment_oracle(m: &DiscreteSymmetricMeasure, n: usize) -> Vec<f64> {
        let k = m.k();
        let len = k.pow(n as u32);
        let mut out = vec![0.0; len];
        for idx in 0..m.table().len() {
            let z = m.decode(idx);
            let p = m.table()[idx];
            let mut t = vec![0usize; n];
            for (j, slot) in out.iter_mut().enumerate() {
                decode_digits(j, k, &mut t);
                let f: f64 = t
                    .iter()
                    .map(|s| z.iter().filter(|zi| *zi == s).count() as f64 / m.n() as f64)
                    .product();
                *slot += p * f;
            }
        }
        out
    }

    #[test]
    fn rejects_asymmetric_and_oversized() {
        assert!(DiscreteSymmetricMeasure::new(vec![0.0, 1.0], 2, vec![0.0, 1.0, 0.0, 0.0]).is_err());
        assert!(DiscreteSymmetricMeasure::new(vec![0.0, 0.0], 1, vec![0.5, 0.5]).is_err());
        assert!(DiscreteSymmetricMeasure::product(vec![0.0, 1.0, 2.0], &[1.0, 0.0, 0.0], 15).is_err());
        assert!(DiscreteSymmetricMeasure::new(vec![0.0, 1.0], 2, vec![0.5, 0.0, 0.0, 0.4]).is_err());
    }

    #[test]
    fn marginal_examples() {
        let m = marginal(&uniform01(2), 1).unwrap();
        assert_eq!(m.table(), &[0.5, 0.5]);
        let m = marginal(&swap01(), 1).unwrap();
        assert_eq!(m.table(), &[0.5, 0.5]);
        assert_eq!(marginal(&swap01(), 2).unwrap(), swap01());
        assert!(marginal(&swap01(), 3).is_err());
        assert!(marginal(&swap01(), 0).is_err());
    }

    #[test]
    fn pushforward_examples() {
        let dirac = DiscreteSymmetricMeasure::product(vec![0.0, 1.0], &[1.0, 0.0], 2).unwrap();
        let x = discrete_empirical_pushforward(&dirac);
        assert_eq!(x.weights(), &[1.0]);
        assert_eq!(x.atoms()[0], Measure::Empirical(EmpiricalMeasure::new(vec![0.0, 0.0]).unwrap()));

        let x = discrete_empirical_pushforward(&swap01());
        assert_eq!(x.weights(), &[1.0]);
        assert_eq!(x.atoms()[0], Measure::Empirical(EmpiricalMeasure::new(vec![0.0, 1.0]).unwrap()));

        let x = discrete_empirical_pushforward(&uniform01(2));
        assert_eq!(x.weights(), &[0.25, 0.5, 0.25]);
        let atoms: Vec<_> = x
            .atoms()
            .iter()
            .map(|a| match a {
                Measure::Empirical(e) => e.atoms().to_vec(),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(atoms, vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
    }

    #[test]
    fn tensor_lift_examples() {
        let half = Measure::from(EmpiricalMeasure::new(vec![0.0, 1.0]).unwrap());
        let lifted = tensor_lift(&MetaMeasure::dirac(half), &[0.0, 1.0], 2).unwrap();
        assert_eq!(lifted, uniform01(2));

        let d0 = Measure::from(EmpiricalMeasure::dirac(0.0).unwrap());
        let d1 = Measure::from(EmpiricalMeasure::dirac(1.0).unwrap());
        let x = MetaMeasure::new(vec![0.5, 0.5], vec![d0.clone(), d1.clone()]).unwrap();
        assert_eq!(tensor_lift(&x, &[0.0, 1.0], 2).unwrap().table(), &[0.5, 0.0, 0.0, 0.5]);
        // n = 1 gives the mean measure
        assert_eq!(tensor_lift(&x, &[0.0, 1.0], 1).unwrap().table(), &[0.5, 0.5]);
        assert!(tensor_lift(&x, &[0.0, 2.0], 2).is_err());
        let grid = Measure::from(crate::measures::GridDensity::uniform(0.0, 1.0, 4).unwrap());
        assert!(tensor_lift(&MetaMeasure::dirac(grid), &[0.0, 1.0], 2).is_err());
    }

    #[test]
    fn injective_fraction_counts_maps() {
        for big_n in 1..=5usize {
            for n in 1..=big_n {
                let total = big_n.pow(n as u32);
                let injective = (0..total)
                    .filter(|&g| {
                        let mut d = vec![0; n];
                        decode_digits(g, big_n, &mut d);
                        let mut s = d.clone();
                        s.sort_unstable();
                        s.dedup();
                        s.len() == n
                    })
                    .count();
                assert!((injective_fraction(big_n, n) - injective as f64 / total as f64).abs() < 1e-15);
            }
        }
        assert_eq!(injective_fraction(2, 2), 0.5);
    }

    fn arb_measure() -> impl Strategy<Value = DiscreteSymmetricMeasure> {
        (1usize..=3, 1usize..=5, prop::collection::vec((1u32..8, prop::collection::vec(0u32..4, 3)), 1..3))
            .prop_filter_map("degenerate component", |(k, n, comps)| {
                let comps: Vec<(f64, Vec<f64>)> = comps
                    .into_iter()
                    .map(|(w, p)| (w as f64, p[..k].iter().map(|&q| q as f64).collect::<Vec<_>>()))
                    .filter(|(_, p)| p.iter().sum::<f64>() > 0.0)
                    .collect();
                if comps.is_empty() {
                    return None;
                }
                let wsum: f64 = comps.iter().map(|c| c.0).sum();
                let comps: Vec<_> = comps
                    .into_iter()
                    .map(|(w, p)| {
                        let s: f64 = p.iter().sum();
                        (w / wsum, p.into_iter().map(|q| q / s).collect())
                    })
                    .collect();
                let sites = (0..k).map(|i| i as f64 * 0.5).collect();
                DiscreteSymmetricMeasure::mixture(sites, &comps, n).ok()
            })
    }

    proptest! {
        #[test]
        fn marginal_of_marginal(m in arb_measure()) {
            for a in 1..=m.n() {
                for b in 1..=a {
                    let twice = marginal(&marginal(&m, a).unwrap(), b).unwrap();
                    let once = marginal(&m, b).unwrap();
                    for (p, q) in twice.table().iter().zip(once.table()) {
                        prop_assert!((p - q).abs() <= 1e-14);
                    }
                }
            }
        }

        #[test]
        fn pushforward_keeps_mass_and_lift_matches_oracle(m in arb_measure()) {
            let x = discrete_empirical_pushforward(&m);
            prop_assert!((x.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for n in 1..=m.n() {
                let lifted = tensor_lift(&x, m.sites(), n).unwrap();
                let oracle = empirical_moment_oracle(&m, n);
                for (p, q) in lifted.table().iter().zip(&oracle) {
                    prop_assert!((p - q).abs() < 1e-12);
                }
                // symmetric bit for bit
                for idx in 0..lifted.table().len() {
                    prop_assert_eq!(lifted.table()[idx], lifted.table()[lifted.canonical(idx)]);
                }
            }
        }
    }

    #[test]
    fn dyadic_marginals_are_exact() {
        let m = DiscreteSymmetricMeasure::mixture(
            vec![0.0, 1.0, 2.0],
            &[(0.5, vec![0.5, 0.25, 0.25]), (0.5, vec![0.0, 0.5, 0.5])],
            4,
        )
        .unwrap();
        for a in 1..=4 {
            for b in 1..=a {
                assert_eq!(marginal(&marginal(&m, a).unwrap(), b).unwrap(), marginal(&m, b).unwrap());
            }
        }
    }

    #[test]
    fn symmetrize_averages_orbits() {
        let m = DiscreteSymmetricMeasure::symmetrize(vec![0.0, 1.0], 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(m, swap01());
    }
}
