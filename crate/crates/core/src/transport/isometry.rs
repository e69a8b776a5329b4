//! The lift `T^N` as a scaled isometry: `(1/N) d₂²(μ^N, ν^N) = 𝔇₂²(μ̂^N, ν̂^N)`.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::measures::{Measure, MetaMeasure, ParticleEnsemble};
use crate::transport::{hungarian, nested_d2, quantile::sorted_mean_square};

/// Both sides of the isometry for two sampled ensembles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsometryGap {
    /// `(1/N) d₂²` on `Ω^N` between the permutation-symmetrized sample laws,
    /// solved as an `M × M` assignment.
    pub lhs: f64,
    /// `𝔇₂²` between the meta-measures of replica empirical measures.
    pub rhs: f64,
    pub gap: f64,
    /// Same assignment with the raw cost `(1/N)|x − y|²` (no symmetrization).
    /// Always `≥ lhs`.
    pub unsymmetrized: f64,
}

pub fn isometry_gap(a: &ParticleEnsemble, b: &ParticleEnsemble) -> Result<IsometryGap> {
    if a.n_particles() != b.n_particles() || a.n_replicas() != b.n_replicas() {
        return invalid(format!(
            "ensembles differ in shape: {}×{} vs {}×{}",
            a.n_replicas(),
            a.n_particles(),
            b.n_replicas(),
            b.n_particles()
        ));
    }
    let m = a.n_replicas();
    let n = a.n_particles() as f64;
    let sorted = |e: &ParticleEnsemble| -> Vec<Vec<f64>> {
        e.configurations()
            .map(|c| {
                let mut s = c.to_vec();
                s.sort_by(f64::total_cmp);
                s
            })
            .collect()
    };
    let (sa, sb) = (sorted(a), sorted(b));

    let sym_cost: Vec<f64> = (0..m * m)
        .into_par_iter()
        .map(|k| sorted_mean_square(&sa[k / m], &sb[k % m]))
        .collect();
    let (_, sym_total) = hungarian(&sym_cost, m)?;
    let lhs = sym_total / m as f64;

    let raw_cost: Vec<f64> = (0..m * m)
        .into_par_iter()
        .map(|k| {
            let (x, y) = (a.configuration(k / m), b.configuration(k % m));
            x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>() / n
        })
        .collect();
    let (_, raw_total) = hungarian(&raw_cost, m)?;

    let lift = |e: &ParticleEnsemble| MetaMeasure::uniform(e.empiricals().into_iter().map(Measure::from).collect());
    let rhs = nested_d2(&lift(a)?, &lift(b)?)?.squared();

    Ok(IsometryGap { lhs, rhs, gap: lhs - rhs, unsymmetrized: raw_total / m as f64 })
}
