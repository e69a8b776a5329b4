//! Euler–Maruyama for the interacting particle system
//! `dX^i = −V'(X^i) dt − (1/N) Σ_j H'(X^i − X^j) dt + √2 dB^i`
//! with reflecting boundaries.

use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::csvio::{csv_err, fmt_real, writer_for};
use crate::error::{invalid, Error, Result};
use crate::measures::ParticleEnsemble;
use crate::potentials::Potential;

/// Bound on `dt · Lip(drift)` accepted by [`SdeConfig`].
pub const STABILITY_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Bounded { left: f64, right: f64 },
    Unbounded,
}

impl Domain {
    pub fn bounded(left: f64, right: f64) -> Result<Self> {
        if !(right > left) || !left.is_finite() || !right.is_finite() {
            return invalid(format!("domain [{left}, {right}] is empty or infinite"));
        }
        Ok(Domain::Bounded { left, right })
    }

    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Domain::Bounded { left, right } => (left..=right).contains(&x),
            Domain::Unbounded => x.is_finite(),
        }
    }

    /// Folds `x` back into the domain by repeated mirror reflection.
    pub fn reflect(&self, x: f64) -> f64 {
        match *self {
            Domain::Bounded { left, right } => {
                if (left..=right).contains(&x) {
                    return x;
                }
                let width = right - left;
                let y = (x - left).rem_euclid(2.0 * width);
                (left + if y > width { 2.0 * width - y } else { y }).clamp(left, right)
            }
            Domain::Unbounded => x,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdeConfig {
    pub dt: f64,
    pub t_end: f64,
    pub v: Potential,
    pub h: Potential,
    pub domain: Domain,
    pub seed: u64,
    /// Times at which [`evolve`] records the ensemble; empty means `t_end` only.
    pub snapshot_times: Vec<f64>,
}

impl SdeConfig {
    /// Validates time stepping and, on bounded domains, the stability bound.
    pub fn new(
        dt: f64,
        t_end: f64,
        v: Potential,
        h: Potential,
        domain: Domain,
        seed: u64,
        snapshot_times: Vec<f64>,
    ) -> Result<Self> {
        let cfg = Self { dt, t_end, v, h, domain, seed, snapshot_times };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::Config(format!("t_end must be ≥ 0, got {}", self.t_end)));
        }
        if self.t_end > 0.0 && self.dt > self.t_end {
            return Err(Error::Config(format!("dt = {} exceeds t_end = {}", self.dt, self.t_end)));
        }
        if self.snapshot_times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Config("snapshot_times must be sorted".into()));
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| !(**t >= 0.0 && **t <= self.t_end)) {
            return Err(Error::Config(format!("snapshot time {t} outside [0, {}]", self.t_end)));
        }
        if let Domain::Bounded { left, right } = self.domain {
            self.check_stability(left, right)?;
        }
        Ok(())
    }

    /// `dt · (Lip V' + Lip H')` with Lipschitz constants scanned on
    /// `[left, right]` and on the difference range `[−w, w]`.
    pub fn stability_number(&self, left: f64, right: f64) -> f64 {
        let w = right - left;
        self.dt * (self.v.gradient_lipschitz(left, right) + self.h.gradient_lipschitz(-w, w))
    }

    fn check_stability(&self, left: f64, right: f64) -> Result<()> {
        let s = self.stability_number(left, right);
        if !(s < STABILITY_LIMIT) {
            return Err(Error::Stability(format!(
                "dt · Lip(drift) = {s:.4} on [{left}, {right}] must stay below {STABILITY_LIMIT}; reduce dt"
            )));
        }
        Ok(())
    }

    /// Number of steps to reach `t`, rounding to the nearest grid time.
    pub fn steps_to(&self, t: f64) -> u64 {
        (t / self.dt).round() as u64
    }
}

/// Standard normal for `(replica, label)` at `step`, from a counter-based
/// ChaCha stream so that any step can be regenerated independently.
fn noise(base: &ChaCha8Rng, replica: usize, label: usize, step: u64) -> f64 {
    let mut rng = base.clone();
    rng.set_stream(((replica as u64) << 32) | label as u64);
    rng.set_word_pos(u128::from(step) * 4);
    let u1 = ((rng.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64);
    let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Interaction drift `(1/N) Σ_j H'(x_i − x_j)` for every particle. Sums run
/// over the sorted configuration so the result does not depend on particle
/// order.
fn interaction_drift(config: &[f64], h: &Potential) -> Vec<f64> {
    let n = config.len();
    if h.is_zero() || n == 1 {
        return vec![0.0; n];
    }
    let mut sorted = config.to_vec();
    sorted.sort_by(f64::total_cmp);
    let inv_n = 1.0 / n as f64;
    if let Some(a) = h.quadratic_coefficient() {
        let total: f64 = sorted.iter().sum();
        return config.iter().map(|x| a * inv_n * (n as f64 * x - total)).collect();
    }
    let self_term = h.gradient(0.0);
    config
        .iter()
        .map(|x| (sorted.iter().map(|y| h.gradient(x - y)).sum::<f64>() - self_term) * inv_n)
        .collect()
}

fn advance_replica(
    config: &mut [f64],
    replica: usize,
    labels: &[usize],
    cfg: &SdeConfig,
    base: &ChaCha8Rng,
    step_index: u64,
) -> Result<()> {
    let inter = interaction_drift(config, &cfg.h);
    let amp = (2.0 * cfg.dt).sqrt();
    for (i, x) in config.iter_mut().enumerate() {
        let drift = -cfg.v.gradient(*x) - inter[i];
        let next = *x + drift * cfg.dt + amp * noise(base, replica, labels[i], step_index);
        if !next.is_finite() {
            return Err(Error::Simulation(format!(
                "replica {replica}, particle {i}: position {x} with confinement force {} and interaction force {} \
                 produced {next} at step {step_index}",
                -cfg.v.gradient(*x),
                -inter[i]
            )));
        }
        *x = cfg.domain.reflect(next);
    }
    Ok(())
}

/// One Euler–Maruyama step; particle `i` draws from noise stream `i`.
pub fn step(ensemble: &ParticleEnsemble, cfg: &SdeConfig, step_index: u64) -> Result<ParticleEnsemble> {
    let labels: Vec<usize> = (0..ensemble.n_particles()).collect();
    step_with_labels(ensemble, cfg, step_index, &labels)
}

/// One step with an explicit noise stream per particle slot (shared by all
/// replicas). Permuting a configuration together with its labels permutes
/// the result exactly.
pub fn step_with_labels(
    ensemble: &ParticleEnsemble,
    cfg: &SdeConfig,
    step_index: u64,
    labels: &[usize],
) -> Result<ParticleEnsemble> {
    if labels.len() != ensemble.n_particles() {
        return invalid(format!("{} labels for {} particles", labels.len(), ensemble.n_particles()));
    }
    if let Some(x) = ensemble.positions().iter().find(|x| !cfg.domain.contains(**x)) {
        return invalid(format!("position {x} lies outside the domain"));
    }
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut positions = ensemble.positions().to_vec();
    positions
        .par_chunks_mut(ensemble.n_particles())
        .enumerate()
        .try_for_each(|(r, config)| advance_replica(config, r, labels, cfg, &base, step_index))?;
    Ok(ensemble.with_positions(positions))
}

/// Runs the dynamics to `cfg.t_end`, recording the ensemble at the grid
/// time nearest each requested snapshot.
pub fn evolve(ensemble: &ParticleEnsemble, cfg: &SdeConfig) -> Result<Vec<(f64, ParticleEnsemble)>> {
    cfg.validate()?;
    if let Domain::Unbounded = cfg.domain {
        // No domain to scan: use the hull of the initial data, widened.
        let (lo, hi) = ensemble
            .positions()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(*x), h.max(*x)));
        cfg.check_stability(lo - 1.0, hi + 1.0)?;
    }
    let times = if cfg.snapshot_times.is_empty() { vec![cfg.t_end] } else { cfg.snapshot_times.clone() };
    let targets: Vec<u64> = times.iter().map(|t| cfg.steps_to(*t)).collect();
    let total = cfg.steps_to(cfg.t_end).max(*targets.last().unwrap_or(&0));

    let mut out = Vec::with_capacity(targets.len());
    let mut current = ensemble.clone();
    let mut next_target = 0;
    for k in 0..=total {
        while next_target < targets.len() && targets[next_target] == k {
            out.push((k as f64 * cfg.dt, current.clone()));
            next_target += 1;
        }
        if k < total {
            current = step(&current, cfg, k)?;
        }
    }
    Ok(out)
}

/// Writes snapshots as `time,replica,particle,position`.
pub fn write_snapshots(path: &Path, snapshots: &[(f64, ParticleEnsemble)]) -> Result<()> {
    let mut w = writer_for(path)?;
    w.write_record(["time", "replica", "particle", "position"]).map_err(|e| csv_err(path, e))?;
    for (t, ens) in snapshots {
        let time = fmt_real(*t);
        for (r, config) in ens.configurations().enumerate() {
            for (i, x) in config.iter().enumerate() {
                w.write_record([time.as_str(), &r.to_string(), &i.to_string(), &fmt_real(*x)])
                    .map_err(|e| csv_err(path, e))?;
            }
        }
    }
    w.flush().map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}
