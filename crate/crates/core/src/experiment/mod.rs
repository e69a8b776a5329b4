//! Experiment configs and their execution.
//!
//! A config names one experiment, its potentials, domain, numerics and a
//! master seed. [`parse_config`] validates everything (including stability
//! bounds) before any computation; [`run`] executes and writes CSVs.

mod parse;

use std::fs;
use std::path::{Path, PathBuf};

use crate::csvio::{csv_err, fmt_real, writer_for};
use crate::error::{Error, Result};
use crate::harness::{
    all_required_pass, chaos_sweep, derive_seed, df_check, evi_budget, evi_lifted_check, evi_mf_check,
    evi_mf_gaussian_oracle, gamma_check, isometry_check, write_results, ChaosSweep, CheckResult,
};
use crate::mckean_vlasov::{self, ou_oracle, solve_with, PdeConfig};
use crate::measures::{sample_product, DiscreteSymmetricMeasure, GridDensity};
use crate::particles::{self, evolve, Domain, SdeConfig};
use crate::potentials::{free_energy_mf, Potential, PotentialKind};
use crate::transport::w2_quantile;
use parse::{parse_density, parse_density_with_moments, parse_ini, parse_table, Fields};

/// Tolerance on PDE moments against the Ornstein–Uhlenbeck oracle.
const OU_MOMENT_TOLERANCE: f64 = 1e-3;
/// Agreement required between PDE and closed-form EVI terms.
const EVI_ORACLE_AGREEMENT: f64 = 5e-3;
/// Tolerance on total mass after every PDE step.
const MASS_TOLERANCE: f64 = 1e-12;

/// Potentials, interval and grid shared by the dynamical experiments.
#[derive(Debug, Clone)]
pub struct Model {
    pub v: Potential,
    pub h: Potential,
    pub domain: (f64, f64),
    pub cells: usize,
}

impl Model {
    /// Convexity modulus of the mean-field free energy: `λ_V + min(λ_H, 0)`.
    pub fn mean_field_lambda(&self) -> f64 {
        self.v.lambda() + self.h.lambda().min(0.0)
    }

    /// Common modulus of `V` and `H`: `min(λ_V, λ_H)`.
    pub fn common_lambda(&self) -> f64 {
        self.v.lambda().min(self.h.lambda())
    }

    fn pde(&self, t_end: f64, dt: Option<f64>, snapshot_times: Vec<f64>) -> Result<PdeConfig> {
        let (v, h) = (self.v.clone(), self.h.clone());
        match dt {
            Some(dt) => PdeConfig::new(dt, t_end, v, h, self.domain, self.cells, snapshot_times),
            None => PdeConfig::auto(t_end, v, h, self.domain, self.cells, snapshot_times),
        }
    }

    fn sde(&self, dt: f64, t_end: f64, seed: u64, snapshot_times: Vec<f64>) -> Result<SdeConfig> {
        let domain = Domain::bounded(self.domain.0, self.domain.1)?;
        SdeConfig::new(dt, t_end, self.v.clone(), self.h.clone(), domain, seed, snapshot_times)
    }
}

#[derive(Debug, Clone)]
pub enum Experiment {
    Simulate { model: Model, rho0: GridDensity, n: usize, m: usize, sde: SdeConfig },
    SolvePde { model: Model, rho0: GridDensity, gaussian0: Option<(f64, f64)>, pde: PdeConfig },
    ChaosSweep { rho0: GridDensity, n_list: Vec<usize>, m: usize, t_list: Vec<f64>, sde: SdeConfig, pde: PdeConfig },
    EviCheck { pairs: Vec<(GaussianOrGrid, GaussianOrGrid)>, s: f64, t: f64, lambda: f64, pde: PdeConfig, ou: bool },
    EviLiftedCheck { ens_law: GridDensity, nu: GridDensity, n: usize, m: usize, s: f64, t: f64, lambda: f64, sde: SdeConfig, pde: PdeConfig },
    GammaCheck { model: Model, rho: GridDensity, n_list: Vec<usize> },
    DfCheck { table: DiscreteSymmetricMeasure, n: usize },
    IsometryCheck { a: GridDensity, b: GridDensity, n_list: Vec<usize>, m_list: Vec<usize> },
}

/// A projected density, remembering its Gaussian parameters when it has them.
#[derive(Debug, Clone)]
pub struct GaussianOrGrid {
    pub rho: GridDensity,
    pub gaussian: Option<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    pub experiment: Experiment,
}

const COMMON: [&str; 3] = ["experiment", "seed", "out_dir"];
const MODEL: [&str; 4] = ["V", "H", "domain", "cells"];

fn allowed(extra: &[&'static str], with_model: bool) -> Vec<&'static str> {
    let mut keys: Vec<&str> = COMMON.to_vec();
    if with_model {
        keys.extend(MODEL);
    }
    keys.extend(extra);
    keys
}

fn parse_model(f: &Fields) -> Result<Model> {
    let domain = f.interval("domain")?;
    let cells = f.count("cells")?;
    if cells < 2 {
        return Err(Error::Config("field 'cells': need at least 2 cells".into()));
    }
    let width = domain.1 - domain.0;
    let v = f.context("V", Potential::parse(f.raw("V")?, domain))?;
    let h = f.context("H", Potential::parse(f.raw("H")?, (-width, width)))?;
    if h.asymmetry(width) > 1e-12 * (1.0 + h.value(width).abs()) {
        return Err(Error::Config("field 'H': interaction potential must be even".into()));
    }
    Ok(Model { v, h, domain, cells })
}

fn optional<T>(f: &Fields, key: &str, get: impl Fn(&Fields, &str) -> Result<T>) -> Result<Option<T>> {
    if f.has(key) {
        get(f, key).map(Some)
    } else {
        Ok(None)
    }
}

fn sorted_times(f: &Fields, key: &str) -> Result<Vec<f64>> {
    let t = f.reals(key)?;
    if t.iter().any(|t| *t < 0.0) || t.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!("field '{key}': times must be ≥ 0 and strictly increasing")));
    }
    Ok(t)
}

fn increasing_counts(f: &Fields, key: &str) -> Result<Vec<usize>> {
    let n = f.counts(key)?;
    if n.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!("field '{key}': values must be strictly increasing")));
    }
    Ok(n)
}

/// Parses and validates a config.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    parse_config_with_seed(text, None)
}

/// Parses a config, replacing its master seed with `seed` when given. The
/// `seed` key may then be omitted; if present it must still be valid.
pub fn parse_config_with_seed(text: &str, seed: Option<u64>) -> Result<ExperimentConfig> {
    let f = Fields::new(parse_ini(text)?);
    let name = f.raw("experiment")?.to_string();
    let keys: Vec<&str> = match name.as_str() {
        "simulate" => allowed(&["rho0", "N", "M", "dt", "t_end", "snapshot_times"], true),
        "solve-pde" => allowed(&["rho0", "dt", "t_end", "snapshot_times"], true),
        "chaos-sweep" => allowed(&["rho0", "N_list", "M", "t_list", "dt", "pde_dt"], true),
        "evi-check" => allowed(&["rho1", "rho2", "means", "variances", "s", "t", "lambda", "dt"], true),
        "evi-lifted-check" => allowed(&["rho0", "nu", "N", "M", "s", "t", "lambda", "dt", "pde_dt"], true),
        "gamma-check" => allowed(&["rho", "N_list"], true),
        "df-check" => allowed(&["sites", "N", "n", "table"], false),
        "isometry-check" => allowed(&["domain", "cells", "rho_a", "rho_b", "N_list", "M_list"], false),
        other => {
            return Err(Error::Config(format!(
                "field 'experiment': unknown experiment '{other}'; expected one of simulate, solve-pde, \
                 chaos-sweep, evi-check, evi-lifted-check, gamma-check, df-check, isometry-check"
            )))
        }
    };
    f.restrict(&name, &keys)?;
    let seed = match seed {
        Some(s) => {
            optional(&f, "seed", Fields::seed)?;
            s
        }
        None => f.seed("seed")?,
    };
    let out_dir = optional(&f, "out_dir", |f, k| f.raw(k).map(PathBuf::from))?;
    let density = |model: &Model, key: &str| f.context(key, parse_density(f.raw(key)?, model.domain, model.cells));

    let experiment = match name.as_str() {
        "simulate" => {
            let model = parse_model(&f)?;
            let rho0 = density(&model, "rho0")?;
            let t_end = f.real("t_end")?;
            let times = optional(&f, "snapshot_times", sorted_times)?.unwrap_or_default();
            let sde = f.context("dt", model.sde(f.positive_real("dt")?, t_end, derive_seed(seed, "simulate/noise"), times))?;
            Experiment::Simulate { rho0, n: f.count("N")?, m: f.count("M")?, sde, model }
        }
        "solve-pde" => {
            let model = parse_model(&f)?;
            let (rho0, gaussian0) =
                f.context("rho0", parse_density_with_moments(f.raw("rho0")?, model.domain, model.cells))?;
            let times = optional(&f, "snapshot_times", sorted_times)?.unwrap_or_default();
            let dt = optional(&f, "dt", Fields::positive_real)?;
            let pde = f.context("dt", model.pde(f.real("t_end")?, dt, times))?;
            Experiment::SolvePde { model, rho0, gaussian0, pde }
        }
        "chaos-sweep" => {
            let model = parse_model(&f)?;
            let rho0 = density(&model, "rho0")?;
            let t_list = sorted_times(&f, "t_list")?;
            let n_list = increasing_counts(&f, "N_list")?;
            if n_list.len() < 2 {
                return Err(Error::Config("field 'N_list': need at least two values".into()));
            }
            let t_end = *t_list.last().expect("nonempty list");
            let sde = f.context("dt", model.sde(f.positive_real("dt")?, t_end, derive_seed(seed, "chaos-sweep"), vec![]))?;
            let pde = f.context("pde_dt", model.pde(t_end, optional(&f, "pde_dt", Fields::positive_real)?, vec![]))?;
            let m = f.count("M")?;
            if m < 2 {
                return Err(Error::Config("field 'M': need at least two replicas".into()));
            }
            Experiment::ChaosSweep { rho0, n_list, m, t_list, sde, pde }
        }
        "evi-check" => {
            let model = parse_model(&f)?;
            let (s, t) = (f.real("s")?, f.real("t")?);
            if !(s >= 0.0 && t > s) {
                return Err(Error::Config("fields 's', 't': need 0 ≤ s < t".into()));
            }
            let lambda = optional(&f, "lambda", Fields::real)?.unwrap_or(model.mean_field_lambda());
            let pairs = if f.has("means") || f.has("variances") {
                if f.has("rho1") || f.has("rho2") {
                    return Err(Error::Config("fields 'rho1'/'rho2' and 'means'/'variances' are exclusive".into()));
                }
                let (means, vars) = (f.reals("means")?, f.reals("variances")?);
                if means.len() != vars.len() || vars.iter().any(|v| *v <= 0.0) {
                    return Err(Error::Config("fields 'means', 'variances': need equal lengths and variances > 0".into()));
                }
                let family = means
                    .iter()
                    .zip(&vars)
                    .map(|(&m, &v)| {
                        let rho = f.context("means", GridDensity::gaussian(model.domain.0, model.domain.1, model.cells, m, v))?;
                        Ok(GaussianOrGrid { rho, gaussian: Some((m, v)) })
                    })
                    .collect::<Result<Vec<_>>>()?;
                family.iter().flat_map(|a| family.iter().map(move |b| (a.clone(), b.clone()))).collect()
            } else {
                let read = |key: &str| -> Result<GaussianOrGrid> {
                    let (rho, gaussian) =
                        f.context(key, parse_density_with_moments(f.raw(key)?, model.domain, model.cells))?;
                    Ok(GaussianOrGrid { rho, gaussian })
                };
                vec![(read("rho1")?, read("rho2")?)]
            };
            let ou = model.v.kind() == &PotentialKind::Quadratic(1.0) && model.h.is_zero();
            let pde = f.context("dt", model.pde(t - s, optional(&f, "dt", Fields::positive_real)?, vec![]))?;
            Experiment::EviCheck { pairs, s, t, lambda, pde, ou }
        }
        "evi-lifted-check" => {
            let model = parse_model(&f)?;
            let (s, t) = (f.real("s")?, f.real("t")?);
            if !(s >= 0.0 && t >= s) {
                return Err(Error::Config("fields 's', 't': need 0 ≤ s ≤ t".into()));
            }
            let ens_law = density(&model, "rho0")?;
            let nu = density(&model, "nu")?;
            let lambda = optional(&f, "lambda", Fields::real)?.unwrap_or(model.common_lambda());
            let sde = f.context("dt", model.sde(f.positive_real("dt")?, t, derive_seed(seed, "evi-lifted/noise"), vec![]))?;
            let pde = f.context("pde_dt", model.pde(t, optional(&f, "pde_dt", Fields::positive_real)?, vec![]))?;
            Experiment::EviLiftedCheck { ens_law, nu, n: f.count("N")?, m: f.count("M")?, s, t, lambda, sde, pde }
        }
        "gamma-check" => {
            let model = parse_model(&f)?;
            let rho = density(&model, "rho")?;
            Experiment::GammaCheck { rho, n_list: increasing_counts(&f, "N_list")?, model }
        }
        "df-check" => {
            let sites = f.reals("sites")?;
            let (big_n, n) = (f.count("N")?, f.count("n")?);
            if n > big_n {
                return Err(Error::Config(format!("field 'n': must not exceed N = {big_n}")));
            }
            let table = f.context("table", parse_table(f.raw("table")?, &sites, big_n))?;
            Experiment::DfCheck { table, n }
        }
        "isometry-check" => {
            let domain = f.interval("domain")?;
            let cells = f.count("cells")?;
            let a = f.context("rho_a", parse_density(f.raw("rho_a")?, domain, cells))?;
            let b = f.context("rho_b", parse_density(f.raw("rho_b")?, domain, cells))?;
            Experiment::IsometryCheck { a, b, n_list: f.counts("N_list")?, m_list: increasing_counts(&f, "M_list")? }
        }
        _ => unreachable!("experiment names are matched above"),
    };
    Ok(ExperimentConfig { name, seed, out_dir, experiment })
}

/// Reads and parses a config file.
pub fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
    parse_config_with_seed(&text, seed)
}

/// Checks and files produced by [`run`].
#[derive(Debug, Clone)]
pub struct Outcome {
    pub results: Vec<CheckResult>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    /// 0 iff every non-conditional check passed.
    pub fn exit_code(&self) -> i32 {
        if all_required_pass(&self.results) {
            0
        } else {
            1
        }
    }
}

/// Artifacts computed by an experiment, written only after it finishes.
enum Artifact {
    Particles(Vec<(f64, crate::measures::ParticleEnsemble)>),
    Densities(Vec<(f64, GridDensity)>),
    Chaos(ChaosSweep),
}

/// Runs the experiment and writes `results.csv` plus its snapshot CSVs to
/// `out_dir`.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Outcome> {
    let (results, artifacts) = execute(cfg)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::Io { path: out_dir.to_path_buf(), source: e })?;
    let mut files = Vec::new();
    for artifact in &artifacts {
        let path = match artifact {
            Artifact::Particles(snaps) => {
                let p = out_dir.join("particles.csv");
                particles::write_snapshots(&p, snaps)?;
                p
            }
            Artifact::Densities(snaps) => {
                let p = out_dir.join("pde.csv");
                mckean_vlasov::write_snapshots(&p, snaps)?;
                p
            }
            Artifact::Chaos(sweep) => {
                let p = out_dir.join("chaos.csv");
                write_chaos(&p, sweep)?;
                p
            }
        };
        files.push(path);
    }
    let results_path = out_dir.join("results.csv");
    write_results(&results_path, &results)?;
    files.push(results_path);
    Ok(Outcome { results, files })
}

fn write_chaos(path: &Path, sweep: &ChaosSweep) -> Result<()> {
    let mut w = writer_for(path)?;
    w.write_record(["N", "t", "replicas", "c", "stderr", "static_c", "static_stderr"]).map_err(|e| csv_err(path, e))?;
    for p in &sweep.points {
        let (sc, ss) = p.static_c.map_or((String::new(), String::new()), |(c, s)| (fmt_real(c), fmt_real(s)));
        w.write_record([p.n.to_string(), fmt_real(p.t), p.replicas.to_string(), fmt_real(p.c), fmt_real(p.stderr), sc, ss])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

fn execute(cfg: &ExperimentConfig) -> Result<(Vec<CheckResult>, Vec<Artifact>)> {
    let seed = cfg.seed;
    match &cfg.experiment {
        Experiment::Simulate { model, rho0, n, m, sde } => {
            let ens0 = sample_product(rho0, *n, *m, derive_seed(seed, "simulate/sample"))?;
            let snaps = evolve(&ens0, sde)?;
            let outside = snaps
                .iter()
                .flat_map(|(_, e)| e.positions().iter())
                .filter(|x| !(model.domain.0..=model.domain.1).contains(*x))
                .count();
            let check = CheckResult::identity("simulate.within_domain", outside as f64, 0.0, 0.0)
                .with("snapshots", snaps.len())
                .with("N", *n)
                .with("M", *m);
            Ok((vec![check], vec![Artifact::Particles(snaps)]))
        }
        Experiment::SolvePde { model, rho0, gaussian0, pde } => {
            let mut worst_mass: f64 = 0.0;
            let mut worst_rise = f64::NEG_INFINITY;
            let mut last = f64::NAN;
            let snaps = solve_with(rho0, pde, |k, rho| {
                worst_mass = worst_mass.max((rho.mass().iter().sum::<f64>() - 1.0).abs());
                let f = free_energy_mf(rho, &model.v, &model.h).total;
                if k > 0 {
                    worst_rise = worst_rise.max(f - last);
                }
                last = f;
                Ok(())
            })?;
            let mut checks = vec![
                CheckResult::identity("pde.mass_conservation", worst_mass, 0.0, MASS_TOLERANCE).with("dt", pde.dt),
                CheckResult::inequality("pde.free_energy_nonincreasing", worst_rise.max(f64::MIN), 0.0, evi_budget(pde.dx()))
                    .with("dt", pde.dt)
                    .with("dx", pde.dx()),
            ];
            if let (Some((m0, v0)), PotentialKind::Quadratic(a), true) = (gaussian0, model.v.kind(), model.h.is_zero()) {
                if *a == 1.0 {
                    for (t, rho) in &snaps {
                        let (m, v) = ou_oracle(*m0, *v0, *t)?;
                        let target = pde.gaussian(m, v)?;
                        checks.push(CheckResult::identity(format!("pde.ou_mean(t={t})"), rho.mean(), m, OU_MOMENT_TOLERANCE));
                        checks.push(CheckResult::identity(format!("pde.ou_variance(t={t})"), rho.variance(), v, OU_MOMENT_TOLERANCE));
                        checks.push(CheckResult::inequality(
                            format!("pde.ou_d2(t={t})"),
                            w2_quantile(&rho.clone().into(), &target.into()),
                            0.0,
                            5e-3,
                        ));
                    }
                }
            }
            Ok((checks, vec![Artifact::Densities(snaps)]))
        }
        Experiment::ChaosSweep { rho0, n_list, m, t_list, sde, pde } => {
            let sweep = chaos_sweep(rho0, n_list, *m, t_list, sde, pde)?;
            let checks = sweep.checks.clone();
            Ok((checks, vec![Artifact::Chaos(sweep)]))
        }
        Experiment::EviCheck { pairs, s, t, lambda, pde, ou } => {
            let mut checks = Vec::new();
            for (i, (a, b)) in pairs.iter().enumerate() {
                let r = evi_mf_check(&a.rho, &b.rho, *s, *t, *lambda, pde)?;
                let label = format!("evi_mf[{i}]");
                if let (true, Some(ga), Some(gb)) = (*ou, a.gaussian, b.gaussian) {
                    let o = evi_mf_gaussian_oracle(ga, gb, *s, *t, *lambda)?;
                    let gap = (r.lhs - o.lhs).abs().max((r.rhs - o.rhs).abs());
                    checks.push(CheckResult::identity(format!("{label}.oracle_agreement"), gap, 0.0, EVI_ORACLE_AGREEMENT));
                    checks.push(CheckResult { name: format!("{label}.oracle"), ..o });
                }
                checks.push(CheckResult { name: label, ..r });
            }
            Ok((checks, vec![]))
        }
        Experiment::EviLiftedCheck { ens_law, nu, n, m, s, t, lambda, sde, pde } => {
            let ens0 = sample_product(ens_law, *n, *m, derive_seed(seed, "evi-lifted/sample"))?;
            let r = evi_lifted_check(&ens0, nu, *s, *t, *lambda, sde, ens_law, pde)?;
            Ok((vec![r], vec![]))
        }
        Experiment::GammaCheck { model, rho, n_list } => Ok((gamma_check(rho, n_list, &model.v, &model.h)?, vec![])),
        Experiment::DfCheck { table, n } => Ok((vec![df_check(table, *n)?], vec![])),
        Experiment::IsometryCheck { a, b, n_list, m_list } => {
            Ok((isometry_check(a, b, n_list, m_list, derive_seed(seed, "isometry-check"))?, vec![]))
        }
    }
}
