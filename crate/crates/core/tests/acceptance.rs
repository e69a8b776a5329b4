//! Acceptance suite: one PASS/FAIL line per criterion, each against an
//! independent oracle (brute force, closed form or exhaustive enumeration).
//!
//! Runs as a plain binary (`harness = false`) so the verdict lines are always
//! printed; the process exits nonzero if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use meanfield_core::experiment::{load_config, run};
use meanfield_core::harness::{
    chaos_sweep, df_check, evi_budget, evi_mf_check, evi_mf_gaussian_oracle, gamma_check, isometry_check, CheckResult,
};
use meanfield_core::mckean_vlasov::{ou_oracle, solve_with, PdeConfig};
use meanfield_core::measures::{DiscreteSymmetricMeasure, EmpiricalMeasure, GridDensity, Measure};
use meanfield_core::particles::{Domain, SdeConfig};
use meanfield_core::potentials::{
    convexity_modulus_estimate, free_energy_mf, hessian_quadratic_form, hessian_quadratic_form_fd, Potential,
};
use meanfield_core::transport::{w2_assignment_solver, w2_quantile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcome of one criterion: failures are collected, not raised, so every
/// criterion reports.
struct Verdict {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Self { failures: Vec::new(), notes: Vec::new() }
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn checks(&mut self, results: &[CheckResult]) {
        for r in results.iter().filter(|r| !r.passed && !r.conditional) {
            self.failures.push(r.summary_line());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

fn criterion(id: u32, title: &str, budget: Duration, body: impl FnOnce(&mut Verdict)) -> bool {
    let start = Instant::now();
    let mut v = Verdict::new();
    body(&mut v);
    let elapsed = start.elapsed();
    v.require(elapsed < budget, || format!("runtime {elapsed:.1?} exceeds {budget:?}"));
    let ok = v.failures.is_empty();
    println!("criterion {id}: {} {title} ({elapsed:.2?})", if ok { "PASS" } else { "FAIL" });
    for n in &v.notes {
        println!("    {n}");
    }
    for f in v.failures.iter().take(10) {
        println!("    failure: {f}");
    }
    if v.failures.len() > 10 {
        println!("    ... {} more failures", v.failures.len() - 10);
    }
    ok
}

fn quadratic(a: f64) -> Potential {
    Potential::quadratic(a).unwrap()
}

fn gaussian(domain: (f64, f64), cells: usize, m: f64, var: f64) -> GridDensity {
    GridDensity::gaussian(domain.0, domain.1, cells, m, var).unwrap()
}

/// Minimum of `(1/N) Σ (x_i − y_σ(i))²` over all permutations `σ` (Heap's
/// algorithm).
fn brute_force_matching(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let cost = |p: &[usize]| p.iter().enumerate().map(|(i, &j)| (x[i] - y[j]).powi(2)).sum::<f64>() / n as f64;
    let mut best = cost(&perm);
    let mut c = vec![0; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            perm.swap(if i % 2 == 0 { 0 } else { c[i] }, i);
            best = best.min(cost(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

fn c1_transport(v: &mut Verdict) {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(1..=8);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let quantile = w2_quantile(&EmpiricalMeasure::new(x.clone()).unwrap().into(), &EmpiricalMeasure::new(y.clone()).unwrap().into());
        let oracle = brute_force_matching(&x, &y).sqrt();
        worst = worst.max((quantile - oracle).abs());
    }
    v.require(worst <= 1e-12, || format!("quantile vs permutation brute force: {worst:e}"));
    let mut worst_solver: f64 = 0.0;
    for n in (1..=64).step_by(3) {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let quantile = w2_quantile(&EmpiricalMeasure::new(x.clone()).unwrap().into(), &EmpiricalMeasure::new(y.clone()).unwrap().into());
        worst_solver = worst_solver.max((quantile - w2_assignment_solver(&x, &y).unwrap()).abs());
    }
    v.require(worst_solver <= 1e-12, || format!("quantile vs assignment solver: {worst_solver:e}"));
    v.note(format!("max deviation: brute force {worst:.2e}, assignment solver {worst_solver:.2e}"));
}

fn c2_isometry(v: &mut Verdict) {
    let domain = (-6.0, 6.0);
    let a = gaussian(domain, 512, 0.0, 1.0);
    let b = gaussian(domain, 512, 1.0, 0.5);
    let results = isometry_check(&a, &b, &[2, 4], &[64, 128, 256], 202).unwrap();
    v.require(results.iter().any(|r| r.name.starts_with("isometry.single_replica")), || "no single-replica check".into());
    v.require(results.iter().any(|r| r.name.starts_with("isometry.relative")), || "no relative check".into());
    let worst = results.iter().filter(|r| r.name.starts_with("isometry.relative")).map(|r| r.lhs / r.rhs).fold(0.0, f64::max);
    v.note(format!("{} checks; largest |gap|/rhs at M=256: {worst:.2e}", results.len()));
    v.checks(&results);
}

/// Probability vectors on `k` sites with entries in `{0, 1/4, …, 1}`.
fn simplex_lattice(k: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    fn fill(prefix: &mut Vec<usize>, k: usize, left: usize, out: &mut Vec<Vec<f64>>) {
        if prefix.len() == k - 1 {
            let mut p: Vec<f64> = prefix.iter().map(|&q| q as f64 / 4.0).collect();
            p.push(left as f64 / 4.0);
            out.push(p);
            return;
        }
        for q in 0..=left {
            prefix.push(q);
            fill(prefix, k, left - q, out);
            prefix.pop();
        }
    }
    fill(&mut Vec::new(), k, 4, &mut out);
    out
}

/// `Σ |μ_n − Σ_x μ(x) (L_x)^⊗n|` computed from scratch: every full tuple `x`
/// contributes its empirical law `L_x` raised to the `n`-th power.
fn df_oracle(m: &DiscreteSymmetricMeasure, n: usize) -> f64 {
    let (k, big_n) = (m.k(), m.n());
    let size = k.pow(n as u32);
    let mut exact = vec![0.0; size];
    let mut lifted = vec![0.0; size];
    for idx in 0..m.table().len() {
        let p = m.table()[idx];
        if p == 0.0 {
            continue;
        }
        let x = m.decode(idx);
        let mut counts = vec![0.0; k];
        x.iter().for_each(|&s| counts[s] += 1.0 / big_n as f64);
        for (j, e) in exact.iter_mut().enumerate() {
            let y = digits(j, k, n);
            if y == x[..n] {
                *e += p;
            }
        }
        for (j, l) in lifted.iter_mut().enumerate() {
            *l += p * digits(j, k, n).iter().map(|&s| counts[s]).product::<f64>();
        }
    }
    exact.iter().zip(&lifted).map(|(a, b)| (a - b).abs()).sum()
}

fn digits(mut j: usize, k: usize, n: usize) -> Vec<usize> {
    let mut d = vec![0; n];
    for slot in d.iter_mut() {
        *slot = j % k;
        j /= k;
    }
    d
}

/// Injective maps `{1..n} → {1..N}` counted by enumeration, as a fraction.
fn injective_count_fraction(big_n: usize, n: usize) -> f64 {
    let total = big_n.pow(n as u32);
    let injective = (0..total)
        .filter(|&g| {
            let d = digits(g, big_n, n);
            (0..n).all(|i| (0..i).all(|j| d[i] != d[j]))
        })
        .count();
    injective as f64 / total as f64
}

fn c3_diaconis(v: &mut Verdict) {
    let mut checks = 0;
    let mut worst_oracle: f64 = 0.0;
    for k in 1..=3usize {
        let sites: Vec<f64> = (0..k).map(|s| s as f64).collect();
        let lattice = simplex_lattice(k);
        for big_n in 2..=6usize {
            let mut tables: Vec<DiscreteSymmetricMeasure> =
                lattice.iter().map(|p| DiscreteSymmetricMeasure::product(sites.clone(), p, big_n).unwrap()).collect();
            for (i, p) in lattice.iter().enumerate() {
                for q in &lattice[i + 1..] {
                    let comps = [(0.3, p.clone()), (0.7, q.clone())];
                    tables.push(DiscreteSymmetricMeasure::mixture(sites.clone(), &comps, big_n).unwrap());
                }
            }
            for n in 1..big_n {
                let coefficient = injective_count_fraction(big_n, n);
                for m in &tables {
                    let r = df_check(m, n).unwrap();
                    checks += 1;
                    let oracle = df_oracle(m, n);
                    worst_oracle = worst_oracle.max((oracle - r.lhs).abs());
                    v.require((oracle - r.lhs).abs() <= 1e-12, || format!("{}: lhs {} vs oracle {oracle}", r.name, r.lhs));
                    let reported: f64 = r.metadata["decomposition_coefficient"].parse().unwrap();
                    v.require((reported - coefficient).abs() <= 1e-15, || {
                        format!("{}: coefficient {reported} vs counted {coefficient}", r.name)
                    });
                    let residual: f64 = r.metadata["decomposition_min_residual"].parse().unwrap();
                    v.require(residual >= -1e-12, || format!("{}: negative decomposition residual {residual}", r.name));
                    v.checks(std::slice::from_ref(&r));
                }
            }
        }
    }
    // Tightness: on a law supported on one permutation class of distinct
    // values, some entry of the residual is exactly zero, so no larger
    // coefficient admits a nonnegative remainder.
    for big_n in 2..=3usize {
        let tuple: Vec<usize> = (0..big_n).collect();
        let m = DiscreteSymmetricMeasure::permutations_of((0..big_n).map(|s| s as f64).collect(), &tuple).unwrap();
        for n in 1..big_n {
            let residual: f64 = df_check(&m, n).unwrap().metadata["decomposition_min_residual"].parse().unwrap();
            v.require(residual.abs() <= 1e-12, || format!("permutation law N={big_n}, n={n}: residual {residual}"));
        }
    }
    v.note(format!(
        "{checks} exhaustive checks; max |lhs − oracle| {worst_oracle:.2e}; coefficient = N!/((N−n)!·N^n) confirmed by counting injective maps"
    ));
}

fn c4_hessian(v: &mut Verdict) {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let (left, right) = (-2.0, 2.0);
    let width = right - left;
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let n = rng.random_range(1..=16);
        let a = rng.random_range(-1.0..2.0);
        let b = rng.random_range(-1.0..2.0);
        let (pv, ph) = match case % 4 {
            0 => (quadratic(a), quadratic(b)),
            1 => (Potential::double_well(a.abs() + 0.1, (left, right)).unwrap(), quadratic(b)),
            2 => (quadratic(a), Potential::double_well(b.abs() + 0.1, (-width, width)).unwrap()),
            _ => (
                Potential::double_well(a.abs() + 0.1, (left, right)).unwrap(),
                Potential::double_well(b.abs() + 0.1, (-width, width)).unwrap(),
            ),
        };
        let config: Vec<f64> = (0..n).map(|_| rng.random_range(left..right)).collect();
        let mut dir: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        dir.iter_mut().for_each(|d| *d /= norm);
        let exact = hessian_quadratic_form(&config, &dir, &pv, &ph).unwrap();
        let fd = hessian_quadratic_form_fd(&config, &dir, &pv, &ph, 1e-3).unwrap();
        // Relative to max(|form|, |dir|² = 1) so near-zero forms are not
        // judged on roundoff alone.
        let rel = (exact - fd).abs() / exact.abs().max(1.0);
        worst = worst.max(rel);
        v.require(rel <= 1e-5, || format!("case {case}: analytic {exact} vs finite difference {fd}"));

        let lambda = pv.lambda().min(ph.lambda());
        let estimate = convexity_modulus_estimate(&pv, &ph, n, 50, 1000 + case as u64, (left, right)).unwrap();
        let floor = (3.0 * lambda).min(0.0) - 1e-8;
        v.require(estimate >= floor, || format!("case {case}: modulus estimate {estimate} below {floor}"));
    }
    v.note(format!("max relative deviation {worst:.2e}"));
}

fn c5_gamma(v: &mut Verdict) {
    let domain = (-4.0, 4.0);
    let densities = [
        gaussian(domain, 512, 0.0, 1.0),
        gaussian(domain, 512, 1.0, 0.25),
        GridDensity::uniform(domain.0, domain.1, 512).unwrap(),
        GridDensity::uniform_on(domain.0, domain.1, 512, -1.0, 2.0).unwrap(),
        GridDensity::from_weights(domain.0, domain.1, (0..512).map(|i| 1.0 + (i as f64 / 40.0).sin().powi(2)).collect())
            .unwrap(),
    ];
    let pv = Potential::double_well(1.0, domain).unwrap();
    let hs = [quadratic(0.5), quadratic(-0.5), Potential::double_well(0.3, (-8.0, 8.0)).unwrap()];
    let n_list = [1, 2, 10, 100];
    let mut count = 0;
    for rho in &densities {
        for h in &hs {
            let results = gamma_check(rho, &n_list, &pv, h).unwrap();
            count += results.iter().filter(|r| r.name.starts_with("gamma.gap")).count();
            v.checks(&results);
        }
    }
    // Closed form: uniform on [0, 1] with H = x² has ∬H = 1/6, so the gap
    // is −1/(12N).
    let uniform = GridDensity::uniform(0.0, 1.0, 1024).unwrap();
    let results = gamma_check(&uniform, &n_list, &Potential::zero(), &quadratic(2.0)).unwrap();
    let mut worst: f64 = 0.0;
    for (r, &n) in results.iter().filter(|r| r.name.starts_with("gamma.gap")).zip(&n_list) {
        let exact = -1.0 / (12.0 * n as f64);
        worst = worst.max((r.lhs - exact).abs());
        v.require((r.lhs - exact).abs() <= 1e-6, || format!("{}: {} vs −1/(12N) = {exact}", r.name, r.lhs));
    }
    v.checks(&results);
    v.note(format!("{count} gap identities; uniform/x² deviation from −1/(12N): {worst:.2e}"));
}

/// Solves `rho0` with per-step mass and free-energy monitoring. Returns the
/// snapshots, worst mass error and worst one-step free-energy increase.
fn monitored(rho0: &GridDensity, cfg: &PdeConfig) -> (Vec<(f64, GridDensity)>, f64, f64) {
    let mut worst_mass: f64 = 0.0;
    let mut worst_rise = f64::NEG_INFINITY;
    let mut last = f64::NAN;
    let snaps = solve_with(rho0, cfg, |k, rho| {
        worst_mass = worst_mass.max((rho.mass().iter().sum::<f64>() - 1.0).abs());
        let f = free_energy_mf(rho, &cfg.v, &cfg.h).total;
        if k > 0 {
            worst_rise = worst_rise.max(f - last);
        }
        last = f;
        Ok(())
    })
    .unwrap();
    (snaps, worst_mass, worst_rise)
}

struct Dissipation {
    label: String,
    worst_rise: f64,
    budget: f64,
}

fn c6_pde_oracle(v: &mut Verdict, dissipation: &mut Vec<Dissipation>) {
    let times = vec![0.25, 0.5, 1.0];
    let cfg = PdeConfig::auto(1.0, quadratic(1.0), Potential::zero(), (-8.0, 8.0), 1024, times).unwrap();
    let rho0 = cfg.gaussian(1.0, 0.25).unwrap();
    let (snaps, worst_mass, worst_rise) = monitored(&rho0, &cfg);
    dissipation.push(Dissipation { label: "OU, 1024 cells".into(), worst_rise, budget: evi_budget(cfg.dx()) });
    v.require(worst_mass <= 1e-12, || format!("mass drift {worst_mass:e}"));
    v.require(snaps.len() == 3, || format!("{} snapshots", snaps.len()));
    for (t, rho) in &snaps {
        let (m, var) = ou_oracle(1.0, 0.25, *t).unwrap();
        let d2 = w2_quantile(&Measure::from(rho.clone()), &Measure::from(cfg.gaussian(m, var).unwrap()));
        let (em, ev) = ((rho.mean() - m).abs(), (rho.variance() - var).abs());
        v.note(format!("t={t}: |Δmean| {em:.2e}, |Δvar| {ev:.2e}, d₂ {d2:.2e}"));
        v.require(em <= 1e-3 && ev <= 1e-3, || format!("t={t}: moments off by {em:e}, {ev:e}"));
        v.require(d2 < 5e-3, || format!("t={t}: d₂ to oracle {d2:e}"));
    }
    v.note(format!("dt {:.3e}, worst mass error {worst_mass:.2e}", cfg.dt));
}

fn dz_potentials(domain: (f64, f64)) -> (Potential, Potential) {
    (Potential::double_well(1.0, domain).unwrap(), quadratic(0.5))
}

fn c7_dissipation(v: &mut Verdict, mut runs: Vec<Dissipation>) {
    let domain = (-4.0, 4.0);
    let (dw, h) = dz_potentials(domain);
    let starts = [(0.0, 0.5), (0.5, 0.25), (-1.5, 0.1), (1.0, 1.0)];
    for (label, h) in [("Desai–Zwanzig", h), ("double well, H = 0", Potential::zero())] {
        for &(m, var) in &starts {
            let cfg = PdeConfig::auto(1.0, dw.clone(), h.clone(), domain, 512, vec![]).unwrap();
            let (_, _, worst_rise) = monitored(&gaussian(domain, 512, m, var), &cfg);
            runs.push(Dissipation { label: format!("{label}, ρ₀ = N({m}, {var})"), worst_rise, budget: evi_budget(cfg.dx()) });
        }
    }
    for r in &runs {
        v.require(r.worst_rise <= r.budget, || format!("{}: free energy rose by {:e} > {:e}", r.label, r.worst_rise, r.budget));
    }
    let worst = runs.iter().map(|r| r.worst_rise).fold(f64::NEG_INFINITY, f64::max);
    v.note(format!("{} trajectories; largest one-step change {worst:.2e}", runs.len()));
}

/// Five Gaussian parameter points; every ordered pair is checked.
const EVI_PARAMS: [(f64, f64); 5] = [(0.0, 1.0), (1.0, 0.25), (-1.0, 0.5), (0.5, 2.0), (-0.5, 0.1)];

fn c8_evi(v: &mut Verdict) {
    let (s, t) = (0.0, 0.5);
    let ou_domain = (-8.0, 8.0);
    let ou = PdeConfig::auto(t, quadratic(1.0), Potential::zero(), ou_domain, 512, vec![]).unwrap();
    let mut worst_agreement: f64 = 0.0;
    let mut worst_margin = f64::INFINITY;
    for &a in &EVI_PARAMS {
        for &b in &EVI_PARAMS {
            let (ra, rb) = (ou.gaussian(a.0, a.1).unwrap(), ou.gaussian(b.0, b.1).unwrap());
            let r = evi_mf_check(&ra, &rb, s, t, 1.0, &ou).unwrap();
            let o = evi_mf_gaussian_oracle(a, b, s, t, 1.0).unwrap();
            let agreement = (r.lhs - o.lhs).abs().max((r.rhs - o.rhs).abs());
            worst_agreement = worst_agreement.max(agreement);
            worst_margin = worst_margin.min(r.margin);
            v.require(agreement <= 5e-3, || format!("OU {a:?}→{b:?}: PDE vs closed form differ by {agreement:e}"));
            v.checks(&[r, o]);
        }
    }
    v.note(format!("OU: worst margin {worst_margin:.2e}, worst oracle disagreement {worst_agreement:.2e}"));

    let dz_domain = (-4.0, 4.0);
    let (dw, h) = dz_potentials(dz_domain);
    let lambda = dw.lambda() + h.lambda().min(0.0);
    v.require(lambda < 0.0, || format!("Desai–Zwanzig modulus {lambda} is not negative"));
    let dz = PdeConfig::auto(t, dw, h, dz_domain, 512, vec![]).unwrap();
    let mut worst_margin = f64::INFINITY;
    for &a in &EVI_PARAMS {
        for &b in &EVI_PARAMS {
            let (ra, rb) = (dz.gaussian(a.0, a.1).unwrap(), dz.gaussian(b.0, b.1).unwrap());
            let r = evi_mf_check(&ra, &rb, s, t, lambda, &dz).unwrap();
            worst_margin = worst_margin.min(r.margin);
            v.checks(&[r]);
        }
    }
    v.note(format!("Desai–Zwanzig: λ = {lambda:.3}, worst margin {worst_margin:.2e}"));
}

fn c9_chaos(v: &mut Verdict) {
    let n_list = [8, 32, 128, 512];
    let t_list = [0.0, 0.5, 1.0];
    let cases = [
        ("OU", (-8.0, 8.0), 1024, quadratic(1.0), Potential::zero(), 0.01, (1.0, 0.25), 909u64),
        ("Desai–Zwanzig", (-4.0, 4.0), 512, Potential::double_well(1.0, (-4.0, 4.0)).unwrap(), quadratic(0.5), 0.0025, (0.5, 0.25), 910),
    ];
    for (label, domain, cells, pv, ph, dt, (m0, var0), seed) in cases {
        let sde = SdeConfig::new(dt, 1.0, pv.clone(), ph.clone(), Domain::bounded(domain.0, domain.1).unwrap(), seed, vec![])
            .unwrap();
        let pde = PdeConfig::auto(1.0, pv, ph, domain, cells, vec![]).unwrap();
        let rho0 = pde.gaussian(m0, var0).unwrap();
        let sweep = chaos_sweep(&rho0, &n_list, 64, &t_list, &sde, &pde).unwrap();
        let reruns = sweep.checks.iter().filter(|c| c.metadata.get("rerun").is_some_and(|r| r == "true")).count();
        let exps: Vec<String> = sweep.exponents.iter().map(|(t, e)| format!("t={t}: {e:.2}")).collect();
        v.note(format!("{label}: {} checks ({reruns} rerun), fitted exponents {}", sweep.checks.len(), exps.join(", ")));
        v.require(sweep.checks.iter().filter(|c| c.name.starts_with("chaos.static_match")).count() == n_list.len(), || {
            format!("{label}: missing static comparisons")
        });
        v.checks(&sweep.checks);
    }
}

fn c10_determinism(v: &mut Verdict) {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut entries: Vec<_> = fs::read_dir(&configs).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut files = 0;
    for path in entries.iter().filter(|p| p.extension().is_some_and(|e| e == "ini")) {
        let stem = path.file_stem().unwrap();
        let cfg = load_config(path, None).unwrap();
        let first = run(&cfg, &a.path().join(stem)).unwrap();
        let second = run(&load_config(path, None).unwrap(), &b.path().join(stem)).unwrap();
        v.require(first.files.len() == second.files.len(), || format!("{}: file lists differ", path.display()));
        for (x, y) in first.files.iter().zip(&second.files) {
            files += 1;
            let same = fs::read(x).unwrap() == fs::read(y).unwrap();
            v.require(same, || format!("{} differs between runs", x.display()));
        }
    }
    v.note(format!("{} configs, {files} CSV files compared byte for byte", entries.len()));
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut ok = true;
    ok &= criterion(1, "1D transport exactness", secs(10), c1_transport);
    ok &= criterion(2, "scaled isometry of the empirical lift", secs(60), c2_isometry);
    ok &= criterion(3, "exchangeable marginals vs empirical lift", secs(30), c3_diaconis);
    ok &= criterion(4, "Hessian identity and convexity modulus", secs(10), c4_hessian);
    ok &= criterion(5, "finite-N free energy gap", secs(60), c5_gamma);
    let mut dissipation = Vec::new();
    ok &= criterion(6, "Fokker–Planck solver vs Ornstein–Uhlenbeck oracle", secs(60), |v| c6_pde_oracle(v, &mut dissipation));
    ok &= criterion(7, "free-energy dissipation along PDE trajectories", secs(120), |v| c7_dissipation(v, dissipation));
    ok &= criterion(8, "mean-field EVI", secs(300), c8_evi);
    ok &= criterion(9, "propagation of chaos", secs(900), c9_chaos);
    ok &= criterion(10, "determinism of CSV output", secs(120), c10_determinism);
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
