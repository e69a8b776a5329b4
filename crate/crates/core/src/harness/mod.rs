//! Identities and inequalities between the particle, PDE and meta-measure
//! levels, evaluated as pass/fail checks.

mod chaos;
mod exchangeable;
mod evi;
mod gamma;
mod isometry;

pub use chaos::{chaos_sweep, static_sampling_distance, ChaosPoint, ChaosSweep};
pub use exchangeable::df_check;
pub use evi::{evi_lifted_check, evi_mf_check, evi_mf_gaussian_oracle, evi_budget, EVI_BUDGET_ABS, EVI_BUDGET_DX2};
pub use gamma::gamma_check;
pub use isometry::isometry_check;

use std::collections::BTreeMap;
use std::path::Path;

use crate::csvio::{csv_err, fmt_real, writer_for};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Passes when `|lhs − rhs| ≤ tolerance`.
    Identity,
    /// Passes when `lhs ≤ rhs + tolerance`.
    Inequality,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Identity => "identity",
            Mode::Inequality => "inequality",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs` for inequalities, `|lhs − rhs|` for identities.
    pub margin: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub mode: Mode,
    /// Conditional checks rest on a declared substitution and do not affect
    /// the exit code.
    pub conditional: bool,
    pub metadata: BTreeMap<String, String>,
}

impl CheckResult {
    pub fn identity(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let margin = (lhs - rhs).abs();
        Self::build(name.into(), lhs, rhs, margin, tolerance, margin <= tolerance, Mode::Identity)
    }

    pub fn inequality(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::build(name.into(), lhs, rhs, rhs - lhs, tolerance, lhs <= rhs + tolerance, Mode::Inequality)
    }

    fn build(name: String, lhs: f64, rhs: f64, margin: f64, tolerance: f64, passed: bool, mode: Mode) -> Self {
        Self { name, lhs, rhs, margin, tolerance, passed, mode, conditional: false, metadata: BTreeMap::new() }
    }

    /// Adds a metadata entry; reals are formatted like CSV reals.
    pub fn with(mut self, key: &str, value: impl MetaValue) -> Self {
        self.metadata.insert(key.to_string(), value.render());
        self
    }

    pub fn conditional(mut self) -> Self {
        self.conditional = true;
        self
    }

    /// Metadata as a JSON object, including the mode and conditional flag.
    pub fn metadata_json(&self) -> String {
        let mut map = serde_json::Map::new();
        map.insert("mode".into(), self.mode.as_str().into());
        map.insert("conditional".into(), self.conditional.into());
        for (k, v) in &self.metadata {
            map.insert(k.clone(), v.clone().into());
        }
        serde_json::Value::Object(map).to_string()
    }

    /// `PASS name` / `FAIL name`, with the numbers that decided it.
    pub fn summary_line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let tag = if self.conditional { " [conditional]" } else { "" };
        format!(
            "{verdict} {}{tag}: lhs={:.6e} rhs={:.6e} margin={:.3e} tol={:.3e}",
            self.name, self.lhs, self.rhs, self.margin, self.tolerance
        )
    }
}

/// Values accepted as metadata.
pub trait MetaValue {
    fn render(&self) -> String;
}

impl MetaValue for f64 {
    fn render(&self) -> String {
        fmt_real(*self)
    }
}

impl MetaValue for usize {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl MetaValue for u64 {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl MetaValue for bool {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl MetaValue for &str {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl MetaValue for String {
    fn render(&self) -> String {
        self.clone()
    }
}

/// True when every non-conditional check passed.
pub fn all_required_pass(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed || r.conditional)
}

/// Writes `name,lhs,rhs,margin,tolerance,passed,metadata`.
pub fn write_results(path: &Path, results: &[CheckResult]) -> Result<()> {
    let mut w = writer_for(path)?;
    w.write_record(["name", "lhs", "rhs", "margin", "tolerance", "passed", "metadata"])
        .map_err(|e| csv_err(path, e))?;
    for r in results {
        w.write_record([
            r.name.as_str(),
            &fmt_real(r.lhs),
            &fmt_real(r.rhs),
            &fmt_real(r.margin),
            &fmt_real(r.tolerance),
            if r.passed { "true" } else { "false" },
            &r.metadata_json(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

/// Seed for the substream owned by check `name`: FNV-1a of the name mixed
/// into the master seed with a SplitMix64 finalizer. Stable across
/// platforms and releases.
pub fn derive_seed(master: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = master ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mean and standard error of the mean.
pub(crate) fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
