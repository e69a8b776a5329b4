//! INI-style grammar: blank lines and `#`/`;` comments are ignored, a
//! single `[experiment]` header must precede all `key = value` lines, and
//! keys may not repeat. Top-level lists are comma-separated; lists inside
//! a specification string use `;`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::measures::{DiscreteSymmetricMeasure, GridDensity};

/// A value together with the line it came from.
#[derive(Debug, Clone)]
pub(crate) struct Entry {
    pub line: usize,
    pub value: String,
}

pub(crate) fn parse_ini(text: &str) -> Result<BTreeMap<String, Entry>> {
    let mut entries = BTreeMap::new();
    let mut in_section = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') || body.starts_with(';') {
            continue;
        }
        if body.starts_with('[') {
            if body != "[experiment]" {
                return Err(Error::Parse { line, message: format!("unknown section {body}; expected [experiment]") });
            }
            if in_section {
                return Err(Error::Parse { line, message: "duplicate [experiment] section".into() });
            }
            in_section = true;
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(Error::Parse { line, message: format!("expected key = value, got '{body}'") });
        };
        if !in_section {
            return Err(Error::Parse { line, message: "key before the [experiment] section".into() });
        }
        let key = key.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::Parse { line, message: format!("invalid key '{key}'") });
        }
        let value = value.trim();
        if value.is_empty() {
            return Err(Error::Parse { line, message: format!("key '{key}' has an empty value") });
        }
        if let Some(prev) = entries.insert(key.to_string(), Entry { line, value: value.to_string() }) {
            return Err(Error::Parse { line, message: format!("key '{key}' repeats line {}", prev.line) });
        }
    }
    if !in_section {
        return Err(Error::Parse { line: 1, message: "missing [experiment] section".into() });
    }
    Ok(entries)
}

/// Typed, consuming access to the parsed entries. Every error names the
/// field and its line.
pub(crate) struct Fields {
    entries: BTreeMap<String, Entry>,
}

fn field_err(key: &str, entry: Option<&Entry>, message: impl std::fmt::Display) -> Error {
    match entry {
        Some(e) => Error::Config(format!("field '{key}' (line {}): {message}", e.line)),
        None => Error::Config(format!("field '{key}': {message}")),
    }
}

impl Fields {
    pub(crate) fn new(entries: BTreeMap<String, Entry>) -> Self {
        Self { entries }
    }

    /// Rejects keys outside `allowed` before anything is computed.
    pub(crate) fn restrict(&self, experiment: &str, allowed: &[&str]) -> Result<()> {
        if let Some((k, e)) = self.entries.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(Error::Config(format!(
                "field '{k}' (line {}): unknown key for experiment {experiment}; allowed: {}",
                e.line,
                allowed.join(", ")
            )));
        }
        Ok(())
    }

    pub(crate) fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub(crate) fn raw(&self, key: &str) -> Result<&str> {
        match self.entries.get(key) {
            Some(e) => Ok(&e.value),
            None => Err(field_err(key, None, "missing")),
        }
    }

    /// Wraps an error raised while interpreting `key` with the field name.
    pub(crate) fn context<T>(&self, key: &str, r: Result<T>) -> Result<T> {
        r.map_err(|e| field_err(key, self.entries.get(key), e))
    }

    fn parse_with<T>(&self, key: &str, f: impl Fn(&str) -> Option<T>, what: &str) -> Result<T> {
        let v = self.raw(key)?;
        f(v).ok_or_else(|| field_err(key, self.entries.get(key), format!("'{v}' is not {what}")))
    }

    pub(crate) fn real(&self, key: &str) -> Result<f64> {
        self.parse_with(key, |s| s.parse::<f64>().ok().filter(|x| x.is_finite()), "a finite real")
    }

    pub(crate) fn positive_real(&self, key: &str) -> Result<f64> {
        self.parse_with(key, |s| s.parse::<f64>().ok().filter(|x| x.is_finite() && *x > 0.0), "a positive real")
    }

    pub(crate) fn count(&self, key: &str) -> Result<usize> {
        self.parse_with(key, |s| s.parse::<usize>().ok().filter(|n| *n > 0), "a positive integer")
    }

    pub(crate) fn seed(&self, key: &str) -> Result<u64> {
        self.parse_with(key, |s| s.parse::<u64>().ok(), "an unsigned 64-bit integer")
    }

    pub(crate) fn reals(&self, key: &str) -> Result<Vec<f64>> {
        self.parse_with(
            key,
            |s| s.split(',').map(|x| x.trim().parse::<f64>().ok().filter(|x| x.is_finite())).collect(),
            "a comma-separated list of finite reals",
        )
    }

    pub(crate) fn counts(&self, key: &str) -> Result<Vec<usize>> {
        self.parse_with(
            key,
            |s| s.split(',').map(|x| x.trim().parse::<usize>().ok().filter(|n| *n > 0)).collect(),
            "a comma-separated list of positive integers",
        )
    }

    /// `left, right` with `left < right`.
    pub(crate) fn interval(&self, key: &str) -> Result<(f64, f64)> {
        let v = self.reals(key)?;
        match v.as_slice() {
            [l, r] if r > l => Ok((*l, *r)),
            _ => Err(field_err(key, self.entries.get(key), "expected 'left, right' with left < right")),
        }
    }
}

/// Splits `name:k=v,k=v` into the name and its parameters.
fn spec_parts(spec: &str) -> Result<(&str, Vec<(&str, &str)>)> {
    let spec = spec.trim();
    let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
    let mut params = Vec::new();
    for pair in args.split(',').filter(|s| !s.trim().is_empty()) {
        let Some((k, v)) = pair.split_once('=') else {
            return Err(Error::InvalidArgument(format!("'{spec}': expected key=value, got '{pair}'")));
        };
        params.push((k.trim(), v.trim()));
    }
    Ok((name.trim(), params))
}

fn spec_params<'a>(spec: &str, params: &[(&str, &'a str)], allowed: &[&str]) -> Result<BTreeMap<String, &'a str>> {
    let mut out = BTreeMap::new();
    for (k, v) in params {
        if !allowed.contains(k) {
            return Err(Error::InvalidArgument(format!("'{spec}': unknown parameter '{k}'")));
        }
        out.insert(k.to_string(), *v);
    }
    Ok(out)
}

fn spec_real(spec: &str, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::InvalidArgument(format!("'{spec}': '{s}' is not a finite real")))
}

/// `gaussian:m=<real>,var=<real>`, `uniform` or `uniform:left=<real>,right=<real>`
/// projected onto the grid.
pub(crate) fn parse_density(spec: &str, grid: (f64, f64), cells: usize) -> Result<GridDensity> {
    parse_density_with_moments(spec, grid, cells).map(|(rho, _)| rho)
}

/// As [`parse_density`], also returning `(mean, variance)` for Gaussians.
pub(crate) fn parse_density_with_moments(
    spec: &str,
    (left, right): (f64, f64),
    cells: usize,
) -> Result<(GridDensity, Option<(f64, f64)>)> {
    let (name, params) = spec_parts(spec)?;
    match name {
        "gaussian" => {
            let p = spec_params(spec, &params, &["m", "var"])?;
            let get = |k: &str| match p.get(k) {
                Some(v) => spec_real(spec, v),
                None => Err(Error::InvalidArgument(format!("'{spec}': missing parameter '{k}'"))),
            };
            let (m, var) = (get("m")?, get("var")?);
            Ok((GridDensity::gaussian(left, right, cells, m, var)?, Some((m, var))))
        }
        "uniform" if params.is_empty() => Ok((GridDensity::uniform(left, right, cells)?, None)),
        "uniform" => {
            let p = spec_params(spec, &params, &["left", "right"])?;
            let a = p.get("left").map_or(Ok(left), |v| spec_real(spec, v))?;
            let b = p.get("right").map_or(Ok(right), |v| spec_real(spec, v))?;
            Ok((GridDensity::uniform_on(left, right, cells, a, b)?, None))
        }
        other => Err(Error::InvalidArgument(format!("unknown density '{other}'; expected gaussian or uniform"))),
    }
}

/// `product:p=<p0>;<p1>;...` (the last probability may be omitted),
/// `permutation:tuple=<i0>;<i1>;...` or `uniform`.
pub(crate) fn parse_table(spec: &str, sites: &[f64], n: usize) -> Result<DiscreteSymmetricMeasure> {
    let (name, params) = spec_parts(spec)?;
    let k = sites.len();
    match name {
        "uniform" if params.is_empty() => DiscreteSymmetricMeasure::product(sites.to_vec(), &vec![1.0 / k as f64; k], n),
        "product" => {
            let p = spec_params(spec, &params, &["p"])?;
            let Some(list) = p.get("p") else {
                return Err(Error::InvalidArgument(format!("'{spec}': missing parameter 'p'")));
            };
            let mut probs = list.split(';').map(|s| spec_real(spec, s.trim())).collect::<Result<Vec<_>>>()?;
            if probs.len() + 1 == k {
                probs.push(1.0 - probs.iter().sum::<f64>());
            }
            if probs.len() != k || probs.iter().any(|p| *p < 0.0) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "'{spec}': need {k} (or {}) nonnegative probabilities summing to 1",
                    k - 1
                )));
            }
            DiscreteSymmetricMeasure::product(sites.to_vec(), &probs, n)
        }
        "permutation" => {
            let p = spec_params(spec, &params, &["tuple"])?;
            let Some(list) = p.get("tuple") else {
                return Err(Error::InvalidArgument(format!("'{spec}': missing parameter 'tuple'")));
            };
            let tuple = list
                .split(';')
                .map(|s| s.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::InvalidArgument(format!("'{spec}': tuple entries must be site indices")))?;
            if tuple.len() != n {
                return Err(Error::InvalidArgument(format!("'{spec}': tuple has {} entries, N = {n}", tuple.len())));
            }
            DiscreteSymmetricMeasure::permutations_of(sites.to_vec(), &tuple)
        }
        other => Err(Error::InvalidArgument(format!("unknown table '{other}'; expected product, permutation or uniform"))),
    }
}
