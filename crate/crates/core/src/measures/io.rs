//! One-value-per-line CSV for grid densities and empirical measures.
//!
//! ```text
//! GridDensity,left=-8.0000000000000000e0,right=8.0000000000000000e0,cells=4
//! 2.5000000000000000e-1
//! ...
//! ```

use std::io::{BufRead, Write};

use crate::csvio::fmt_real;
use crate::error::{Error, Result};
use crate::measures::{EmpiricalMeasure, GridDensity};

pub fn write_grid<W: Write>(mut w: W, rho: &GridDensity) -> std::io::Result<()> {
    writeln!(
        w,
        "GridDensity,left={},right={},cells={}",
        fmt_real(rho.left()),
        fmt_real(rho.right()),
        rho.cells()
    )?;
    for m in rho.mass() {
        writeln!(w, "{}", fmt_real(*m))?;
    }
    Ok(())
}

pub fn write_empirical<W: Write>(mut w: W, e: &EmpiricalMeasure) -> std::io::Result<()> {
    writeln!(w, "EmpiricalMeasure,n={}", e.len())?;
    for a in e.atoms() {
        writeln!(w, "{}", fmt_real(*a))?;
    }
    Ok(())
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

struct Parsed {
    kind: String,
    params: Vec<(String, String)>,
    values: Vec<f64>,
}

impl Parsed {
    fn param(&self, key: &str) -> Result<&str> {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| parse_err(1, format!("header is missing `{key}`")))
    }
}

fn parse<R: BufRead>(r: R) -> Result<Parsed> {
    let mut lines = r.lines().enumerate();
    let header = match lines.next() {
        Some((_, Ok(h))) => h,
        Some((_, Err(e))) => return Err(parse_err(1, e.to_string())),
        None => return Err(parse_err(1, "empty input")),
    };
    let mut fields = header.trim().split(',');
    let kind = fields.next().unwrap_or_default().to_string();
    let mut params = Vec::new();
    for f in fields {
        let (k, v) = f.split_once('=').ok_or_else(|| parse_err(1, format!("bad header field `{f}`")))?;
        params.push((k.trim().to_string(), v.trim().to_string()));
    }
    let mut values = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(|e| parse_err(i + 1, e.to_string()))?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        values.push(t.parse().map_err(|_| parse_err(i + 1, format!("not a number: `{t}`")))?);
    }
    Ok(Parsed { kind, params, values })
}

fn real(s: &str) -> Result<f64> {
    s.parse().map_err(|_| parse_err(1, format!("not a number: `{s}`")))
}

pub fn read_grid<R: BufRead>(r: R) -> Result<GridDensity> {
    let p = parse(r)?;
    if p.kind != "GridDensity" {
        return Err(parse_err(1, format!("expected GridDensity, found `{}`", p.kind)));
    }
    let cells: usize = p.param("cells")?.parse().map_err(|_| parse_err(1, "bad cell count"))?;
    if cells != p.values.len() {
        return Err(parse_err(1, format!("header declares {cells} cells, found {}", p.values.len())));
    }
    GridDensity::new(real(p.param("left")?)?, real(p.param("right")?)?, p.values)
}

pub fn read_empirical<R: BufRead>(r: R) -> Result<EmpiricalMeasure> {
    let p = parse(r)?;
    if p.kind != "EmpiricalMeasure" {
        return Err(parse_err(1, format!("expected EmpiricalMeasure, found `{}`", p.kind)));
    }
    let n: usize = p.param("n")?.parse().map_err(|_| parse_err(1, "bad atom count"))?;
    if n != p.values.len() {
        return Err(parse_err(1, format!("header declares {n} atoms, found {}", p.values.len())));
    }
    EmpiricalMeasure::new(p.values)
}
