//! Exact 1D Wasserstein-2 through quantile functions.
//!
//! Both supported measure types have piecewise-affine quantile functions:
//! constant on `[k/N, (k+1)/N)` for an empirical measure, and affine across
//! each nonempty cell of a grid density. After merging the breakpoints the
//! squared difference is integrated exactly on each piece.

use crate::measures::{EmpiricalMeasure, GridDensity, Measure};

/// Affine piece of a quantile function on `[u0, u1]`.
#[derive(Debug, Clone, Copy)]
struct Piece {
    u0: f64,
    u1: f64,
    q0: f64,
    q1: f64,
}

impl Piece {
    fn at(&self, u: f64) -> f64 {
        if self.u1 > self.u0 {
            self.q0 + (self.q1 - self.q0) * ((u - self.u0) / (self.u1 - self.u0))
        } else {
            self.q0
        }
    }
}

fn empirical_pieces(e: &EmpiricalMeasure) -> Vec<Piece> {
    let n = e.len() as f64;
    let last = e.len() - 1;
    e.atoms()
        .iter()
        .enumerate()
        .map(|(k, &x)| Piece {
            u0: k as f64 / n,
            u1: if k == last { 1.0 } else { (k + 1) as f64 / n },
            q0: x,
            q1: x,
        })
        .collect()
}

fn grid_pieces(g: &GridDensity) -> Vec<Piece> {
    let total: f64 = g.mass().iter().sum();
    let mut pieces = Vec::with_capacity(g.cells());
    let mut acc = 0.0;
    for (i, &m) in g.mass().iter().enumerate() {
        if m <= 0.0 {
            continue;
        }
        let u0 = acc / total;
        acc += m;
        pieces.push(Piece { u0, u1: acc / total, q0: g.edge(i), q1: g.edge(i + 1) });
    }
    if let Some(p) = pieces.last_mut() {
        p.u1 = 1.0;
    }
    pieces
}

fn pieces(m: &Measure) -> Vec<Piece> {
    match m {
        Measure::Grid(g) => grid_pieces(g),
        Measure::Empirical(e) => empirical_pieces(e),
    }
}

fn merged_l2(a: &[Piece], b: &[Piece]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut u = 0.0;
    let mut total = 0.0;
    while i < a.len() && j < b.len() {
        let end = a[i].u1.min(b[j].u1);
        let h = end - u;
        if h > 0.0 {
            let d0 = a[i].at(u) - b[j].at(u);
            let d1 = a[i].at(end) - b[j].at(end);
            total += h * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
        }
        u = end;
        if a[i].u1 <= end {
            i += 1;
        }
        if b[j].u1 <= end {
            j += 1;
        }
    }
    total
}

/// `d₂²(a, b)`.
pub fn w2_squared(a: &Measure, b: &Measure) -> f64 {
    if let (Measure::Empirical(x), Measure::Empirical(y)) = (a, b) {
        if x.len() == y.len() {
            return sorted_mean_square(x.atoms(), y.atoms());
        }
    }
    merged_l2(&pieces(a), &pieces(b)).max(0.0)
}

/// `d₂(a, b)` via the `L²` distance of quantile functions.
pub fn w2_quantile(a: &Measure, b: &Measure) -> f64 {
    w2_squared(a, b).sqrt()
}

/// `(1/N) Σ (x_i − y_i)²` for two sorted arrays of equal length.
pub(crate) fn sorted_mean_square(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / x.len() as f64
}
