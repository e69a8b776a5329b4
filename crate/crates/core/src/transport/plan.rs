//! Exact discrete optimal transport.
//!
//! Successive shortest paths on the dense bipartite residual graph, with
//! Johnson potentials so Dijkstra runs on nonnegative reduced costs. Each
//! augmentation exhausts a supply, a demand or a reverse arc, so the solve is
//! exact (no entropic smoothing) and terminates after finitely many rounds.

use std::path::Path;

use crate::csvio::{csv_err, fmt_real, writer_for};
use crate::error::{invalid, Result};

/// Flows below this are treated as zero when building reverse arcs.
const FLOW_EPS: f64 = 1e-15;

/// A coupling between two weight vectors together with its ground cost.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    row_weights: Vec<f64>,
    col_weights: Vec<f64>,
    plan: Vec<f64>,
    ground_cost: Vec<f64>,
    cost: f64,
}

impl TransportPlan {
    pub fn row_weights(&self) -> &[f64] {
        &self.row_weights
    }

    pub fn col_weights(&self) -> &[f64] {
        &self.col_weights
    }

    pub fn rows(&self) -> usize {
        self.row_weights.len()
    }

    pub fn cols(&self) -> usize {
        self.col_weights.len()
    }

    /// Mass sent from row `i` to column `j`.
    pub fn mass(&self, i: usize, j: usize) -> f64 {
        self.plan[i * self.cols() + j]
    }

    pub fn ground_cost(&self, i: usize, j: usize) -> f64 {
        self.ground_cost[i * self.cols() + j]
    }

    /// `Σ plan[i][j] · ground_cost[i][j]`.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// Largest deviation of the plan's marginals from the prescribed weights.
    pub fn marginal_error(&self) -> f64 {
        let m = self.cols();
        let rows = self.row_weights.iter().enumerate().map(|(i, w)| {
            let s: f64 = self.plan[i * m..(i + 1) * m].iter().sum();
            (s - w).abs()
        });
        let cols = self.col_weights.iter().enumerate().map(|(j, w)| {
            let s: f64 = (0..self.rows()).map(|i| self.plan[i * m + j]).sum();
            (s - w).abs()
        });
        rows.chain(cols).fold(0.0, f64::max)
    }

    /// Writes the nonzero entries as `i,j,mass,cost`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = writer_for(path)?;
        w.write_record(["i", "j", "mass", "cost"]).map_err(|e| csv_err(path, e))?;
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let mass = self.mass(i, j);
                if mass > 0.0 {
                    w.write_record([i.to_string(), j.to_string(), fmt_real(mass), fmt_real(self.ground_cost(i, j))])
                        .map_err(|e| csv_err(path, e))?;
                }
            }
        }
        w.flush().map_err(|source| crate::Error::Io { path: path.to_path_buf(), source })
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Node {
    Source(usize),
    Sink(usize),
}

/// Solves `min Σ π_ij c_ij` over couplings of `rows` and `cols`
/// (`cost` row-major, `rows.len() × cols.len()`).
pub fn solve_transport(rows: &[f64], cols: &[f64], cost: &[f64]) -> Result<TransportPlan> {
    let (n, m) = (rows.len(), cols.len());
    if n == 0 || m == 0 {
        return invalid("transport needs nonempty weight vectors");
    }
    if cost.len() != n * m {
        return invalid(format!("cost matrix has {} entries, expected {n}×{m}", cost.len()));
    }
    if rows.iter().chain(cols).any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return invalid("transport weights must be finite and nonnegative");
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return invalid("ground cost must be finite");
    }
    let (sr, sc) = (rows.iter().sum::<f64>(), cols.iter().sum::<f64>());
    if sr <= 0.0 || sc <= 0.0 {
        return invalid("transport weights have zero total mass");
    }
    if (sr - sc).abs() > 1e-12 * sr.max(sc) {
        return invalid(format!("unbalanced transport: {sr} vs {sc}"));
    }

    let mut supply = rows.to_vec();
    let mut demand = cols.to_vec();
    let mut flow = vec![0.0f64; n * m];
    let mut pot_src = vec![0.0f64; n];
    // start with nonnegative reduced costs c_ij + p_i − q_j
    let mut pot_snk: Vec<f64> = (0..m).map(|j| (0..n).map(|i| cost[i * m + j]).fold(f64::INFINITY, f64::min)).collect();
    let done_eps = 1e-14 * sr;

    let mut dist_src = vec![0.0f64; n];
    let mut dist_snk = vec![0.0f64; m];
    let mut seen_src = vec![false; n];
    let mut seen_snk = vec![false; m];
    let mut pred_snk = vec![0usize; m];
    let mut pred_src: Vec<Option<usize>> = vec![None; n];

    loop {
        if supply.iter().all(|s| *s <= done_eps) || demand.iter().all(|d| *d <= done_eps) {
            break;
        }
        for i in 0..n {
            dist_src[i] = if supply[i] > done_eps { 0.0 } else { f64::INFINITY };
            seen_src[i] = false;
            pred_src[i] = None;
        }
        dist_snk.fill(f64::INFINITY);
        seen_snk.fill(false);

        let target = loop {
            let mut best: Option<(Node, f64)> = None;
            for i in 0..n {
                if !seen_src[i] && dist_src[i] < best.map_or(f64::INFINITY, |b| b.1) {
                    best = Some((Node::Source(i), dist_src[i]));
                }
            }
            for j in 0..m {
                if !seen_snk[j] && dist_snk[j] < best.map_or(f64::INFINITY, |b| b.1) {
                    best = Some((Node::Sink(j), dist_snk[j]));
                }
            }
            let Some((node, d)) = best else {
                return invalid("transport solver found no augmenting path");
            };
            match node {
                Node::Source(i) => {
                    seen_src[i] = true;
                    let row = &cost[i * m..(i + 1) * m];
                    for j in 0..m {
                        if seen_snk[j] {
                            continue;
                        }
                        let nd = d + (row[j] + pot_src[i] - pot_snk[j]).max(0.0);
                        if nd < dist_snk[j] {
                            dist_snk[j] = nd;
                            pred_snk[j] = i;
                        }
                    }
                }
                Node::Sink(j) => {
                    seen_snk[j] = true;
                    if demand[j] > done_eps {
                        break j;
                    }
                    for i in 0..n {
                        if seen_src[i] || flow[i * m + j] <= FLOW_EPS {
                            continue;
                        }
                        let nd = d + (-cost[i * m + j] + pot_snk[j] - pot_src[i]).max(0.0);
                        if nd < dist_src[i] {
                            dist_src[i] = nd;
                            pred_src[i] = Some(j);
                        }
                    }
                }
            }
        };

        let dt = dist_snk[target];
        for i in 0..n {
            pot_src[i] += dist_src[i].min(dt);
        }
        for j in 0..m {
            pot_snk[j] += dist_snk[j].min(dt);
        }

        // bottleneck along the path, walked back from the target sink
        let mut delta = demand[target];
        let mut j = target;
        let root = loop {
            let i = pred_snk[j];
            match pred_src[i] {
                Some(prev) => {
                    delta = delta.min(flow[i * m + prev]);
                    j = prev;
                }
                None => break i,
            }
        };
        delta = delta.min(supply[root]);

        let mut j = target;
        loop {
            let i = pred_snk[j];
            flow[i * m + j] += delta;
            match pred_src[i] {
                Some(prev) => {
                    let f = &mut flow[i * m + prev];
                    *f -= delta;
                    if *f <= FLOW_EPS {
                        *f = 0.0;
                    }
                    j = prev;
                }
                None => break,
            }
        }
        supply[root] -= delta;
        demand[target] -= delta;
        if supply[root] <= done_eps {
            supply[root] = 0.0;
        }
        if demand[target] <= done_eps {
            demand[target] = 0.0;
        }
    }

    let total = flow.iter().zip(cost).map(|(f, c)| f * c).sum();
    Ok(TransportPlan {
        row_weights: rows.to_vec(),
        col_weights: cols.to_vec(),
        plan: flow,
        ground_cost: cost.to_vec(),
        cost: total,
    })
}
