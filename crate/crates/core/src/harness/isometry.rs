use crate::error::{invalid, Result};
use crate::harness::{derive_seed, CheckResult};
use crate::measures::{sample_product, GridDensity};
use crate::transport::isometry_gap;

/// Roundoff allowance when comparing gaps across replica counts.
const GAP_BAND: f64 = 1e-12;
/// Largest accepted `|gap| / rhs` at the largest replica count.
const RELATIVE_GAP: f64 = 0.05;

/// Scaled-isometry checks between ensembles sampled from `a` and `b`:
/// exact agreement for a single replica, non-increasing `|gap|` as `M`
/// grows, and `|gap| < 5%` of the lifted distance at the largest `M`.
pub fn isometry_check(
    a: &GridDensity,
    b: &GridDensity,
    n_list: &[usize],
    m_list: &[usize],
    seed: u64,
) -> Result<Vec<CheckResult>> {
    if n_list.is_empty() || m_list.is_empty() || m_list.windows(2).any(|w| w[1] <= w[0]) || m_list[0] == 0 {
        return invalid("need nonempty N_list and a strictly increasing positive M_list");
    }
    let mut out = Vec::new();
    for &n in n_list {
        let sample = |m: usize, side: &str| sample_product(if side == "a" { a } else { b }, n, m, derive_seed(seed, &format!("isometry/{side}/N={n}/M={m}")));
        let single = isometry_gap(&sample(1, "a")?, &sample(1, "b")?)?;
        out.push(
            CheckResult::identity(format!("isometry.single_replica(N={n})"), single.lhs, single.rhs, 0.0).with("N", n),
        );
        let mut previous: Option<(usize, f64)> = None;
        let mut last = None;
        for &m in m_list {
            let g = isometry_gap(&sample(m, "a")?, &sample(m, "b")?)?;
            if let Some((m_prev, gap_prev)) = previous {
                out.push(
                    CheckResult::inequality(
                        format!("isometry.shrinks(N={n},M={m_prev}->{m})"),
                        g.gap.abs(),
                        gap_prev,
                        GAP_BAND,
                    )
                    .with("N", n)
                    .with("lhs_sq", g.lhs)
                    .with("rhs_sq", g.rhs)
                    .with("unsymmetrized_sq", g.unsymmetrized),
                );
            }
            previous = Some((m, g.gap.abs()));
            last = Some((m, g));
        }
        let (m, g) = last.expect("M_list is nonempty");
        out.push(
            CheckResult::inequality(format!("isometry.relative(N={n},M={m})"), g.gap.abs(), RELATIVE_GAP * g.rhs, GAP_BAND)
                .with("N", n)
                .with("M", m)
                .with("lhs_sq", g.lhs)
                .with("rhs_sq", g.rhs)
                .with("unsymmetrized_sq", g.unsymmetrized),
        );
    }
    Ok(out)
}
