//! Confinement and interaction potentials, and the energies built from them.

mod energy;
mod spline;

pub use energy::{
    convexity_modulus_estimate, doubling_check, free_energy_meta, free_energy_mf, free_energy_product,
    hessian_quadratic_form, hessian_quadratic_form_fd, interaction_integral, w_n, DoublingResult, EnergyReport,
};

use crate::error::{invalid, Result};
use spline::NaturalSpline;

/// Points used when scanning a potential over an interval.
pub const SCAN_POINTS: usize = 4001;

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    Zero,
    /// `a x²/2`.
    Quadratic(f64),
    /// `a (1 − x²)²`.
    DoubleWell(f64),
    /// `Σ c_k x^k`.
    Polynomial(Vec<f64>),
    /// Natural cubic spline through values on a uniform grid.
    Tabulated,
}

/// A potential `ℝ → ℝ` with exact first and second derivatives and the
/// convexity modulus that holds on its scan interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    kind: PotentialKind,
    lambda: f64,
    scan: (f64, f64),
    spline: Option<NaturalSpline>,
}

impl Potential {
    pub fn zero() -> Self {
        Self { kind: PotentialKind::Zero, lambda: 0.0, scan: (-1.0, 1.0), spline: None }
    }

    /// `a x²/2`, which is `a`-convex everywhere.
    pub fn quadratic(a: f64) -> Result<Self> {
        if !a.is_finite() {
            return invalid(format!("quadratic coefficient must be finite, got {a}"));
        }
        Ok(Self { kind: PotentialKind::Quadratic(a), lambda: a, scan: (-1.0, 1.0), spline: None })
    }

    /// `a (1 − x²)²`; `λ` is the infimum of the second derivative on `scan`.
    pub fn double_well(a: f64, scan: (f64, f64)) -> Result<Self> {
        if !a.is_finite() {
            return invalid(format!("double-well coefficient must be finite, got {a}"));
        }
        Self::scanned(PotentialKind::DoubleWell(a), scan, None)
    }

    /// `Σ c_k x^k`; `λ` is scanned on `scan`.
    pub fn polynomial(coeffs: Vec<f64>, scan: (f64, f64)) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return invalid("polynomial needs at least one finite coefficient");
        }
        Self::scanned(PotentialKind::Polynomial(coeffs), scan, None)
    }

    /// Natural cubic spline through `values` at uniform knots on
    /// `[left, right]`, extended linearly outside. `λ` is scanned on `scan`.
    pub fn tabulated(left: f64, right: f64, values: Vec<f64>, scan: (f64, f64)) -> Result<Self> {
        let spline = NaturalSpline::new(left, right, values)?;
        Self::scanned(PotentialKind::Tabulated, scan, Some(spline))
    }

    fn scanned(kind: PotentialKind, scan: (f64, f64), spline: Option<NaturalSpline>) -> Result<Self> {
        if !(scan.1 > scan.0) || !scan.0.is_finite() || !scan.1.is_finite() {
            return invalid(format!("scan interval [{}, {}] is empty", scan.0, scan.1));
        }
        let mut p = Self { kind, lambda: 0.0, scan, spline };
        p.lambda = scan_grid(scan).map(|x| p.hessian(x)).fold(f64::INFINITY, f64::min);
        Ok(p)
    }

    /// Parses `zero`, `quadratic:a=<real>`, `doublewell:a=<real>` or
    /// `polynomial:c=<c0>;<c1>;...`. `scan` is the interval on which the
    /// convexity modulus is computed.
    pub fn parse(spec: &str, scan: (f64, f64)) -> Result<Self> {
        let spec = spec.trim();
        let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
        let mut params = Vec::new();
        for pair in args.split(',').filter(|s| !s.trim().is_empty()) {
            match pair.split_once('=') {
                Some((k, v)) => params.push((k.trim(), v.trim())),
                None => return invalid(format!("potential '{spec}': expected key=value, got '{pair}'")),
            }
        }
        let take = |key: &str| -> Result<&str> {
            if let Some((k, _)) = params.iter().find(|(k, _)| *k != key) {
                return invalid(format!("potential '{spec}': unknown parameter '{k}'"));
            }
            match params.iter().find(|(k, _)| *k == key) {
                Some((_, v)) => Ok(v),
                None => invalid(format!("potential '{spec}': missing parameter '{key}'")),
            }
        };
        let real = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| crate::Error::InvalidArgument(format!("potential '{spec}': '{s}' is not a real number")))
        };
        match name.trim() {
            "zero" if params.is_empty() => Ok(Self::zero()),
            "zero" => invalid(format!("potential '{spec}': zero takes no parameters")),
            "quadratic" => Self::quadratic(real(take("a")?)?),
            "doublewell" => Self::double_well(real(take("a")?)?, scan),
            "polynomial" => {
                let coeffs = take("c")?.split(';').map(|c| real(c.trim())).collect::<Result<Vec<_>>>()?;
                Self::polynomial(coeffs, scan)
            }
            other => invalid(format!("unknown potential kind '{other}'")),
        }
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    /// Convexity modulus: exact for quadratics, a scan infimum otherwise.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            PotentialKind::Zero => true,
            PotentialKind::Quadratic(a) | PotentialKind::DoubleWell(a) => *a == 0.0,
            PotentialKind::Polynomial(c) => c.iter().all(|c| *c == 0.0),
            PotentialKind::Tabulated => false,
        }
    }

    /// `Some(a)` when the potential is exactly `a x²/2`.
    pub fn quadratic_coefficient(&self) -> Option<f64> {
        match self.kind {
            PotentialKind::Zero => Some(0.0),
            PotentialKind::Quadratic(a) => Some(a),
            _ => None,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Quadratic(a) => 0.5 * a * x * x,
            PotentialKind::DoubleWell(a) => {
                let s = 1.0 - x * x;
                a * s * s
            }
            PotentialKind::Polynomial(c) => c.iter().rev().fold(0.0, |acc, c| acc * x + c),
            PotentialKind::Tabulated => self.spline().value(x),
        }
    }

    pub fn gradient(&self, x: f64) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Quadratic(a) => a * x,
            PotentialKind::DoubleWell(a) => 4.0 * a * (x * x * x - x),
            PotentialKind::Polynomial(c) => {
                c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, c)| acc * x + k as f64 * c)
            }
            PotentialKind::Tabulated => self.spline().gradient(x),
        }
    }

    pub fn hessian(&self, x: f64) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Quadratic(a) => *a,
            PotentialKind::DoubleWell(a) => 4.0 * a * (3.0 * x * x - 1.0),
            PotentialKind::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(2)
                .rev()
                .fold(0.0, |acc, (k, c)| acc * x + (k * (k - 1)) as f64 * c),
            PotentialKind::Tabulated => self.spline().hessian(x),
        }
    }

    fn spline(&self) -> &NaturalSpline {
        self.spline.as_ref().expect("tabulated potential carries a spline")
    }

    /// `max |H(x) − H(−x)|` over a symmetric scan of `[-r, r]`.
    pub fn asymmetry(&self, r: f64) -> f64 {
        scan_grid((0.0, r)).map(|x| (self.value(x) - self.value(-x)).abs()).fold(0.0, f64::max)
    }

    /// Smallest value on a scan of `[left, right]`.
    pub fn scan_minimum(&self, left: f64, right: f64) -> f64 {
        scan_grid((left, right)).map(|x| self.value(x)).fold(f64::INFINITY, f64::min)
    }

    /// Largest `|V'|` on a scan of `[left, right]`.
    pub fn max_abs_gradient(&self, left: f64, right: f64) -> f64 {
        scan_grid((left, right)).map(|x| self.gradient(x).abs()).fold(0.0, f64::max)
    }

    /// Largest difference quotient of the gradient on a scan of
    /// `[left, right]`: the Lipschitz constant of `V'` seen by the grid.
    pub fn gradient_lipschitz(&self, left: f64, right: f64) -> f64 {
        let xs: Vec<f64> = scan_grid((left, right)).collect();
        xs.windows(2)
            .map(|w| ((self.gradient(w[1]) - self.gradient(w[0])) / (w[1] - w[0])).abs())
            .fold(0.0, f64::max)
    }

    /// Worst relative disagreement between the exact derivatives and central
    /// differences of the value (resp. gradient) on the scan interval.
    pub fn derivative_consistency(&self) -> f64 {
        let h = 1e-6 * (self.scan.1 - self.scan.0).max(1.0);
        let rel = |exact: f64, approx: f64| (exact - approx).abs() / exact.abs().max(1.0);
        scan_grid(self.scan)
            .map(|x| {
                let g = (self.value(x + h) - self.value(x - h)) / (2.0 * h);
                let k = (self.gradient(x + h) - self.gradient(x - h)) / (2.0 * h);
                rel(self.gradient(x), g).max(rel(self.hessian(x), k))
            })
            .fold(0.0, f64::max)
    }
}

fn scan_grid((left, right): (f64, f64)) -> impl Iterator<Item = f64> {
    let step = (right - left) / (SCAN_POINTS - 1) as f64;
    (0..SCAN_POINTS).map(move |i| if i + 1 == SCAN_POINTS { right } else { left + i as f64 * step })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_and_double_well_moduli() {
        assert_eq!(Potential::quadratic(2.5).unwrap().lambda(), 2.5);
        let dw = Potential::double_well(1.0, (-4.0, 4.0)).unwrap();
        assert!((dw.lambda() + 4.0).abs() < 1e-12);
        // On [1, 2] the double well is convex: V'' = 4(3x² − 1) ≥ 8.
        let dw = Potential::double_well(1.0, (1.0, 2.0)).unwrap();
        assert!((dw.lambda() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn derivatives_match_difference_quotients() {
        let pots = [
            Potential::quadratic(-0.7).unwrap(),
            Potential::double_well(0.5, (-3.0, 3.0)).unwrap(),
            Potential::polynomial(vec![1.0, -2.0, 0.5, 0.0, 0.25], (-3.0, 3.0)).unwrap(),
        ];
        for p in &pots {
            assert!(p.derivative_consistency() < 1e-6, "{:?}", p.kind());
        }
    }

    #[test]
    fn tabulated_reproduces_a_smooth_function() {
        let xs: Vec<f64> = (0..=400).map(|i| -4.0 + i as f64 * 0.02).collect();
        let p = Potential::tabulated(-4.0, 4.0, xs.iter().map(|x| x.cos()).collect(), (-3.0, 3.0)).unwrap();
        for x in [-2.9, -0.3, 0.0, 1.7] {
            assert!((p.value(x) - f64::cos(x)).abs() < 1e-7);
            assert!((p.gradient(x) + f64::sin(x)).abs() < 1e-5);
            assert!((p.hessian(x) + f64::cos(x)).abs() < 1e-3);
        }
        assert!((p.lambda() + 1.0).abs() < 1e-3);
        assert!(p.derivative_consistency() < 1e-6);
    }

    #[test]
    fn parse_grammar() {
        let scan = (-2.0, 2.0);
        assert_eq!(Potential::parse("zero", scan).unwrap().kind(), &PotentialKind::Zero);
        assert_eq!(Potential::parse("quadratic:a=1.5", scan).unwrap().kind(), &PotentialKind::Quadratic(1.5));
        assert_eq!(Potential::parse(" doublewell:a=1.0 ", scan).unwrap().kind(), &PotentialKind::DoubleWell(1.0));
        let p = Potential::parse("polynomial:c=0;0;0;0;1", scan).unwrap();
        assert_eq!(p.value(2.0), 16.0);
        assert_eq!(p.gradient(2.0), 32.0);
        assert_eq!(p.hessian(2.0), 48.0);
        for bad in ["cubic:a=1", "quadratic", "quadratic:a=x", "quadratic:b=1", "zero:a=1", "quadratic:a"] {
            assert!(Potential::parse(bad, scan).is_err(), "{bad}");
        }
    }

    #[test]
    fn symmetry_scan() {
        assert_eq!(Potential::quadratic(1.0).unwrap().asymmetry(3.0), 0.0);
        let odd = Potential::polynomial(vec![0.0, 1.0, 1.0], (-1.0, 1.0)).unwrap();
        assert!((odd.asymmetry(3.0) - 6.0).abs() < 1e-12);
    }
}
