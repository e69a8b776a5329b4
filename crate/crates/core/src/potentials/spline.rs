use crate::error::{invalid, Result};

/// Natural cubic spline on uniform knots, extended linearly beyond the
/// end knots (which keeps it C² since the end curvatures vanish).
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct NaturalSpline {
    left: f64,
    step: f64,
    values: Vec<f64>,
    curvature: Vec<f64>,
}

impl NaturalSpline {
    pub(crate) fn new(left: f64, right: f64, values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 3 || !(right > left) || values.iter().any(|v| !v.is_finite()) {
            return invalid("tabulated potential needs ≥ 3 finite values on a nonempty interval");
        }
        let step = (right - left) / (n - 1) as f64;
        // Tridiagonal system M_{k-1} + 4 M_k + M_{k+1} = 6 Δ²y_k / h², M_0 = M_{n-1} = 0.
        let mut curvature = vec![0.0; n];
        let mut diag = vec![4.0; n];
        let mut rhs: Vec<f64> =
            (0..n).map(|k| if k == 0 || k + 1 == n { 0.0 } else { 6.0 * (values[k - 1] - 2.0 * values[k] + values[k + 1]) / (step * step) }).collect();
        for k in 2..n - 1 {
            let w = 1.0 / diag[k - 1];
            diag[k] -= w;
            rhs[k] -= w * rhs[k - 1];
        }
        for k in (1..n - 1).rev() {
            curvature[k] = (rhs[k] - curvature[k + 1]) / diag[k];
        }
        Ok(Self { left, step, values, curvature })
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let last = self.values.len() - 2;
        let k = ((x - self.left) / self.step).floor().clamp(0.0, last as f64) as usize;
        (k, x - (self.left + k as f64 * self.step))
    }

    fn right(&self) -> f64 {
        self.left + self.step * (self.values.len() - 1) as f64
    }

    pub(crate) fn value(&self, x: f64) -> f64 {
        if x < self.left {
            return self.values[0] + self.gradient(self.left) * (x - self.left);
        }
        if x > self.right() {
            return self.values[self.values.len() - 1] + self.gradient(self.right()) * (x - self.right());
        }
        let (k, t) = self.locate(x);
        let h = self.step;
        let (m0, m1) = (self.curvature[k], self.curvature[k + 1]);
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let s = h - t;
        (m0 * s * s * s + m1 * t * t * t) / (6.0 * h) + (y0 / h - m0 * h / 6.0) * s + (y1 / h - m1 * h / 6.0) * t
    }

    pub(crate) fn gradient(&self, x: f64) -> f64 {
        let x = x.clamp(self.left, self.right());
        let (k, t) = self.locate(x);
        let h = self.step;
        let (m0, m1) = (self.curvature[k], self.curvature[k + 1]);
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let s = h - t;
        (-m0 * s * s + m1 * t * t) / (2.0 * h) + (y1 - y0) / h - (m1 - m0) * h / 6.0
    }

    pub(crate) fn hessian(&self, x: f64) -> f64 {
        if x < self.left || x > self.right() {
            return 0.0;
        }
        let (k, t) = self.locate(x);
        (self.curvature[k] * (self.step - t) + self.curvature[k + 1] * t) / self.step
    }
}
