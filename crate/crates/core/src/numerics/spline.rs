//! Piecewise cubics: a C^1 Hermite interpolant with fourth-order slopes
//! (tabulated potentials) and a natural C^2 spline with linear extension
//! (tabulated initial profiles).

use crate::error::{Result, WkbError};

fn check_samples(xs: &[f64], ys: &[f64], min: usize) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(WkbError::Invalid(format!(
            "sample length mismatch: {} abscissae, {} values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < min {
        return Err(WkbError::Invalid(format!(
            "need at least {min} samples, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(WkbError::Invalid("samples must be finite".into()));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(WkbError::Invalid(
            "sample abscissae must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Index of the interval `[xs[i], xs[i+1]]` containing `x` (clamped).
fn locate(xs: &[f64], x: f64) -> usize {
    match xs.partition_point(|&v| v <= x) {
        0 => 0,
        p => (p - 1).min(xs.len() - 2),
    }
}

/// Derivative at `x` of the Lagrange polynomial through `(xs, ys)`.
fn lagrange_slope(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let mut d = 0.0;
    for j in 0..n {
        let mut denom = 1.0;
        for m in 0..n {
            if m != j {
                denom *= xs[j] - xs[m];
            }
        }
        let mut num = 0.0;
        for l in 0..n {
            if l == j {
                continue;
            }
            let mut p = 1.0;
            for m in 0..n {
                if m != j && m != l {
                    p *= x - xs[m];
                }
            }
            num += p;
        }
        d += ys[j] * num / denom;
    }
    d
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermiteCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl HermiteCubic {
    /// Slopes come from the cubic through the four nearest samples, which
    /// keeps the interpolation error at fourth order.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        check_samples(&xs, &ys, 4)?;
        let n = xs.len();
        let slopes = (0..n)
            .map(|i| {
                let s = i.saturating_sub(1).min(n - 4);
                lagrange_slope(&xs[s..s + 4], &ys[s..s + 4], xs[i])
            })
            .collect();
        Ok(HermiteCubic { xs, ys, slopes })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    pub fn samples(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.ys)
    }

    /// Value and first derivative. Caller checks the range.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let i = locate(&self.xs, x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let s = (x - x0) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let value = h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
        let d00 = 6.0 * s2 - 6.0 * s;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = -6.0 * s2 + 6.0 * s;
        let d11 = 3.0 * s2 - 2.0 * s;
        let deriv = (d00 * y0 + d10 * m0 + d01 * y1 + d11 * m1) / h;
        (value, deriv)
    }
}

/// Natural cubic spline, continued linearly outside the samples. The
/// continuation is C^2 because the end second derivatives are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    m: Vec<f64>,
}

impl NaturalSpline {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        check_samples(&xs, &ys, 3)?;
        let n = xs.len();
        let mut m = vec![0.0; n];
        // Thomas algorithm for the interior second derivatives
        let k = n - 2;
        let mut diag = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        let mut sub = vec![0.0; k];
        let mut sup = vec![0.0; k];
        for i in 1..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            sub[i - 1] = h0;
            diag[i - 1] = 2.0 * (h0 + h1);
            sup[i - 1] = h1;
            rhs[i - 1] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
        }
        for i in 1..k {
            let w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        for i in (0..k).rev() {
            let next = if i + 1 < k { m[i + 2] } else { 0.0 };
            m[i + 1] = (rhs[i] - sup[i] * next) / diag[i];
        }
        Ok(NaturalSpline { xs, ys, m })
    }

    pub fn samples(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.ys)
    }

    /// Value, first and second derivative anywhere on the real line.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let n = self.xs.len();
        let end_slope = |i: usize| {
            // slope of the spline at an end node
            if i == 0 {
                let h = self.xs[1] - self.xs[0];
                (self.ys[1] - self.ys[0]) / h - h * (2.0 * self.m[0] + self.m[1]) / 6.0
            } else {
                let h = self.xs[n - 1] - self.xs[n - 2];
                (self.ys[n - 1] - self.ys[n - 2]) / h
                    + h * (self.m[n - 2] + 2.0 * self.m[n - 1]) / 6.0
            }
        };
        if x < self.xs[0] {
            let s = end_slope(0);
            return (self.ys[0] + s * (x - self.xs[0]), s, 0.0);
        }
        if x > self.xs[n - 1] {
            let s = end_slope(n - 1);
            return (self.ys[n - 1] + s * (x - self.xs[n - 1]), s, 0.0);
        }
        let i = locate(&self.xs, x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 =
            (y1 - y0) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0 + (3.0 * b * b - 1.0) * h * m1 / 6.0;
        let d2 = a * m0 + b * m1;
        (value, d1, d2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_reproduces_cubics_exactly() {
        let xs: Vec<f64> = vec![-1.0, -0.7, -0.1, 0.3, 0.9, 1.5];
        let f = |x: f64| 2.0 - x + 0.5 * x * x - x * x * x;
        let df = |x: f64| -1.0 + x - 3.0 * x * x;
        let ys = xs.iter().map(|&x| f(x)).collect();
        let h = HermiteCubic::new(xs, ys).unwrap();
        for &x in &[-0.95, -0.4, 0.0, 0.77, 1.49] {
            let (v, d) = h.eval(x);
            assert!((v - f(x)).abs() < 1e-12);
            assert!((d - df(x)).abs() < 1e-11);
        }
    }

    #[test]
    fn natural_spline_is_c2_across_the_linear_extension() {
        let xs: Vec<f64> = (0..9).map(|i| i as f64 * 0.5).collect();
        let ys = xs.iter().map(|x: &f64| x.sin()).collect();
        let s = NaturalSpline::new(xs, ys).unwrap();
        let eps = 1e-9;
        for edge in [0.0, 4.0] {
            let (v0, d0, c0) = s.eval(edge - eps);
            let (v1, d1, c1) = s.eval(edge + eps);
            assert!((v0 - v1).abs() < 1e-8);
            assert!((d0 - d1).abs() < 1e-7);
            assert!((c0 - c1).abs() < 1e-7);
        }
    }

    #[test]
    fn rejects_unsorted_samples() {
        assert!(HermiteCubic::new(vec![0.0, 1.0, 0.5, 2.0], vec![0.0; 4]).is_err());
        assert!(HermiteCubic::new(vec![0.0, 1.0, 2.0], vec![0.0; 3]).is_err());
    }
}
