//! Finite-difference stencils on uniform axes.
//!
//! Away from the ends every node gets a centered stencil; near the ends the
//! stencil is shifted inward and widened just enough to keep the formal
//! order. Weights come
//! from Fornberg's recursion and are applied in "difference from the center
//! node" form, so constant data differentiates to exactly zero.

use ndarray::{Array2, ArrayView1, Axis};

/// Fornberg weights: `c[k][j]` is the weight of node `x[j]` in the
/// approximation of the k-th derivative at `z`, for `k = 0..=m`.
pub fn fornberg(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Formal accuracy order of the centered stencils (2, 4, 6 or 8).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct DiffOrder(usize);

impl DiffOrder {
    pub const SECOND: DiffOrder = DiffOrder(2);
    pub const FOURTH: DiffOrder = DiffOrder(4);
    pub const SIXTH: DiffOrder = DiffOrder(6);
    pub const EIGHTH: DiffOrder = DiffOrder(8);

    pub fn new(order: usize) -> Option<Self> {
        matches!(order, 2 | 4 | 6 | 8).then_some(DiffOrder(order))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// Number of points in the stencil.
    pub fn width(self) -> usize {
        self.0 + 1
    }

    pub fn half_width(self) -> usize {
        self.0 / 2
    }
}

impl TryFrom<usize> for DiffOrder {
    type Error = String;
    fn try_from(v: usize) -> Result<Self, String> {
        DiffOrder::new(v).ok_or_else(|| format!("difference order must be 2, 4, 6 or 8, got {v}"))
    }
}

impl From<DiffOrder> for usize {
    fn from(d: DiffOrder) -> usize {
        d.0
    }
}

impl Default for DiffOrder {
    fn default() -> Self {
        DiffOrder::EIGHTH
    }
}

#[derive(Debug, Clone)]
struct Row {
    start: usize,
    weights: Vec<f64>,
}

/// Precomputed derivative stencils for every node of a uniform axis.
#[derive(Debug, Clone)]
pub struct AxisStencil {
    n: usize,
    center: usize,
    rows: Vec<Row>,
}

impl AxisStencil {
    /// Stencils for the `deriv`-th derivative on `n` nodes with spacing `h`.
    /// The width is reduced when the axis is shorter than the stencil.
    pub fn new(n: usize, h: f64, deriv: usize, order: DiffOrder) -> Self {
        assert!(n > deriv, "axis too short for derivative {deriv}");
        let w = order.width().min(n);
        let half = (w - 1) / 2;
        // Shifted stencils carry deriv - 1 extra points so they keep the formal order.
        let wb = (w + deriv - 1).min(n);
        let scale = h.powi(deriv as i32);
        let weights_for = |rel: usize, width: usize| -> Vec<f64> {
            let xs: Vec<f64> = (0..width).map(|i| i as f64 - rel as f64).collect();
            fornberg(0.0, &xs, deriv)[deriv]
                .iter()
                .map(|c| c / scale)
                .collect()
        };
        let centered = weights_for(half, w);
        let rows = (0..n)
            .map(|j| {
                if j >= half && j + half < n {
                    Row {
                        start: j - half,
                        weights: centered.clone(),
                    }
                } else {
                    let start = if j < half { 0 } else { n - wb };
                    Row {
                        start,
                        weights: weights_for(j - start, wb),
                    }
                }
            })
            .collect();
        AxisStencil {
            n,
            center: half,
            rows,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Number of nodes from each end that use a shifted stencil.
    pub fn boundary_layer(&self) -> usize {
        self.center
    }

    #[inline]
    pub fn apply_at(&self, f: &ArrayView1<f64>, j: usize) -> f64 {
        let row = &self.rows[j];
        let fj = f[j];
        row.weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * (f[row.start + i] - fj))
            .sum()
    }

    pub fn apply_slice(&self, f: &[f64], j: usize) -> f64 {
        let row = &self.rows[j];
        let fj = f[j];
        row.weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * (f[row.start + i] - fj))
            .sum()
    }

    /// Differentiate a 2-D array along `axis`.
    pub fn apply_along(&self, a: &Array2<f64>, axis: Axis) -> Array2<f64> {
        let mut out = Array2::zeros(a.raw_dim());
        for (lane_in, mut lane_out) in a.lanes(axis).into_iter().zip(out.lanes_mut(axis)) {
            for j in 0..self.n {
                lane_out[j] = self.apply_at(&lane_in, j);
            }
        }
        out
    }

    /// Differentiate an n-dimensional array along `axis`.
    pub fn apply_along_dyn(&self, a: &ndarray::ArrayD<f64>, axis: usize) -> ndarray::ArrayD<f64> {
        let mut out = ndarray::ArrayD::zeros(a.raw_dim());
        for (lane_in, mut lane_out) in a
            .lanes(Axis(axis))
            .into_iter()
            .zip(out.lanes_mut(Axis(axis)))
        {
            for j in 0..self.n {
                lane_out[j] = self.apply_at(&lane_in, j);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::Array1;

    #[test]
    fn fornberg_matches_textbook_central_weights() {
        let c = fornberg(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_abs_diff_eq!(c[1][0], -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c[1][2], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c[2][0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c[2][1], -2.0, epsilon = 1e-15);
        let c = fornberg(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        assert_abs_diff_eq!(c[2][0], -1.0 / 12.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c[2][2], -2.5, epsilon = 1e-14);
    }

    #[test]
    fn constants_differentiate_to_exact_zero() {
        let f = Array1::from_elem(20, 0.3717);
        for order in [2, 4, 6, 8] {
            let d = DiffOrder::new(order).unwrap();
            for deriv in [1, 2] {
                let st = AxisStencil::new(20, 0.013, deriv, d);
                for j in 0..20 {
                    assert_eq!(st.apply_at(&f.view(), j), 0.0);
                }
            }
        }
    }

    #[test]
    fn convergence_order_on_sine() {
        for (order, expect) in [(2usize, 2.0), (4, 4.0), (6, 6.0)] {
            let d = DiffOrder::new(order).unwrap();
            let err = |n: usize| {
                let h = 1.0 / (n - 1) as f64;
                let f = Array1::from_shape_fn(n, |i| (1.3 * i as f64 * h).sin());
                let st = AxisStencil::new(n, h, 2, d);
                (0..n)
                    .map(|j| {
                        let x = j as f64 * h;
                        (st.apply_at(&f.view(), j) + 1.69 * (1.3 * x).sin()).abs()
                    })
                    .fold(0.0, f64::max)
            };
            let rate = (err(21) / err(41)).log2();
            assert!((rate - expect).abs() < 0.6, "order {order}: rate {rate}");
        }
    }
}
