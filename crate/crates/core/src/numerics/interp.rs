//! Lagrange interpolation on uniform axes.

pub const MAX_POINTS: usize = 8;

/// A uniform axis `x_i = origin + i * h`, `i = 0..n`, with a fixed
/// interpolation stencil of `points` nodes.
#[derive(Debug, Clone, Copy)]
pub struct UniformLagrange {
    origin: f64,
    h: f64,
    n: usize,
    points: usize,
    denom: [f64; MAX_POINTS],
}

/// Window start and weights for one interpolation point.
#[derive(Debug, Clone, Copy)]
pub struct Weights {
    pub start: usize,
    pub len: usize,
    pub w: [f64; MAX_POINTS],
}

impl UniformLagrange {
    pub fn new(origin: f64, h: f64, n: usize, points: usize) -> Self {
        assert!(
            (2..=MAX_POINTS).contains(&points),
            "interpolation points must be in 2..=8"
        );
        let points = points.min(n);
        let mut denom = [1.0; MAX_POINTS];
        for (i, d) in denom.iter_mut().enumerate().take(points) {
            for j in 0..points {
                if j != i {
                    *d *= i as f64 - j as f64;
                }
            }
        }
        UniformLagrange {
            origin,
            h,
            n,
            points,
            denom,
        }
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Weights at `x`. Outside the axis the boundary window extrapolates.
    #[inline]
    pub fn weights(&self, x: f64) -> Weights {
        let xi = (x - self.origin) / self.h;
        self.weights_index(xi)
    }

    /// Weights at fractional index `xi`.
    #[inline]
    pub fn weights_index(&self, xi: f64) -> Weights {
        let p = self.points;
        let base = xi.floor() as isize - (p as isize - 1) / 2;
        let start = base.clamp(0, (self.n - p) as isize) as usize;
        let s = xi - start as f64;
        let mut w = [0.0; MAX_POINTS];
        // exact hit on a node
        let r = s.round();
        if (s - r).abs() < 1e-13 && r >= 0.0 && (r as usize) < p {
            w[r as usize] = 1.0;
            return Weights { start, len: p, w };
        }
        let mut full = 1.0;
        for j in 0..p {
            full *= s - j as f64;
        }
        for (i, wi) in w.iter_mut().enumerate().take(p) {
            *wi = full / ((s - i as f64) * self.denom[i]);
        }
        Weights { start, len: p, w }
    }

    pub fn eval(&self, f: &[f64], x: f64) -> f64 {
        let wt = self.weights(x);
        (0..wt.len).map(|i| wt.w[i] * f[wt.start + i]).sum()
    }
}
