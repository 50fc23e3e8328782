//! Core domain types: potentials, space-time grids, initial profiles and
//! sampled amplitude fields.

use ndarray::Array2;

use crate::error::{Result, WkbError};
use crate::numerics::spline::{HermiteCubic, NaturalSpline};

/// A one-dimensional potential V(x).
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Free,
    /// V(x) = kappa * x^2.
    Harmonic {
        kappa: f64,
    },
    /// V(x) = sum_i c_i x^i.
    Polynomial {
        coeffs: Vec<f64>,
    },
    /// Piecewise cubic (C^1) through strictly increasing samples.
    Tabulated(HermiteCubic),
}

impl PotentialSpec {
    pub fn harmonic() -> Self {
        PotentialSpec::Harmonic { kappa: 1.0 }
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(WkbError::Invalid(
                "polynomial potential needs at least one coefficient".into(),
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(WkbError::Invalid(
                "polynomial coefficients must be finite".into(),
            ));
        }
        Ok(PotentialSpec::Polynomial { coeffs })
    }

    pub fn tabulated(xs: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        Ok(PotentialSpec::Tabulated(HermiteCubic::new(xs, vs)?))
    }

    pub fn family(&self) -> &'static str {
        match self {
            PotentialSpec::Free => "free",
            PotentialSpec::Harmonic { .. } => "harmonic",
            PotentialSpec::Polynomial { .. } => "polynomial",
            PotentialSpec::Tabulated(_) => "tabulated",
        }
    }

    /// Interval on which the potential can be evaluated.
    pub fn support(&self) -> (f64, f64) {
        match self {
            PotentialSpec::Tabulated(t) => t.range(),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    fn check_range(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.support();
        if x < lo || x > hi || x.is_nan() {
            return Err(WkbError::Range { x, lo, hi });
        }
        Ok(())
    }

    /// V(x).
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.check_range(x)?;
        Ok(match self {
            PotentialSpec::Free => 0.0,
            PotentialSpec::Harmonic { kappa } => kappa * x * x,
            PotentialSpec::Polynomial { coeffs } => {
                coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
            }
            PotentialSpec::Tabulated(t) => t.eval(x).0,
        })
    }

    /// V'(x). For tabulated potentials this is the exact derivative of the
    /// piecewise cubic.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        self.check_range(x)?;
        Ok(match self {
            PotentialSpec::Free => 0.0,
            PotentialSpec::Harmonic { kappa } => 2.0 * kappa * x,
            PotentialSpec::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (i, c)| acc * x + i as f64 * c),
            PotentialSpec::Tabulated(t) => t.eval(x).1,
        })
    }
}

/// Free-function form of [`PotentialSpec::eval`].
pub fn eval_potential(spec: &PotentialSpec, x: f64) -> Result<f64> {
    spec.eval(x)
}

/// Free-function form of [`PotentialSpec::derivative`].
pub fn eval_potential_derivative(spec: &PotentialSpec, x: f64) -> Result<f64> {
    spec.derivative(x)
}

/// A closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn contains_interval(&self, other: Interval) -> bool {
        other.lo >= self.lo && other.hi <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

const WINDOW_SAMPLES: usize = 4096;

/// All maximal subintervals of `search` on which `beta - V(x) >= margin`,
/// left to right. Endpoints are refined by bisection and always lie on the
/// allowed side.
pub fn allowed_components(
    spec: &PotentialSpec,
    beta: f64,
    margin: f64,
    search: Interval,
) -> Result<Vec<Interval>> {
    if !(margin > 0.0) {
        return Err(WkbError::Invalid(format!(
            "margin must be positive, got {margin}"
        )));
    }
    if !(search.lo.is_finite() && search.hi.is_finite() && search.hi > search.lo) {
        return Err(WkbError::Invalid(format!(
            "search interval [{}, {}] must be finite and non-empty",
            search.lo, search.hi
        )));
    }
    let (slo, shi) = spec.support();
    let lo = search.lo.max(slo);
    let hi = search.hi.min(shi);
    if hi <= lo {
        return Err(WkbError::Domain(
            "search interval does not overlap the potential's support".into(),
        ));
    }
    let g = |x: f64| -> f64 { beta - spec.eval(x).unwrap_or(f64::INFINITY) - margin };
    let refine = |mut bad: f64, mut good: f64| -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (bad + good);
            if mid == bad || mid == good {
                break;
            }
            if g(mid) >= 0.0 {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    };
    let h = (hi - lo) / WINDOW_SAMPLES as f64;
    let xs: Vec<f64> = (0..=WINDOW_SAMPLES)
        .map(|i| {
            if i == WINDOW_SAMPLES {
                hi
            } else {
                lo + i as f64 * h
            }
        })
        .collect();
    let ok: Vec<bool> = xs.iter().map(|&x| g(x) >= 0.0).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < xs.len() {
        if !ok[i] {
            i += 1;
            continue;
        }
        let start = if i == 0 {
            xs[0]
        } else {
            refine(xs[i - 1], xs[i])
        };
        let mut j = i;
        while j + 1 < xs.len() && ok[j + 1] {
            j += 1;
        }
        let end = if j + 1 == xs.len() {
            xs[j]
        } else {
            refine(xs[j + 1], xs[j])
        };
        out.push(Interval::new(start, end));
        i = j + 1;
    }
    Ok(out)
}

/// The longest subinterval of `search` on which `beta - V(x) >= margin`.
pub fn allowed_window(
    spec: &PotentialSpec,
    beta: f64,
    margin: f64,
    search: Interval,
) -> Result<Interval> {
    allowed_components(spec, beta, margin, search)?
        .into_iter()
        .fold(None, |best: Option<Interval>, c| match best {
            Some(b) if b.width() >= c.width() => Some(b),
            _ => Some(c),
        })
        .ok_or_else(|| {
            WkbError::Domain(format!(
                "no classically allowed region at beta = {beta}, margin = {margin}"
            ))
        })
}

/// Uniform space-time grid on `[x_lo, x_hi] x [0, t_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceTimeGrid {
    pub x_lo: f64,
    pub x_hi: f64,
    pub nx: usize,
    pub t_hi: f64,
    pub nt: usize,
}

impl SpaceTimeGrid {
    pub fn new(x_lo: f64, x_hi: f64, nx: usize, t_hi: f64, nt: usize) -> Result<Self> {
        let grid = SpaceTimeGrid {
            x_lo,
            x_hi,
            nx,
            t_hi,
            nt,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.nx < 5 {
            problems.push(format!("nx = {} (need >= 5)", self.nx));
        }
        if self.nt < 5 {
            problems.push(format!("nt = {} (need >= 5)", self.nt));
        }
        if !(self.x_hi > self.x_lo) || !self.x_lo.is_finite() || !self.x_hi.is_finite() {
            problems.push(format!("x range [{}, {}] is empty", self.x_lo, self.x_hi));
        }
        if !(self.t_hi > 0.0) || !self.t_hi.is_finite() {
            problems.push(format!("t_hi = {} (need > 0)", self.t_hi));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(WkbError::Invalid(format!(
                "bad grid: {}",
                problems.join("; ")
            )))
        }
    }

    pub fn hx(&self) -> f64 {
        (self.x_hi - self.x_lo) / (self.nx - 1) as f64
    }

    pub fn ht(&self) -> f64 {
        self.t_hi / (self.nt - 1) as f64
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            self.x_hi
        } else {
            self.x_lo + i as f64 * self.hx()
        }
    }

    #[inline]
    pub fn t(&self, n: usize) -> f64 {
        if n + 1 == self.nt {
            self.t_hi
        } else {
            n as f64 * self.ht()
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ts(&self) -> Vec<f64> {
        (0..self.nt).map(|n| self.t(n)).collect()
    }

    pub fn x_range(&self) -> Interval {
        Interval::new(self.x_lo, self.x_hi)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.nt)
    }
}

/// The free function phi(u) fixing the amplitude along characteristics.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialProfile {
    Constant(f64),
    /// exp(-(u - center)^2 / (2 width^2)), peak value 1.
    Gaussian {
        center: f64,
        width: f64,
    },
    TabulatedC2(NaturalSpline),
}

impl Default for InitialProfile {
    fn default() -> Self {
        InitialProfile::Gaussian {
            center: 0.0,
            width: 1.0,
        }
    }
}

impl InitialProfile {
    pub fn gaussian(center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() || !center.is_finite() {
            return Err(WkbError::Invalid(format!(
                "gaussian profile needs finite center and width > 0 (got {center}, {width})"
            )));
        }
        Ok(InitialProfile::Gaussian { center, width })
    }

    pub fn tabulated(us: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(InitialProfile::TabulatedC2(NaturalSpline::new(us, values)?))
    }

    /// (phi, phi', phi'') at u.
    pub fn eval3(&self, u: f64) -> (f64, f64, f64) {
        match self {
            InitialProfile::Constant(c) => (*c, 0.0, 0.0),
            InitialProfile::Gaussian { center, width } => {
                let s2 = width * width;
                let d = u - center;
                let g = (-0.5 * d * d / s2).exp();
                (g, -d / s2 * g, (d * d / s2 - 1.0) / s2 * g)
            }
            InitialProfile::TabulatedC2(s) => s.eval(u),
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.eval3(u).0
    }

    pub fn is_identically_zero(&self) -> bool {
        matches!(self, InitialProfile::Constant(c) if *c == 0.0)
    }
}

/// One real coefficient a_k sampled on a space-time grid, shape (nx, nt).
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeField {
    pub order: usize,
    pub grid: SpaceTimeGrid,
    values: Array2<f64>,
}

impl AmplitudeField {
    pub fn new(order: usize, grid: SpaceTimeGrid, values: Array2<f64>) -> Result<Self> {
        if values.dim() != grid.shape() {
            return Err(WkbError::Shape(format!(
                "field of shape {:?} on grid of shape {:?}",
                values.dim(),
                grid.shape()
            )));
        }
        if let Some(((i, n), v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(WkbError::Numeric(format!(
                "a_{order} = {v} at x = {}, t = {}",
                grid.x(i),
                grid.t(n)
            )));
        }
        Ok(AmplitudeField {
            order,
            grid,
            values,
        })
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(
        order: usize,
        grid: SpaceTimeGrid,
        f: F,
    ) -> Result<Self> {
        let values = Array2::from_shape_fn(grid.shape(), |(i, n)| f(grid.x(i), grid.t(n)));
        Self::new(order, grid, values)
    }

    pub fn zeros(order: usize, grid: SpaceTimeGrid) -> Self {
        AmplitudeField {
            order,
            grid,
            values: Array2::zeros(grid.shape()),
        }
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    /// Scale and add: `alpha * self + gamma * other` (same grid).
    pub fn combine(&self, alpha: f64, other: &AmplitudeField, gamma: f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(WkbError::Shape(
                "combining fields on different grids".into(),
            ));
        }
        Self::new(
            self.order,
            self.grid,
            &self.values * alpha + &other.values * gamma,
        )
    }

    pub fn scaled(&self, c: f64) -> Self {
        AmplitudeField {
            order: self.order,
            grid: self.grid,
            values: &self.values * c,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_examples() {
        assert_eq!(eval_potential(&PotentialSpec::Free, 3.7).unwrap(), 0.0);
        assert_eq!(
            eval_potential(&PotentialSpec::harmonic(), 2.0).unwrap(),
            4.0
        );
        let p = PotentialSpec::polynomial(vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(eval_potential(&p, 2.0).unwrap(), 12.0);
        assert_eq!(
            eval_potential_derivative(&PotentialSpec::harmonic(), 2.0).unwrap(),
            4.0
        );
        assert_eq!(
            eval_potential_derivative(&PotentialSpec::Free, -8.1).unwrap(),
            0.0
        );
        assert_eq!(eval_potential_derivative(&p, 1.0).unwrap(), 5.0);
    }

    #[test]
    fn tabulated_out_of_range_is_a_range_error() {
        let xs: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let spec = PotentialSpec::tabulated(xs.clone(), xs.clone()).unwrap();
        assert!(matches!(spec.eval(5.5), Err(WkbError::Range { .. })));
        assert!(matches!(spec.derivative(-0.1), Err(WkbError::Range { .. })));
        assert!(PotentialSpec::tabulated(vec![0.0, 1.0, 2.0], vec![0.0; 3]).is_err());
        assert!(PotentialSpec::polynomial(vec![]).is_err());
    }

    #[test]
    fn allowed_window_examples() {
        let w = allowed_window(
            &PotentialSpec::harmonic(),
            1.0,
            0.19,
            Interval::new(-2.0, 2.0),
        )
        .unwrap();
        assert!(
            (w.lo + 0.9).abs() < 1e-12 && (w.hi - 0.9).abs() < 1e-12,
            "{w:?}"
        );
        let w = allowed_window(&PotentialSpec::Free, 1.0, 0.5, Interval::new(-1.0, 1.0)).unwrap();
        assert_eq!(w, Interval::new(-1.0, 1.0));
        let e = allowed_window(
            &PotentialSpec::harmonic(),
            1.0,
            2.0,
            Interval::new(-2.0, 2.0),
        );
        assert!(matches!(e, Err(WkbError::Domain(_))));
    }

    #[test]
    fn allowed_window_picks_longest_component_of_double_well() {
        // V = (x^2 - 1)^2 = 1 - 2x^2 + x^4; at beta = 0.5 two wells are allowed
        let spec = PotentialSpec::polynomial(vec![1.0, 0.0, -2.0, 0.0, 1.0]).unwrap();
        let comps = allowed_components(&spec, 0.5, 0.01, Interval::new(-2.0, 2.0)).unwrap();
        assert_eq!(comps.len(), 2);
        for c in &comps {
            for k in 0..=100 {
                let x = c.lo + c.width() * k as f64 / 100.0;
                assert!(0.5 - spec.eval(x).unwrap() >= 0.01 - 1e-10);
            }
        }
    }

    #[test]
    fn grid_validation() {
        assert!(SpaceTimeGrid::new(0.0, 1.0, 4, 1.0, 10).is_err());
        assert!(SpaceTimeGrid::new(1.0, 1.0, 10, 1.0, 10).is_err());
        assert!(SpaceTimeGrid::new(0.0, 1.0, 10, 0.0, 10).is_err());
        let g = SpaceTimeGrid::new(-1.0, 1.0, 5, 2.0, 5).unwrap();
        assert_eq!(g.x(4), 1.0);
        assert_eq!(g.hx(), 0.5);
        assert_eq!(g.t(4), 2.0);
    }

    #[test]
    fn gaussian_profile_derivatives() {
        let p = InitialProfile::gaussian(0.3, 0.7).unwrap();
        let h = 1e-5;
        for &u in &[-1.0, 0.0, 0.3, 1.2] {
            let (f, d1, d2) = p.eval3(u);
            let fd1 = (p.eval(u + h) - p.eval(u - h)) / (2.0 * h);
            let fd2 = (p.eval(u + h) - 2.0 * f + p.eval(u - h)) / (h * h);
            assert!((d1 - fd1).abs() < 1e-8);
            assert!((d2 - fd2).abs() < 1e-4);
        }
        assert!(InitialProfile::gaussian(0.0, 0.0).is_err());
    }

    #[test]
    fn non_finite_fields_are_rejected() {
        let g = SpaceTimeGrid::new(0.0, 1.0, 5, 1.0, 5).unwrap();
        let e = AmplitudeField::from_fn(0, g, |x, _| if x > 0.5 { f64::NAN } else { 1.0 });
        assert!(matches!(e, Err(WkbError::Numeric(_))));
    }
}
