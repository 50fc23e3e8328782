//! Separable Hamilton-Jacobi phase S(x, t) = W(x) - beta t.
//!
//! The positive momentum branch S_x = +sqrt(2m(beta - V)) is used
//! throughout. S_x and S_xx are always evaluated from V and V' in closed
//! form; only W itself (and the time of flight T, the integral of m / S_x)
//! needs quadrature.

use crate::error::{Result, WkbError};
use crate::model::{allowed_components, Interval, PotentialSpec, SpaceTimeGrid};
use crate::numerics::quad::integrate;

const QUAD_TOL: f64 = 1e-14;

/// S_x, S_xx, W and T sampled on a sorted list of abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisSamples {
    pub xs: Vec<f64>,
    pub s_x: Vec<f64>,
    pub s_xx: Vec<f64>,
    pub w: Vec<f64>,
    pub time_of_flight: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField {
    spec: PotentialSpec,
    m: f64,
    beta: f64,
    anchor: f64,
    margin: f64,
    window: Interval,
    grid: SpaceTimeGrid,
    samples: AxisSamples,
}

impl PhaseField {
    pub fn spec(&self) -> &PotentialSpec {
        &self.spec
    }

    pub fn mass(&self) -> f64 {
        self.m
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// The classically allowed interval (at the margin) containing the grid.
    pub fn window(&self) -> Interval {
        self.window
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &AxisSamples {
        &self.samples
    }

    /// beta - V(x), or a domain error outside the potential's support.
    fn kinetic(&self, x: f64) -> Result<f64> {
        Ok(self.beta - self.spec.eval(x)?)
    }

    /// S_x(x) = sqrt(2m(beta - V(x))).
    pub fn s_x(&self, x: f64) -> Result<f64> {
        let k = self.kinetic(x)?;
        if !(k > 0.0) {
            return Err(WkbError::Domain(format!(
                "x = {x} is at or beyond a turning point (beta - V = {k})"
            )));
        }
        Ok((2.0 * self.m * k).sqrt())
    }

    /// S_xx(x) = -m V'(x) / S_x(x).
    pub fn s_xx(&self, x: f64) -> Result<f64> {
        Ok(-self.m * self.spec.derivative(x)? / self.s_x(x)?)
    }

    pub fn s_t(&self) -> f64 {
        -self.beta
    }

    /// Velocity of the characteristics, S_x / m.
    pub fn velocity(&self, x: f64) -> Result<f64> {
        Ok(self.s_x(x)? / self.m)
    }

    /// W(x) by adaptive quadrature from the anchor.
    pub fn w_at(&self, x: f64) -> Result<f64> {
        self.check_window(x)?;
        Ok(integrate(
            &|y| self.s_x(y).unwrap_or(f64::NAN),
            self.anchor,
            x,
            QUAD_TOL,
        ))
    }

    /// T(x) = integral of m / S_x from the anchor: the time a characteristic
    /// needs to travel from the anchor to x.
    pub fn time_of_flight(&self, x: f64) -> Result<f64> {
        self.check_window(x)?;
        Ok(integrate(
            &|y| self.m / self.s_x(y).unwrap_or(f64::NAN),
            self.anchor,
            x,
            QUAD_TOL,
        ))
    }

    /// Time of flight between two points, without reference to the anchor.
    pub fn flight_time_between(&self, a: f64, b: f64) -> Result<f64> {
        self.check_window(a)?;
        self.check_window(b)?;
        Ok(integrate(
            &|y| self.m / self.s_x(y).unwrap_or(f64::NAN),
            a,
            b,
            QUAD_TOL,
        ))
    }

    fn check_window(&self, x: f64) -> Result<()> {
        if !self.window.contains(x) {
            return Err(WkbError::Domain(format!(
                "x = {x} outside the allowed window [{}, {}]",
                self.window.lo, self.window.hi
            )));
        }
        Ok(())
    }

    /// S(x_i, t) on the construction grid.
    pub fn s_at_node(&self, i: usize, t: f64) -> f64 {
        self.samples.w[i] - self.beta * t
    }

    /// S(x, t) anywhere in the window.
    pub fn s(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.w_at(x)? - self.beta * t)
    }

    /// Sample S_x, S_xx, W and T at sorted abscissae inside the window.
    /// W and T are accumulated panel by panel from the anchor.
    pub fn sample_axis(&self, xs: &[f64]) -> Result<AxisSamples> {
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(WkbError::Invalid("sample abscissae must increase".into()));
        }
        for &x in xs {
            self.check_window(x)?;
        }
        let s_x = xs
            .iter()
            .map(|&x| self.s_x(x))
            .collect::<Result<Vec<_>>>()?;
        let s_xx = xs
            .iter()
            .map(|&x| self.s_xx(x))
            .collect::<Result<Vec<_>>>()?;
        let cumulative = |f: &dyn Fn(f64) -> f64| -> Vec<f64> {
            let mut out = vec![0.0; xs.len()];
            if xs.is_empty() {
                return out;
            }
            // start from the node nearest the anchor
            let i0 = xs
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    (a.1 - self.anchor)
                        .abs()
                        .partial_cmp(&(b.1 - self.anchor).abs())
                        .unwrap()
                })
                .map(|(i, _)| i)
                .unwrap();
            out[i0] = integrate(&f, self.anchor, xs[i0], QUAD_TOL);
            for i in i0 + 1..xs.len() {
                out[i] = out[i - 1] + integrate(&f, xs[i - 1], xs[i], QUAD_TOL);
            }
            for i in (0..i0).rev() {
                out[i] = out[i + 1] - integrate(&f, xs[i], xs[i + 1], QUAD_TOL);
            }
            out
        };
        let w = cumulative(&|y| self.s_x(y).unwrap_or(f64::NAN));
        let time_of_flight = cumulative(&|y| self.m / self.s_x(y).unwrap_or(f64::NAN));
        Ok(AxisSamples {
            xs: xs.to_vec(),
            s_x,
            s_xx,
            w,
            time_of_flight,
        })
    }

    /// Shift beta without touching the stored samples. Only useful for
    /// probing the sensitivity of [`hj_residual`].
    pub fn with_shifted_beta(&self, shift: f64) -> PhaseField {
        let mut p = self.clone();
        p.beta += shift;
        p
    }

    /// Max over grid nodes of |S_t + S_x^2 / 2m + V| using the stored samples.
    pub fn hj_residual(&self) -> f64 {
        hj_residual(self, &self.spec)
    }
}

/// Build the separable phase on `grid`. `anchor` defaults to the window
/// center (clamped into the grid); `margin` is the minimum kinetic energy
/// beta - V allowed anywhere the phase is used.
pub fn build_phase(
    spec: &PotentialSpec,
    m: f64,
    beta: f64,
    grid: &SpaceTimeGrid,
    anchor: Option<f64>,
    margin: f64,
) -> Result<PhaseField> {
    grid.validate()?;
    if !(m > 0.0) || !m.is_finite() {
        return Err(WkbError::Invalid(format!("mass must be positive, got {m}")));
    }
    if !beta.is_finite() {
        return Err(WkbError::Invalid(format!(
            "beta must be finite, got {beta}"
        )));
    }
    let span = (grid.x_hi - grid.x_lo).max(1.0);
    let search = Interval::new(grid.x_lo - 10.0 * span, grid.x_hi + 10.0 * span);
    let window = allowed_components(spec, beta, margin, search)?
        .into_iter()
        .find(|c| c.contains_interval(grid.x_range()))
        .ok_or_else(|| {
            WkbError::Domain(format!(
                "grid [{}, {}] is not inside a region with beta - V >= {margin} \
                 (turning point on or near the grid)",
                grid.x_lo, grid.x_hi
            ))
        })?;
    let anchor = match anchor {
        Some(a) => {
            if !grid.x_range().contains(a) {
                return Err(WkbError::Invalid(format!(
                    "anchor {a} outside grid [{}, {}]",
                    grid.x_lo, grid.x_hi
                )));
            }
            a
        }
        None => (0.5 * (window.lo + window.hi)).clamp(grid.x_lo, grid.x_hi),
    };
    let mut phase = PhaseField {
        spec: spec.clone(),
        m,
        beta,
        anchor,
        margin,
        window,
        grid: *grid,
        samples: AxisSamples {
            xs: vec![],
            s_x: vec![],
            s_xx: vec![],
            w: vec![],
            time_of_flight: vec![],
        },
    };
    phase.samples = phase.sample_axis(&grid.xs())?;
    Ok(phase)
}

/// Max over the phase's grid nodes of |S_t + S_x^2 / 2m + V(x)|.
pub fn hj_residual(phase: &PhaseField, spec: &PotentialSpec) -> f64 {
    hj_residual_samples(
        spec,
        phase.m,
        phase.beta,
        &phase.samples.xs,
        &phase.samples.s_x,
    )
}

/// |S_t + S_x^2 / 2m + V| maximized over samples of S_x.
pub fn hj_residual_samples(
    spec: &PotentialSpec,
    m: f64,
    beta: f64,
    xs: &[f64],
    s_x: &[f64],
) -> f64 {
    xs.iter()
        .zip(s_x)
        .map(|(&x, &sx)| {
            let v = spec.eval(x).unwrap_or(f64::NAN);
            (-beta + sx * sx / (2.0 * m) + v).abs()
        })
        .fold(0.0, |a: f64, b| {
            if a.is_nan() || b.is_nan() {
                f64::NAN
            } else {
                a.max(b)
            }
        })
}

/// W(x) for V = x^2 anchored at 0, in closed form.
pub fn harmonic_w_closed_form(m: f64, beta: f64, x: f64) -> f64 {
    (2.0 * m).sqrt() * (0.5 * x * (beta - x * x).sqrt() + 0.5 * beta * (x / beta.sqrt()).asin())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic_phase(nx: usize) -> PhaseField {
        let grid = SpaceTimeGrid::new(-0.9, 0.9, nx, 1.0, 11).unwrap();
        build_phase(
            &PotentialSpec::harmonic(),
            1.0,
            1.0,
            &grid,
            None,
            0.19 - 1e-9,
        )
        .unwrap()
    }

    #[test]
    fn free_phase_is_linear() {
        let grid = SpaceTimeGrid::new(-1.0, 1.0, 21, 1.0, 11).unwrap();
        let p = build_phase(&PotentialSpec::Free, 1.0, 2.0, &grid, Some(0.0), 0.5).unwrap();
        for (x, w) in p.samples().xs.iter().zip(&p.samples().w) {
            assert!((w - 2.0 * x).abs() < 1e-13);
        }
        assert_eq!(p.hj_residual(), 0.0);
    }

    #[test]
    fn harmonic_w_matches_closed_form() {
        let p = harmonic_phase(201);
        for (x, w) in p.samples().xs.iter().zip(&p.samples().w) {
            assert!((w - harmonic_w_closed_form(1.0, 1.0, *x)).abs() < 1e-10);
        }
        assert!((p.w_at(0.5).unwrap() - harmonic_w_closed_form(1.0, 1.0, 0.5)).abs() < 1e-12);
        assert_eq!(p.w_at(p.anchor()).unwrap(), 0.0);
        assert!(p.hj_residual() <= 1e-12);
    }

    #[test]
    fn shifted_beta_shows_up_in_residual() {
        let p = harmonic_phase(51).with_shifted_beta(0.1);
        assert!((p.hj_residual() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn derivative_identities_hold_on_grid() {
        let p = harmonic_phase(101);
        let s = p.samples();
        for i in 0..s.xs.len() {
            let v = p.spec().eval(s.xs[i]).unwrap();
            let dv = p.spec().derivative(s.xs[i]).unwrap();
            assert!((s.s_x[i].powi(2) - 2.0 * (1.0 - v)).abs() <= 1e-12 * 3.0);
            assert!((2.0 * s.s_x[i] * s.s_xx[i] + 2.0 * dv).abs() <= 1e-10);
            assert!(s.s_x[i] > 0.0);
        }
        assert!(s.w.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn turning_point_on_grid_is_a_domain_error() {
        let grid = SpaceTimeGrid::new(-1.2, 0.5, 21, 1.0, 11).unwrap();
        let e = build_phase(&PotentialSpec::harmonic(), 1.0, 1.0, &grid, None, 0.01);
        assert!(matches!(e, Err(WkbError::Domain(_))));
    }

    #[test]
    fn harmonic_time_of_flight_is_arcsin() {
        let p = harmonic_phase(41);
        for (x, tof) in p.samples().xs.iter().zip(&p.samples().time_of_flight) {
            let exact = (0.5f64).sqrt() * x.asin();
            assert!((tof - exact).abs() < 1e-12);
        }
    }
}
