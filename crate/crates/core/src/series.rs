//! The truncated series `Psi = sum_{k=0}^{N} (i hbar)^k a_k exp(i S / hbar)`
//! and two independent evaluations of `L Psi` with
//! `L = (hbar^2 / 2m) d_xx - V + i hbar d_t`.
//!
//! Expanding `L Psi` with S solving Hamilton-Jacobi gives, with
//! `e = i hbar` and `T_k = 2 S_x a_k,x + S_xx a_k + 2m a_k,t`:
//!
//! ```text
//! L Psi = exp(iS/hbar)/(2m) * [ e T_0
//!                             + sum_{k=1}^{N} e^{k+1} (T_k - a_{k-1,xx})
//!                             - e^{N+2} a_N,xx ]
//! ```
//!
//! When every bracket vanishes (the transport hierarchy) only the last term
//! survives. [`apply_l_algebraic`] evaluates this expansion, differencing
//! only the smooth, hbar-independent a_k. [`apply_l_direct`] differences the
//! oscillating samples of Psi and is only usable at moderate hbar.

use std::ops::Range;

use ndarray::{s, Array2, Axis};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WkbError};
use crate::hj::{build_phase, AxisSamples, PhaseField};
use crate::model::{AmplitudeField, InitialProfile, PotentialSpec, SpaceTimeGrid};
use crate::numerics::fd::{AxisStencil, DiffOrder};
use crate::transport::{
    field_derivatives, interior, solve_hierarchy, transport_residual, TransportOptions,
};

/// Maximum allowed Hamilton-Jacobi residual for the algebraic path.
pub const HJ_PRECONDITION: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SeriesWavefunction {
    pub hbar: f64,
    pub phase: PhaseField,
    pub amps: Vec<AmplitudeField>,
    grid: SpaceTimeGrid,
    samples: AxisSamples,
}

/// `(i hbar)^k`.
pub fn ihbar_pow(hbar: f64, k: usize) -> Complex64 {
    let mag = hbar.powi(k as i32);
    match k % 4 {
        0 => Complex64::new(mag, 0.0),
        1 => Complex64::new(0.0, mag),
        2 => Complex64::new(-mag, 0.0),
        _ => Complex64::new(0.0, -mag),
    }
}

/// Build Psi from a phase and amplitudes a_0..a_N sharing one grid.
pub fn assemble_psi(
    phase: &PhaseField,
    amps: &[AmplitudeField],
    hbar: f64,
) -> Result<SeriesWavefunction> {
    if !(hbar > 0.0) || !hbar.is_finite() {
        return Err(WkbError::Invalid(format!(
            "hbar must be positive, got {hbar}"
        )));
    }
    let Some(first) = amps.first() else {
        return Err(WkbError::Shape("at least a_0 is required".into()));
    };
    let grid = first.grid;
    if let Some(bad) = amps.iter().find(|a| a.grid != grid) {
        return Err(WkbError::Shape(format!(
            "a_{} is on a different grid than a_0",
            bad.order
        )));
    }
    let samples = if *phase.grid() == grid {
        phase.samples().clone()
    } else {
        phase.sample_axis(&grid.xs())?
    };
    Ok(SeriesWavefunction {
        hbar,
        phase: phase.clone(),
        amps: amps.to_vec(),
        grid,
        samples,
    })
}

impl SeriesWavefunction {
    pub fn order(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    /// exp(i S / hbar) at node (i, n).
    #[inline]
    pub fn carrier(&self, i: usize, n: usize) -> Complex64 {
        let s = self.samples.w[i] - self.phase.beta() * self.grid.t(n);
        Complex64::from_polar(1.0, s / self.hbar)
    }

    /// Sum_k (i hbar)^k a_k at node (i, n), without the carrier.
    pub fn envelope(&self, i: usize, n: usize) -> Complex64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(k, a)| ihbar_pow(self.hbar, k) * a.values()[[i, n]])
            .sum()
    }

    pub fn psi(&self, i: usize, n: usize) -> Complex64 {
        self.envelope(i, n) * self.carrier(i, n)
    }

    pub fn psi_field(&self) -> Array2<Complex64> {
        Array2::from_shape_fn(self.grid.shape(), |(i, n)| self.psi(i, n))
    }

    /// Same wavefunction with every a_k multiplied by `c`.
    pub fn scaled(&self, c: f64) -> SeriesWavefunction {
        let mut out = self.clone();
        out.amps = self.amps.iter().map(|a| a.scaled(c)).collect();
        out
    }

    fn hj_precondition(&self, spec: &PotentialSpec) -> Result<()> {
        let m = self.phase.mass();
        let worst = self
            .samples
            .xs
            .iter()
            .zip(&self.samples.s_x)
            .map(|(&x, &sx)| {
                let v = spec.eval(x).unwrap_or(f64::NAN);
                (sx * sx / (2.0 * m) + v - self.phase.beta()).abs()
            })
            .fold(0.0, f64::max);
        if !(worst <= HJ_PRECONDITION) {
            return Err(WkbError::Consistency(format!(
                "phase does not solve the Hamilton-Jacobi equation for this potential \
                 (residual {worst:e} > {HJ_PRECONDITION:e})"
            )));
        }
        Ok(())
    }
}

/// A complex field on the interior nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorField {
    pub x_range: Range<usize>,
    pub t_range: Range<usize>,
    pub values: Array2<Complex64>,
}

impl InteriorField {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    pub fn rms(&self) -> f64 {
        let n = self.values.len().max(1) as f64;
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / n).sqrt()
    }

    /// ||self - other||_2 / ||other||_2 over the common nodes; 0 when both
    /// vanish, infinite when only `other` does.
    pub fn relative_deviation(&self, other: &InteriorField) -> Result<f64> {
        if self.values.dim() != other.values.dim() || self.x_range != other.x_range {
            return Err(WkbError::Shape("interior fields differ in extent".into()));
        }
        let num: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let den: f64 = other.values.iter().map(|b| b.norm_sqr()).sum();
        Ok(relative_norm(num, den))
    }

    pub fn sub(&self, other: &InteriorField) -> Result<InteriorField> {
        if self.values.dim() != other.values.dim() {
            return Err(WkbError::Shape("interior fields differ in extent".into()));
        }
        Ok(InteriorField {
            x_range: self.x_range.clone(),
            t_range: self.t_range.clone(),
            values: &self.values - &other.values,
        })
    }
}

fn interior_field(grid: &SpaceTimeGrid, f: impl Fn(usize, usize) -> Complex64) -> InteriorField {
    let (ix, it) = interior(grid);
    let values =
        Array2::from_shape_fn((ix.len(), it.len()), |(a, b)| f(ix.start + a, it.start + b));
    InteriorField {
        x_range: ix,
        t_range: it,
        values,
    }
}

/// L Psi from the expansion in the module docs, with differences of the
/// a_k at the given order and analytic S derivatives.
pub fn apply_l_algebraic(
    psi: &SeriesWavefunction,
    spec: &PotentialSpec,
    order: DiffOrder,
) -> Result<InteriorField> {
    psi.hj_precondition(spec)?;
    let m = psi.phase.mass();
    let n_top = psi.order();
    let derivs: Vec<_> = psi
        .amps
        .iter()
        .map(|a| field_derivatives(a, order))
        .collect();
    let sx = &psi.samples.s_x;
    let sxx = &psi.samples.s_xx;
    let e = |k| ihbar_pow(psi.hbar, k);
    Ok(interior_field(&psi.grid, |i, n| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, a) in psi.amps.iter().enumerate() {
            let d = &derivs[k];
            let mut bracket =
                2.0 * sx[i] * d.dx[[i, n]] + sxx[i] * a.values()[[i, n]] + 2.0 * m * d.dt[[i, n]];
            if k > 0 {
                bracket -= derivs[k - 1].dxx[[i, n]];
            }
            acc += e(k + 1) * bracket;
        }
        acc -= e(n_top + 2) * derivs[n_top].dxx[[i, n]];
        acc * psi.carrier(i, n) / (2.0 * m)
    }))
}

/// `-(1 / 2m) (i hbar)^{N+2} a_N,xx exp(i S / hbar)` on interior nodes.
pub fn predicted_remainder(psi: &SeriesWavefunction, order: DiffOrder) -> InteriorField {
    let m = psi.phase.mass();
    let top = psi.amps.last().unwrap();
    let dxx =
        AxisStencil::new(psi.grid.nx, psi.grid.hx(), 2, order).apply_along(top.values(), Axis(0));
    let coef = -ihbar_pow(psi.hbar, psi.order() + 2) / (2.0 * m);
    interior_field(&psi.grid, |i, n| coef * dxx[[i, n]] * psi.carrier(i, n))
}

/// Points per local wavelength demanded by the direct path.
const DIRECT_RESOLUTION: f64 = 10.0;

/// L Psi by second-order centered differences of the complex samples.
pub fn apply_l_direct(psi: &SeriesWavefunction, spec: &PotentialSpec) -> Result<InteriorField> {
    let g = psi.grid;
    let hbar = psi.hbar;
    let m = psi.phase.mass();
    let max_sx = psi.samples.s_x.iter().fold(0.0f64, |a, &b| a.max(b));
    let hx_limit = hbar / (DIRECT_RESOLUTION * max_sx);
    if g.hx() > hx_limit {
        let nx = ((g.x_hi - g.x_lo) / hx_limit).ceil() as usize + 1;
        return Err(WkbError::Resolution {
            reason: format!("hx = {:e} > hbar / (10 max S_x) = {hx_limit:e}", g.hx()),
            suggested_nx: nx,
            suggested_nt: g.nt,
        });
    }
    let beta = psi.phase.beta().abs();
    if beta > 0.0 {
        let ht_limit = hbar / (DIRECT_RESOLUTION * beta);
        if g.ht() > ht_limit {
            let nt = (g.t_hi / ht_limit).ceil() as usize + 1;
            return Err(WkbError::Resolution {
                reason: format!("ht = {:e} > hbar / (10 |beta|) = {ht_limit:e}", g.ht()),
                suggested_nx: g.nx,
                suggested_nt: nt,
            });
        }
    }
    let field = psi.psi_field();
    let (hx, ht) = (g.hx(), g.ht());
    let xs = &psi.samples.xs;
    let v: Vec<f64> = xs.iter().map(|&x| spec.eval(x)).collect::<Result<_>>()?;
    let i_unit = Complex64::new(0.0, 1.0);
    Ok(interior_field(&g, |i, n| {
        let p = field[[i, n]];
        let pxx = (field[[i + 1, n]] - 2.0 * p + field[[i - 1, n]]) / (hx * hx);
        let pt = (field[[i, n + 1]] - field[[i, n - 1]]) / (2.0 * ht);
        hbar * hbar / (2.0 * m) * pxx - v[i] * p + i_unit * hbar * pt
    }))
}

/// One hbar value of an order sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub hbar: f64,
    /// max |L Psi| over interior nodes (algebraic path).
    pub max_abs: f64,
    /// RMS of |L Psi| over interior nodes (algebraic path).
    pub rms: f64,
    /// RMS of the predicted remainder.
    pub remainder_rms: f64,
    /// ||L Psi - R_pred|| / ||R_pred||.
    pub identity_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub order: usize,
    pub entries: Vec<ResidualEntry>,
    /// Least-squares fit of log(rms) against log(hbar); `None` when every
    /// residual vanishes exactly (the series is an exact solution).
    pub fit: Option<ScalingFit>,
    /// Max interior transport residual per order.
    pub transport_residuals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS deviation of log(rms) from the fitted line.
    pub fit_residual: f64,
}

impl ResidualReport {
    /// Fit the entries. Norms must be all positive or all exactly zero.
    pub fn from_entries(
        order: usize,
        entries: Vec<ResidualEntry>,
        transport_residuals: Vec<f64>,
    ) -> Result<Self> {
        let fit = if entries.iter().all(|e| e.rms == 0.0) {
            None
        } else {
            let lx: Vec<f64> = entries.iter().map(|e| e.hbar.ln()).collect();
            let ly: Vec<f64> = entries.iter().map(|e| e.rms.ln()).collect();
            let (slope, intercept, fit_residual) = fit_line(&lx, &ly);
            if !(slope.is_finite() && intercept.is_finite()) {
                return Err(WkbError::Numeric(format!(
                    "order slope is not finite (residual norms {:?})",
                    entries.iter().map(|e| e.rms).collect::<Vec<_>>()
                )));
            }
            Some(ScalingFit {
                slope,
                intercept,
                fit_residual,
            })
        };
        Ok(ResidualReport {
            order,
            entries,
            fit,
            transport_residuals,
        })
    }

    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    pub fn max_identity_error(&self) -> f64 {
        self.entries
            .iter()
            .fold(0.0f64, |m, e| m.max(e.identity_error))
    }

    /// Fails when any identity error exceeds `tol`.
    pub fn check(&self, tol: f64) -> Result<()> {
        let bad: Vec<String> = self
            .entries
            .iter()
            .filter(|e| !(e.identity_error <= tol))
            .map(|e| {
                format!(
                    "hbar = {}: identity error {:e} > {tol:e}",
                    e.hbar, e.identity_error
                )
            })
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(WkbError::Tolerance(bad.join("; ")))
        }
    }
}

/// sqrt(num / den) for squared norms, with 0/0 = 0.
pub(crate) fn relative_norm(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

/// Least-squares line through (x, y): (slope, intercept, rms residual).
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, intercept, res)
}

pub fn validate_hbar_list(hbars: &[f64]) -> Result<()> {
    if hbars.len() < 3 {
        return Err(WkbError::Invalid(format!(
            "need at least 3 hbar values, got {}",
            hbars.len()
        )));
    }
    if hbars.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
        return Err(WkbError::Invalid("hbar values must be positive".into()));
    }
    if hbars.windows(2).any(|w| w[1] >= w[0]) {
        return Err(WkbError::Invalid(
            "hbar list must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// Order sweep over `hbars` reusing fields a_0..a_N (on one grid).
pub fn order_sweep_from_fields(
    phase: &PhaseField,
    fields: &[AmplitudeField],
    hbars: &[f64],
    order: DiffOrder,
) -> Result<ResidualReport> {
    validate_hbar_list(hbars)?;
    let spec = phase.spec().clone();
    let entries = hbars
        .iter()
        .map(|&hbar| {
            let psi = assemble_psi(phase, fields, hbar)?;
            let lpsi = apply_l_algebraic(&psi, &spec, order)?;
            let rem = predicted_remainder(&psi, order);
            let identity_error = lpsi.relative_deviation(&rem)?;
            Ok(ResidualEntry {
                hbar,
                max_abs: lpsi.max_abs(),
                rms: lpsi.rms(),
                remainder_rms: rem.rms(),
                identity_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let transport_residuals = transport_residual(phase, fields, order)?;
    ResidualReport::from_entries(fields.len() - 1, entries, transport_residuals)
}

/// Everything needed to rebuild the 1-D fields of an order sweep.
#[derive(Debug, Clone)]
pub struct SweepProblem {
    pub spec: PotentialSpec,
    pub mass: f64,
    pub beta: f64,
    pub grid: SpaceTimeGrid,
    pub profile: InitialProfile,
    pub margin: f64,
    pub anchor: Option<f64>,
    pub options: TransportOptions,
}

/// Build phase and fields once, then sweep hbar. Fails when any identity
/// error exceeds `tol_identity`.
pub fn residual_order_sweep(
    problem: &SweepProblem,
    hbars: &[f64],
    order: usize,
    tol_identity: f64,
) -> Result<ResidualReport> {
    validate_hbar_list(hbars)?;
    let (phase, fields) = sweep_fields(problem, order)?;
    let report = order_sweep_from_fields(&phase, &fields, hbars, problem.options.diff_order)?;
    report.check(tol_identity)?;
    Ok(report)
}

/// Phase and report-grid fields a_0..a_order for a sweep problem.
pub fn sweep_fields(
    problem: &SweepProblem,
    order: usize,
) -> Result<(PhaseField, Vec<AmplitudeField>)> {
    let phase = build_phase(
        &problem.spec,
        problem.mass,
        problem.beta,
        &problem.grid,
        problem.anchor,
        problem.margin,
    )?;
    let h = solve_hierarchy(
        &phase,
        &problem.profile,
        &problem.grid,
        order,
        problem.options,
    )?;
    Ok((phase, h.report_fields()))
}

/// Interior slice of a real field, for norms.
pub fn interior_max_abs(field: &Array2<f64>, grid: &SpaceTimeGrid) -> f64 {
    let (ix, it) = interior(grid);
    field
        .slice(s![ix, it])
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
}
