//! Recursive transport hierarchy for the amplitude coefficients.
//!
//! Order 0 is homogeneous, `2 S_x a0_x + S_xx a0 + 2m a0_t = 0`, and is
//! solved in closed form along characteristics: `a0 = S_x^{-1/2} phi(u)`
//! with `u = t - T(x)` and T the time of flight. Order k >= 1 adds the
//! source `a_{k-1,xx}` and starts from zero. With `b = S_x^{1/2} a_k` the
//! equation becomes a pure quadrature along the characteristic,
//! `db/dtau = S_x^{1/2} a_{k-1,xx} / 2m`, which is integrated backward from
//! each node by classical RK4 carried together with the path itself.
//!
//! Backward characteristics from the left edge of the requested grid leave
//! it immediately, so solves run on a [`SolveDomain`]: the requested grid
//! extended to the left (inside the allowed window) far enough that every
//! characteristic feeding the requested region starts at t = 0.

use ndarray::{s, Array2, Axis};
use rayon::prelude::*;

use crate::error::{Result, WkbError};
use crate::hj::{AxisSamples, PhaseField};
use crate::model::{AmplitudeField, InitialProfile, SpaceTimeGrid};
use crate::numerics::fd::{AxisStencil, DiffOrder};
use crate::numerics::interp::{UniformLagrange, Weights};
use crate::numerics::rk4_stages;

/// Highest order the 1-D hierarchy will build.
pub const MAX_ORDER_1D: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransportOptions {
    /// Accuracy order of the x and t differences applied to the fields.
    pub diff_order: DiffOrder,
    /// Lagrange points used to interpolate sources in x.
    pub interp_points_x: usize,
    /// Lagrange points used to interpolate sources in t.
    pub interp_points_t: usize,
    /// RK4 steps per grid time step.
    pub substeps: usize,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions {
            diff_order: DiffOrder::EIGHTH,
            interp_points_x: 6,
            interp_points_t: 6,
            substeps: 4,
        }
    }
}

impl TransportOptions {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(2..=8).contains(&self.interp_points_x) {
            bad.push(format!(
                "interp_points_x = {} (need 2..=8)",
                self.interp_points_x
            ));
        }
        if !(2..=8).contains(&self.interp_points_t) {
            bad.push(format!(
                "interp_points_t = {} (need 2..=8)",
                self.interp_points_t
            ));
        }
        if self.substeps == 0 || self.substeps > 64 {
            bad.push(format!("substeps = {} (need 1..=64)", self.substeps));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(WkbError::Invalid(bad.join("; ")))
        }
    }
}

/// A backward characteristic sampled at the RK4 step points.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicPath {
    pub seed: (f64, f64),
    /// Times, decreasing from the seed time to 0.
    pub taus: Vec<f64>,
    pub xs: Vec<f64>,
    pub steps: usize,
}

/// Integrate dx/dtau = S_x / m backward from `(x, t)` to tau = 0 with
/// `steps` RK4 steps.
pub fn trace_characteristic(
    phase: &PhaseField,
    x: f64,
    t: f64,
    steps: usize,
) -> Result<CharacteristicPath> {
    let steps = steps.max(1);
    let h = t / steps as f64;
    let vel = |y: f64| -phase.velocity(y).unwrap_or(f64::NAN);
    let mut xs = Vec::with_capacity(steps + 1);
    let mut taus = Vec::with_capacity(steps + 1);
    let mut y = x;
    xs.push(y);
    taus.push(t);
    for j in 0..steps {
        let (_, next) = rk4_stages(&vel, y, h);
        if !next.is_finite() || !phase.window().contains(next) {
            let elapsed = (j as f64) * h;
            return Err(WkbError::Horizon {
                seed_x: x,
                seed_t: t,
                suggested_t_hi: elapsed,
                axis: None,
            });
        }
        y = next;
        xs.push(y);
        taus.push(if j + 1 == steps {
            0.0
        } else {
            t - (j + 1) as f64 * h
        });
    }
    Ok(CharacteristicPath {
        seed: (x, t),
        taus,
        xs,
        steps,
    })
}

/// The requested ("report") grid embedded in the grid the solver actually
/// works on.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveDomain {
    pub grid: SpaceTimeGrid,
    pub report: SpaceTimeGrid,
    /// x index of the report grid's first node inside `grid`.
    pub offset: usize,
    /// Highest order the domain was planned for.
    pub max_order: usize,
    pub options: TransportOptions,
    samples: AxisSamples,
}

impl SolveDomain {
    /// Plan the solve grid for orders `0..=max_order` on `report`.
    pub fn plan(
        phase: &PhaseField,
        report: &SpaceTimeGrid,
        max_order: usize,
        options: TransportOptions,
    ) -> Result<Self> {
        report.validate()?;
        options.validate()?;
        let window = phase.window();
        if !window.contains_interval(report.x_range()) {
            return Err(WkbError::Domain(format!(
                "report grid [{}, {}] leaves the allowed window [{}, {}]",
                report.x_lo, report.x_hi, window.lo, window.hi
            )));
        }
        let hx = report.hx();
        let t_hi = report.t_hi;
        let half = options.diff_order.half_width();
        let left = match left_extension(phase, report, t_hi, max_order, options) {
            Some(cells) => cells,
            None => {
                // largest horizon that still fits, by bisection
                let (mut ok, mut bad) = (0.0, t_hi);
                for _ in 0..40 {
                    let mid = 0.5 * (ok + bad);
                    if left_extension(phase, report, mid, max_order, options).is_some() {
                        ok = mid;
                    } else {
                        bad = mid;
                    }
                }
                return Err(WkbError::Horizon {
                    seed_x: report.x_lo,
                    seed_t: t_hi,
                    suggested_t_hi: ok,
                    axis: None,
                });
            }
        };
        let right_room = ((window.hi - report.x_hi) / hx).floor().max(0.0) as usize;
        let right = right_room.min(half + 1);
        let nx = report.nx + left + right;
        let grid = SpaceTimeGrid::new(
            report.x_lo - left as f64 * hx,
            report.x_hi + right as f64 * hx,
            nx,
            t_hi,
            report.nt,
        )?;
        let xs = grid.xs();
        let samples = phase.sample_axis(&xs)?;
        Ok(SolveDomain {
            grid,
            report: *report,
            offset: left,
            max_order,
            options,
            samples,
        })
    }

    pub fn samples(&self) -> &AxisSamples {
        &self.samples
    }

    /// Restrict a field on the solve grid to the report grid.
    pub fn crop(&self, field: &AmplitudeField) -> Result<AmplitudeField> {
        if field.grid != self.grid {
            return Err(WkbError::Shape(
                "field is not on this domain's solve grid".into(),
            ));
        }
        let vals = field
            .values()
            .slice(s![self.offset..self.offset + self.report.nx, ..])
            .to_owned();
        AmplitudeField::new(field.order, self.report, vals)
    }
}

/// Number of cells to add left of `report` so that orders `0..=max_order`
/// are uncontaminated on it up to `t_hi`, or None if the window is too
/// small.
///
/// Order k >= 1 is wrong where characteristics enter through the left edge
/// after t = 0, and each further order widens that band by the stencil and
/// interpolation footprint. The band is converted to a flight time using
/// the slowest speed between the extended edge and the grid.
fn left_extension(
    phase: &PhaseField,
    report: &SpaceTimeGrid,
    t_hi: f64,
    max_order: usize,
    options: TransportOptions,
) -> Option<usize> {
    let window = phase.window();
    let hx = report.hx();
    let half = options.diff_order.half_width();
    let room = ((report.x_lo - window.lo) / hx).floor().max(0.0) as usize;
    if max_order == 0 {
        return Some(room.min(half + 1));
    }
    let steps = (options.substeps * (report.nt - 1)).max(1);
    let foot = trace_characteristic(phase, report.x_lo, t_hi, steps).ok()?;
    let x_foot = *foot.xs.last().unwrap();
    let band = max_order as f64 * (half + options.interp_points_x / 2 + 1) as f64 * hx;
    let slowness = |lo: f64| {
        (0..=64)
            .map(|k| lo + (report.x_hi - lo) * k as f64 / 64.0)
            .map(|x| 1.0 / phase.velocity(x).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    };
    // fixed point: the edge moves left, the slowness bound grows
    let mut x_ext = x_foot;
    for _ in 0..50 {
        let guard_time = band * slowness(x_ext);
        let next = invert_flight_time(phase, x_foot, guard_time)?;
        if (next - x_ext).abs() < 1e-3 * hx {
            x_ext = next;
            break;
        }
        x_ext = next;
    }
    let guard_time = band * slowness(x_ext);
    let x_ext = invert_flight_time(phase, x_foot, guard_time)?;
    let cells = ((report.x_lo - x_ext) / hx).ceil() as usize + 1;
    (cells <= room).then_some(cells)
}

/// x_ext < x_foot with flight time (x_ext -> x_foot) equal to `dt`, or
/// None if the window ends first.
fn invert_flight_time(phase: &PhaseField, x_foot: f64, dt: f64) -> Option<f64> {
    let lo = phase.window().lo;
    if dt <= 0.0 {
        return Some(x_foot);
    }
    if phase.flight_time_between(lo, x_foot).ok()? < dt {
        return None;
    }
    let (mut a, mut b) = (lo, x_foot);
    for _ in 0..100 {
        let mid = 0.5 * (a + b);
        if phase.flight_time_between(mid, x_foot).ok()? > dt {
            a = mid;
        } else {
            b = mid;
        }
    }
    Some(a)
}

/// a0 = S_x^{-1/2} phi(t - T(x)) on the domain's solve grid.
pub fn solve_a0(
    phase: &PhaseField,
    profile: &InitialProfile,
    domain: &SolveDomain,
) -> Result<AmplitudeField> {
    let _ = phase;
    let smp = &domain.samples;
    let grid = domain.grid;
    let values = Array2::from_shape_fn(grid.shape(), |(i, n)| {
        let u = grid.t(n) - smp.time_of_flight[i];
        profile.eval(u) / smp.s_x[i].sqrt()
    });
    AmplitudeField::new(0, grid, values)
}

/// Per-seed RK4 stage data along a backward characteristic.
pub(crate) struct SeedPath {
    /// For every (step, stage): x interpolation weights and S_x^{1/2} / 2m.
    pub(crate) stages: Vec<(Weights, f64)>,
    /// Number of complete steps that stay inside the solve grid.
    pub(crate) valid_steps: usize,
}

pub(crate) const STAGE_COEF: [f64; 4] = [1.0, 2.0, 2.0, 1.0];
/// Stage offsets in units of half an RK4 step.
pub(crate) const STAGE_HALF: [usize; 4] = [0, 1, 1, 2];

pub(crate) fn seed_path(
    phase: &PhaseField,
    x_seed: f64,
    grid: &SpaceTimeGrid,
    lag_x: &UniformLagrange,
    steps: usize,
    h: f64,
) -> SeedPath {
    let m = phase.mass();
    let vel = |y: f64| -phase.velocity(y).unwrap_or(f64::NAN);
    let mut stages = Vec::with_capacity(4 * steps);
    let mut y = x_seed;
    let mut valid_steps = 0;
    let lo = grid.x_lo - 1e-12 * grid.hx();
    for _ in 0..steps {
        let (pts, next) = rk4_stages(&vel, y, h);
        if pts.iter().any(|p| !p.is_finite() || *p < lo) || !next.is_finite() {
            break;
        }
        for p in pts {
            let f = phase
                .s_x(p)
                .map(|sx| sx.sqrt() / (2.0 * m))
                .unwrap_or(f64::NAN);
            stages.push((lag_x.weights(p), f));
        }
        valid_steps += 1;
        y = next;
    }
    SeedPath {
        stages,
        valid_steps,
    }
}

/// Solve order `a_prev.order + 1` on the domain's solve grid.
pub fn solve_ak(
    phase: &PhaseField,
    a_prev: &AmplitudeField,
    domain: &SolveDomain,
) -> Result<AmplitudeField> {
    let grid = domain.grid;
    if a_prev.grid != grid {
        return Err(WkbError::Shape(
            "previous order is not sampled on the solve grid".into(),
        ));
    }
    let opts = domain.options;
    let (nx, nt) = grid.shape();
    let hx = grid.hx();
    let ht = grid.ht();
    let sub = opts.substeps;
    let h = ht / sub as f64;
    let total_steps = sub * (nt - 1);

    let source = AxisStencil::new(nx, hx, 2, opts.diff_order).apply_along(a_prev.values(), Axis(0));
    if source.iter().any(|v| !v.is_finite()) {
        return Err(WkbError::Numeric(format!(
            "second derivative of a_{} is not finite",
            a_prev.order
        )));
    }
    // time-major copy: source_t[n][i]
    let source_t = source.t().as_standard_layout().to_owned();
    let lag_x = UniformLagrange::new(grid.x_lo, hx, nx, opts.interp_points_x);
    let lag_t = UniformLagrange::new(0.0, ht, nt, opts.interp_points_t);
    // time weights indexed by half-substep count
    let half_units = 2 * sub;
    let t_weights: Vec<Weights> = (0..=half_units * (nt - 1))
        .map(|q| lag_t.weights_index(q as f64 / half_units as f64))
        .collect();

    let columns: Vec<Vec<f64>> = (0..nx)
        .into_par_iter()
        .map(|i| {
            let x_seed = grid.x(i);
            let path = seed_path(phase, x_seed, &grid, &lag_x, total_steps, h);
            let mut b = vec![0.0; nt];
            let mut line = vec![0.0; nt];
            for j in 0..path.valid_steps {
                for r in 0..4 {
                    let (wx, factor) = path.stages[4 * j + r];
                    // source interpolated in x at this stage point, all levels
                    let back = 2 * j + STAGE_HALF[r];
                    // smallest node level n with sub*n > j
                    let n_first = j / sub + 1;
                    // levels below the first stencil are never read
                    let lvl_lo = t_weights[half_units * n_first - back].start;
                    for (lvl, slot) in line.iter_mut().enumerate().skip(lvl_lo) {
                        let row = source_t.row(lvl);
                        let mut acc = 0.0;
                        for a in 0..wx.len {
                            acc += wx.w[a] * row[wx.start + a];
                        }
                        *slot = acc;
                    }
                    for (n, bn) in b.iter_mut().enumerate().skip(n_first) {
                        let q = half_units * n - back;
                        let wt = &t_weights[q];
                        let mut val = 0.0;
                        for c in 0..wt.len {
                            val += wt.w[c] * line[wt.start + c];
                        }
                        *bn += h / 6.0 * STAGE_COEF[r] * factor * val;
                    }
                }
            }
            let inv = 1.0 / domain.samples.s_x[i].sqrt();
            b.iter().map(|v| v * inv).collect()
        })
        .collect();

    let mut values = Array2::zeros((nx, nt));
    for (i, col) in columns.into_iter().enumerate() {
        for (n, v) in col.into_iter().enumerate() {
            values[[i, n]] = v;
        }
    }
    AmplitudeField::new(a_prev.order + 1, grid, values)
}

/// a_0 .. a_N on a planned solve domain.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    pub domain: SolveDomain,
    pub fields: Vec<AmplitudeField>,
}

impl Hierarchy {
    pub fn order(&self) -> usize {
        self.fields.len() - 1
    }

    /// Fields restricted to the requested grid.
    pub fn report_fields(&self) -> Vec<AmplitudeField> {
        self.fields
            .iter()
            .map(|f| self.domain.crop(f).expect("fields live on the solve grid"))
            .collect()
    }
}

/// Plan a domain for `report` and solve orders `0..=max_order`.
pub fn solve_hierarchy(
    phase: &PhaseField,
    profile: &InitialProfile,
    report: &SpaceTimeGrid,
    max_order: usize,
    options: TransportOptions,
) -> Result<Hierarchy> {
    if max_order > MAX_ORDER_1D {
        return Err(WkbError::Invalid(format!(
            "truncation order {max_order} exceeds the supported maximum N <= {MAX_ORDER_1D}"
        )));
    }
    let domain = SolveDomain::plan(phase, report, max_order, options)?;
    let mut fields = vec![solve_a0(phase, profile, &domain)?];
    for _ in 0..max_order {
        let next = solve_ak(phase, fields.last().unwrap(), &domain)?;
        fields.push(next);
    }
    Ok(Hierarchy { domain, fields })
}

/// Index ranges of interior nodes: all but 2 layers in x and 1 in t.
pub fn interior(grid: &SpaceTimeGrid) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
    (2..grid.nx.saturating_sub(2), 1..grid.nt.saturating_sub(1))
}

/// First/second x derivatives and first t derivative of a field.
pub struct FieldDerivatives {
    pub dx: Array2<f64>,
    pub dxx: Array2<f64>,
    pub dt: Array2<f64>,
}

pub fn field_derivatives(field: &AmplitudeField, order: DiffOrder) -> FieldDerivatives {
    let g = field.grid;
    let dx = AxisStencil::new(g.nx, g.hx(), 1, order).apply_along(field.values(), Axis(0));
    let dxx = AxisStencil::new(g.nx, g.hx(), 2, order).apply_along(field.values(), Axis(0));
    let dt = AxisStencil::new(g.nt, g.ht(), 1, order).apply_along(field.values(), Axis(1));
    FieldDerivatives { dx, dxx, dt }
}

/// Pointwise transport residual of every order,
/// `2 S_x a_k,x + S_xx a_k + 2m a_k,t - a_{k-1,xx}`, on the full grid.
pub fn transport_residual_fields(
    phase: &PhaseField,
    fields: &[AmplitudeField],
    order: DiffOrder,
) -> Result<Vec<Array2<f64>>> {
    let Some(first) = fields.first() else {
        return Ok(vec![]);
    };
    let grid = first.grid;
    if fields.iter().any(|f| f.grid != grid) {
        return Err(WkbError::Shape("fields are on different grids".into()));
    }
    let xs = grid.xs();
    let sx: Vec<f64> = xs.iter().map(|&x| phase.s_x(x)).collect::<Result<_>>()?;
    let sxx: Vec<f64> = xs.iter().map(|&x| phase.s_xx(x)).collect::<Result<_>>()?;
    let m = phase.mass();
    let derivs: Vec<FieldDerivatives> =
        fields.iter().map(|f| field_derivatives(f, order)).collect();
    Ok(fields
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let d = &derivs[k];
            Array2::from_shape_fn(grid.shape(), |(i, n)| {
                let src = if k == 0 {
                    0.0
                } else {
                    derivs[k - 1].dxx[[i, n]]
                };
                2.0 * sx[i] * d.dx[[i, n]] + sxx[i] * f.values()[[i, n]] + 2.0 * m * d.dt[[i, n]]
                    - src
            })
        })
        .collect())
}

/// Max over interior nodes of the transport residual, one entry per order.
pub fn transport_residual(
    phase: &PhaseField,
    fields: &[AmplitudeField],
    order: DiffOrder,
) -> Result<Vec<f64>> {
    let res = transport_residual_fields(phase, fields, order)?;
    Ok(res
        .iter()
        .map(|r| {
            let (ix, it) = interior(&fields[0].grid);
            r.slice(s![ix, it])
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
        })
        .collect())
}

/// Max over interior nodes of |d_t(a0^2) + (1/m) d_x(S_x a0^2)|.
pub fn continuity_residual(
    phase: &PhaseField,
    a0: &AmplitudeField,
    order: DiffOrder,
) -> Result<f64> {
    let g = a0.grid;
    let sx: Vec<f64> = g
        .xs()
        .iter()
        .map(|&x| phase.s_x(x))
        .collect::<Result<_>>()?;
    let density = a0.values().mapv(|v| v * v);
    let flux = Array2::from_shape_fn(g.shape(), |(i, n)| sx[i] * density[[i, n]] / phase.mass());
    let dt = AxisStencil::new(g.nt, g.ht(), 1, order).apply_along(&density, Axis(1));
    let dx = AxisStencil::new(g.nx, g.hx(), 1, order).apply_along(&flux, Axis(0));
    let (ix, it) = interior(&g);
    Ok((&dt + &dx)
        .slice(s![ix, it])
        .iter()
        .fold(0.0, |m, v| m.max(v.abs())))
}

/// Closed-form order-0 amplitude for V = x^2, anchored at x = 0:
/// `(2m(beta - x^2))^{-1/4} phi(t - sqrt(2m)/2 * arctan(x / sqrt(beta - x^2)))`.
pub fn harmonic_a0_oracle(
    m: f64,
    beta: f64,
    profile: &InitialProfile,
    x: f64,
    t: f64,
) -> Result<f64> {
    let g = beta - x * x;
    if !(g > 0.0) {
        return Err(WkbError::Domain(format!(
            "|x| = {} must be below sqrt(beta) = {}",
            x.abs(),
            beta.max(0.0).sqrt()
        )));
    }
    let u = t - 0.5 * (2.0 * m).sqrt() * (x / g.sqrt()).atan();
    Ok((2.0 * m * g).powf(-0.25) * profile.eval(u))
}

/// Residual of the harmonic order-0 equation
/// `2 sqrt(2m) sqrt(beta - x^2) a_x - sqrt(2m) x / sqrt(beta - x^2) a + 2m a_t`
/// for the trial amplitude `c (beta - x^2)^exponent phi(u)`, with exact
/// derivatives. `exponent = -1/4` (with c = (2m)^{-1/4}) is the solution;
/// `exponent = +1/4` (c = 1) is the literal closed form with the sign of the
/// exponent flipped.
pub fn harmonic_a0_substitution_residual(
    m: f64,
    beta: f64,
    profile: &InitialProfile,
    exponent: f64,
    x: f64,
    t: f64,
) -> Result<f64> {
    let g = beta - x * x;
    if !(g > 0.0) {
        return Err(WkbError::Domain(format!(
            "x = {x} outside (-sqrt(beta), sqrt(beta))"
        )));
    }
    let c = if exponent < 0.0 {
        (2.0 * m).powf(exponent)
    } else {
        1.0
    };
    let r2m = (2.0 * m).sqrt();
    let u = t - 0.5 * r2m * (x / g.sqrt()).atan();
    let du_dx = -0.5 * r2m / g.sqrt();
    let (phi, dphi, _) = profile.eval3(u);
    let amp = c * g.powf(exponent);
    let damp = c * exponent * g.powf(exponent - 1.0) * (-2.0 * x);
    let a = amp * phi;
    let a_x = damp * phi + amp * dphi * du_dx;
    let a_t = amp * dphi;
    Ok(2.0 * r2m * g.sqrt() * a_x - r2m * x / g.sqrt() * a + 2.0 * m * a_t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hj::build_phase;
    use crate::model::PotentialSpec;

    fn free_phase(grid: &SpaceTimeGrid) -> PhaseField {
        build_phase(&PotentialSpec::Free, 1.0, 2.0, grid, Some(0.0), 0.5).unwrap()
    }

    #[test]
    fn free_a0_is_advected_profile() {
        let grid = SpaceTimeGrid::new(0.0, 1.0, 41, 0.5, 21).unwrap();
        let phase = free_phase(&grid);
        let prof = InitialProfile::default();
        let h = solve_hierarchy(&phase, &prof, &grid, 0, TransportOptions::default()).unwrap();
        let a0 = &h.report_fields()[0];
        for i in 0..grid.nx {
            for n in 0..grid.nt {
                let (x, t) = (grid.x(i), grid.t(n));
                let exact = prof.eval(t - x / 2.0) / 2f64.sqrt();
                assert!((a0.values()[[i, n]] - exact).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn zero_profile_gives_zero_hierarchy() {
        let grid = SpaceTimeGrid::new(0.0, 1.0, 21, 0.3, 11).unwrap();
        let phase = free_phase(&grid);
        let h = solve_hierarchy(
            &phase,
            &InitialProfile::Constant(0.0),
            &grid,
            2,
            Default::default(),
        )
        .unwrap();
        for f in &h.fields {
            assert_eq!(f.max_abs(), 0.0);
        }
        let res = transport_residual(&phase, &h.report_fields(), DiffOrder::SECOND).unwrap();
        assert_eq!(res, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn linear_source_gives_zero_next_order() {
        let grid = SpaceTimeGrid::new(-0.5, 0.5, 61, 0.2, 16).unwrap();
        let phase = build_phase(&PotentialSpec::harmonic(), 1.0, 1.0, &grid, None, 0.05).unwrap();
        let dom = SolveDomain::plan(&phase, &grid, 1, Default::default()).unwrap();
        let lin = AmplitudeField::from_fn(0, dom.grid, |x, t| 0.3 - 1.7 * x + t * x).unwrap();
        let a1 = solve_ak(&phase, &lin, &dom).unwrap();
        assert!(a1.max_abs() < 1e-9, "{}", a1.max_abs());
    }

    #[test]
    fn horizon_error_suggests_shorter_time() {
        let grid = SpaceTimeGrid::new(-0.5, 0.5, 61, 2.0, 21).unwrap();
        let phase = build_phase(&PotentialSpec::harmonic(), 1.0, 1.0, &grid, None, 0.05).unwrap();
        match SolveDomain::plan(&phase, &grid, 1, Default::default()) {
            Err(WkbError::Horizon { suggested_t_hi, .. }) => {
                assert!(suggested_t_hi > 0.0 && suggested_t_hi < 2.0);
                let ok = SpaceTimeGrid::new(-0.5, 0.5, 61, suggested_t_hi, 21).unwrap();
                SolveDomain::plan(&phase, &ok, 1, Default::default()).unwrap();
            }
            other => panic!("expected horizon error, got {other:?}"),
        }
    }

    #[test]
    fn harmonic_oracle_values() {
        let g = InitialProfile::default();
        let v = harmonic_a0_oracle(1.0, 1.0, &g, 0.0, 0.0).unwrap();
        assert!((v - 2f64.powf(-0.25)).abs() < 1e-15);
        assert!(harmonic_a0_oracle(1.0, 1.0, &g, 1.0, 0.0).is_err());
        let one = InitialProfile::Constant(1.0);
        let v = harmonic_a0_oracle(1.0, 1.0, &one, 0.6, 0.7).unwrap();
        assert!((v - (2.0f64 * 0.64).powf(-0.25)).abs() < 1e-15);
    }

    #[test]
    fn characteristic_keeps_u_constant() {
        let grid = SpaceTimeGrid::new(-0.5, 0.5, 21, 0.3, 11).unwrap();
        let phase = build_phase(&PotentialSpec::harmonic(), 1.0, 1.0, &grid, None, 0.05).unwrap();
        let path = trace_characteristic(&phase, 0.4, 0.3, 40).unwrap();
        let u0 = 0.3 - phase.time_of_flight(0.4).unwrap();
        for (x, tau) in path.xs.iter().zip(&path.taus) {
            let u = tau - phase.time_of_flight(*x).unwrap();
            assert!((u - u0).abs() < 1e-9);
        }
    }
}
