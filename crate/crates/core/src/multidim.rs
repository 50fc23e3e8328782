//! Separable d-dimensional extension, d in {1, 2, 3}.
//!
//! For `V(x) = sum_i V_i(x_i)` and `beta = sum_i beta_i` the phase is
//! `S = sum_i W_i(x_i) - beta t`, and the characteristics `dx/dtau = grad S / m`
//! decouple axis by axis. Each axis is planned and traced with the 1-D
//! machinery; only the sources (Laplacians of the previous order) couple
//! the axes. With `b = prod_i S_i^{1/2} a_k` the transport equation
//! `2 grad S . grad a_k + lap S a_k + 2m a_k,t = lap a_{k-1}` becomes
//! `db/dtau = prod_i S_i^{1/2} lap a_{k-1} / 2m` along characteristics.
//!
//! Field arrays have shape `(n_1, ..., n_d, nt)`.

use ndarray::{ArrayD, Axis, IxDyn, Slice};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WkbError};
use crate::hj::{build_phase, AxisSamples, PhaseField};
use crate::model::{InitialProfile, PotentialSpec, SpaceTimeGrid};
use crate::numerics::fd::{AxisStencil, DiffOrder};
use crate::numerics::interp::{UniformLagrange, Weights};
use crate::numerics::rk4_step;
use crate::series::{
    ihbar_pow, relative_norm, validate_hbar_list, ResidualEntry, ResidualReport, HJ_PRECONDITION,
};
use crate::transport::{seed_path, SolveDomain, TransportOptions, STAGE_COEF, STAGE_HALF};

pub const MAX_DIM: usize = 3;
pub const MAX_ORDER_D: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

/// Tensor-product grid over d space axes and `[0, t_hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridD {
    pub axes: Vec<AxisGrid>,
    pub t_hi: f64,
    pub nt: usize,
}

impl GridD {
    pub fn new(axes: Vec<AxisGrid>, t_hi: f64, nt: usize) -> Result<Self> {
        let g = GridD { axes, t_hi, nt };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > MAX_DIM {
            return Err(WkbError::Invalid(format!(
                "dimension must be 1..={MAX_DIM}, got {}",
                self.axes.len()
            )));
        }
        for i in 0..self.dim() {
            self.axis_grid_unchecked(i)
                .validate()
                .map_err(|e| e.with_axis(i))?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    fn axis_grid_unchecked(&self, i: usize) -> SpaceTimeGrid {
        let a = self.axes[i];
        SpaceTimeGrid {
            x_lo: a.lo,
            x_hi: a.hi,
            nx: a.n,
            t_hi: self.t_hi,
            nt: self.nt,
        }
    }

    /// The 1-D space-time grid of axis i.
    pub fn axis_grid(&self, i: usize) -> SpaceTimeGrid {
        self.axis_grid_unchecked(i)
    }

    pub fn h(&self, i: usize) -> f64 {
        self.axis_grid(i).hx()
    }

    pub fn ht(&self) -> f64 {
        self.t_hi / (self.nt - 1) as f64
    }

    pub fn x(&self, i: usize, j: usize) -> f64 {
        self.axis_grid(i).x(j)
    }

    pub fn t(&self, n: usize) -> f64 {
        self.axis_grid(0).t(n)
    }

    /// `(n_1, ..., n_d, nt)`.
    pub fn shape(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.axes.iter().map(|a| a.n).collect();
        s.push(self.nt);
        s
    }

    pub fn spatial_len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }
}

/// Per-axis phases sharing one mass.
#[derive(Debug, Clone)]
pub struct SeparablePhaseD {
    pub mass: f64,
    pub axes: Vec<PhaseField>,
    pub grid: GridD,
}

impl SeparablePhaseD {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn beta(&self) -> f64 {
        self.axes.iter().map(|p| p.beta()).sum()
    }

    pub fn s(&self, x: &[f64], t: f64) -> Result<f64> {
        let mut w = 0.0;
        for (p, &xi) in self.axes.iter().zip(x) {
            w += p.w_at(xi)?;
        }
        Ok(w - self.beta() * t)
    }

    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.axes.iter().zip(x).map(|(p, &xi)| p.s_x(xi)).collect()
    }

    pub fn laplacian(&self, x: &[f64]) -> Result<f64> {
        let mut acc = 0.0;
        for (p, &xi) in self.axes.iter().zip(x) {
            acc += p.s_xx(xi)?;
        }
        Ok(acc)
    }

    /// Samples of every axis on the axes of `grid`.
    pub fn samples_on(&self, grid: &GridD) -> Result<Vec<AxisSamples>> {
        if grid.dim() != self.dim() {
            return Err(WkbError::Shape(format!(
                "grid has {} axes, phase has {}",
                grid.dim(),
                self.dim()
            )));
        }
        (0..self.dim())
            .map(|i| {
                let g = grid.axis_grid(i);
                if *self.axes[i].grid() == g {
                    Ok(self.axes[i].samples().clone())
                } else {
                    self.axes[i]
                        .sample_axis(&g.xs())
                        .map_err(|e| e.with_axis(i))
                }
            })
            .collect()
    }

    /// Max over grid nodes of `|S_t + |grad S|^2 / 2m + sum_i V_i|`.
    pub fn hj_residual(&self) -> f64 {
        // every node combination of per-axis terms; separable, so the max
        // is attained over the tensor product of the per-axis terms
        let terms: Vec<Vec<f64>> = self
            .axes
            .iter()
            .map(|p| {
                let smp = p.samples();
                smp.xs
                    .iter()
                    .zip(&smp.s_x)
                    .map(|(&x, &sx)| {
                        sx * sx / (2.0 * self.mass) + p.spec().eval(x).unwrap_or(f64::NAN)
                    })
                    .collect()
            })
            .collect();
        let beta = self.beta();
        let mut worst = 0.0f64;
        for_each_index(&terms.iter().map(|t| t.len()).collect::<Vec<_>>(), |idx| {
            let e: f64 = idx.iter().enumerate().map(|(i, &j)| terms[i][j]).sum();
            worst = worst.max((e - beta).abs());
        });
        worst
    }
}

/// Visit every multi-index of `shape` in row-major order.
fn for_each_index(shape: &[usize], mut f: impl FnMut(&[usize])) {
    if shape.contains(&0) {
        return;
    }
    let mut idx = vec![0; shape.len()];
    loop {
        f(&idx);
        let mut k = shape.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Build the separable phase, one 1-D phase per axis. Axis errors carry
/// the axis index.
pub fn build_phase_d(
    specs: &[PotentialSpec],
    mass: f64,
    betas: &[f64],
    grid: &GridD,
    anchors: &[Option<f64>],
    margin: f64,
) -> Result<SeparablePhaseD> {
    grid.validate()?;
    let d = grid.dim();
    if specs.len() != d || betas.len() != d || anchors.len() != d {
        return Err(WkbError::Shape(format!(
            "need {d} potentials, betas and anchors; got {}, {}, {}",
            specs.len(),
            betas.len(),
            anchors.len()
        )));
    }
    let axes = (0..d)
        .map(|i| {
            build_phase(
                &specs[i],
                mass,
                betas[i],
                &grid.axis_grid(i),
                anchors[i],
                margin,
            )
            .map_err(|e| e.with_axis(i))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SeparablePhaseD {
        mass,
        axes,
        grid: grid.clone(),
    })
}

/// One real coefficient on a tensor grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeFieldD {
    pub order: usize,
    pub grid: GridD,
    values: ArrayD<f64>,
}

impl AmplitudeFieldD {
    pub fn new(order: usize, grid: GridD, values: ArrayD<f64>) -> Result<Self> {
        if values.shape() != grid.shape().as_slice() {
            return Err(WkbError::Shape(format!(
                "values have shape {:?}, grid needs {:?}",
                values.shape(),
                grid.shape()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(WkbError::Numeric(format!(
                "a_{order} has non-finite entries"
            )));
        }
        Ok(AmplitudeFieldD {
            order,
            grid,
            values,
        })
    }

    /// Sample `f(x, t)` at every node.
    pub fn from_fn(order: usize, grid: GridD, f: impl Fn(&[f64], f64) -> f64) -> Result<Self> {
        let d = grid.dim();
        let values = ArrayD::from_shape_fn(IxDyn(&grid.shape()), |idx| {
            let x: Vec<f64> = (0..d).map(|i| grid.x(i, idx[i])).collect();
            f(&x, grid.t(idx[d]))
        });
        AmplitudeFieldD::new(order, grid, values)
    }

    pub fn zeros(order: usize, grid: GridD) -> Self {
        let values = ArrayD::zeros(IxDyn(&grid.shape()));
        AmplitudeFieldD {
            order,
            grid,
            values,
        }
    }

    pub fn values(&self) -> &ArrayD<f64> {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        AmplitudeFieldD {
            order: self.order,
            grid: self.grid.clone(),
            values: self.values.mapv(|v| c * v),
        }
    }
}

/// Report grid embedded in a per-axis extended solve grid.
#[derive(Debug, Clone)]
pub struct SolveDomainD {
    pub grid: GridD,
    pub report: GridD,
    pub axes: Vec<SolveDomain>,
    pub options: TransportOptions,
}

impl SolveDomainD {
    pub fn plan(
        phase: &SeparablePhaseD,
        report: &GridD,
        max_order: usize,
        options: TransportOptions,
    ) -> Result<Self> {
        report.validate()?;
        if report.dim() != phase.dim() {
            return Err(WkbError::Shape(
                "report grid and phase differ in dimension".into(),
            ));
        }
        let axes = (0..report.dim())
            .map(|i| {
                SolveDomain::plan(&phase.axes[i], &report.axis_grid(i), max_order, options)
                    .map_err(|e| e.with_axis(i))
            })
            .collect::<Result<Vec<_>>>()?;
        let grid = GridD::new(
            axes.iter()
                .map(|a| AxisGrid {
                    lo: a.grid.x_lo,
                    hi: a.grid.x_hi,
                    n: a.grid.nx,
                })
                .collect(),
            report.t_hi,
            report.nt,
        )?;
        Ok(SolveDomainD {
            grid,
            report: report.clone(),
            axes,
            options,
        })
    }

    /// Restrict a solve-grid field to the report grid.
    pub fn crop(&self, field: &AmplitudeFieldD) -> Result<AmplitudeFieldD> {
        if field.grid != self.grid {
            return Err(WkbError::Shape(
                "field is not on this domain's solve grid".into(),
            ));
        }
        let d = self.grid.dim();
        let view = field.values.slice_each_axis(|ax| {
            let i = ax.axis.index();
            if i < d {
                let off = self.axes[i].offset;
                Slice::from(off..off + self.report.axes[i].n)
            } else {
                Slice::from(..)
            }
        });
        AmplitudeFieldD::new(field.order, self.report.clone(), view.to_owned())
    }
}

/// a_0 as the product of per-axis factors, with the foot of every
/// characteristic found by RK4 (or by the exact characteristic variable
/// once the path leaves the window).
pub fn solve_a0_d(
    phase: &SeparablePhaseD,
    profiles: &[InitialProfile],
    domain: &SolveDomainD,
) -> Result<AmplitudeFieldD> {
    let d = phase.dim();
    if profiles.len() != d {
        return Err(WkbError::Shape(format!(
            "need {d} profiles, got {}",
            profiles.len()
        )));
    }
    let grid = &domain.grid;
    let sub = domain.options.substeps;
    let h = grid.ht() / sub as f64;
    // factors[i][j * nt + n]
    let factors: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let p = &phase.axes[i];
            let smp = &domain.axes[i].samples();
            let window = p.window();
            let vel = |y: f64| -p.velocity(y).unwrap_or(f64::NAN);
            let mut out = vec![0.0; grid.axes[i].n * grid.nt];
            for j in 0..grid.axes[i].n {
                let mut y = smp.xs[j];
                let mut inside = true;
                for n in 0..grid.nt {
                    if n > 0 && inside {
                        for _ in 0..sub {
                            y = rk4_step(&vel, y, h);
                        }
                        inside = y.is_finite() && window.contains(y);
                    }
                    let u = if inside {
                        -p.time_of_flight(y).map_err(|e| e.with_axis(i))?
                    } else {
                        grid.t(n) - smp.time_of_flight[j]
                    };
                    out[j * grid.nt + n] = profiles[i].eval(u) / smp.s_x[j].sqrt();
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let values = ArrayD::from_shape_fn(IxDyn(&grid.shape()), |idx| {
        let n = idx[d];
        (0..d).map(|i| factors[i][idx[i] * grid.nt + n]).product()
    });
    AmplitudeFieldD::new(0, grid.clone(), values)
}

/// Sum of second derivatives along the space axes.
pub fn laplacian_field(values: &ArrayD<f64>, grid: &GridD, order: DiffOrder) -> ArrayD<f64> {
    let mut lap = ArrayD::zeros(values.raw_dim());
    for i in 0..grid.dim() {
        let st = AxisStencil::new(grid.axes[i].n, grid.h(i), 2, order);
        lap += &st.apply_along_dyn(values, i);
    }
    lap
}

/// Tensor weights padded to three axes.
fn pad3(w: &[Weights]) -> [Weights; 3] {
    let one = Weights {
        start: 0,
        len: 1,
        w: {
            let mut a = [0.0; crate::numerics::interp::MAX_POINTS];
            a[0] = 1.0;
            a
        },
    };
    [
        w.first().copied().unwrap_or(one),
        w.get(1).copied().unwrap_or(one),
        w.get(2).copied().unwrap_or(one),
    ]
}

/// Solve order `a_prev.order + 1` on the domain's solve grid.
pub fn solve_ak_d(
    phase: &SeparablePhaseD,
    a_prev: &AmplitudeFieldD,
    domain: &SolveDomainD,
) -> Result<AmplitudeFieldD> {
    let grid = &domain.grid;
    if a_prev.grid != *grid {
        return Err(WkbError::Shape(
            "previous order is not sampled on the solve grid".into(),
        ));
    }
    let d = grid.dim();
    let opts = domain.options;
    let nt = grid.nt;
    let ht = grid.ht();
    let sub = opts.substeps;
    let h = ht / sub as f64;
    let total_steps = sub * (nt - 1);
    let two_m = 2.0 * phase.mass;

    let source = laplacian_field(&a_prev.values, grid, opts.diff_order);
    if source.iter().any(|v| !v.is_finite()) {
        return Err(WkbError::Numeric(format!(
            "Laplacian of a_{} is not finite",
            a_prev.order
        )));
    }
    // time-major, contiguous: src_t[n * P + flat(space)]
    let mut perm: Vec<usize> = vec![d];
    perm.extend(0..d);
    let src_t = source
        .view()
        .permuted_axes(IxDyn(&perm))
        .as_standard_layout()
        .to_owned();
    let src_t = src_t.as_slice().expect("standard layout");
    let n3 = {
        let mut n = [1usize; 3];
        for i in 0..d {
            n[i] = grid.axes[i].n;
        }
        n
    };
    let plane = n3[0] * n3[1] * n3[2];

    let lag_t = UniformLagrange::new(0.0, ht, nt, opts.interp_points_t);
    let half_units = 2 * sub;
    let t_weights: Vec<Weights> = (0..=half_units * (nt - 1))
        .map(|q| lag_t.weights_index(q as f64 / half_units as f64))
        .collect();

    // one backward path per axis node, shared by all time levels
    let paths: Vec<Vec<_>> = (0..d)
        .map(|i| {
            let g = grid.axis_grid(i);
            let lag = UniformLagrange::new(g.x_lo, g.hx(), g.nx, opts.interp_points_x);
            (0..g.nx)
                .into_par_iter()
                .map(|j| seed_path(&phase.axes[i], g.x(j), &g, &lag, total_steps, h))
                .collect()
        })
        .collect();
    let sx: Vec<&[f64]> = (0..d)
        .map(|i| domain.axes[i].samples().s_x.as_slice())
        .collect();

    let columns: Vec<Vec<f64>> = (0..plane)
        .into_par_iter()
        .map(|flat| {
            let idx = [flat / (n3[1] * n3[2]), (flat / n3[2]) % n3[1], flat % n3[2]];
            let axis_paths: Vec<_> = (0..d).map(|i| &paths[i][idx[i]]).collect();
            let valid = axis_paths.iter().map(|p| p.valid_steps).min().unwrap_or(0);
            let mut b = vec![0.0; nt];
            let mut line = vec![0.0; nt];
            let mut ws = Vec::with_capacity(d);
            for j in 0..valid {
                for r in 0..4 {
                    ws.clear();
                    // each per-axis factor is S_i^{1/2} / 2m
                    let mut factor = 1.0 / two_m;
                    for p in &axis_paths {
                        let (w, f) = p.stages[4 * j + r];
                        ws.push(w);
                        factor *= f * two_m;
                    }
                    let [w0, w1, w2] = pad3(&ws);
                    let back = 2 * j + STAGE_HALF[r];
                    let n_first = j / sub + 1;
                    let lvl_lo = t_weights[half_units * n_first - back].start;
                    for (lvl, slot) in line.iter_mut().enumerate().skip(lvl_lo) {
                        let row = &src_t[lvl * plane..(lvl + 1) * plane];
                        let mut acc = 0.0;
                        for a in 0..w0.len {
                            let base_a = (w0.start + a) * n3[1];
                            let mut acc_b = 0.0;
                            for bb in 0..w1.len {
                                let base_b = (base_a + w1.start + bb) * n3[2] + w2.start;
                                let mut acc_c = 0.0;
                                for c in 0..w2.len {
                                    acc_c += w2.w[c] * row[base_b + c];
                                }
                                acc_b += w1.w[bb] * acc_c;
                            }
                            acc += w0.w[a] * acc_b;
                        }
                        *slot = acc;
                    }
                    for (n, bn) in b.iter_mut().enumerate().skip(n_first) {
                        let wt = &t_weights[half_units * n - back];
                        let mut val = 0.0;
                        for c in 0..wt.len {
                            val += wt.w[c] * line[wt.start + c];
                        }
                        *bn += h / 6.0 * STAGE_COEF[r] * factor * val;
                    }
                }
            }
            let inv: f64 = (0..d).map(|i| 1.0 / sx[i][idx[i]].sqrt()).product();
            b.iter().map(|v| v * inv).collect()
        })
        .collect();

    let mut values = ArrayD::zeros(IxDyn(&grid.shape()));
    let flat_vals = values.as_slice_mut().expect("standard layout");
    for (flat, col) in columns.into_iter().enumerate() {
        for (n, v) in col.into_iter().enumerate() {
            flat_vals[flat * nt + n] = v;
        }
    }
    AmplitudeFieldD::new(a_prev.order + 1, grid.clone(), values)
}

#[derive(Debug, Clone)]
pub struct HierarchyD {
    pub domain: SolveDomainD,
    pub fields: Vec<AmplitudeFieldD>,
}

impl HierarchyD {
    pub fn report_fields(&self) -> Vec<AmplitudeFieldD> {
        self.fields
            .iter()
            .map(|f| self.domain.crop(f).expect("fields live on the solve grid"))
            .collect()
    }
}

/// Plan and solve orders `0..=max_order` for product initial data.
pub fn solve_hierarchy_d(
    phase: &SeparablePhaseD,
    profiles: &[InitialProfile],
    report: &GridD,
    max_order: usize,
    options: TransportOptions,
) -> Result<HierarchyD> {
    if max_order > MAX_ORDER_D {
        return Err(WkbError::Invalid(format!(
            "truncation order {max_order} exceeds the multi-dimensional maximum N <= {MAX_ORDER_D}"
        )));
    }
    let domain = SolveDomainD::plan(phase, report, max_order, options)?;
    let mut fields = vec![solve_a0_d(phase, profiles, &domain)?];
    for _ in 0..max_order {
        let next = solve_ak_d(phase, fields.last().unwrap(), &domain)?;
        fields.push(next);
    }
    Ok(HierarchyD { domain, fields })
}

/// Interior index ranges: 2 layers per space axis, 1 in t.
pub fn interior_d(grid: &GridD) -> Vec<std::ops::Range<usize>> {
    let mut r: Vec<_> = grid.axes.iter().map(|a| 2..a.n.saturating_sub(2)).collect();
    r.push(1..grid.nt.saturating_sub(1));
    r
}

/// Gradient components, Laplacian and time derivative of a field.
pub struct FieldDerivativesD {
    pub grad: Vec<ArrayD<f64>>,
    pub lap: ArrayD<f64>,
    pub dt: ArrayD<f64>,
}

pub fn field_derivatives_d(field: &AmplitudeFieldD, order: DiffOrder) -> FieldDerivativesD {
    let g = &field.grid;
    let d = g.dim();
    let grad = (0..d)
        .map(|i| AxisStencil::new(g.axes[i].n, g.h(i), 1, order).apply_along_dyn(&field.values, i))
        .collect();
    let lap = laplacian_field(&field.values, g, order);
    let dt = AxisStencil::new(g.nt, g.ht(), 1, order).apply_along_dyn(&field.values, d);
    FieldDerivativesD { grad, lap, dt }
}

fn check_common_grid(fields: &[AmplitudeFieldD]) -> Result<&GridD> {
    let first = fields
        .first()
        .ok_or_else(|| WkbError::Shape("at least a_0 is required".into()))?;
    if fields.iter().any(|f| f.grid != first.grid) {
        return Err(WkbError::Shape("fields are on different grids".into()));
    }
    Ok(&first.grid)
}

/// Visit interior nodes as (full multi-index) in row-major order.
fn for_each_interior(grid: &GridD, mut f: impl FnMut(&[usize])) {
    let ranges = interior_d(grid);
    let shape: Vec<usize> = ranges.iter().map(|r| r.len()).collect();
    let mut full = vec![0; ranges.len()];
    for_each_index(&shape, |idx| {
        for (k, r) in ranges.iter().enumerate() {
            full[k] = r.start + idx[k];
        }
        f(&full);
    });
}

/// Max over interior nodes of
/// `|2 grad S . grad a_k + lap S a_k + 2m a_k,t - lap a_{k-1}|`, per order.
pub fn transport_residual_d(
    phase: &SeparablePhaseD,
    fields: &[AmplitudeFieldD],
    order: DiffOrder,
) -> Result<Vec<f64>> {
    let grid = check_common_grid(fields)?;
    let smp = phase.samples_on(grid)?;
    let d = grid.dim();
    let m = phase.mass;
    let derivs: Vec<_> = fields
        .iter()
        .map(|f| field_derivatives_d(f, order))
        .collect();
    Ok((0..fields.len())
        .map(|k| {
            let mut worst = 0.0f64;
            for_each_interior(grid, |idx| {
                let ix = IxDyn(idx);
                let mut r = 2.0 * m * derivs[k].dt[&ix];
                for i in 0..d {
                    let j = idx[i];
                    r += 2.0 * smp[i].s_x[j] * derivs[k].grad[i][&ix]
                        + smp[i].s_xx[j] * fields[k].values[&ix];
                }
                if k > 0 {
                    r -= derivs[k - 1].lap[&ix];
                }
                worst = worst.max(r.abs());
            });
            worst
        })
        .collect())
}

/// Max over interior nodes of `|d_t(a0^2) + (1/m) div(a0^2 grad S)|`.
pub fn continuity_residual_d(
    phase: &SeparablePhaseD,
    a0: &AmplitudeFieldD,
    order: DiffOrder,
) -> Result<f64> {
    let g = &a0.grid;
    let smp = phase.samples_on(g)?;
    let d = g.dim();
    let density = a0.values.mapv(|v| v * v);
    let dt = AxisStencil::new(g.nt, g.ht(), 1, order).apply_along_dyn(&density, d);
    let mut div = ArrayD::zeros(density.raw_dim());
    for i in 0..d {
        let mut flux = density.clone();
        for (j, mut lane) in flux.axis_iter_mut(Axis(i)).enumerate() {
            lane *= smp[i].s_x[j] / phase.mass;
        }
        div += &AxisStencil::new(g.axes[i].n, g.h(i), 1, order).apply_along_dyn(&flux, i);
    }
    let mut worst = 0.0f64;
    for_each_interior(g, |idx| {
        let ix = IxDyn(idx);
        worst = worst.max((dt[&ix] + div[&ix]).abs());
    });
    Ok(worst)
}

/// Norms of the d-dimensional algebraic residual and of the predicted
/// remainder, for one hbar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityD {
    pub hbar: f64,
    pub lpsi_max: f64,
    pub lpsi_rms: f64,
    pub remainder_rms: f64,
    pub identity_error: f64,
}

/// `Psi = sum_k (i hbar)^k a_k exp(i S / hbar)` on a tensor grid.
#[derive(Debug, Clone)]
pub struct SeriesWavefunctionD {
    pub hbar: f64,
    pub phase: SeparablePhaseD,
    pub amps: Vec<AmplitudeFieldD>,
    samples: Vec<AxisSamples>,
}

pub fn assemble_psi_d(
    phase: &SeparablePhaseD,
    amps: &[AmplitudeFieldD],
    hbar: f64,
) -> Result<SeriesWavefunctionD> {
    if !(hbar > 0.0) || !hbar.is_finite() {
        return Err(WkbError::Invalid(format!(
            "hbar must be positive, got {hbar}"
        )));
    }
    let grid = check_common_grid(amps)?;
    let samples = phase.samples_on(grid)?;
    Ok(SeriesWavefunctionD {
        hbar,
        phase: phase.clone(),
        amps: amps.to_vec(),
        samples,
    })
}

impl SeriesWavefunctionD {
    pub fn grid(&self) -> &GridD {
        &self.amps[0].grid
    }

    pub fn order(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn carrier(&self, idx: &[usize]) -> Complex64 {
        let d = self.phase.dim();
        let w: f64 = (0..d).map(|i| self.samples[i].w[idx[i]]).sum();
        let s = w - self.phase.beta() * self.grid().t(idx[d]);
        Complex64::from_polar(1.0, s / self.hbar)
    }

    pub fn psi(&self, idx: &[usize]) -> Complex64 {
        let ix = IxDyn(idx);
        let env: Complex64 = self
            .amps
            .iter()
            .enumerate()
            .map(|(k, a)| ihbar_pow(self.hbar, k) * a.values[&ix])
            .sum();
        env * self.carrier(idx)
    }

    fn hj_precondition(&self) -> Result<()> {
        let r = self.phase.hj_residual();
        if !(r <= HJ_PRECONDITION) {
            return Err(WkbError::Consistency(format!(
                "phase Hamilton-Jacobi residual {r:e} > {HJ_PRECONDITION:e}"
            )));
        }
        Ok(())
    }

    /// Algebraic L Psi and the predicted remainder
    /// `-(1/2m)(i hbar)^{N+2} lap a_N exp(iS/hbar)`, compared on interior
    /// nodes.
    pub fn remainder_identity(&self, order: DiffOrder) -> Result<IdentityD> {
        self.hj_precondition()?;
        let grid = self.grid().clone();
        let d = grid.dim();
        let m = self.phase.mass;
        let n_top = self.order();
        let derivs: Vec<_> = self
            .amps
            .iter()
            .map(|f| field_derivatives_d(f, order))
            .collect();
        let e = |k| ihbar_pow(self.hbar, k);
        let (mut sum_l, mut sum_r, mut sum_diff, mut max_l, mut count) =
            (0.0, 0.0, 0.0, 0.0f64, 0usize);
        for_each_interior(&grid, |idx| {
            let ix = IxDyn(idx);
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, a) in self.amps.iter().enumerate() {
                let mut bracket = 2.0 * m * derivs[k].dt[&ix];
                for i in 0..d {
                    let j = idx[i];
                    bracket += 2.0 * self.samples[i].s_x[j] * derivs[k].grad[i][&ix]
                        + self.samples[i].s_xx[j] * a.values[&ix];
                }
                if k > 0 {
                    bracket -= derivs[k - 1].lap[&ix];
                }
                acc += e(k + 1) * bracket;
            }
            let top = e(n_top + 2) * derivs[n_top].lap[&ix];
            let carrier = self.carrier(idx) / (2.0 * m);
            let l = (acc - top) * carrier;
            let r = -top * carrier;
            sum_l += l.norm_sqr();
            sum_r += r.norm_sqr();
            sum_diff += (l - r).norm_sqr();
            max_l = max_l.max(l.norm());
            count += 1;
        });
        let n = count.max(1) as f64;
        Ok(IdentityD {
            hbar: self.hbar,
            lpsi_max: max_l,
            lpsi_rms: (sum_l / n).sqrt(),
            remainder_rms: (sum_r / n).sqrt(),
            identity_error: relative_norm(sum_diff, sum_r),
        })
    }
}

/// Identity error of a d-dimensional series.
pub fn remainder_identity_d(psi: &SeriesWavefunctionD, order: DiffOrder) -> Result<f64> {
    Ok(psi.remainder_identity(order)?.identity_error)
}

/// Order sweep over `hbars` reusing the fields.
pub fn order_sweep_d(
    phase: &SeparablePhaseD,
    fields: &[AmplitudeFieldD],
    hbars: &[f64],
    order: DiffOrder,
) -> Result<ResidualReport> {
    validate_hbar_list(hbars)?;
    let entries = hbars
        .iter()
        .map(|&hbar| {
            let id = assemble_psi_d(phase, fields, hbar)?.remainder_identity(order)?;
            Ok(ResidualEntry {
                hbar,
                max_abs: id.lpsi_max,
                rms: id.lpsi_rms,
                remainder_rms: id.remainder_rms,
                identity_error: id.identity_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ResidualReport::from_entries(
        fields.len() - 1,
        entries,
        transport_residual_d(phase, fields, order)?,
    )
}

/// Tensor product of per-axis 1-D fields, `prod_i f_i(x_i, t)`.
pub fn tensor_product(
    fields: &[&crate::model::AmplitudeField],
    grid: &GridD,
) -> Result<AmplitudeFieldD> {
    let d = grid.dim();
    if fields.len() != d || (0..d).any(|i| fields[i].grid != grid.axis_grid(i)) {
        return Err(WkbError::Shape(
            "per-axis fields do not match the tensor grid".into(),
        ));
    }
    let values = ArrayD::from_shape_fn(IxDyn(&grid.shape()), |idx| {
        (0..d)
            .map(|i| fields[i].values()[[idx[i], idx[d]]])
            .product()
    });
    AmplitudeFieldD::new(0, grid.clone(), values)
}
