//! Small numerical kernels shared by the solvers: finite-difference stencils on
//! uniform axes, Lagrange interpolation, adaptive quadrature and a classical
//! RK4 step.

pub mod fd;
pub mod interp;
pub mod quad;
pub mod spline;

/// One classical fourth-order Runge-Kutta step for an autonomous scalar ODE.
#[inline]
pub fn rk4_step<F: Fn(f64) -> f64>(f: &F, y: f64, h: f64) -> f64 {
    let k1 = f(y);
    let k2 = f(y + 0.5 * h * k1);
    let k3 = f(y + 0.5 * h * k2);
    let k4 = f(y + h * k3);
    y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// The four stage abscissae of an RK4 step for an autonomous scalar ODE,
/// plus the end point. Used when a quadrature is carried along the path.
#[inline]
pub fn rk4_stages<F: Fn(f64) -> f64>(f: &F, y: f64, h: f64) -> ([f64; 4], f64) {
    let k1 = f(y);
    let y2 = y + 0.5 * h * k1;
    let k2 = f(y2);
    let y3 = y + 0.5 * h * k2;
    let k3 = f(y3);
    let y4 = y + h * k3;
    let k4 = f(y4);
    (
        [y, y2, y3, y4],
        y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4),
    )
}
