//! Time-dependent WKB series for the one-dimensional (and separable
//! multi-dimensional) Schrödinger equation.
//!
//! The wavefunction is built as `Psi = sum_k (i hbar)^k a_k exp(i S / hbar)`
//! where S solves the classical Hamilton-Jacobi equation ([`hj`]) and the
//! real coefficients a_k solve a recursive first-order transport hierarchy
//! ([`transport`]). [`series`] assembles Psi, applies the Schrödinger
//! operator two independent ways and checks that the residual is exactly the
//! `(i hbar)^{N+2}` remainder term. [`multidim`] covers separable potentials
//! in two and three dimensions, [`berry`] computes discrete geometric phases
//! and [`cli`] drives reproducible runs from a JSON config.

// `!(x > 0.0)` is deliberate: it rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod berry;
pub mod cli;
pub mod error;
pub mod hj;
pub mod model;
pub mod multidim;
pub mod numerics;
pub mod series;
pub mod transport;

pub use error::{Result, WkbError};
pub use hj::{build_phase, hj_residual, PhaseField};
pub use model::{
    allowed_window, eval_potential, eval_potential_derivative, AmplitudeField, InitialProfile,
    Interval, PotentialSpec, SpaceTimeGrid,
};
pub use numerics::fd::DiffOrder;
pub use series::{assemble_psi, ResidualReport, SeriesWavefunction};
pub use transport::{solve_hierarchy, Hierarchy, SolveDomain, TransportOptions};
