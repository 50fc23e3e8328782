//! Discrete Berry phase of a closed loop of states.
//!
//! `gamma = -Im sum_j log <n_j | n_{j+1 mod K}>`, reduced to (-pi, pi].
//! Each overlap factor carries the gauge phases of two neighbours with
//! opposite signs, so the sum is gauge invariant modulo 2 pi.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WkbError};

/// Allowed deviation of a state norm from 1.
pub const NORM_TOL: f64 = 1e-12;
/// Smallest admissible |overlap| between consecutive states.
pub const MIN_OVERLAP: f64 = 0.1;

/// K normalized states sampled along a closed curve; state K is state 0.
#[derive(Debug, Clone, PartialEq)]
pub struct StateLoop {
    states: Vec<Vec<Complex64>>,
}

impl StateLoop {
    /// Rejects empty loops, ragged dimensions and non-unit vectors.
    pub fn new(states: Vec<Vec<Complex64>>) -> Result<Self> {
        let Some(first) = states.first() else {
            return Err(WkbError::Invalid("state loop is empty".into()));
        };
        let dim = first.len();
        if dim == 0 {
            return Err(WkbError::Invalid(
                "states must have at least one component".into(),
            ));
        }
        for (j, s) in states.iter().enumerate() {
            if s.len() != dim {
                return Err(WkbError::Shape(format!(
                    "state {j} has {} components, expected {dim}",
                    s.len()
                )));
            }
            if s.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(WkbError::Numeric(format!(
                    "state {j} has non-finite entries"
                )));
            }
            let norm = norm(s);
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(WkbError::Invalid(format!(
                    "state {j} has norm {norm}, expected 1 within {NORM_TOL:e}"
                )));
            }
        }
        Ok(StateLoop { states })
    }

    /// Normalize each vector first.
    pub fn normalized(states: Vec<Vec<Complex64>>) -> Result<Self> {
        let states = states
            .into_iter()
            .enumerate()
            .map(|(j, s)| {
                let n = norm(&s);
                if !(n > 0.0) {
                    return Err(WkbError::Invalid(format!("state {j} is zero")));
                }
                Ok(s.into_iter().map(|c| c / n).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        StateLoop::new(states)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn states(&self) -> &[Vec<Complex64>] {
        &self.states
    }

    /// The same loop traversed in the opposite direction.
    pub fn reversed(&self) -> StateLoop {
        let mut states = self.states.clone();
        states.reverse();
        StateLoop { states }
    }

    /// Multiply state j by `exp(i chi_j)`.
    pub fn regauged(&self, chi: &[f64]) -> Result<StateLoop> {
        if chi.len() != self.len() {
            return Err(WkbError::Shape(
                "one gauge phase per state is required".into(),
            ));
        }
        let states = self
            .states
            .iter()
            .zip(chi)
            .map(|(s, &c)| {
                let g = Complex64::from_polar(1.0, c);
                s.iter().map(|z| z * g).collect()
            })
            .collect();
        Ok(StateLoop { states })
    }

    /// Read `{"states": [[[re, im], ...], ...]}`.
    pub fn from_json(text: &str) -> Result<StateLoop> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Doc {
            states: Vec<Vec<[f64; 2]>>,
        }
        let doc: Doc = serde_json::from_str(text)
            .map_err(|e| WkbError::Invalid(format!("state loop JSON: {e}")))?;
        StateLoop::new(
            doc.states
                .into_iter()
                .map(|s| {
                    s.into_iter()
                        .map(|[re, im]| Complex64::new(re, im))
                        .collect()
                })
                .collect(),
        )
    }

    /// Read CSV with header `state,component,re,im`, rows in any order.
    pub fn from_csv(text: &str) -> Result<StateLoop> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().unwrap_or("");
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["state", "component", "re", "im"] {
            return Err(WkbError::Invalid(format!(
                "state loop CSV header must be state,component,re,im; got {header}"
            )));
        }
        let mut entries = Vec::new();
        for (line_no, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || WkbError::Invalid(format!("state loop CSV row {}: {line}", line_no + 2));
            if f.len() != 4 {
                return Err(bad());
            }
            let j: usize = f[0].parse().map_err(|_| bad())?;
            let c: usize = f[1].parse().map_err(|_| bad())?;
            let re: f64 = f[2].parse().map_err(|_| bad())?;
            let im: f64 = f[3].parse().map_err(|_| bad())?;
            entries.push((j, c, Complex64::new(re, im)));
        }
        let k = entries.iter().map(|e| e.0 + 1).max().unwrap_or(0);
        let dim = entries.iter().map(|e| e.1 + 1).max().unwrap_or(0);
        if entries.len() != k * dim {
            return Err(WkbError::Shape(format!(
                "state loop CSV has {} rows, expected {k} states x {dim} components",
                entries.len()
            )));
        }
        let mut states = vec![vec![Complex64::new(f64::NAN, f64::NAN); dim]; k];
        for (j, c, z) in entries {
            states[j][c] = z;
        }
        StateLoop::new(states)
    }

    pub fn from_file(path: &Path) -> Result<StateLoop> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => StateLoop::from_csv(&text),
            _ => StateLoop::from_json(&text),
        }
    }

    /// CSV in the format read by [`StateLoop::from_csv`].
    pub fn to_csv(&self) -> String {
        let mut out = String::from("state,component,re,im\n");
        for (j, s) in self.states.iter().enumerate() {
            for (c, z) in s.iter().enumerate() {
                out.push_str(&format!("{j},{c},{},{}\n", z.re, z.im));
            }
        }
        out
    }
}

fn norm(s: &[Complex64]) -> f64 {
    s.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `<a | b>`, antilinear in the first slot.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Map an angle to (-pi, pi]; -0 becomes 0.
pub fn wrap_angle(x: f64) -> f64 {
    let mut r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Distance between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerryReport {
    pub gamma: f64,
    pub states: usize,
    pub dim: usize,
    /// Smallest |<n_j | n_{j+1}>| around the loop.
    pub min_overlap: f64,
}

/// Phase and diagnostics. Fails when consecutive states are nearly
/// orthogonal (the loop is undersampled).
pub fn berry_report(lp: &StateLoop) -> Result<BerryReport> {
    let k = lp.len();
    let mut total = 0.0;
    let mut min_overlap = f64::INFINITY;
    for j in 0..k {
        let ov = inner(&lp.states[j], &lp.states[(j + 1) % k]);
        let mag = ov.norm();
        if !(mag > MIN_OVERLAP) {
            return Err(WkbError::Numeric(format!(
                "loop undersampled: |<n_{j}|n_{}>| = {mag:.3e} <= {MIN_OVERLAP}",
                (j + 1) % k
            )));
        }
        min_overlap = min_overlap.min(mag);
        total += ov.arg();
    }
    Ok(BerryReport {
        gamma: wrap_angle(-total),
        states: k,
        dim: lp.dim(),
        min_overlap,
    })
}

pub fn discrete_berry_phase(lp: &StateLoop) -> Result<f64> {
    Ok(berry_report(lp)?.gamma)
}

/// Eigenvector of `v . sigma` with eigenvalue -1 for the unit vector at
/// polar angle `theta`, azimuth `phi`, in a gauge smooth in phi.
pub fn two_level_ground_state(theta: f64, phi: f64) -> Vec<Complex64> {
    let (s, c) = (0.5 * theta).sin_cos();
    vec![Complex64::new(s, 0.0), -Complex64::from_polar(c, phi)]
}

/// K ground states along the circle of polar angle `theta`.
pub fn sample_two_level_loop(theta: f64, k: usize) -> Result<StateLoop> {
    if k < 8 {
        return Err(WkbError::Invalid(format!("need K >= 8 states, got {k}")));
    }
    if !(theta > 0.0 && theta < PI) {
        return Err(WkbError::Invalid(format!(
            "theta must lie in (0, pi), got {theta}"
        )));
    }
    let states = (0..k)
        .map(|j| two_level_ground_state(theta, 2.0 * PI * j as f64 / k as f64))
        .collect();
    StateLoop::new(states)
}

/// Continuum Berry phase of the loop produced by [`sample_two_level_loop`],
/// `-pi (1 + cos theta)`, reduced to (-pi, pi].
pub fn two_level_ground_phase(theta: f64) -> f64 {
    wrap_angle(-PI * (1.0 + theta.cos()))
}
