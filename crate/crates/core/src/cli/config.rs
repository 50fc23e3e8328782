//! Run configuration: one JSON document per experiment, parsed strictly.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WkbError};
use crate::model::{InitialProfile, PotentialSpec, SpaceTimeGrid};
use crate::multidim::{AxisGrid, GridD, MAX_DIM, MAX_ORDER_D};
use crate::transport::{TransportOptions, MAX_ORDER_1D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunKind {
    Phase,
    Transport,
    Sweep,
    Multidim,
    Berry,
}

impl RunKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RunKind::Phase => "phase",
            RunKind::Transport => "transport",
            RunKind::Sweep => "sweep",
            RunKind::Multidim => "multidim",
            RunKind::Berry => "berry",
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Free,
    Harmonic {
        #[serde(default = "one")]
        kappa: f64,
    },
    Polynomial {
        coeffs: Vec<f64>,
    },
    Tabulated {
        xs: Vec<f64>,
        vs: Vec<f64>,
    },
}

impl PotentialConfig {
    pub fn build(&self) -> Result<PotentialSpec> {
        match self {
            PotentialConfig::Free => Ok(PotentialSpec::Free),
            PotentialConfig::Harmonic { kappa } => {
                if !kappa.is_finite() {
                    return Err(WkbError::Invalid(format!(
                        "kappa must be finite, got {kappa}"
                    )));
                }
                Ok(PotentialSpec::Harmonic { kappa: *kappa })
            }
            PotentialConfig::Polynomial { coeffs } => PotentialSpec::polynomial(coeffs.clone()),
            PotentialConfig::Tabulated { xs, vs } => {
                PotentialSpec::tabulated(xs.clone(), vs.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileConfig {
    Constant {
        value: f64,
    },
    Gaussian {
        #[serde(default)]
        center: f64,
        #[serde(default = "one")]
        width: f64,
    },
    Tabulated {
        us: Vec<f64>,
        values: Vec<f64>,
    },
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig::Gaussian {
            center: 0.0,
            width: 1.0,
        }
    }
}

impl ProfileConfig {
    pub fn build(&self) -> Result<InitialProfile> {
        match self {
            ProfileConfig::Constant { value } => {
                if !value.is_finite() {
                    return Err(WkbError::Invalid("constant profile must be finite".into()));
                }
                Ok(InitialProfile::Constant(*value))
            }
            ProfileConfig::Gaussian { center, width } => InitialProfile::gaussian(*center, *width),
            ProfileConfig::Tabulated { us, values } => {
                InitialProfile::tabulated(us.clone(), values.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Bound on the interior transport residual of every order.
    pub tol_ode: f64,
    /// Bound on the relative remainder-identity error.
    pub tol_identity: f64,
    /// Bound on the Hamilton-Jacobi residual.
    pub tol_hj: f64,
    /// Bound on the Berry phase error against the two-level oracle.
    pub tol_berry: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_ode: 1e-6,
            tol_identity: 1e-6,
            tol_hj: 1e-10,
            tol_berry: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub potential: PotentialConfig,
    pub beta: f64,
    pub grid: AxisGrid,
    #[serde(default)]
    pub profile: ProfileConfig,
    #[serde(default)]
    pub anchor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiDimConfig {
    pub axes: Vec<AxisConfig>,
    pub t_hi: f64,
    pub nt: usize,
}

impl MultiDimConfig {
    pub fn grid(&self) -> Result<GridD> {
        GridD::new(
            self.axes.iter().map(|a| a.grid).collect(),
            self.t_hi,
            self.nt,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BerryConfig {
    /// Polar angle of the two-level loop.
    #[serde(default)]
    pub theta: Option<f64>,
    /// Number of states on the two-level loop.
    #[serde(default)]
    pub states: Option<usize>,
    /// JSON or CSV state loop, instead of the two-level family.
    #[serde(default)]
    pub loop_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: RunKind,
    #[serde(default)]
    pub potential: Option<PotentialConfig>,
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub grid: Option<SpaceTimeGrid>,
    #[serde(default)]
    pub profile: ProfileConfig,
    #[serde(default)]
    pub order: usize,
    #[serde(default)]
    pub hbar: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default)]
    pub anchor: Option<f64>,
    #[serde(default)]
    pub transport: TransportOptions,
    #[serde(default)]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub multidim: Option<MultiDimConfig>,
    #[serde(default)]
    pub berry: Option<BerryConfig>,
}

fn default_margin() -> f64 {
    0.05
}

/// Parse and validate. Schema errors and every semantic violation are
/// reported as `path: message` items.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." {
            "(document)".to_string()
        } else {
            path
        };
        WkbError::Config(vec![format!("{path}: {}", e.into_inner())])
    })?;
    let issues = validate(&cfg);
    if issues.is_empty() {
        Ok(cfg)
    } else {
        Err(WkbError::Config(issues))
    }
}

fn push_err<T>(issues: &mut Vec<String>, path: &str, r: Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            issues.push(format!("{path}: {e}"));
            None
        }
    }
}

/// All semantic problems of a parsed config.
pub fn validate(cfg: &RunConfig) -> Vec<String> {
    let mut issues = Vec::new();
    let t = cfg.tolerances;
    for (name, v) in [
        ("tol_ode", t.tol_ode),
        ("tol_identity", t.tol_identity),
        ("tol_hj", t.tol_hj),
        ("tol_berry", t.tol_berry),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            issues.push(format!("tolerances.{name}: must be positive, got {v}"));
        }
    }
    if !(cfg.mass > 0.0) || !cfg.mass.is_finite() {
        issues.push(format!("mass: must be positive, got {}", cfg.mass));
    }
    if !(cfg.margin > 0.0) || !cfg.margin.is_finite() {
        issues.push(format!("margin: must be positive, got {}", cfg.margin));
    }
    for (i, h) in cfg.hbar.iter().enumerate() {
        if !(*h > 0.0) || !h.is_finite() {
            issues.push(format!("hbar[{i}]: must be positive, got {h}"));
        }
    }
    for (i, w) in cfg.hbar.windows(2).enumerate() {
        if w[1] >= w[0] {
            issues.push(format!(
                "hbar[{}]: list must be strictly decreasing ({} follows {})",
                i + 1,
                w[1],
                w[0]
            ));
        }
    }
    push_err(&mut issues, "transport", cfg.transport.validate());

    let one_d = matches!(
        cfg.kind,
        RunKind::Phase | RunKind::Transport | RunKind::Sweep
    );
    if one_d {
        if cfg.order > MAX_ORDER_1D {
            issues.push(format!(
                "order: N = {} exceeds the one-dimensional maximum N <= {MAX_ORDER_1D}",
                cfg.order
            ));
        }
        match &cfg.potential {
            None => issues.push("potential: required for this run kind".into()),
            Some(p) => {
                push_err(&mut issues, "potential", p.build());
            }
        }
        match cfg.beta {
            None => issues.push("beta: required for this run kind".into()),
            Some(b) if !b.is_finite() => issues.push(format!("beta: must be finite, got {b}")),
            _ => {}
        }
        match &cfg.grid {
            None => issues.push("grid: required for this run kind".into()),
            Some(g) => {
                push_err(&mut issues, "grid", g.validate());
                if let Some(a) = cfg.anchor {
                    if !(a >= g.x_lo && a <= g.x_hi) {
                        issues.push(format!("anchor: {a} lies outside the grid"));
                    }
                }
            }
        }
        push_err(&mut issues, "profile", cfg.profile.build());
    }
    if cfg.kind == RunKind::Sweep && cfg.hbar.len() < 3 {
        issues.push(format!(
            "hbar: a sweep needs at least 3 values, got {}",
            cfg.hbar.len()
        ));
    }
    if cfg.kind == RunKind::Multidim {
        if cfg.order > MAX_ORDER_D {
            issues.push(format!(
                "order: N = {} exceeds the multi-dimensional maximum N <= {MAX_ORDER_D}",
                cfg.order
            ));
        }
        if !cfg.hbar.is_empty() && cfg.hbar.len() < 3 {
            issues.push(format!(
                "hbar: an order sweep needs at least 3 values, got {}",
                cfg.hbar.len()
            ));
        }
        match &cfg.multidim {
            None => issues.push("multidim: required for this run kind".into()),
            Some(md) => {
                if md.axes.is_empty() || md.axes.len() > MAX_DIM {
                    issues.push(format!(
                        "multidim.axes: need 1..={MAX_DIM} axes, got {}",
                        md.axes.len()
                    ));
                } else {
                    push_err(&mut issues, "multidim", md.grid());
                }
                for (i, a) in md.axes.iter().enumerate() {
                    push_err(
                        &mut issues,
                        &format!("multidim.axes[{i}].potential"),
                        a.potential.build(),
                    );
                    push_err(
                        &mut issues,
                        &format!("multidim.axes[{i}].profile"),
                        a.profile.build(),
                    );
                    if !a.beta.is_finite() {
                        issues.push(format!("multidim.axes[{i}].beta: must be finite"));
                    }
                }
            }
        }
    }
    if cfg.kind == RunKind::Berry {
        match &cfg.berry {
            None => issues.push("berry: required for this run kind".into()),
            Some(b) => match (&b.loop_file, b.theta, b.states) {
                (Some(_), None, None) => {}
                (None, Some(theta), Some(k)) => {
                    if !(theta > 0.0 && theta < std::f64::consts::PI) {
                        issues.push(format!("berry.theta: must lie in (0, pi), got {theta}"));
                    }
                    if k < 8 {
                        issues.push(format!("berry.states: need at least 8, got {k}"));
                    }
                }
                _ => issues.push("berry: give either loop_file, or both theta and states".into()),
            },
        }
    }
    issues
}

/// A grid for 1-D kinds (validated already).
pub(crate) fn grid_1d(cfg: &RunConfig) -> SpaceTimeGrid {
    cfg.grid.expect("validated config has a grid")
}
