use thiserror::Error;

pub type Result<T> = std::result::Result<T, WkbError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WkbError {
    /// Evaluation point outside the support of a tabulated object.
    #[error("x = {x} outside tabulated range [{lo}, {hi}]")]
    Range { x: f64, lo: f64, hi: f64 },

    /// Turning point or classically forbidden region reached.
    #[error("domain error: {0}")]
    Domain(String),

    /// A backward characteristic leaves the admissible window.
    #[error(
        "time horizon too long{}: characteristic from (x = {seed_x}, t = {seed_t}) leaves the \
         allowed window; largest admissible t_hi is about {suggested_t_hi:.6}",
        axis_label(.axis)
    )]
    Horizon {
        seed_x: f64,
        seed_t: f64,
        suggested_t_hi: f64,
        axis: Option<usize>,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("consistency error: {0}")]
    Consistency(String),

    /// Grid too coarse to resolve the exp(iS/hbar) oscillation.
    #[error(
        "grid does not resolve the phase oscillation: {reason}; use nx >= {suggested_nx}, \
         nt >= {suggested_nt}"
    )]
    Resolution {
        reason: String,
        suggested_nx: usize,
        suggested_nt: usize,
    },

    #[error("non-finite value: {0}")]
    Numeric(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("tolerance exceeded: {0}")]
    Tolerance(String),

    #[error("configuration error:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("io error: {0}")]
    Io(String),
}

impl WkbError {
    pub fn with_axis(self, axis: usize) -> Self {
        match self {
            WkbError::Horizon {
                seed_x,
                seed_t,
                suggested_t_hi,
                ..
            } => WkbError::Horizon {
                seed_x,
                seed_t,
                suggested_t_hi,
                axis: Some(axis),
            },
            WkbError::Domain(msg) => WkbError::Domain(format!("axis {axis}: {msg}")),
            WkbError::Invalid(msg) => WkbError::Invalid(format!("axis {axis}: {msg}")),
            other => other,
        }
    }
}

impl From<std::io::Error> for WkbError {
    fn from(e: std::io::Error) -> Self {
        WkbError::Io(e.to_string())
    }
}

fn axis_label(axis: &Option<usize>) -> String {
    axis.map(|a| format!(" on axis {a}")).unwrap_or_default()
}
