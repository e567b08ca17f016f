use thiserror::Error;

pub type Result<T> = std::result::Result<T, GeoError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    /// A local point lies outside the chart's domain box or too close to a
    /// coordinate singularity. `t` is set when the violation happened during
    /// time integration.
    #[error("domain error at u = ({}, {}){}: {reason}", u[0], u[1], fmt_time(*t))]
    Domain {
        u: [f64; 2],
        t: Option<f64>,
        reason: String,
    },

    #[error("degenerate normal frame at u = ({}, {}): |X_u x X_v| = {norm:e}", u[0], u[1])]
    DegenerateFrame { u: [f64; 2], norm: f64 },

    #[error("numerically singular metric at u = ({}, {}): condition number {cond:e}", u[0], u[1])]
    SingularMetric { u: [f64; 2], cond: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid manifold specification: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn fmt_time(t: Option<f64>) -> String {
    match t {
        Some(t) => format!(" (t = {t})"),
        None => String::new(),
    }
}

impl GeoError {
    /// True for errors caused by numerical breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            GeoError::NonFinite(_) | GeoError::SingularMetric { .. } | GeoError::DegenerateFrame { .. }
        )
    }
}
