use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("query time {t} lies before the start time {t0}")]
    TimeBeforeStart { t: f64, t0: f64 },

    #[error("empty sample set")]
    EmptySamples,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("assumption gate failed: {0}")]
    GateFailed(String),

    #[error("field too large for the trajectory map: |E|_(a,t0) e^(-a t0) = {scaled} exceeds a = {a}")]
    FieldTooLarge { scaled: f64, a: f64 },

    #[error("{what} did not converge after {iterations} iterations (last residual {residual:e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("observed contraction ratio stayed above 1 for {count} iterations (last {ratio}); grid resolution is likely inadequate")]
    Diverging { count: usize, ratio: f64 },

    #[error("collocation node {index} (z = {z}) failed: {source}")]
    NodeFailed {
        index: usize,
        z: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("derivative order {order} needs at least {needed} collocation nodes, have {available}")]
    DerivativeOrder {
        order: usize,
        needed: usize,
        available: usize,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed table: {0}")]
    Parse(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
