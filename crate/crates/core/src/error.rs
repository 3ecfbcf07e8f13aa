use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquiheatError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "series truncation needs cutoff {required} levels, above the configured maximum {max}"
    )]
    Truncation { required: usize, max: usize },

    #[error("order q = {0} is not instantiated; only q = 2 heat kernels are available")]
    NotInstantiated(u32),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error(
        "bound violated at t = {t}, |g| = {dist}: value {value:e} exceeds envelope {envelope:e}"
    )]
    BoundViolation {
        t: f64,
        dist: f64,
        value: f64,
        envelope: f64,
    },

    #[error("expansion violation at t = {t}: normalized ratio {ratio} departs from {target}")]
    ExpansionViolation { t: f64, ratio: f64, target: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("singular stratum: {0}")]
    SingularStratum(String),

    #[error("geometry incomplete: {0}")]
    GeometryIncomplete(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("decay violation at |xi| = {xi}: {detail}")]
    DecayViolation { xi: f64, detail: String },

    #[error("non-integral multiplicity {value} for {label}")]
    NonIntegral { label: String, value: f64 },

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, EquiheatError>;

impl From<std::io::Error> for EquiheatError {
    fn from(e: std::io::Error) -> Self {
        EquiheatError::Io(e.to_string())
    }
}

impl From<csv::Error> for EquiheatError {
    fn from(e: csv::Error) -> Self {
        EquiheatError::Io(e.to_string())
    }
}
