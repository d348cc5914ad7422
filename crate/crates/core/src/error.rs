use thiserror::Error;

/// Errors raised by the solver, the quadrature layer and the certificate suite.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside its admissible range. `condition` names the
    /// violated constraint, e.g. `"ϑ < −2/γ"`.
    #[error("invalid parameter {name} = {value}: requires {condition}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        condition: &'static str,
    },

    #[error("kernel evaluated on the diagonal v = u; use the cell-averaged operator path")]
    SingularPair,

    #[error("quadrature did not converge: error estimate {residual:e} after {evaluations} evaluations")]
    QuadratureNonConvergence { residual: f64, evaluations: u32 },

    #[error("field layout mismatch: {0}")]
    GridMismatch(String),

    #[error("negative value {value:e} at node {node} where a nonnegative density is required")]
    NegativeDensity { node: usize, value: f64 },

    #[error("time ordering violated: s = {s} > t = {t}")]
    TimeOrdering { s: f64, t: f64 },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("fit degenerate: {0}")]
    FitDegenerate(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
