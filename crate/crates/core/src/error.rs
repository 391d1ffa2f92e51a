use crate::expr::{DomainError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Domain(#[from] DomainError),

    #[error("expression `{text}`: {source}")]
    Parse {
        text: String,
        #[source]
        source: ParseError,
    },

    #[error("metric is singular at {point:?} (eigenvalue ratio {ratio:.3e})")]
    SingularMetric { point: Vec<f64>, ratio: f64 },

    #[error("metric is not positive definite at {point:?} (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite {
        point: Vec<f64>,
        min_eigenvalue: f64,
    },

    #[error("point {point:?} lies within {threshold:e} of a metric singularity (smallest eigenvalue {min_eigenvalue:.3e})")]
    NearSingularPoint {
        point: Vec<f64>,
        min_eigenvalue: f64,
        threshold: f64,
    },

    #[error("point has {found} coordinates, chart has {expected}")]
    PointLength { expected: usize, found: usize },

    #[error("unknown field `{0}`")]
    UnknownField(String),

    #[error("field `{name}` is {found}, expected {expected}")]
    FieldKind {
        name: String,
        expected: &'static str,
        found: &'static str,
    },

    #[error("field `{0}` must be symmetric")]
    NotSymmetric(String),

    #[error("{what} requires dimension >= {needed}, chart has {found}")]
    Dimension {
        what: &'static str,
        needed: usize,
        found: usize,
    },

    #[error("invalid chart: {0}")]
    Chart(String),

    #[error("eigenvalue gap {gap:.3e} is within a factor of 2 of the cluster threshold {threshold:.3e}; adjust cluster_tol")]
    ClusterAmbiguity { gap: f64, threshold: f64 },

    #[error("{0}")]
    Manifest(String),

    #[error("check `{check}` at point `{point}`: {source}")]
    Check {
        check: String,
        point: String,
        #[source]
        source: Box<Error>,
    },

    #[error("no catalog entry named `{0}`")]
    CatalogNotFound(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
