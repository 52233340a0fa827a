//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Pipeline stage that failed, attached to errors surfaced by `run_alg1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    FailureSet,
    Surrogate,
    Mixture,
    Certify,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Stage::FailureSet => write!(f, "failure-set"),
            Stage::Surrogate => write!(f, "surrogate"),
            Stage::Mixture => write!(f, "mixture"),
            Stage::Certify => write!(f, "certify"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("invalid parameter {name}={value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("degenerate convex hull: need >= 3 non-collinear points (got {n_points})")]
    DegenerateHull { n_points: usize },

    #[error("polygon clip produced an empty or degenerate intersection")]
    EmptyIntersection,

    #[error(
        "rejection sampler budget exhausted after {attempts} attempts \
         (acceptance rate ~{acceptance_rate:.3e})"
    )]
    RejectionBudget { attempts: u64, acceptance_rate: f64 },

    #[error("Cholesky factorization failed at pivot {pivot} (jitter {jitter:.3e}, n {n})")]
    Factorization { pivot: usize, jitter: f64, n: usize },

    #[error("oracle evaluation failed at theta {theta:?}: {source}")]
    Oracle {
        theta: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("importance weight {weight} exceeds bound {bound} at theta {theta:?}")]
    WeightBound {
        weight: f64,
        bound: f64,
        theta: Vec<f64>,
    },

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_stage(stage: Stage) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }

    pub(crate) fn for_theta(theta: &[f64]) -> impl FnOnce(Error) -> Error + '_ {
        move |source| Error::Oracle {
            theta: theta.to_vec(),
            source: Box::new(source),
        }
    }
}
