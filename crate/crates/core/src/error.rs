use thiserror::Error;

/// Errors raised by the pointwise geometry pipeline and the run harness.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeomError {
    #[error("metric is singular or ill-conditioned at {coords:?} (condition {condition:.3e})")]
    SingularMetric { coords: Vec<f64>, condition: f64 },

    #[error("point {coords:?} violates the domain margin {margin} of chart `{chart}`")]
    OutOfDomain { chart: String, coords: Vec<f64>, margin: f64 },

    #[error("finite-difference stencil of radius {radius:.3e} around {coords:?} leaves chart `{chart}`")]
    StencilOutOfDomain { chart: String, coords: Vec<f64>, radius: f64 },

    #[error("adapted frame is rank deficient: found {found} of {expected} vectors in {part}")]
    RankDeficient { part: &'static str, found: usize, expected: usize },

    #[error("endomorphism is not skew (residual {residual:.3e})")]
    NotSkew { residual: f64 },

    #[error("endomorphism has an m-component of size {residual:.3e}, expected an element of g")]
    NotInG { residual: f64 },

    #[error("endomorphism has a g-component of size {residual:.3e}, expected an element of m")]
    NotInM { residual: f64 },

    #[error("transfer tensor is ill-conditioned (condition {condition:.3e})")]
    IllConditionedL { condition: f64 },

    #[error("sampling margins exhaust the domain of scenario `{scenario}`")]
    EmptyDomain { scenario: String },

    #[error("analytic backend requested but no jet is available for `{what}`")]
    AnalyticUnavailable { what: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("configuration error: {0}")]
    Config(String),
}

impl GeomError {
    /// True for failures caused by the numbers at a point rather than by the
    /// request itself.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            GeomError::SingularMetric { .. }
                | GeomError::RankDeficient { .. }
                | GeomError::IllConditionedL { .. }
                | GeomError::NotSkew { .. }
                | GeomError::NotInG { .. }
                | GeomError::NotInM { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, GeomError>;
