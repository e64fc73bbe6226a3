use thiserror::Error;

/// Errors raised by the geometric operations, solvers and dataset IO.
#[derive(Debug, Error)]
pub enum Error {
    #[error("PointAtInfinity: homogeneous scale {w:e} below threshold")]
    PointAtInfinity { w: f64 },
    #[error("SingularMatrix: determinant {det:e} is not invertible")]
    SingularMatrix { det: f64 },
    #[error("NonFinite: {0}")]
    NonFinite(&'static str),
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error("DegenerateSimilarity: scale {scale:e} is zero")]
    DegenerateSimilarity { scale: f64 },
    #[error("NotASimilarity: pattern residual {residual:e}")]
    NotASimilarity { residual: f64 },
    #[error("DegeneratePointPair: source points coincide")]
    DegeneratePointPair,
    #[error("DegenerateKernel: {0}")]
    DegenerateKernel(&'static str),
    #[error("NotAKernel: pattern residual {residual:e}")]
    NotAKernel { residual: f64 },
    #[error("NotDecomposable: {0}")]
    NotDecomposable(String),
    #[error("DegenerateQuad: {0}")]
    DegenerateQuad(&'static str),
    #[error("InsufficientCorrespondences: need at least {needed}, got {got}")]
    InsufficientCorrespondences { needed: usize, got: usize },
    #[error("DuplicateSource: source points {0} and {1} coincide")]
    DuplicateSource(usize, usize),
    #[error("NumericalFailure: {0}")]
    NumericalFailure(&'static str),
    #[error("RankDeficient: null space has dimension > 1")]
    RankDeficient,
    #[error("NoConsensus: best model has {inliers} inliers")]
    NoConsensus { inliers: usize },
    #[error("DegenerateAffine: determinant {det:e}")]
    DegenerateAffine { det: f64 },
    #[error("DegenerateAffineKernel: h = {h:e}")]
    DegenerateAffineKernel { h: f64 },
    #[error("ExhaustedRedraws: sample {index} rejected {attempts} times")]
    ExhaustedRedraws { index: usize, attempts: usize },
    #[error("EmptyInput")]
    EmptyInput,
    #[error("Schema: line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("Io: {0}")]
    Io(#[from] std::io::Error),
    #[error("Json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short variant name, used by the CLI when reporting failures.
    pub fn name(&self) -> &'static str {
        match self {
            Error::PointAtInfinity { .. } => "PointAtInfinity",
            Error::SingularMatrix { .. } => "SingularMatrix",
            Error::NonFinite(_) => "NonFinite",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::DegenerateSimilarity { .. } => "DegenerateSimilarity",
            Error::NotASimilarity { .. } => "NotASimilarity",
            Error::DegeneratePointPair => "DegeneratePointPair",
            Error::DegenerateKernel(_) => "DegenerateKernel",
            Error::NotAKernel { .. } => "NotAKernel",
            Error::NotDecomposable(_) => "NotDecomposable",
            Error::DegenerateQuad(_) => "DegenerateQuad",
            Error::InsufficientCorrespondences { .. } => "InsufficientCorrespondences",
            Error::DuplicateSource(..) => "DuplicateSource",
            Error::NumericalFailure(_) => "NumericalFailure",
            Error::RankDeficient => "RankDeficient",
            Error::NoConsensus { .. } => "NoConsensus",
            Error::DegenerateAffine { .. } => "DegenerateAffine",
            Error::DegenerateAffineKernel { .. } => "DegenerateAffineKernel",
            Error::ExhaustedRedraws { .. } => "ExhaustedRedraws",
            Error::EmptyInput => "EmptyInput",
            Error::Schema { .. } => "Schema",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }

    /// True for malformed input (files, flags, preconditions on counts),
    /// false for numerical or degeneracy failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_)
                | Error::InvalidConfig(_)
                | Error::InsufficientCorrespondences { .. }
                | Error::DuplicateSource(..)
                | Error::EmptyInput
                | Error::Schema { .. }
                | Error::Io(_)
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
