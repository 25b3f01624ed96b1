use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operands belong to different algebras")]
    AlgebraMismatch,

    #[error("structure constants are not associative (residual {residual:.3e})")]
    NotAssociative { residual: f64 },

    #[error("unit law fails (residual {residual:.3e})")]
    UnitLaw { residual: f64 },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("cochain degree {0} exceeds the supported maximum")]
    DegreeTooLarge(usize),

    #[error("pre-Lie product of two degree-0 cochains is undefined")]
    DegreeZeroProduct,

    #[error("coboundary solve requires degree >= 1")]
    DegreeZeroCoboundary,

    #[error("linear system too large: {entries} matrix entries (limit {limit})")]
    TooLarge { entries: usize, limit: usize },

    #[error("element is not central (residual {residual:.3e})")]
    NotCentral { residual: f64 },

    #[error("cochain violates the Leibniz cocycle condition (residual {residual:.3e})")]
    NotCocycle { residual: f64 },

    #[error("not a coboundary (residual {residual:.3e})")]
    NotCoboundary { residual: f64 },

    #[error("torus elements disagree on theta or truncation")]
    TorusMismatch,

    #[error("foliation data belong to different models")]
    ModelMismatch,

    #[error("form degree {0} + {1} exceeds 2")]
    FormDegreeOverflow(usize, usize),

    #[error("unsupported form degree for this operation")]
    FormDegree,

    #[error("density must be positive (min sample {0:.3e})")]
    NonPositiveDensity(f64),

    #[error("function is not constant along leaves (variation {0:.3e})")]
    NotLeafwiseConstant(f64),

    #[error("connection has torsion (residual {0:.3e})")]
    Torsion(f64),

    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),

    #[error("index out of range or repeated: {0}")]
    InvalidIndex(String),

    #[error("non-finite state at t = {0}")]
    NonFinite(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
