use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no {color} vertex at ({x}, {u})")]
    ColorMismatch { x: i64, u: i64, color: &'static str },

    #[error("not a perfect matching: {0}")]
    NotPerfect(String),

    #[error("interlacing violated: {0}")]
    Interlacing(String),

    #[error("edge {0} is not in the graph")]
    EdgeNotInGraph(String),

    #[error("matrix is singular")]
    Singular,

    #[error("size {n} exceeds the enumeration limit {max}")]
    SizeGuard { n: u32, max: u32 },

    #[error("contour: {0}")]
    Contour(String),

    #[error("quadrature did not converge (last change {change:e} at M = {m})")]
    Convergence { change: f64, m: usize },

    #[error("pole on the integration path: {0}")]
    Pole(String),

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("inconsistent increments around cycle {0}")]
    InconsistentIncrements(String),

    #[error("point too close to the arctic curve (discriminant {0:e})")]
    TooCloseToArctic(f64),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
