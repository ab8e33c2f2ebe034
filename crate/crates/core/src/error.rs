use thiserror::Error;

use crate::lie_groups::GroupKind;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("group mismatch: {0:?} vs {1:?}")]
    GroupMismatch(GroupKind, GroupKind),
    #[error("{0:?} is a quotient space and has no group product")]
    QuotientHasNoProduct(GroupKind),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("logarithm undefined: rotation angle {angle} is on the branch cut at pi")]
    BranchCutSingular { angle: f64 },
    #[error("invalid group element: {0}")]
    InvalidElement(String),

    #[error("unsupported B-spline degree {0} (max 3)")]
    UnsupportedDegree(usize),
    #[error("invalid grid spacing: {0}")]
    InvalidSpacing(String),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("channel mismatch: expected {expected}, got {got}")]
    ChannelMismatch { expected: usize, got: usize },
    #[error("input of spatial shape {input:?} is too small for kernel {kernel:?}")]
    ShapeUnderflow { input: Vec<usize>, kernel: Vec<usize> },
    #[error("feature map grid does not match kernel grid")]
    GridMismatch,
    #[error("operation requires a lifted feature map")]
    NotLifted,
    #[error("group element is not on the sampling grid: {0}")]
    OffGridElement(String),
    #[error("layer {layer}: {message}")]
    ConfigTypeError { layer: usize, message: String },

    #[error("forward cache does not match network or input: {0}")]
    CacheMismatch(String),
    #[error("training diverged at epoch {epoch}: loss {loss}")]
    DivergenceDetected { epoch: usize, loss: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("kernel support radius {radius} exceeds injectivity bound {bound}")]
    SupportTooLarge { radius: f64, bound: f64 },
    #[error("least-squares system is singular: {0}")]
    SingularFit(String),

    #[error("bad magic bytes in tensor file")]
    BadMagic,
    #[error("truncated payload: expected {expected} bytes, got {got}")]
    TruncatedPayload { expected: usize, got: usize },
    #[error("unsupported tensor file version {0}")]
    UnsupportedVersion(u32),
    #[error("unsupported dtype tag {0}")]
    UnsupportedDtype(u8),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
