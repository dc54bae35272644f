use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vectors do not span a hyperplane (span has dimension {span_dim}, ambient {ambient})")]
    NotAHyperplane { span_dim: usize, ambient: usize },

    #[error("subspace basis is linearly dependent")]
    DependentBasis,

    #[error("zero vector at position {0} of the configuration")]
    ZeroVector(usize),

    #[error("list does not span the ambient space (rank {rank} < {dim})")]
    NonSpanningList { rank: usize, dim: usize },

    #[error("configuration exceeds the supported size (dim {dim}, {len} vectors; limits dim <= 3, len <= 8)")]
    UnsupportedSize { dim: usize, len: usize },

    #[error("point {0} is not affine-regular")]
    NonRegularPoint(String),

    #[error("segment lies inside the arrangement")]
    SegmentInsideArrangement,

    #[error("no regular interpolation node found on ({lo}, {hi})")]
    NodeSelection { lo: String, hi: String },

    #[error("piecewise reconstruction failed on ({lo}, {hi}): integrand has a break not in the arrangement")]
    MissedBreakpoint { lo: String, hi: String },

    #[error("linear form takes an integer value at the evaluation point")]
    FormHitsInteger,

    #[error("interpolation nodes are not pairwise distinct")]
    DuplicateNodes,

    #[error("twist {0} is an integer; use the untwisted path")]
    IntegerTwist(String),

    #[error("subspace is not spanned by a subsequence of the configuration")]
    NonAdmissibleSubspace,

    #[error("character {0} is not a nonzero toric vertex")]
    NotAToricVertex(String),

    #[error("polynomial is not in the Dahmen-Micchelli space")]
    NotInDmSpace,

    #[error("operation supports dimension {supported} only, got {got}")]
    UnsupportedDimension { supported: usize, got: usize },

    #[error("index {index} out of range for a list of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
