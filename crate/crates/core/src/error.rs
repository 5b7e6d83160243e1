use thiserror::Error;

use crate::BigCount;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("malformed cycle notation at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("point {point} repeated in cycle notation")]
    RepeatedPoint { point: usize },
    #[error("point {point} exceeds degree {degree}")]
    PointOutOfRange { point: usize, degree: usize },
    #[error("group is not transitive")]
    Intransitive,
    #[error("unsupported field GF({p}^{k})")]
    UnsupportedField { p: u32, k: u32 },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("matrices do not share one field and dimension")]
    MixedMatrices,
    #[error("action kernel is not trivial{}", if *.projective { " modulo scalars" } else { "" })]
    Unfaithful { projective: bool },
    #[error("unsupported parameter: {0}")]
    Unsupported(String),
    #[error("record {name}: expected order {expected}, constructed group has order {actual}")]
    OrderMismatch { name: String, expected: BigCount, actual: BigCount },
    #[error("record {name}: {msg}")]
    InvalidRecord { name: String, msg: String },
    #[error("asset not found: {0}")]
    MissingAsset(String),
    #[error("{what} is not contained in the ambient group")]
    NotSubgroup { what: String },
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("internal consistency check failed: {0}")]
    CrossCheck(String),
    #[error("exhaustive enumeration refused: order {0} exceeds cap")]
    OverCap(BigCount),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("json error in {path}: {source}")]
    Json { path: String, source: serde_json::Error },
}

pub type Result<T> = std::result::Result<T, Error>;
