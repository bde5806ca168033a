//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("geometry domain error: {0}")]
    Domain(String),

    #[error("point is behind the camera (camera-frame depth {0})")]
    BehindCamera(f64),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("gripper centroid unavailable")]
    GripperLost,

    #[error("target centroid unavailable")]
    TargetLost,

    #[error("replay format version mismatch: found {found:?}, expected {expected:?}")]
    ReplayVersion { found: String, expected: String },

    #[error("replay parse error at line {line}: {message}")]
    ReplayParse { line: usize, message: String },

    #[error("policy error: {0}")]
    Policy(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
