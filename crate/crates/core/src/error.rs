use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate bounds on axis {axis}: min {min} >= max {max}")]
    DegenerateBounds { axis: usize, min: f64, max: f64 },
    #[error("non-finite input: {0}")]
    NonFiniteInput(&'static str),
    #[error("viewpoint coordinate {axis} = {value} is not strictly inside ({min}, {max})")]
    OutOfBounds {
        axis: usize,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("mixture weight {index} = {weight} below floor {floor}")]
    DegenerateWeight { index: usize, weight: f64, floor: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Image(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;
