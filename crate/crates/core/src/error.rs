use crate::geometry::GeometryError;

#[derive(Debug, thiserror::Error)]
pub enum StitError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("cell count exceeded the configured limit of {0}")]
    CellLimit(usize),
    #[error("split failed {0} times in a row")]
    ResampleLimit(u32),
    #[error("no facet qualifies for the sample")]
    EmptySample,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = StitError> = std::result::Result<T, E>;
