use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("schema violation in `{field}`: {reason}")]
    Schema { field: String, reason: String },

    #[error("dependency cycle through task {0}")]
    DependencyCycle(usize),

    #[error("unknown task {0}")]
    UnknownTask(usize),

    #[error("instance has no tasks")]
    EmptyTaskSet,

    #[error("brute force refused: {tasks} tasks exceeds the limit of {limit}")]
    OracleTooLarge { tasks: usize, limit: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
