use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed geometry: {0}")]
    MalformedGeometry(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid code {index}: codebook holds {size} entries")]
    InvalidCode { index: usize, size: usize },

    #[error("graph has no faces")]
    EmptyGraph,

    #[error("faces unreachable from the start level: {orphans:?}")]
    Disconnected { orphans: Vec<usize> },

    #[error("reference window at level {level} holds {population} faces (limit {limit})")]
    WindowCapacity {
        level: usize,
        population: usize,
        limit: usize,
    },

    #[error("token {position}: reference T{tag} outside window of {visible} visible faces")]
    DanglingReference {
        position: usize,
        tag: usize,
        visible: usize,
    },

    #[error("token {position}: unassigned reference is only allowed in autocomplete mode")]
    UnassignedReference { position: usize },

    #[error("token {position}: expected {expected}, found {found}")]
    Parse {
        position: usize,
        expected: String,
        found: String,
    },

    #[error("token {position}: stream ended, expected {expected}")]
    UnexpectedEnd { position: usize, expected: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("generator error: {0}")]
    Generator(String),

    #[error("solid exceeds limits: {faces} faces / {edges} edges (max {max_faces} / {max_edges})")]
    TooLarge {
        faces: usize,
        edges: usize,
        max_faces: usize,
        max_edges: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Token position carried by stream-level errors.
    pub fn position(&self) -> Option<usize> {
        match self {
            Error::DanglingReference { position, .. }
            | Error::UnassignedReference { position }
            | Error::Parse { position, .. }
            | Error::UnexpectedEnd { position, .. } => Some(*position),
            _ => None,
        }
    }

    /// True for errors raised while reading token streams or interchange files.
    pub fn is_format_error(&self) -> bool {
        matches!(
            self,
            Error::DanglingReference { .. }
                | Error::UnassignedReference { .. }
                | Error::Parse { .. }
                | Error::UnexpectedEnd { .. }
                | Error::Format(_)
                | Error::Json(_)
                | Error::InvalidCode { .. }
                | Error::MalformedGeometry(_)
        )
    }
}
