use thiserror::Error;

/// Vertex indices in messages are 1-based, matching every file format.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range 1..={p}")]
    VertexOutOfRange { vertex: usize, p: usize },

    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),

    #[error("multidirected edge needs at least two distinct vertices, got {0:?}")]
    DegenerateEdge(Vec<usize>),

    #[error("vertex {0} repeated in tuple")]
    RepeatedVertex(usize),

    #[error("tuple must contain at least two vertices, got {0}")]
    TupleTooShort(usize),

    #[error("graph contains a directed cycle")]
    Cyclic,

    #[error("bow between {parent} and {child}: directed edge and shared multidirected edge")]
    Bow { parent: usize, child: usize },

    #[error("cumulant order {order} unsupported (supported: 1..={max})")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("moment for index {0:?} is missing")]
    MissingMoment(Vec<usize>),

    #[error("{law} has no finite cumulant of order {order}")]
    UnknownCumulant { law: String, order: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("row {0} has zero variance")]
    ZeroVariance(usize),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("hidden vertex {0} has an observed parent")]
    HiddenWithObservedParent(usize),

    #[error("edge count {edges} out of range 0..={max}")]
    EdgeCountOutOfRange { edges: usize, max: usize },

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error beneath any added context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}
