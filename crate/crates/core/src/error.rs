use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph has no vertices")]
    Empty,
    #[error("invalid edge ({u}, {v}): {reason}")]
    InvalidEdge {
        u: usize,
        v: usize,
        reason: &'static str,
    },
    #[error("graph is disconnected: {reached} of {vertex_count} vertices reachable from 0")]
    Disconnected { reached: usize, vertex_count: usize },
    #[error("function has {got} values, graph has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },
    #[error("inconsistent labels: {0}")]
    BadLabels(String),
}

/// Document parse failure with the offending location.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub message: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub field: Option<String>,
}

impl ParseError {
    pub fn from_json(e: serde_json::Error) -> Self {
        Self {
            message: e.to_string(),
            line: Some(e.line()),
            column: Some(e.column()),
            field: None,
        }
    }

    pub fn field(field: &str, message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            line: None,
            column: None,
            field: Some(field.to_owned()),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error")?;
        if let Some(field) = &self.field {
            write!(f, " in field `{field}`")?;
        }
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, " at line {l} column {c}")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DescError {
    #[error("invalid description: {0}")]
    InvalidDesc(String),
    #[error("volume {volume} exceeds the size cap {cap}")]
    SizeCap { volume: u128, cap: u128 },
    #[error("graph carries no array labels")]
    UnlabeledGraph,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("function is identically zero")]
    ZeroFunction,
    #[error("{n} vertices exceeds the dense limit {limit}")]
    SizeCap { n: usize, limit: usize },
    #[error("no convergence after {iterations} iterations (best residual {best_residual:e})")]
    NoConvergence {
        iterations: usize,
        best_residual: f64,
    },
    #[error("degenerate basis: {0}")]
    DegenerateBasis(String),
    #[error("graph must have at least two vertices")]
    TooSmall,
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("graph is not a labeled array of circles")]
    NotAnArray,
    #[error("graph is not a labeled generalized array of circles")]
    NotGeneralized,
    #[error("the two functions have overlapping supports")]
    OverlappingSupports,
    #[error("function is identically zero")]
    ZeroFunction,
    #[error("function is not zero-mean (sum {0:e})")]
    NotZeroMean(f64),
    #[error("subspaces do not decompose the zero-mean functions: {0}")]
    NotADecomposition(String),
    #[error("kept arc of length {0} cannot become a simple circle")]
    DegenerateCircle(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Desc(#[from] DescError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("bad letter {0:?}; expected one of a, A, b, B")]
    BadLetter(char),
    #[error("bad window: {0}")]
    BadWindow(String),
    #[error("word has empty cyclic core")]
    TorsionLike,
    #[error("invalid walk configuration: {0}")]
    BadConfig(String),
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{}: {source}", path.display())]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Desc(#[from] DescError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Walk(#[from] WalkError),
}

impl ExperimentError {
    /// Process exit code for this error class. Code 1 is reserved for
    /// failed row-level assertions.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) | ExperimentError::Parse(_) => 2,
            ExperimentError::Io { .. } => 3,
            ExperimentError::Desc(_) | ExperimentError::Graph(_) => 4,
            ExperimentError::Spectral(_) => 5,
            ExperimentError::Bounds(_) => 6,
            ExperimentError::Walk(_) => 7,
        }
    }
}
