use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::grid::Rect;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("top resolution {0} must be a power of two no larger than 4096")]
    Resolution(u32),
    #[error("grid bounds {0} must have positive finite extent")]
    Bounds(Rect),
    #[error("point ({0}, {1}) lies outside the grid bounds")]
    OutOfBounds(f64, f64),
    #[error("invalid cell id {0}")]
    InvalidCell(u32),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: vertex id {id} is not below the declared vertex count {n}")]
    VertexOutOfRange { line: usize, id: u64, n: usize },
    #[error("vertex {vertex} has point ({x}, {y}) outside the space bounds")]
    PointOutOfBounds { vertex: usize, x: f64, y: f64 },
    #[error("unknown vertex {0}")]
    UnknownVertex(usize),
    #[error("edge {0} -> {1} already exists")]
    DuplicateEdge(usize, usize),
    #[error("edge {0} -> {1} does not exist")]
    MissingEdge(usize, usize),
    #[error("query rectangle is empty")]
    EmptyRect,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("transitive closure refused: {components} components exceeds the limit of {limit}")]
    ClosureTooLarge { components: usize, limit: usize },
    #[error("degenerate query size {e} x {f} for a {width} x {height} space")]
    DegenerateQuery { e: f64, f: f64, width: f64, height: f64 },
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
