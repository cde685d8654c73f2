use thiserror::Error;

/// Errors produced by grid, relation, multiflow, and certification operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {point:?} lies outside the grid bounds on axis {axis}")]
    PointOutOfBounds { point: Vec<f64>, axis: usize },

    #[error("operand set is empty")]
    EmptyOperand,

    #[error("cell index {cell} is out of range for a space with {ncells} cells")]
    InvalidCell { cell: usize, ncells: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),

    #[error("evaluator domain error: {0}")]
    EvaluatorDomain(String),

    #[error("B is not an attractor block for f")]
    NotABlock,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("malformed relation data: {0}")]
    MalformedRelation(String),

    #[error("malformed model table: {0}")]
    MalformedTable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
