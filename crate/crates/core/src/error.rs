use thiserror::Error;

use crate::grid::ProcId;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must have at least one row and column")]
    EmptyMatrix,

    #[error("matrix data length {got} does not match {rows}x{cols}")]
    DataLengthMismatch { rows: usize, cols: usize, got: usize },

    #[error("matrix entry at ({row}, {col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("permutation of length {got} is not a bijection on 0..{expected}")]
    InvalidPermutation { expected: usize, got: usize },

    #[error("singular panel at iteration {iteration}, column {column}: all candidate pivots below 1e-300")]
    SingularPanel { iteration: usize, column: usize },

    #[error("processor count {p} does not admit preset {preset}: requires {required}")]
    GridShape {
        p: usize,
        preset: &'static str,
        required: &'static str,
    },

    #[error("grid dimensions must all be at least 1")]
    EmptyGrid,

    #[error("cannot parse grid string {0:?}: expected PXxPYxPZ, e.g. 4x4x1")]
    GridParse(String),

    #[error("processor {0} is not in the current grid")]
    InvalidProc(ProcId),

    #[error("no superstep is open")]
    NoOpenSuperstep,

    #[error("a superstep is already open")]
    SuperstepAlreadyOpen,

    #[error("reduce/broadcast root {0} is not a member of the group")]
    RootNotInGroup(ProcId),

    #[error("superstep {superstep}: total sent {sent} != total received {received}")]
    ConservationViolation {
        superstep: usize,
        sent: u64,
        received: u64,
    },

    #[error("invalid engine configuration: {0}")]
    InvalidConfig(String),

    #[error("iteration t={t} out of range 1..={max}")]
    IterationOutOfRange { t: usize, max: usize },

    #[error("p1={p1} is not a perfect square; the corrected per-step cost requires an integer grid side")]
    NotPerfectSquare { p1: usize },

    #[error("panel width {v} does not divide matrix order {n}")]
    Divisibility { n: usize, v: usize },

    #[error("rho (maximal computational intensity) is required and has no default")]
    MissingRho,

    #[error("exponent fit requires at least 3 points with distinct p, got {0}")]
    TooFewPoints(usize),

    #[error("exponent fit requires positive costs, got {0}")]
    NonPositiveCost(f64),

    #[error("empty report set")]
    EmptyReportSet,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
