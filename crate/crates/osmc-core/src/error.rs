use thiserror::Error;

/// Errors surfaced by graph construction, instance validation, bisector
/// extraction, encoding and decoding.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rotation system is not planar: n={n}, m={m}, traced {traced} faces, Euler requires {required}")]
    NonPlanarRotation {
        n: usize,
        m: usize,
        traced: usize,
        required: i64,
    },

    #[error("graph is disconnected: vertex {0} is unreachable from vertex 0")]
    Disconnected(u32),

    #[error("graph is not simple: {0}")]
    NotSimple(String),

    #[error("rotation lists are inconsistent: {0}")]
    InconsistentRotation(String),

    #[error("source face must have at least 3 vertices, got {0}")]
    KTooSmall(usize),

    #[error("S is not the full vertex cycle of a single face: {0}")]
    SNotFullFace(String),

    #[error("terminal {0} is not a vertex of the graph")]
    BadTerminal(u32),

    #[error("pattern mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("cut {index}: the {side} side is disconnected (vertex {vertex} unreachable)")]
    DisconnectedCutSide {
        index: usize,
        side: &'static str,
        vertex: u32,
    },

    #[error("bisector {index} is not a simple dual cycle: {reason}")]
    NotASimpleCycle { index: usize, reason: String },

    #[error("fingerprint collision: vertices {u} and {v} share a fingerprint but their patterns differ")]
    FingerprintCollisionDetected { u: u32, v: u32 },

    #[error("mode precondition failed: {0}")]
    ModePreconditionFailed(String),

    #[error("unknown terminal {0}")]
    UnknownTerminal(u32),

    #[error("encoding is corrupt: {0}")]
    CorruptEncoding(String),

    #[error("k must be even and at least 4, got {0}")]
    OddK(usize),

    #[error("shattering check budget exceeded: {needed} column subsets needed, budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },

    #[error("invariant breach: {0}")]
    InvariantBreach(String),

    #[error("{0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
