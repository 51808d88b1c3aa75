use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unsupported degree {0}: the torsion in Pic U of this surface makes the quotient by K non-free")]
    UnsupportedDegree(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("not a root: r.r = {self_pairing}, r.K = {canonical_pairing}")]
    NotARoot {
        self_pairing: i64,
        canonical_pairing: i64,
    },

    #[error("matrix is not an isometry fixing K")]
    NotAnIsometry,

    #[error("group enumeration exceeded budget of {budget} elements ({reached} reached)")]
    BudgetExceeded { budget: usize, reached: usize },

    #[error("orbit exceeded safety cap of {0} elements")]
    OrbitTooLarge(usize),

    #[error("canonical class is not primitive")]
    CanonicalNotPrimitive,

    #[error("all pairings with K vanish on the sublattice")]
    DegenerateSublattice,

    #[error("group of order {order} exceeds the {tier} tier limit of {limit}")]
    TierExceeded {
        tier: String,
        order: usize,
        limit: usize,
    },

    #[error("group elements were not enumerated")]
    NotEnumerated,

    #[error("invalid element index {0}")]
    InvalidIndex(usize),

    #[error("subgroups belong to different parent groups")]
    ParentMismatch,

    #[error("action matrix is not invertible over Z")]
    NotUnimodular,

    #[error("module map does not commute with the group action")]
    NotEquivariant,

    #[error("group of order {0} is too large for the cocycle oracle")]
    OracleTooLarge(usize),

    #[error("could not draw {wanted} subgroups within the retry budget ({drawn} drawn)")]
    SamplingExhausted { wanted: usize, drawn: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
