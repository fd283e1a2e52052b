use alloc::string::String;

/// Errors surfaced by the engine's construction and training operations.
///
/// Dimension and domain violations are reported eagerly with enough context
/// to name the offending shapes or values; callers decide whether to abort
/// or reconfigure.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{op}: dimension mismatch, left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    DimensionMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("invalid CSR structure: {0}")]
    InvalidCsr(String),

    #[error("length mismatch in {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{op} requires a binary matrix (all stored values 1.0)")]
    NonBinaryMatrix { op: &'static str },

    #[error("negative degree {value} at index {index}")]
    NegativeDegree { index: usize, value: f64 },

    #[error("interaction log is empty")]
    EmptyLog,

    #[error("core item count {requested} out of range [1, {n_items}]")]
    CoreItemCountOutOfRange { requested: usize, n_items: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("reduction left no users above the interaction threshold; increase core_item_count or lower min_user_interactions")]
    EmptyReduction,

    #[error("weight {value} outside the quantizable domain (0, 1]")]
    WeightOutOfDomain { value: f64 },

    #[error("{kind} index {index} out of range (bound {bound})")]
    IndexOutOfRange {
        kind: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("cannot combine an empty layer list")]
    EmptyLayerList,

    #[error("user {user} interacts with every item; no negative sample exists")]
    UserExhaustsItems { user: usize },

    #[error("non-finite gradient entry in {block} at ({row}, {col})")]
    NonFiniteGradient {
        block: &'static str,
        row: usize,
        col: usize,
    },

    #[error("relevant set is empty; filter such users before computing metrics")]
    EmptyRelevantSet,

    #[error("no user has test interactions to evaluate")]
    NoTestUsers,
}

pub type Result<T> = core::result::Result<T, Error>;
