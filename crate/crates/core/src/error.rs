use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("hierarchy has multiple roots: {0:?} and {1:?}")]
    MultipleRoots(String, String),
    #[error("hierarchy has no root (every row names a parent)")]
    NoRoot,
    #[error("unknown parent {parent:?} for node {child:?}")]
    UnknownParent { child: String, parent: String },
    #[error("duplicate node name {0:?}")]
    DuplicateName(String),
    #[error("cycle detected: node {0:?} is not reachable from the root")]
    Cycle(String),
    #[error("internal node {0:?} has a single child; unary chains are disabled")]
    UnaryChain(String),
    #[error("node index {index} out of range for {num_nodes} nodes")]
    NodeOutOfRange { index: usize, num_nodes: usize },
    #[error("label {label} out of range for {num_nodes} nodes")]
    LabelOutOfRange { label: usize, num_nodes: usize },
    #[error("dimension mismatch: expected {expected} values, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("likelihood at node {node} is below its children's sum by {violation:e}")]
    InvalidDistribution { node: usize, violation: f64 },
    #[error("likelihood {value} at index {index} is outside [0, 1]")]
    OutOfUnitRange { index: usize, value: f64 },
    #[error("recall is undefined for a root-labeled example")]
    RecallOfRoot,
    #[error("information threshold {zeta} exceeds the maximum information {max}")]
    InfoThresholdUnattainable { zeta: f64, max: f64 },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("curves are not merge-compatible: {0}")]
    IncompatibleCurves(String),
    #[error("no node of the sub-hierarchy lies on the ancestor path of node {0}")]
    NoSharedAncestor(usize),
    #[error("invalid hyper-parameter: {0}")]
    InvalidHyperParameter(String),
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("non-finite loss in batch {batch_index}")]
    NanLoss { batch_index: usize },
    #[error("unknown {kind} {name:?}; valid options: {options}")]
    UnknownName {
        kind: &'static str,
        name: String,
        options: &'static str,
    },
}

impl Error {
    /// True for failures caused by non-finite arithmetic rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NonFinite(_) | Error::NanLoss { .. })
    }
}
