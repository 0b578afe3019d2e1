use thiserror::Error;

/// Crate-wide error type. Variant names follow the per-operation error
/// contracts of the public API.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("graph is disconnected (vertex {0} unreachable from vertex 0)")]
    Disconnected(u32),
    #[error("self-loop at vertex {0}")]
    SelfLoop(u32),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(u32, u32),
    #[error("vertex {0} out of range (n = {1})")]
    VertexOutOfRange(u32, usize),
    #[error("family parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("unparsable family spec: {0}")]
    BadFamilySpec(String),
    #[error("BFS source set is empty")]
    EmptySource,
    #[error("measures have different total mass ({0} vs {1})")]
    MassMismatch(String, String),
    #[error("measure is not a probability measure (total {0})")]
    NotProbability(String),
    #[error("curvature of a pair requires two distinct vertices")]
    SameVertex,
    #[error("graph power {0}^{1} exceeds the vertex guard")]
    PowerTooLarge(usize, u32),
    #[error("cut set is empty")]
    EmptySigma,
    #[error("cut set does not separate: vertices {0} and {1} are adjacent across sides")]
    NonSeparating(u32, u32),
    #[error("decay sequence has no positive range (mu(0) <= 0)")]
    NoPositiveRange,
    #[error("decay sequence empty beyond the cut (T < 1)")]
    EmptyRange,
    #[error("matrix side {0} is absent for this envelope")]
    EmptySide(&'static str),
    #[error("requested {0} eigenvalues of a {1}x{1} system")]
    CountTooLarge(usize, usize),
    #[error("eigenvalue index ({0},{1}) out of range for T+={2}, T-={3}")]
    IndexOutOfRange(usize, usize, i64, i64),
    #[error("enumeration too large: {0}")]
    TooLarge(String),
    #[error("no closed-form optimizer known for family {0}")]
    UnknownFamily(String),
    #[error("graph too large for the dense eigensolver ({0} > {1})")]
    TooLargeForDense(usize, usize),
    #[error("cut fraction alpha = {0} >= 1/4")]
    AlphaTooLarge(String),
    #[error("cut set is not a largest level set (shell {0} has size {1} > {2})")]
    DominanceHypothesisFails(i64, usize, usize),
    #[error("bad sigma spec: {0}")]
    BadSigmaSpec(String),
    #[error("bad rational literal: {0}")]
    BadRational(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad graph file: {0}")]
    BadGraphFile(String),
    #[error("bad envelope file: {0}")]
    BadEnvelopeFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
