use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// Validation problems (bad documents, bad parameters) are kept apart from
/// numeric failures so the CLI can map them to distinct exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("edge `{id}` has nonpositive length {length}")]
    NonPositiveLength { id: String, length: f64 },
    #[error("lead record at `{vertex}` has count 0; lead counts must be >= 1")]
    ZeroLeadCount { vertex: String },
    #[error("unknown vertex `{vertex}` referenced by {context}")]
    UnknownVertex { vertex: String, context: String },
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("graph is disconnected: vertex `{vertex}` is unreachable from `{root}`")]
    Disconnected { root: String, vertex: String },
    #[error("graph has no vertices")]
    Empty,
    #[error("unknown catalog graph `{0}`")]
    UnknownCatalog(String),
    #[error("catalog graph `{name}` expects {expected}, got {got} parameter(s)")]
    CatalogArity { name: String, expected: String, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("symbolic expansion limited to {limit} edges, graph has {edges}")]
    SizeGuard { limit: usize, edges: usize },
    #[error("zero of the secular function suspected on the contour near k = {re} + {im}i")]
    BoundaryZero { re: f64, im: f64 },
    #[error("winding number did not settle on an integer (raw value {raw})")]
    NonIntegerWinding { raw: f64 },
    #[error("winding counts are not additive: parent {parent}, children {children}")]
    CountMismatch { parent: i64, children: i64 },
    #[error("k = {re} + {im}i is not a resonance: smallest relative singular value {sigma}")]
    NotAResonance { re: f64, im: f64, sigma: f64 },
    #[error("Newton iteration diverged: {0}")]
    Divergence(String),
    #[error("too few resonances for a fit: {got} < {needed}")]
    TooFewResonances { got: usize, needed: usize },
    #[error("insufficient counts: {0}")]
    InsufficientCounts(String),
    #[error("{0}")]
    Unsupported(String),
}

impl Error {
    /// `true` for failures of the numerics rather than of the input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::BoundaryZero { .. }
                | Error::NonIntegerWinding { .. }
                | Error::CountMismatch { .. }
                | Error::NotAResonance { .. }
                | Error::Divergence(_)
                | Error::TooFewResonances { .. }
                | Error::InsufficientCounts(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
