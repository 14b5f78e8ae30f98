use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library reports. Variants are grouped by the subsystem that raises them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not in SL(2,C): |det - 1| = {deviation:.3e}")]
    MalformedMatrix { deviation: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("element is not loxodromic ({0})")]
    NotLoxodromic(String),
    #[error("horoballs share an ideal point")]
    SameIdealPoint,

    #[error("invalid boundary data: {0}")]
    InvalidBoundaryData(String),
    #[error("incompatible handle traces: {0}")]
    IncompatibleTraces(String),
    #[error("group is not twist-normalized: separating curve axis off the imaginary axis by {0:.3e}")]
    NotTwistNormalized(f64),
    #[error("surface with euler characteristic {0} is not hyperbolic")]
    NotHyperbolic(i64),
    #[error("group carries no hyper-elliptic involution data")]
    NotSymmetricForm,
    #[error("invalid word: {0}")]
    InvalidWord(String),

    #[error("orbit ball exceeded the element budget of {budget}")]
    CutoffTooLarge { budget: usize },
    #[error("length {requested} lies beyond the spectrum cutoff {cutoff}")]
    BeyondCutoff { requested: f64, cutoff: f64 },
    #[error("zeta factor vanishes at length {length} (|1 - exp(-z l)| = {modulus:.3e})")]
    PoleProximity { length: f64, modulus: f64 },

    #[error("argument outside the domain: {0}")]
    DomainError(String),
    #[error("no crossover found below L = {0}")]
    SearchExhausted(f64),
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("word is not parabolic")]
    NotParabolic,
    #[error("horoball diagram search exhausted its budget of {0} cosets")]
    BudgetExhausted(usize),
    #[error("diagram is possibly incomplete (built with a truncated search)")]
    PossiblyIncompleteDiagram,
    #[error("rotation order {0} is not crystallographic (expected 2, 3, 4 or 6)")]
    InvalidOrder(u32),
    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),

    #[error("degenerate cusp lattice (area {0:.3e})")]
    DegenerateLattice(f64),
    #[error("input must be sorted in descending order")]
    UnsortedInput,

    #[error("integer growth exceeded {0} bits")]
    OverflowGuard(u64),
    #[error("invalid slope {0}/{1}")]
    InvalidSlope(String, String),
    #[error("mapping class must have determinant 1, got {0}")]
    NotUnimodular(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("document error: {0}")]
    Document(String),
}

impl Error {
    /// Stable machine-readable tag, used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MalformedMatrix { .. } => "MalformedMatrix",
            Error::NonFinite(_) => "NonFinite",
            Error::NotLoxodromic(_) => "NotLoxodromic",
            Error::SameIdealPoint => "SameIdealPoint",
            Error::InvalidBoundaryData(_) => "InvalidBoundaryData",
            Error::IncompatibleTraces(_) => "IncompatibleTraces",
            Error::NotTwistNormalized(_) => "NotTwistNormalized",
            Error::NotHyperbolic(_) => "NotHyperbolic",
            Error::NotSymmetricForm => "NotSymmetricForm",
            Error::InvalidWord(_) => "InvalidWord",
            Error::CutoffTooLarge { .. } => "CutoffTooLarge",
            Error::BeyondCutoff { .. } => "BeyondCutoff",
            Error::PoleProximity { .. } => "PoleProximity",
            Error::DomainError(_) => "DomainError",
            Error::SearchExhausted(_) => "SearchExhausted",
            Error::InsufficientData(_) => "InsufficientData",
            Error::NotParabolic => "NotParabolic",
            Error::BudgetExhausted(_) => "BudgetExhausted",
            Error::PossiblyIncompleteDiagram => "PossiblyIncompleteDiagram",
            Error::InvalidOrder(_) => "InvalidOrder",
            Error::InvalidDiagram(_) => "InvalidDiagram",
            Error::DegenerateLattice(_) => "DegenerateLattice",
            Error::UnsortedInput => "UnsortedInput",
            Error::OverflowGuard(_) => "OverflowGuard",
            Error::InvalidSlope(..) => "InvalidSlope",
            Error::NotUnimodular(_) => "NotUnimodular",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Document(_) => "Document",
        }
    }

    /// True for failures caused by a search budget rather than bad input.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::CutoffTooLarge { .. } | Error::BudgetExhausted(_) | Error::OverflowGuard(_)
        )
    }
}
