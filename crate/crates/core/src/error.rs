use thiserror::Error;

/// Errors raised by contract violations anywhere in the crate.
///
/// Every variant has a stable machine-readable [`Error::code`] used by the CLI.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid language: {0}")]
    InvalidLanguage(String),
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("element set does not contain the interpretation of constant `{0}`")]
    MissingConstant(String),
    #[error("map is not injective: {0}")]
    NotInjective(String),
    #[error("structures are over different languages")]
    LanguageMismatch,
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("element {element} out of range for domain of size {n}")]
    OutOfRange { element: usize, n: usize },
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("invalid template: {0}")]
    InvalidTemplate(String),
    #[error("class {0} is marked infinite but contains a constant")]
    ConstantInInfiniteClass(usize),
    #[error("template is degenerate: {0}")]
    DegenerateTemplate(String),
    #[error("count {omega} is not divisible by |Aut*| = {aut} at n = {n}")]
    NonIntegralCount { n: usize, omega: String, aut: usize },
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("closed-form fit failed: {0}")]
    FitFailed(String),
    #[error("templates mix finite and infinite class sizes: {0}")]
    MixedSizes(String),
    #[error("invalid split: {0}")]
    BadSplit(String),
    #[error("too few rows: need at least {needed}, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("property is not hereditary: {0}")]
    NotHereditary(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("insufficient components: {0}")]
    InsufficientComponents(String),
    #[error("empty vertex set")]
    EmptyVertexSet,
    #[error("invalid hypergraph: {0}")]
    InvalidHypergraph(String),
    #[error("density {0} is not realizable by a strictly balanced hypergraph")]
    InfeasibleDensity(String),
    #[error("search budget exceeded: {0}")]
    SearchBudgetExceeded(String),
    #[error("too small: {0}")]
    TooSmall(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("sample budget exceeded after {attempts} attempts ({detail})")]
    SampleBudgetExceeded { attempts: usize, detail: String },
    #[error("estimator failed: {0}")]
    EstimatorFailed(String),
    #[error("unknown corpus kind `{0}`")]
    UnknownKind(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidLanguage(_) => "InvalidLanguage",
            Error::InvalidStructure(_) => "InvalidStructure",
            Error::MissingConstant(_) => "MissingConstant",
            Error::NotInjective(_) => "NotInjective",
            Error::LanguageMismatch => "LanguageMismatch",
            Error::ArityMismatch(_) => "ArityMismatch",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::UnknownRelation(_) => "UnknownRelation",
            Error::InvalidTemplate(_) => "InvalidTemplate",
            Error::ConstantInInfiniteClass(_) => "ConstantInInfiniteClass",
            Error::DegenerateTemplate(_) => "DegenerateTemplate",
            Error::NonIntegralCount { .. } => "NonIntegralCount",
            Error::BudgetExceeded(_) => "BudgetExceeded",
            Error::FitFailed(_) => "FitFailed",
            Error::MixedSizes(_) => "MixedSizes",
            Error::BadSplit(_) => "BadSplit",
            Error::TooFewRows { .. } => "TooFewRows",
            Error::NotHereditary(_) => "NotHereditary",
            Error::Unsupported(_) => "Unsupported",
            Error::InsufficientComponents(_) => "InsufficientComponents",
            Error::EmptyVertexSet => "EmptyVertexSet",
            Error::InvalidHypergraph(_) => "InvalidHypergraph",
            Error::InfeasibleDensity(_) => "InfeasibleDensity",
            Error::SearchBudgetExceeded(_) => "SearchBudgetExceeded",
            Error::TooSmall(_) => "TooSmall",
            Error::Precondition(_) => "Precondition",
            Error::SampleBudgetExceeded { .. } => "SampleBudgetExceeded",
            Error::EstimatorFailed(_) => "EstimatorFailed",
            Error::UnknownKind(_) => "UnknownKind",
            Error::Parse(_) => "Parse",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
