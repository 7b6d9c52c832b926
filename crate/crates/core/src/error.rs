use thiserror::Error;

/// Errors raised by the series engine and everything built on it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("profile mismatch: {0}")]
    ProfileMismatch(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("term {term} exceeds the truncation profile ({limit})")]
    TermExceedsTruncation { term: String, limit: String },

    #[error("duplicate monomial key {0}")]
    DuplicateMonomial(String),

    #[error("non-canonical dx subset {0:?}: indices must be strictly increasing and < n")]
    NonCanonicalForm(Vec<usize>),

    #[error("x-jet order exhausted: cannot differentiate a series valid only through x-degree 0")]
    XOrderExhausted,

    #[error("series is not divisible by nu: term {0} has nu-exponent 0")]
    NotDivisibleByNu(String),

    #[error("inadmissible substitution: {0}")]
    InadmissibleSubstitution(String),

    #[error("fiber system is not the identity at linear order: {0}")]
    NonIdentityLinearPart(String),

    #[error("form part not allowed here: {0}")]
    FormPartNotAllowed(String),

    #[error("constant term of omega^{{jk}} is singular")]
    SingularOmega,

    #[error("{context}: {message}")]
    Parse { context: String, message: String },

    #[error("chart failed validation: {0}")]
    Validation(String),

    #[error("nu-order {requested} is not certified (certified through {certified})")]
    UncertifiedOrder { requested: u32, certified: u32 },

    #[error("naturality violated: nu-order {order} has a coefficient of differential order {diff_order}")]
    NaturalityViolated { order: u32, diff_order: u32 },

    #[error("probe budget insufficient: {0}")]
    ProbeBudget(String),

    #[error("operator reconstruction failed held-out verification: {0}")]
    HeldOutMismatch(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
