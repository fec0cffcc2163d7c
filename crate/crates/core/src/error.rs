use thiserror::Error;

pub type Result<T, E = PuError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PuError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is singular to working precision")]
    SingularMatrix,

    #[error("parameter outside the domain of this operation: {0}")]
    ParameterDomain(String),

    #[error("recursion breaks down: J2^-1 J1 S is not symmetric (asymmetry {asymmetry:e})")]
    RecursionBreakdown { asymmetry: f64 },

    #[error("degenerate combination: {0}")]
    DegenerateCombination(String),

    #[error("decomposition undefined: {0}")]
    DecompositionUndefined(String),

    #[error("invalid regime: {0}")]
    InvalidRegime(String),

    #[error("transformation cannot be constructed: {0}")]
    Construction(String),

    #[error("complex branch: {0}")]
    ComplexBranch(String),

    #[error("transformation is not invertible: {0}")]
    NonInvertibleTransform(String),

    #[error("degenerate Legendre transform: {0}")]
    DegenerateLegendre(String),

    #[error("no flow-preserving Poisson structure: {0}")]
    SingularStructure(String),

    #[error("integration diverged at t = {t}")]
    Divergence { t: f64 },

    #[error("inconclusive test: {0}")]
    Inconclusive(String),
}
