use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cone contains a line")]
    NotStrictlyConvex,
    #[error("cone is not simplicial")]
    NotSimplicial,
    #[error("projection matrix does not have full row rank")]
    NotSurjective,
    #[error("point lies outside the fan support")]
    OutsideSupport,
    #[error("per-cone data disagree on the shared face of cones {0} and {1}")]
    IncompatibleClass(usize, usize),
    #[error("quadratic form is not positive definite on the cone")]
    NotPositiveDefinite,
    #[error("fan support is not convex")]
    NonConvexSupport,
    #[error("quadratic form vanishes on the segment")]
    OutsideU,
    #[error("fitted polynomial has degree {degree}, above the bound {bound}")]
    DegreeOverflow { degree: usize, bound: usize },
    #[error("need at least {needed} distinct sample degrees, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("twisted q0 is not positive")]
    DegenerateB,
    #[error("totals (R, D) do not match the sequence")]
    InconsistentTotal,
    #[error("pieces {0} and {1} both have rank zero")]
    ZeroRankPair(usize, usize),
    #[error("slopes are not strictly increasing")]
    NotConvex,
    #[error("charge lies outside the upper half plane union the nonpositive reals")]
    OutOfRange,
    #[error("torsion elements {0} and {1} have a non-torsion join")]
    NotATorsionTheory(usize, usize),
    #[error("maximal destabilizer above element {0} is not unique")]
    AmbiguousMaxDestabilizer(usize),
    #[error("invalid lattice: {0}")]
    NotValid(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("polygons have different endpoints")]
    EndpointMismatch,
    #[error("subspaces are not strictly nested")]
    NotNested,
    #[error("weights are not strictly increasing")]
    WeightsNotIncreasing,
    #[error("integer overflow converting an exact value")]
    Overflow,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported export format: {0}")]
    UnsupportedFormat(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
