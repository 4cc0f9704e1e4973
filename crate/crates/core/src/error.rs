use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not a prime in [2, 2^31)")]
    InvalidModulus(u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u32, u32),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("invalid dimension {0}")]
    InvalidDimension(usize),
    #[error("target does not lie in the span of the basis")]
    NotInSpan,
    #[error("span construction admitted more than {0} elements")]
    SpanOverflow(usize),
    #[error("generators commute")]
    CommutingGenerators,
    #[error("commutation system has only the trivial solution")]
    EmptySolutionSpace,
    #[error("no invertible combination found after {0} draws")]
    NoInvertibleCombination(u32),
    #[error("instance generation exhausted after {0} rejections")]
    GenerationExhausted(u32),
    #[error("invalid instance spec: {0}")]
    InvalidSpec(String),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
