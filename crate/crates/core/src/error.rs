use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported spin quantum number {0}; only 1/2 and 1 are available")]
    UnsupportedSpin(f64),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("operator is not Hermitian (deviation {deviation:.3e} > {tolerance:.1e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("generator has no eigenvalue within {tolerance:.1e} of zero (closest {closest:.3e})")]
    DegenerateGenerator { closest: f64, tolerance: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("at grid point {index} ({value}): {source}")]
    AtGridPoint {
        index: usize,
        value: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_point(self, index: usize, value: f64) -> Self {
        Error::AtGridPoint { index, value, source: Box::new(self) }
    }

    /// The innermost error, skipping grid-point annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtGridPoint { source, .. } => source.root(),
            e => e,
        }
    }
}
