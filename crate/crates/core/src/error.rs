use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Clausius-Mossotti denominator |eps + 2| = {0:e} is degenerate")]
    DegenerateDenominator(f64),

    #[error("coincident points: the full Green's tensor diverges at r = 0")]
    CoincidentPoints,

    #[error("invalid separation r = {0:e} m")]
    InvalidSeparation(f64),

    #[error("{what} did not converge within {terms} terms")]
    NonConvergent { what: &'static str, terms: usize },

    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    #[error("phase fit failure: {0}")]
    FitFailure(String),

    #[error("no interior minimum in the sampled curve")]
    EmptyResult,

    #[error("grid spans {decades:.2} decades, at least {required} required")]
    InsufficientSpan { decades: f64, required: f64 },

    #[error("at r = {r:e} m: {source}")]
    AtGridPoint {
        r: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn at(self, r: f64) -> Self {
        match self {
            e @ Error::AtGridPoint { .. } => e,
            e => Error::AtGridPoint {
                r,
                source: Box::new(e),
            },
        }
    }

    /// True for errors caused by bad inputs rather than numerical trouble.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::InvalidInput(_)
            | Error::InvalidSeparation(_)
            | Error::CoincidentPoints
            | Error::InsufficientSpan { .. } => true,
            Error::AtGridPoint { source, .. } => source.is_input_error(),
            _ => false,
        }
    }
}
