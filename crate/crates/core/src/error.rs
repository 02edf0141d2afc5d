use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameters must be positive and finite, got a={a}, b={b}")]
    InvalidParams { a: f64, b: f64 },

    #[error("state must be finite, got ({x}, {y})")]
    NonFiniteState { x: f64, y: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("a={a} is not on the Hopf curve (requires a > 5*sqrt(5/3))")]
    NotOnHopfCurve { a: f64 },

    #[error("no escape witness among {tried} candidate initial conditions")]
    NoWitness { tried: usize },

    #[error("equilibrium is fully degenerate (both eigenvalues vanish)")]
    FullyDegenerate,

    #[error("linearization is not semi-hyperbolic (no zero eigenvalue)")]
    NotSemiHyperbolic,

    #[error("no nonzero center-manifold coefficient through order {order}")]
    SeriesOrderExceeded { order: usize },

    #[error("no return to the section: {0:?}")]
    NoReturn(crate::cycles::NoReturnReason),

    #[error("failed to bracket the semistable cycle curve at a={a}: {detail}")]
    BracketFailure { a: f64, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
