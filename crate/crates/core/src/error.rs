use thiserror::Error;

/// Errors raised by the exact-arithmetic and decomposition layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("zeta order {from} does not divide {to}")]
    EmbedOrder { from: u32, to: u32 },

    #[error("division by zero")]
    DivisionByZero,

    #[error("series has a non-unit leading coefficient")]
    NonUnit,

    #[error("leading exponents {0} and {1} differ by a non-integer")]
    IncompatibleExponents(String, String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid character descriptor `{0}`")]
    Descriptor(String),

    #[error("inconsistent character data: {0}")]
    InconsistentCharacter(String),

    #[error("character {0} is not real")]
    NonRealCharacter(String),

    #[error("exponent {0} is not an integer")]
    NonIntegerExponent(String),

    #[error("precision {got} is below the required {need}")]
    PrecisionTooLow { got: usize, need: usize },

    #[error("cusp order {0} is not an integer")]
    NonIntegralOrder(String),

    #[error("numeric tail bound {bound:e} exceeds the requested accuracy (|q| = {q_abs})")]
    TailBound { bound: f64, q_abs: f64 },

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
