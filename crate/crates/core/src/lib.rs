//! Exact q-series arithmetic for generalized Dedekind eta functions.
//!
//! The crate computes the classical eta function and its character-twisted
//! generalizations `eta_chi`, their logarithmic derivatives as weight-2
//! Eisenstein series, the orders of `eta_chi` at the cusps of `Gamma_0(u^2)`,
//! and decomposes modular functions with cuspidal divisor on `Gamma_0(N)`
//! into (generalized) eta-quotients by exact coefficient matching.
//!
//! Series arithmetic is generic over an exact [`Field`]; the aliases below fix
//! the two coefficient domains used in practice. Numeric evaluation in
//! [`analytic`] is generic over a floating point [`Real`].

pub mod analytic;
pub mod arith;
pub mod characters;
pub mod cusps;
pub mod cyclotomic;
pub mod decompose;
pub mod eisenstein;
pub mod error;
pub mod eta;
pub mod field;
pub mod qseries;
pub mod verify;

pub use characters::DirChar;
pub use cusps::Cusp;
pub use cyclotomic::CycNum;
pub use error::{Error, Result};
pub use eta::{EtaKey, EtaQuotientExpr};
pub use field::{Field, Rational, Real};
pub use qseries::QSeries;

/// Series with coefficients in a cyclotomic field.
pub type CycSeries = QSeries<CycNum>;
/// Series with rational coefficients.
pub type RatSeries = QSeries<Rational>;
/// Complex numbers in double precision, the default numeric type.
pub type Complex64 = num_complex::Complex<f64>;
