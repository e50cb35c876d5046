//! Exact-arithmetic characters and semi-infinite cohomology for affine root
//! systems at the critical level.
//!
//! Everything here is computed over arbitrary-precision rationals; there is
//! no floating point anywhere in the library. The main pieces:
//!
//! * [`root_data`]: finite root systems of types A-G from their Cartan
//!   matrices, with the invariant form, positive-root closure, and the
//!   standard distinguished weights.
//! * [`weyl`]: Weyl group enumeration by reduced words, length strata, and
//!   the dot action.
//! * [`charseries`]: sparse truncated character series in the weight lattice
//!   extended by the imaginary direction, plus one-variable q-series.
//! * [`characters`]: Verma, restricted Verma, Wakimoto, and irreducible
//!   characters at the critical level, the chiral Euler characteristic, and
//!   the identities tying them together.
//! * [`genus`]: fiber characters and elliptic genus expansions for flag
//!   bundles, with Euler characteristics of line bundles as the workhorse.
//! * [`brst`]: an explicit truncated BRST complex for affine sl2 at level -2,
//!   its cohomology with exact ranks, and the quotient construction that
//!   realizes the restricted Verma module.
//! * [`cli`]: the command-line driver used by the `critchar` binary.

pub mod brst;
pub mod charseries;
pub mod characters;
pub mod cli;
pub mod genus;
pub mod linalg;
pub mod root_data;
pub mod weyl;

use num_bigint::BigInt;
use num_rational::BigRational;

/// Arbitrary-precision rational scalar used throughout.
pub type Q = BigRational;
/// Arbitrary-precision integer coefficient type for series.
pub type Z = BigInt;

/// Convenience constructor for a rational from an integer.
pub fn q_int(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

/// Convenience constructor for a rational from numerator and denominator.
pub fn q_ratio(n: i64, d: i64) -> Q {
    assert!(d != 0, "zero denominator");
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Errors produced by the library.
///
/// Anything malformed about the request itself (bad Cartan type, weight of
/// the wrong rank, preconditions on the inputs) is an `Input` error and maps
/// to CLI exit code 2. A verification that ran to completion and found a
/// mismatch is reported through result types, not through this enum, with
/// one exception: a differential that fails to square to zero indicates an
/// inconsistent complex and aborts the computation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("differential does not square to zero on block {0}")]
    DifferentialSquare(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
