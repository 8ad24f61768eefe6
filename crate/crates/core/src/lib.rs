//! Exact q-derangement polynomials of types A and B.
//!
//! The crate computes the generating polynomials of the major index over
//! derangements (`d_n(q)`) and of the flag major index over signed
//! derangements (`d_n^B(q)`), their exact means and variances, and a set of
//! numerical diagnostics showing the standardized statistics approach the
//! normal law.
//!
//! Exact quantities use arbitrary-precision integers and rationals; real
//! valued diagnostics use [`Real`], a binary floating-point type whose
//! precision is chosen per call.

pub mod analysis;
pub mod error;
pub mod exact;
pub mod moments;
pub mod permoracle;
pub mod qpoly;
pub mod qseries;
pub mod real;
pub mod report;
pub mod verify;

mod family;

pub use error::{Error, Result};
pub use exact::{Integer, Rational};
pub use family::Family;
pub use qpoly::QPoly;
pub use real::{Precision, Real};
