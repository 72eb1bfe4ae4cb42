//! Exact counting of square-value patterns of multivariate polynomial
//! systems over finite fields of odd characteristic.
//!
//! The crate is organized around five concerns:
//!
//! - [`field`]: deterministic finite-field construction, arithmetic and the
//!   quadratic character;
//! - [`poly`]: sparse multivariate polynomials, gradients and Gram matrices
//!   of quadratic forms;
//! - [`linalg`]: exact rank computation over a field;
//! - [`count`]: exhaustive pattern counting over affine and projective
//!   space, the auxiliary fibered variety, main terms and error-exponent
//!   fitting across field towers;
//! - [`geometry`]: singular-locus probing, independence-condition witnesses
//!   and the external/internal point machinery for smooth conics.

pub mod count;
pub mod field;
pub mod geometry;
pub mod linalg;
pub mod parallel;
pub mod parse;
pub mod poly;

pub use field::{ArithKind, Character, Embedding, FieldElement, FieldError, FieldSpec};
