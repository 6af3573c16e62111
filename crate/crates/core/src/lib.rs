//! Function-field Dirichlet L-functions to a fixed modulus: exact arithmetic in
//! `F_q[T]`, characters mod `Q`, L-polynomials, prime sums and shifted moments.

pub mod chargroup;
pub mod error;
pub mod ffpoly;
pub mod lfunc;
pub mod moments;
pub mod numeric;
pub mod primesums;

pub use error::{Error, PolyError};
