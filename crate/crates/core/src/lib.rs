//! Convergent Wick star products: jets, seminorms, and the Bargmann-Fock
//! representation, at desk scale.

pub mod error;
pub mod fock;
pub mod io;
pub mod jet;
pub mod multiindex;
pub mod scalar;
pub mod series;
pub mod seminorm;
pub mod suite;
pub mod wick;

pub use error::{Error, Result};
pub use multiindex::MultiIndex;
pub use scalar::{ExactComplex, RealScalar, Scalar};
