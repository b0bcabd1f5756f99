pub mod algebra;
pub mod cli;
pub mod coherent;
pub mod error;
pub mod groupoid;
pub mod multiindex;
pub mod poisson;
pub mod report;
pub mod sampling;
pub mod starprod;

pub use error::{Error, Result};

/// Exact rational coefficients used throughout.
pub type Rational = num_rational::BigRational;
