//! Exact verification toolkit for finite-dimensional diffeological vector
//! spaces whose diffeology is generated by finitely many plots.

pub mod error;
pub mod expr;
pub mod franklin;
pub mod linalg;
pub mod numbers;
pub mod constraints;
pub mod decompose;
pub mod diffeology;
pub mod gallery;

pub use error::{Error, Result};
pub use diffeology::{DVSpace, LinearMap, Subspace};
pub use expr::{ClassifyContext, Expr};
pub use franklin::{FranklinMap, Grid};
pub use numbers::{QSqrt2, Rational};
