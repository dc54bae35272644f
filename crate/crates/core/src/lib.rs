//! Exact box-spline calculus on integer lattices.
//!
//! The crate evaluates box splines, multiple Bernoulli periodic
//! polynomials and semi-discrete convolutions with exact rational (and
//! cyclotomic) arithmetic, and checks the difference formula between
//! semi-discrete and continuous convolution pointwise at affine-regular
//! points.

pub mod arrangement;
pub mod bernoulli;
pub mod boxspline;
pub mod cyclo;
pub mod dm;
pub mod error;
pub mod exact;
pub mod identity;
pub mod poly;

pub use arrangement::{Arrangement, Configuration};
pub use error::{Error, Result};
pub use exact::{Int, Rat};
