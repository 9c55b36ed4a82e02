// NaN-rejecting guards are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod characterization;
pub mod convolution;
pub mod entropy;
pub mod error;
pub mod levy;
pub mod measures;
pub mod params;
pub mod quad;
pub mod series;
pub mod transforms;

pub use error::{FgigError, Result};
