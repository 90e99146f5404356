// `!(x > 0.0)` is used on purpose to reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod conic;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod model;
pub mod solver_closed;
pub mod solver_mm;
pub mod solver_sdr;

pub use error::{Error, Result};
