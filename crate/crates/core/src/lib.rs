//! Robust stability bounds for linear systems with a scalar, rank-1 real
//! parametric uncertainty, with a complete uncertain-c.g. aircraft example.
//!
//! The pipeline is: [`aircraft`] builds the uncertain plant, [`mdelta`] closes
//! the loop and extracts the SISO fixed part `M(s)`, and [`criteria`] turns the
//! sampled locus of `M(jω)` into stability intervals.

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// The example controller gain is 3.14, which is not π.
#![allow(clippy::approx_constant)]

pub mod aircraft;
pub mod analysis;
pub mod criteria;
pub mod error;
pub mod golden;
pub mod lti;
pub mod mdelta;
pub mod model_file;
pub mod numfmt;
pub mod plot;
pub mod poly;
pub mod report;

pub use error::{Error, Result};
