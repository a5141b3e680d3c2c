//! B-spline approximation with error-bounded free knot placement, plus a
//! coefficient-space pipeline for function-on-function regression.
//!
//! The crate is organised around a small set of ideas:
//!
//! * [`bspline`]: open knot sequences, basis evaluation, design matrices and
//!   least-squares coefficient fitting.
//! * [`placement`]: derivative envelopes estimated by forward divided
//!   differences, and knot construction: the iterative local placement scan
//!   that keeps every knot span below a local error bound, and the
//!   equidistant baseline.
//! * [`metrics`]: approximation and prediction error measures (maximum
//!   absolute error, RMSE, GCV with a brute-force leave-one-out oracle, and
//!   the MSPE family).
//! * [`m2p`]: the mapping-to-parameter pipeline: represent input and output
//!   function sets on shared bases, learn the coefficient-to-coefficient map
//!   with a ridge or feedforward learner, and map predictions back to curves.
//! * [`io`]: wide-CSV dataset ingestion, JSON model documents, and
//!   plot-ready report emission.
//! * [`synthetic`]: deterministic test signals (polynomials, chirp,
//!   plateau-spike) used by the verification suites and examples.
//!
//! Everything is `f64`, immutable after construction, and deterministic.

// Indexed loops stay: this is numerical code where they read clearer.
#![allow(clippy::needless_range_loop)]

pub mod bspline;
pub mod io;
pub mod m2p;
pub mod metrics;
pub mod placement;
pub mod synthetic;

mod error;
mod linalg;

pub use error::{Error, ErrorClass};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
