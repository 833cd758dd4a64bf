//! Worst-case analysis of gradient descent with exact line search.
//!
//! The crate is organised around the pipeline used to obtain and check
//! tight convergence rates on the class of smooth strongly convex functions:
//!
//! * [`fclass`] models the function class, its interpolation conditions and
//!   the closed-form rates.
//! * [`quadsim`] simulates gradient methods on diagonal quadratics and builds
//!   the tight worst-case instances.
//! * [`pep`] compiles a performance-estimation problem into a block SDP and
//!   maps dual values back to named multipliers.
//! * [`sdp`] is a dense primal-dual interior-point SDP solver together with
//!   an SDPA sparse reader/writer.
//! * [`certify`] verifies the closed-form proof certificates in exact
//!   rational arithmetic.

// index loops mirror the matrix formulas; `!(a < b)` also rejects NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod error;
pub mod fclass;
pub mod pep;
pub mod quadsim;
pub mod rational;
pub mod sdp;

pub use error::{Error, Result};
pub use fclass::{ClassParams, LabeledPoint};
