//! Sharp upper bounds on `P(S >= x)` for sums of independent random
//! variables bounded above: Bennett–Hoeffding, Pinelis–Utev, Bentkus and the
//! Gaussian-plus-Poisson `P_3` bound, with the positive-part-moment machinery
//! and extremal-distribution oracles used to check them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod distributions;
pub mod error;
pub mod oracle;
mod par;
pub mod posmoments;
pub mod quadrature;
pub mod roots;
pub mod special;
pub mod validation;

pub use error::{Error, Result};
pub use special::Tolerance;
