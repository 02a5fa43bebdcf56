//! Monte Carlo CVA pricing with adjoint first and second order sensitivities to
//! credit and rate parameters, conditional-density weights for default-time
//! discontinuities, and conversion to market-quote sensitivities.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adcore;
pub mod convert;
pub mod credit;
pub mod curves;
pub mod error;
pub mod greeks;
pub mod hullwhite;
pub mod normal;
pub mod payoff;
pub mod rng;

pub use error::{Error, Result};
