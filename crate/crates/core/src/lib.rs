//! Numerical analysis of the Lengyel-Epstein planar cubic family
//!
//! ```text
//! x' = (a - x)(1 + x^2) - 4xy,    y' = b x (1 + x^2 - y),    a, b > 0
//! ```
//!
//! Modules follow the analysis: [`model`] holds the closed-form layer,
//! [`integrate`] the orbits, [`infinity`] the compactification and blow-up,
//! [`hopf`] the Hopf and Bautin data along the Hopf curve and [`cycles`] the
//! return-map based limit-cycle counting. [`verify`] bundles the numerical
//! checks into reproducible suites.

// Guards such as `!(x > 0.0)` deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cycles;
pub mod error;
pub mod hopf;
pub mod infinity;
pub mod integrate;
pub mod jet;
pub mod model;
pub mod ode;
mod par;
pub mod verify;

pub use error::{Error, Result};
pub use model::{Params, State};
