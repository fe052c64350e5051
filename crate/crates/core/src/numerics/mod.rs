//! Special functions and adaptive quadrature.
//!
//! Everything here is a pure function of its arguments. The quadrature
//! doubles as the independent oracle for the closed forms elsewhere in the
//! crate, so it deliberately shares no code with them.

mod expint;
mod gamma;
mod quadrature;

pub use expint::generalized_exponential_integral;
pub use gamma::{gamma, gamma_term, upper_incomplete_gamma};
pub(crate) use gamma::scaled_upper_gamma;
pub use quadrature::{
    integrate_adaptive, Integrator, QuadratureResult, DEFAULT_MAX_EVALUATIONS, DEFAULT_TOLERANCE,
};
