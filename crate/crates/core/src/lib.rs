//! Tail-risk estimation for heavy-tailed losses with a remote but finite
//! upper bound.
//!
//! Observations `y` on `[L, H]` are mapped through the smooth log transform
//! [`dual::DualTransform`] onto an unbounded dual variable, a generalized
//! Pareto tail is fitted to the dual excesses, and the fit is mapped back
//! to closed-form risk measures on the bounded scale: the shadow mean,
//! VaR and expected shortfall.

pub mod error;
pub mod numerics;

pub use error::{Error, Result};
pub mod dual;
pub mod optim;
pub mod par;
pub mod gpd;
pub mod shadow;
pub mod compare;
pub mod simulate;
