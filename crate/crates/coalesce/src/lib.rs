//! Numerical and asymptotic tools for exponentially small waves generated by
//! a forced nonlinear ODE whose forcing has single, separated or coalescing
//! singularities.

pub mod amplitude;
pub mod error;
pub mod forcing;
pub mod gamma;
pub mod harness;
pub mod ode;
pub mod quadrature;
pub mod recurrence;
pub mod rk;
pub mod scaled;
pub mod singulant;

pub use error::{Error, Result};
pub use forcing::{CPoint, ForcingSpec, Sigma};
