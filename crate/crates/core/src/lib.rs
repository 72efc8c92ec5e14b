//! Exponential Gauss-Manin systems for one-parameter families of exponential
//! integrals `∫ ω e^{g(t,u)}` over rapid-decay cycles.
//!
//! The pipeline runs from exact symbolics to numerics:
//!
//! * [`symbolic`]: exact polynomial and rational-function arithmetic.
//! * [`cohomology`]: fiberwise twisted de Rham cohomology, the connection
//!   matrix `A(t)` and a scalar ODE from a cyclic vector.
//! * [`singular`]: a certified over-approximation of the singular parameter set.
//! * [`cycles`]: valley sectors, rapid-decay cycle bases, continuous tracking.
//! * [`quadrature`]: adaptive contour quadrature of periods.
//! * [`verify`]: numerical checks of the solution, duality, Stokes and
//!   monodromy properties.
//! * [`cli`]: the command-line front end.

pub mod cli;
pub mod cohomology;
pub mod cycles;
pub mod error;
pub mod pipeline;
pub mod precision;
pub mod quadrature;
pub mod singular;
pub mod symbolic;
pub mod verify;

pub use error::{Error, Result};
