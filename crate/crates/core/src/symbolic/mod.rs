//! Exact arithmetic: rationals, polynomials in `t`, rational functions in `t`,
//! Laurent polynomials in `u` over `Q[t]`, and linear algebra over `Q(t)`.

pub mod laurent;
pub mod linalg;
pub mod parse;
pub mod ratfun;
pub mod rational;
pub mod tpoly;

pub use laurent::{poly_arith, ArithOp, LaurentPoly, Var};
pub use linalg::{determinant, kernel, solve_linear_ratfun, RatMatrix};
pub use parse::parse_laurent;
pub use ratfun::RatFun;
pub use rational::{int, rat, Rational};
pub use tpoly::TPoly;
