//! Phase-space Bell inequalities for two-dimensional configuration space.
//!
//! The crate covers four connected pieces:
//!
//! * [`grid`]: midpoint tensor grids, quadrature, and the unitary
//!   position/momentum transform everything else is built on.
//! * [`state`]: wavefunctions, their four mixed-representation marginals,
//!   the regularised `Ψ±` family, product densities and Wigner functions.
//! * [`bell`] and [`operator`]: the four-term Bell functional `S`, its
//!   classical bound `|S| ≤ 2`, the atomic counterexample with `S = 4`, the
//!   large-`L` evaluation for `Ψ±`, and the projector algebra behind `P̂`.
//! * [`marginal`]: the explicit family of nonnegative phase-space densities
//!   with three prescribed marginals.

pub mod bell;
pub mod error;
pub mod grid;
pub mod io;
pub mod marginal;
pub mod operator;
pub mod quad;
pub mod state;

pub use error::{Error, Result};
