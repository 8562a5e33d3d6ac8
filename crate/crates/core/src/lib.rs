//! Aircraft conflict resolution by heading deviations.
//!
//! Every aircraft flies a straight line from its initial position and may
//! turn by a bounded angle `theta_k` at `t = 0`. The problem is to minimise
//! `sum(theta_k^2)` so that every pair stays at least `d` apart for all
//! future times. The crate provides:
//!
//! - [`geometry`]: closest approach and the separation condition for a pair.
//! - [`terms`]: the decomposition of the separation condition into functions
//!   of one angle each, their exact ranges over intervals, and BigM bounds.
//! - [`model`]: algebraic models (original and separable) with AMPL and JSON
//!   export.
//! - [`instance`]: circle and randomised circle instance generators.
//! - [`solver`]: a spatial branch-and-bound solver with local search.
//! - [`oracle`], [`bench`] and [`plot`]: verification by simulation,
//!   benchmark reports and SVG drawings.

pub mod bench;
pub mod error;
pub mod geometry;
pub mod instance;
pub mod model;
pub mod oracle;
pub mod plot;
pub mod solver;
pub mod terms;

pub use error::{Error, Result};
pub use geometry::{is_feasible, Aircraft, HeadingVector, Instance};
pub use instance::{gen_cp, gen_rcp, CpConfig, RcpConfig};
pub use oracle::{oracle_verify, OracleConfig};
pub use solver::{solve, SolveResult, SolveStatus, SolverConfig};
