//! Solver library for composite problems of the form F = f + P1 - P2,
//! where f is smooth with a locally Lipschitz gradient, P1 is prox-friendly
//! (possibly nonconvex, possibly extended-valued) and P2 is convex.
//!
//! The main solver is nexPGA, a proximal gradient-subgradient method with
//! extrapolation and an average-type (Zhang-Hager) nonmonotone line search
//! on the potential H_delta(u, v, gamma) = F(u) + (delta*gamma/8)||u - v||^2.
//! No global Lipschitz constant is required; the stepsize 1/gamma is found
//! by backtracking.
//!
//! The crate also ships the comparison methods (NPG, PGels via a max-type
//! reference policy, pDCAe with a fixed stepsize), random sparse regression
//! instance generation for the l1-l2 regularized least-squares problem, and
//! a benchmark harness producing E(t) evolution curves as CSV and SVG.

pub mod baselines;
pub mod harness;
pub mod instance;
pub mod metrics;
pub mod ops;
pub mod problem;
pub mod solver;

mod error;

pub use error::Error;
pub use problem::{CompositeProblem, DenseVector, ProxOracle, SmoothOracle, SubgradOracle};
pub use solver::{solve, ReferencePolicy, SolveResult, SolverParams, StopReason};

pub type Result<T> = std::result::Result<T, Error>;
