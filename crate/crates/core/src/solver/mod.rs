//! Explicit monotone solver, the Hopf-Lax oracle and residual checks.

pub mod hopf_lax;
pub mod initial;
pub mod residual;
pub mod scheme;

pub use hopf_lax::{hopf_lax, legendre_constant, search_radius};
pub use initial::{InitialData, InitialProfile};
pub use residual::{residual_subsolution, residual_supersolution, Residual, ResidualSummary};
pub use scheme::{cfl_dt, estimate_sigma, gradient_bound, solve, solve_from, step, step_into, SigmaMode, SolveConfig, Trajectory};
