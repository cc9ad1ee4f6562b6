//! Monotone finite-difference solver for coercive Hamilton-Jacobi equations
//! `u_t + H(t, x, grad u) = 0` and numerical checks of the De Giorgi
//! regularity machinery on its solutions.

pub mod degiorgi;
pub mod error;
pub mod grid;
pub mod hamiltonian;
pub mod oscillation;
pub mod rescale;
pub mod snapshot;
pub mod solver;
pub mod verdict;

pub use error::{Error, Result};
pub use grid::{
    ball_volume, cylinder_measure, discrete_gradient_norm_p, level_set_measure, make_field, oscillation, Cylinder,
    GridSpec, MeasureReport, ScalarField, MAX_DIM,
};
pub use hamiltonian::{coercivity_check, gauge_shift, CoercivityEnvelope, CoercivityReport, HamiltonianKind, HamiltonianSpec};
pub use solver::{solve, solve_from, InitialData, SigmaMode, SolveConfig, Trajectory};
pub use oscillation::{build_constant_chain, validate_chain, ConstantChain, InvariantSlack};
pub use rescale::{holder_estimate, theorem_check, HolderEstimate, OscillationRecord, TheoremOptions, TheoremReport};
pub use verdict::{LemmaVerdict, Outcome};
