//! Laplace solver on circular slit disks and the potential-theoretic
//! objects built from it.

pub mod arc;
pub mod far;
pub mod kernels;
pub mod solver;

pub use kernels::{
    log_radii, omega_normal_at, period_matrix, r_vector, regularized_l, AnalyticKernel,
    HarmonicMeasures, Singular,
};
pub use far::FarField;
pub use solver::{solve_dirichlet, LayerSolver, PotentialSolution, SolverOptions};
