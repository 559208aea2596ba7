//! Oracles and ensemble studies.
//!
//! The finite-difference and walk-on-spheres oracles only depend on the
//! geometry module, so they stay independent of the solvers they check.

pub mod fd;
pub mod locality;
pub mod phases;
pub mod report;
pub mod stats;
pub mod svg;
pub mod wos;

pub use fd::{fd_dirichlet, fd_green_oracle, fd_harmonic_measures, FdGreen, FdSolution, PolarGrid};
pub use locality::{locality_experiment, stopped_tip, LocalityOptions, StopReason, StoppedTip};
pub use phases::{phase_experiment, self_approach, simple_curve_statistic, uniform_samples, PhaseOptions, SimpleCurveStatistic};
pub use report::{Check, ExperimentReport};
pub use stats::{ks_two_sample, mean_and_variance, wilson_interval, KsResult, Proportion};
pub use svg::{render_svg, SvgOptions};
pub use wos::{mc_harmonic_measure_oracle, McEstimate};
