//! Numerical laboratory for the parabolic thin-obstacle (Signorini) problem.
//!
//! The crate solves the variational inequality on a truncated space-time
//! grid, evaluates the Gaussian-weighted monotonicity functionals (Weiss,
//! Almgren/Poon frequencies, epiperimetric slice energies), rescales and
//! classifies free-boundary points, and packages the lot as deterministic
//! pass/fail experiments.

pub mod analytic;
pub mod functionals;
pub mod free_boundary;
pub mod geometry;
pub mod harness;
pub mod rescaling;
pub mod solver;

pub use geometry::{BasePoint, GridSpec, ScalarField, StripRegion, TimeSampling};
