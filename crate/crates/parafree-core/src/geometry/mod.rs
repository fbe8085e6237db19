//! Grids, the backward heat kernel, Gaussian-weighted quadrature over
//! truncated strips and time slices, and discrete differential operators.

mod field;
mod grid;
mod kernel;
mod quadrature;
mod region;

pub use field::{mirror_slice, ScalarField, TimeSampling};
pub use grid::{BasePoint, GridSpec};
pub use kernel::{kernel_value, HeatKernelWeight};
pub use quadrature::{
    slice_grad_sq, slice_integral_fn, slice_mass_sq, slice_sum, strip_diff_sq,
    strip_grad_diff_energy, strip_grad_energy, strip_integral_driver, strip_integral_fn,
    strip_mass_sq, strip_pairing, tail_bound, QuadValue,
};
pub use region::StripRegion;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("region out of range: band starts at t={needed} but grid starts at t={have}")]
    RegionOutOfRange { needed: f64, have: f64 },
    #[error("strip at r={r} has no resolved slices on a grid with h={h}")]
    UnresolvedBand { r: f64, h: f64 },
}

/// Free-function forms of the differential operators, mirroring the module's
/// operation surface; they delegate to the per-slice methods on
/// [`ScalarField`].
pub fn gradient(u: &ScalarField, level: usize) -> Vec<f64> {
    u.gradient_slice(level)
}

pub fn time_derivative(u: &ScalarField, level: usize) -> Vec<f64> {
    u.time_derivative_slice(level)
}
