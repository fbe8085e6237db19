//! The monotonicity functionals: scalar weights, Weiss energies,
//! Almgren/Poon frequencies, the composite norm behind the error terms, and
//! the frequency-limit extrapolator.

mod fnorm;
mod frequency;
mod limit;
mod weights;
mod weiss;

pub use fnorm::{f_norm, unweighted_cylinder, weighted_sobolev};
pub use frequency::{
    almgren, evaluate_curve, exponential_term_ratio, poon, FrequencyCurve, FrequencyRow,
    FrequencyValues, DEGENERACY_FLOOR,
};
pub use limit::{frequency_limit, FrequencyLimit};
pub use weights::{admissible_radius, phi_psi, scalar_weight_residuals, ConstantsMode, ScalarWeights, WeissParams};
pub use weiss::{v_slice, v_slice_quad, weiss, weiss_from_parts, weiss_standard, weiss_standard_quad};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FunctionalError {
    #[error("invalid functional parameters: {0}")]
    InvalidParams(String),
    #[error("inadmissible radii: r={r}, rho={rho} (need 0 <= rho < r, rho/r <= 1/sqrt(2))")]
    InadmissibleRadii { r: f64, rho: f64 },
    #[error("degenerate denominator {denominator} below floor {floor}")]
    DegenerateDenominator { denominator: f64, floor: f64 },
    #[error("insufficient radii: have {have}, need at least {need} spanning two octaves")]
    InsufficientRadii { have: usize, need: usize },
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}
