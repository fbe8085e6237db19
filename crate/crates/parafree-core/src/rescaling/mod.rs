//! Homogeneous and Almgren rescalings, conformal self-similar coordinates,
//! homogeneous replacements, blowups, rotation distances, and profile
//! fitting.

mod blowup;
mod profile_fit;
mod replacement;
mod rescale;
mod rotation;
mod selfsim;

pub use blowup::{blowup, BlowupReport, BLOWUP_TOL};
pub use profile_fit::{fit_profile, HomogeneousProfile, FIT_TOL};
pub use replacement::{homogeneity_residual, homogeneous_replacement};
pub use rescale::{almgren_rescale, homogeneous_rescale};
pub use rotation::rotation_distance;
pub use selfsim::{from_self_similar, to_self_similar, SelfSimilarField};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RescaleError {
    #[error("region out of range: {0}")]
    RegionOutOfRange(String),
    #[error("degenerate denominator {denominator} in rescaling normalization")]
    DegenerateDenominator { denominator: f64 },
    #[error("blowup did not converge; rotation distances {distances:?}")]
    NotConverged { distances: Vec<f64> },
    #[error("profile fit residual {residual} above tolerance")]
    PoorFit { residual: f64 },
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}
