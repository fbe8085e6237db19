//! Free-boundary extraction on the thin space, frequency-based
//! classification, complementarity diagnostics, and regular-set graph
//! fitting.

mod classify;
mod complementarity;
mod dependence;
mod extract;
mod fitting;
mod graph;

pub use classify::{classify, classification_radii, ClassifyParams, FreeBoundaryPoint, PointClass};
pub use complementarity::{complementarity_residual, ComplementarityReport};
pub use dependence::{blowup_dependence, DependenceTable};
pub use extract::{extract_free_boundary, extract_free_boundary_at_level, POS_TOL};
pub use graph::{fit_regular_graph, RegularGraph};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FreeBoundaryError {
    #[error("need at least {need} points, have {have}")]
    InsufficientPoints { need: usize, have: usize },
    #[error("directions spread {spread_deg:.1} degrees exceeds the 30 degree chart limit")]
    InconsistentDirections { spread_deg: f64 },
    #[error(transparent)]
    Functional(#[from] crate::functionals::FunctionalError),
    #[error(transparent)]
    Rescale(#[from] crate::rescaling::RescaleError),
}
