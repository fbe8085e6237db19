//! Theorem-scale experiments: each main statement becomes a deterministic
//! pass/fail/report job over solved or analytic fields, with explicit
//! tolerances and quadrature-error gating.

mod blowup_pipeline;
mod calibration;
mod growth;
mod monotonicity;
mod replacement;
mod report;

pub use blowup_pipeline::{verify_blowup_pipeline, verify_rotation};
pub use calibration::{calibration_gate, CalibrationOutcome};
pub use growth::{verify_epiperimetric, verify_growth};
pub use monotonicity::{verify_almgren, verify_weiss_monotonicity};
pub use replacement::verify_replacement_estimates;
pub use report::{ExperimentReport, Verdict};
