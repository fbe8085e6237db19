//! Backward-Euler + projected-SOR solver for the parabolic thin-obstacle
//! variational inequality, strip replacements, and the perturbed-problem
//! instance generators.

mod cylinder;
mod instances;
mod psor;
mod smooth;
mod strip;

pub use cylinder::{solve_cylinder, solve_cylinder_with_observer};
pub use instances::{
    make_drift_instance, make_exact_profile_instance, make_heat_positive_instance,
    make_perturbed_profile_instance, make_variable_coefficient_instance, InstanceDescriptor,
};
pub use psor::{HalfGrid, NodeKind, PsorWorkspace};
pub use smooth::{cutoff_multiply, cutoff_value, mollify};
pub use strip::{solve_strip_replacement, solve_strip_selfsimilar};

use std::sync::Arc;

use thiserror::Error;

use crate::geometry::{GeometryError, GridSpec, ScalarField, TimeSampling};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("inner iterations exceeded cap after {sweeps} sweeps (update {worst_update:.3e}, residual {worst_residual:.3e})")]
    NoConvergence {
        sweeps: usize,
        worst_update: f64,
        worst_residual: f64,
    },
    #[error("incompatible data: {0}")]
    IncompatibleData(String),
    #[error("ellipticity violated: coefficient range [{lo:.4}, {hi:.4}]")]
    EllipticityViolated { lo: f64, hi: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Scalar data callable on the box, `x -> value`.
pub type SpatialFn = Arc<dyn Fn(&[f64; 3]) -> f64 + Send + Sync>;
/// Space-time data, `(x, t) -> value`.
pub type SpaceTimeFn = Arc<dyn Fn(&[f64; 3], f64) -> f64 + Send + Sync>;
/// Diagonal coefficient field, `(x, t) -> (a_1..a_n)`.
pub type CoeffFn = Arc<dyn Fn(&[f64; 3], f64) -> [f64; 3] + Send + Sync>;
/// Drift field, `(x, t) -> (b_1..b_n)`.
pub type DriftFn = Arc<dyn Fn(&[f64; 3], f64) -> [f64; 3] + Send + Sync>;

/// Full description of one variational-inequality solve.
#[derive(Clone)]
pub struct SignoriniConfig {
    pub grid: GridSpec,
    /// Initial datum at `t_start`; must be `>= 0` on the thin plane.
    pub initial: SpatialFn,
    /// Lateral Dirichlet datum on the box faces.
    pub boundary: SpaceTimeFn,
    /// Diagonal coefficient field (identity when `None`).
    pub coeff: Option<CoeffFn>,
    /// Drift field (zero when `None`); its normal component must vanish on
    /// the thin plane to preserve even symmetry.
    pub drift: Option<DriftFn>,
    /// Coefficient modulus exponent `alpha` of the instance.
    pub alpha: f64,
    /// Over-relaxation factor in `(1, 2)`.
    pub omega: f64,
    /// Per-step convergence tolerance on the max update.
    pub tol_psor: f64,
    /// Inner iteration cap.
    pub max_inner: usize,
    /// Storage policy of the returned field.
    pub sampling: TimeSampling,
    /// Human-readable instance tag for manifests and reports.
    pub descriptor: InstanceDescriptor,
}

impl SignoriniConfig {
    pub fn new(grid: GridSpec, initial: SpatialFn, boundary: SpaceTimeFn) -> Self {
        Self {
            grid,
            initial,
            boundary,
            coeff: None,
            drift: None,
            alpha: 0.5,
            omega: 1.5,
            tol_psor: 1e-10,
            max_inner: 100_000,
            sampling: TimeSampling::Full,
            descriptor: InstanceDescriptor::custom("custom"),
        }
    }

    pub fn with_sampling(mut self, sampling: TimeSampling) -> Self {
        self.sampling = sampling;
        self
    }

    /// Validate compatibility: nonnegative initial thin trace, matching
    /// initial and boundary data at `t_start`, even-symmetric data.
    pub fn validate(&self) -> Result<(), SolverError> {
        let g = &self.grid;
        let mid = g.center();
        // thin-plane nonnegativity of the initial datum
        let probes = 17.min(g.nodes);
        for p in 0..probes {
            let i = p * (g.nodes - 1) / (probes - 1).max(1);
            let mut x = [0.0f64; 3];
            x[0] = g.coord(i);
            x[g.dim - 1] = 0.0;
            let v = (self.initial)(&x);
            if v < -1e-12 {
                return Err(SolverError::IncompatibleData(format!(
                    "initial datum negative on the thin plane at x1={}: {v}",
                    x[0]
                )));
            }
            // even symmetry probes off the plane
            let mut xp = x;
            xp[g.dim - 1] = g.coord(mid + mid / 2);
            let mut xm = xp;
            xm[g.dim - 1] = -xp[g.dim - 1];
            let (vp, vm) = ((self.initial)(&xp), (self.initial)(&xm));
            if (vp - vm).abs() > 1e-10 * (1.0 + vp.abs()) {
                return Err(SolverError::IncompatibleData(format!(
                    "initial datum not even in x_n near x1={}", x[0]
                )));
            }
            // compatibility g = phi0 at t_start on a face
            let mut xf = x;
            xf[0] = g.half_width;
            let gb = (self.boundary)(&xf, g.t_start);
            let pb = (self.initial)(&xf);
            if (gb - pb).abs() > 1e-9 * (1.0 + pb.abs()) {
                return Err(SolverError::IncompatibleData(format!(
                    "boundary datum does not match initial datum at t_start: {gb} vs {pb}"
                )));
            }
        }
        if let Some(b) = &self.drift {
            let mut x = [0.0f64; 3];
            x[0] = 0.3 * g.half_width;
            let bv = b(&x, g.t_start / 2.0);
            if bv[g.dim - 1].abs() > 1e-12 {
                return Err(SolverError::IncompatibleData(
                    "drift normal component must vanish on the thin plane".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Result of a solve: the even-mirrored space-time field plus per-step
/// solver diagnostics and the thin-plane contact indicator.
pub struct Solution {
    pub field: ScalarField,
    /// PSOR sweep counts per time step.
    pub inner_iterations: Vec<usize>,
    /// Complementarity residual of the discrete variational inequality per
    /// time step.
    pub residuals: Vec<f64>,
    /// Contact indicator (`u <= 10 tol_psor`) per stored level, on the thin
    /// grid in tangential row-major order.
    pub contact: Vec<Vec<bool>>,
    pub descriptor: InstanceDescriptor,
}

impl Solution {
    /// Worst per-step residual across the whole solve.
    pub fn worst_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}
