use serde::{Deserialize, Serialize};

use crate::geometry::{BasePoint, ScalarField};

use super::{homogeneous_rescale, rotation_distance, RescaleError};

/// Convergence record of a blowup computation: successive rotation distances
/// along the radius ladder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlowupReport {
    pub radii: Vec<f64>,
    pub distances: Vec<f64>,
    pub converged: bool,
    /// Slice time the distances were measured at.
    pub t_ref: f64,
}

/// Tolerance under which successive rescalings count as Cauchy.
pub const BLOWUP_TOL: f64 = 5e-3;

/// Compute the 3/2-homogeneous blowup along a decreasing radius ladder:
/// returns the smallest-radius rescaling together with the Cauchy sequence
/// of rotation distances. Convergence is declared when the final distance is
/// below tolerance and the sequence decays geometrically (or sits at the
/// noise floor throughout).
pub fn blowup(
    u: &ScalarField,
    z0: &BasePoint,
    kappa: f64,
    radii: &[f64],
) -> Result<(ScalarField, BlowupReport), RescaleError> {
    if radii.len() < 2 {
        return Err(RescaleError::NotConverged {
            distances: vec![],
        });
    }
    let mut sorted = radii.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let t_ref = -0.25;
    let mut distances = Vec::with_capacity(sorted.len() - 1);
    for w in sorted.windows(2) {
        distances.push(rotation_distance(u, z0, w[0], w[1], t_ref)?);
    }
    // Cauchy criterion: last distance small, and each step either already at
    // the floor or contracting
    let last = *distances.last().unwrap();
    let mut geometric = true;
    for w in distances.windows(2) {
        if w[0] > BLOWUP_TOL && w[1] > 0.9 * w[0] {
            geometric = false;
        }
    }
    let converged = last < BLOWUP_TOL && geometric;
    let report = BlowupReport {
        radii: sorted.clone(),
        distances: distances.clone(),
        converged,
    t_ref,
    };
    if !converged {
        return Err(RescaleError::NotConverged { distances });
    }
    let smallest = *sorted.last().unwrap();
    let field = homogeneous_rescale(u, z0, smallest, kappa)?;
    Ok((field, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{profile_value, CalibrationField};
    use crate::geometry::{GridSpec, ScalarField, TimeSampling};

    #[test]
    fn exact_profile_converges_immediately() {
        let g = GridSpec::standard(2, 2.0, 129, 128);
        let u = CalibrationField::Profile.field(g, TimeSampling::Full);
        let (_, rep) = blowup(&u, &BasePoint::origin(), 1.5, &[0.4, 0.2, 0.1]).unwrap();
        assert!(rep.converged);
        assert!(rep.distances.iter().all(|&d| d < BLOWUP_TOL));
    }

    #[test]
    fn translated_profile_recovers_itself() {
        // profile translated in the tangential direction; blow up at its own
        // free-boundary point
        let g = GridSpec::standard(2, 2.0, 129, 128);
        let x_off = 0.25;
        let u = ScalarField::from_fn(g.clone(), TimeSampling::Full, true, move |x, _| {
            let xs = [x[0] - x_off, x[1], 0.0];
            profile_value(&xs, 2, &[1.0, 0.0], 1.0)
        });
        let z0 = BasePoint::new([x_off, 0.0, 0.0], 0.0);
        let (v, rep) = blowup(&u, &z0, 1.5, &[0.4, 0.2, 0.1]).unwrap();
        assert!(rep.converged);
        // recovered blowup matches the analytic profile
        let gv = v.grid().clone();
        let k = gv.nearest_time_level(-0.25);
        let s = v.slice(k).unwrap();
        let mut worst = 0.0f64;
        for flat in (0..gv.slice_len()).step_by(3) {
            let x = gv.node_coords(flat);
            if x[0].abs() > 1.0 || x[1].abs() > 1.0 {
                continue;
            }
            worst = worst.max((s[flat] - profile_value(&x, 2, &[1.0, 0.0], 1.0)).abs());
        }
        assert!(worst < 0.02, "blowup drift {worst}");
    }

    #[test]
    fn positivity_point_diverges() {
        // at an interior positivity point the 3/2-rescalings blow up
        let g = GridSpec::standard(2, 2.0, 65, 64);
        let u = CalibrationField::Constant.field(g, TimeSampling::Full);
        let z0 = BasePoint::new([0.5, 0.5, 0.0], 0.0);
        let res = blowup(&u, &z0, 1.5, &[0.2, 0.1, 0.05]);
        assert!(matches!(res, Err(RescaleError::NotConverged { .. })));
    }
}
