use crate::geometry::{slice_sum, BasePoint, ScalarField};

use super::RescaleError;

/// Weighted L1 distance between two 3/2-homogeneous rescalings on a time
/// slice:
///
/// `int |u_{z0,r}(x,t) - u_{z0,s}(x,t)| G(x,t) dx`,
///
/// the quantity controlled by the rotation estimate. Evaluated by sampling
/// the source field directly (no intermediate fields).
pub fn rotation_distance(
    u: &ScalarField,
    z0: &BasePoint,
    r: f64,
    s: f64,
    t: f64,
) -> Result<f64, RescaleError> {
    if !(s <= r) || s <= 0.0 {
        return Err(RescaleError::RegionOutOfRange(format!(
            "need 0 < s <= r, got r={r}, s={s}"
        )));
    }
    if !(-1.0 < t && t < 0.0) {
        return Err(RescaleError::RegionOutOfRange(format!(
            "slice time {t} outside (-1, 0)"
        )));
    }
    let g = u.grid();
    for rr in [r, s] {
        if z0.t + rr * rr * t < g.t_start - 1e-12 {
            return Err(RescaleError::RegionOutOfRange(format!(
                "rescaled time {} before grid start",
                z0.t + rr * rr * t
            )));
        }
        for d in 0..g.dim {
            if z0.x[d].abs() + rr * g.half_width > g.half_width + 1e-12 {
                return Err(RescaleError::RegionOutOfRange(
                    "rescaled window exceeds the box".into(),
                ));
            }
        }
    }
    let kappa = 1.5;
    let (ar, as_) = (r.powf(-kappa), s.powf(-kappa));
    let origin = BasePoint::origin();
    let val = slice_sum(g, &origin, t, 1, |_, x| {
        let mut xr = [0.0f64; 3];
        let mut xs = [0.0f64; 3];
        for d in 0..g.dim {
            xr[d] = z0.x[d] + r * x[d];
            xs[d] = z0.x[d] + s * x[d];
        }
        let vr = ar * u.sample(&xr, z0.t + r * r * t);
        let vs = as_ * u.sample(&xs, z0.t + s * s * t);
        (vr - vs).abs()
    });
    Ok(val)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::CalibrationField;
    use crate::geometry::{GridSpec, TimeSampling};

    #[test]
    fn exact_profile_has_zero_rotation() {
        let g = GridSpec::standard(2, 2.0, 129, 128);
        let u = CalibrationField::Profile.field(g, TimeSampling::Full);
        let z0 = BasePoint::origin();
        for (r, s) in [(0.4, 0.2), (0.2, 0.1)] {
            let d = rotation_distance(&u, &z0, r, s, -0.25).unwrap();
            assert!(d < 5e-3, "rotation of homogeneous field: {d}");
        }
    }

    #[test]
    fn equal_radii_give_zero() {
        let g = GridSpec::standard(2, 2.0, 65, 64);
        let u = CalibrationField::Degree2.field(g, TimeSampling::Full);
        let d = rotation_distance(&u, &BasePoint::origin(), 0.3, 0.3, -0.25).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn invalid_arguments_rejected() {
        let g = GridSpec::standard(2, 2.0, 33, 16);
        let u = CalibrationField::Linear.field(g, TimeSampling::Full);
        let z0 = BasePoint::origin();
        assert!(rotation_distance(&u, &z0, 0.1, 0.2, -0.25).is_err());
        assert!(rotation_distance(&u, &z0, 0.2, 0.1, 0.5).is_err());
    }
}
