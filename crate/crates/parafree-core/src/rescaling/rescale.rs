use crate::functionals::DEGENERACY_FLOOR;
use crate::geometry::{mirror_slice, strip_mass_sq, BasePoint, ScalarField, StripRegion};

use super::RescaleError;

/// Check the rescaling window `x0 + r * box` x `(t0 - r^2, t0]` sits inside
/// the source grid.
fn check_window(u: &ScalarField, z0: &BasePoint, r: f64) -> Result<(), RescaleError> {
    let g = u.grid();
    for d in 0..g.dim {
        if z0.x[d].abs() + r * g.half_width > g.half_width + 1e-12 {
            return Err(RescaleError::RegionOutOfRange(format!(
                "spatial window exceeds box: |x0|={} + r*L={} > L={}",
                z0.x[d].abs(),
                r * g.half_width,
                g.half_width
            )));
        }
    }
    if z0.t - r * r < g.t_start - 1e-12 {
        return Err(RescaleError::RegionOutOfRange(format!(
            "time window {} before grid start {}",
            z0.t - r * r,
            g.t_start
        )));
    }
    if z0.t > 1e-12 {
        return Err(RescaleError::RegionOutOfRange(
            "base time after the grid end".into(),
        ));
    }
    Ok(())
}

/// `kappa`-homogeneous rescaling `u_{z0,r}(x,t) = u(x0 + r x, t0 + r^2 t) / r^kappa`,
/// resampled onto the standard grid layout of the source by multilinear
/// interpolation; even symmetry is preserved by construction.
pub fn homogeneous_rescale(
    u: &ScalarField,
    z0: &BasePoint,
    r: f64,
    kappa: f64,
) -> Result<ScalarField, RescaleError> {
    check_window(u, z0, r)?;
    let g = u.grid().clone();
    let scale = r.powf(-kappa);
    let mid = g.center();
    let levels: Vec<usize> = u.stored_levels().to_vec();
    let len = g.slice_len();
    let mut data = Vec::with_capacity(levels.len() * len);
    for &k in &levels {
        let t = g.time(k);
        let ts = z0.t + r * r * t;
        let row_start = data.len();
        for flat in 0..len {
            let idx = g.unflat(flat);
            if u.even_xn() && idx[g.dim - 1] < mid {
                data.push(0.0);
                continue;
            }
            let x = g.node_coords(flat);
            let mut xs = [0.0f64; 3];
            for d in 0..g.dim {
                xs[d] = z0.x[d] + r * x[d];
            }
            data.push(scale * u.sample(&xs, ts));
        }
        if u.even_xn() {
            mirror_slice(&g, &mut data[row_start..row_start + len]);
        }
    }
    ScalarField::from_slices(g, u.even_xn(), levels, data).map_err(RescaleError::from)
}

/// Almgren rescaling: the homogeneous rescaling normalized so that
/// `int_{S_1} (u^A)^2 G = 1`, i.e.
/// `u^A_{z0,r}(x,t) = u(r x + x0, r^2 t + t0) / ((1/r^2) int_{S_r} u^2 G)^{1/2}`.
pub fn almgren_rescale(
    u: &ScalarField,
    z0: &BasePoint,
    r: f64,
    fnorm_sq: f64,
) -> Result<ScalarField, RescaleError> {
    check_window(u, z0, r)?;
    let region = StripRegion::full(*z0, r).map_err(RescaleError::from)?;
    let mass = strip_mass_sq(u, &region).map_err(RescaleError::from)?;
    if mass.value < DEGENERACY_FLOOR * fnorm_sq.max(f64::MIN_POSITIVE) {
        return Err(RescaleError::DegenerateDenominator {
            denominator: mass.value,
        });
    }
    let lambda = (mass.value / (r * r)).sqrt();
    // u^A = u_{z0,r}^{(kappa)} * r^kappa / lambda for any kappa; use the
    // homogeneous path with kappa = 0 and divide
    let resc = homogeneous_rescale(u, z0, r, 0.0)?;
    Ok(resc.map(|v| v / lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::CalibrationField;
    use crate::geometry::{GridSpec, TimeSampling};

    fn grid() -> GridSpec {
        GridSpec::standard(2, 2.0, 129, 128)
    }

    #[test]
    fn linear_field_rescales_by_power() {
        // u = x1, kappa = 3/2, r = 1/4: u_{0,r} = r^{1-3/2} x1 = 2 x1
        let u = CalibrationField::Linear.field(grid(), TimeSampling::Full);
        let v = homogeneous_rescale(&u, &BasePoint::origin(), 0.25, 1.5).unwrap();
        let g = v.grid();
        let s = v.slice(64).unwrap();
        for i in (1..g.nodes - 1).step_by(7) {
            let flat = g.flat(&[i, g.center()]);
            assert!((s[flat] - 2.0 * g.coord(i)).abs() < 1e-10);
        }
    }

    #[test]
    fn unit_radius_is_identity() {
        let u = CalibrationField::Profile.field(grid(), TimeSampling::Full);
        let v = homogeneous_rescale(&u, &BasePoint::origin(), 1.0, 1.5).unwrap();
        let (a, b) = (u.slice(100).unwrap(), v.slice(100).unwrap());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn profile_is_rescaling_fixed_point() {
        let u = CalibrationField::Profile.field(grid(), TimeSampling::Full);
        let v = homogeneous_rescale(&u, &BasePoint::origin(), 0.25, 1.5).unwrap();
        let (a, b) = (u.slice(96).unwrap(), v.slice(96).unwrap());
        let mut worst = 0.0f64;
        for (x, y) in a.iter().zip(b) {
            worst = worst.max((x - y).abs());
        }
        assert!(worst < 0.01, "interpolation drift {worst}");
    }

    #[test]
    fn almgren_normalization_is_unit() {
        // re-quadrature of int_{S_1}(u^A)^2 G needs a box wide enough for
        // the rho^3-weighted kernel at lag 1
        let g = GridSpec::standard(2, 6.0, 257, 128);
        let u = CalibrationField::Profile.field(g, TimeSampling::Full);
        let v = almgren_rescale(&u, &BasePoint::origin(), 0.25, 100.0).unwrap();
        let reg = StripRegion::full(BasePoint::origin(), 1.0).unwrap();
        let m = strip_mass_sq(&v, &reg).unwrap().value;
        assert!((m - 1.0).abs() < 1e-2, "normalized mass {m}");
    }

    #[test]
    fn almgren_rescalings_of_homogeneous_field_coincide() {
        let u = CalibrationField::Linear.field(grid(), TimeSampling::Full);
        let a = almgren_rescale(&u, &BasePoint::origin(), 0.25, 10.0).unwrap();
        let b = almgren_rescale(&u, &BasePoint::origin(), 0.125, 10.0).unwrap();
        let (sa, sb) = (a.slice(64).unwrap(), b.slice(64).unwrap());
        let mut worst = 0.0f64;
        for (x, y) in sa.iter().zip(sb) {
            worst = worst.max((x - y).abs());
        }
        assert!(worst < 1e-3, "homogeneous rescalings differ by {worst}");
    }

    #[test]
    fn zero_field_is_degenerate() {
        let u = CalibrationField::Constant
            .field(grid(), TimeSampling::Full)
            .map(|_| 0.0);
        assert!(matches!(
            almgren_rescale(&u, &BasePoint::origin(), 0.25, 0.0),
            Err(RescaleError::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn window_checks() {
        let u = CalibrationField::Linear.field(grid(), TimeSampling::Full);
        let far = BasePoint::new([1.9, 0.0, 0.0], 0.0);
        assert!(matches!(
            homogeneous_rescale(&u, &far, 0.25, 1.5),
            Err(RescaleError::RegionOutOfRange(_))
        ));
    }

    #[test]
    fn composition_of_rescalings() {
        // rescale(rescale(u, r), s) = rescale(u, r s) within interpolation
        let u = CalibrationField::Degree2.field(grid(), TimeSampling::Full);
        let z0 = BasePoint::origin();
        let a = homogeneous_rescale(&u, &z0, 0.5, 1.5).unwrap();
        let ab = homogeneous_rescale(&a, &z0, 0.5, 1.5).unwrap();
        let direct = homogeneous_rescale(&u, &z0, 0.25, 1.5).unwrap();
        let (x, y) = (ab.slice(96).unwrap(), direct.slice(96).unwrap());
        let mut worst = 0.0f64;
        for (p, q) in x.iter().zip(y) {
            worst = worst.max((p - q).abs());
        }
        assert!(worst < 5e-3, "composition drift {worst}");
    }
}
