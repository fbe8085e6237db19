use crate::geometry::{
    slice_grad_sq, slice_mass_sq, strip_grad_energy, strip_mass_sq, BasePoint, QuadValue,
    ScalarField, StripRegion,
};

use super::{f_norm, FunctionalError, WeissParams};

/// Full weighted Weiss energy
///
/// `W(r) = e^{a r^al} / (r^{2k+2} - rho^{2k+2}) * ( int_{S_r \ S_rho}
/// (2(t0-t)|grad u|^2 - k (1 - b r^ep) u^2) G_{z0} + ||u||^2 e^{-1/r} r^{-d} )`
///
/// with `a, b` and the additive error coefficient taken from the parameter
/// mode. The `||u||` factor can be supplied to avoid recomputing `f_norm`.
pub fn weiss(
    u: &ScalarField,
    z0: &BasePoint,
    r: f64,
    params: &WeissParams,
    fnorm_sq: Option<f64>,
) -> Result<f64, FunctionalError> {
    params.validate()?;
    let region = StripRegion::new(*z0, r, params.rho)?;
    let grad = strip_grad_energy(u, &region)?;
    let mass = strip_mass_sq(u, &region)?;
    let f2 = fnorm_sq.unwrap_or_else(|| {
        let f = f_norm(u, z0);
        f * f
    });
    Ok(weiss_from_parts(grad.value, mass.value, f2, r, params))
}

/// Assemble the Weiss energy from precomputed strip integrals
/// (`int 2(t0-t)|grad u|^2 G` over the band and `int u^2 G`).
pub fn weiss_from_parts(
    grad_energy: f64,
    mass: f64,
    fnorm_sq: f64,
    r: f64,
    params: &WeissParams,
) -> f64 {
    let p = 2.0 * params.kappa + 2.0;
    let denom = r.powf(p) - params.rho.powf(p);
    let ear = (params.a_eff() * r.powf(params.alpha)).exp();
    let err_term = params.exp_coeff() * fnorm_sq * (-1.0 / r).exp() * r.powf(-params.delta);
    let bracket =
        grad_energy - params.kappa * (1.0 - params.b_eff() * r.powf(params.epsilon)) * mass
            + err_term;
    ear / denom * bracket
}

/// Standard (unweighted-constant) Weiss energy of homogeneity 3/2 and the
/// slice energy at `t = t0 - r^2`:
///
/// `W0(r) = r^{-5} int_{S_r} (2(t0-t)|grad u|^2 - 3/2 u^2) G_{z0}`
/// `V0(t) = (t0-t)^{-3/2} int (2(t0-t)|grad u|^2 - 3/2 u^2) G_{z0}(., t) dx`
pub fn weiss_standard(
    u: &ScalarField,
    z0: &BasePoint,
    r: f64,
) -> Result<(f64, f64), FunctionalError> {
    let w0 = weiss_standard_quad(u, z0, r)?.value;
    let v0 = v_slice(u, z0, z0.t - r * r);
    Ok((w0, v0))
}

/// `W0_{3/2}(r)` with quadrature error information.
pub fn weiss_standard_quad(
    u: &ScalarField,
    z0: &BasePoint,
    r: f64,
) -> Result<QuadValue, FunctionalError> {
    let region = StripRegion::full(*z0, r)?;
    let grad = strip_grad_energy(u, &region)?;
    let mass = strip_mass_sq(u, &region)?;
    Ok(QuadValue {
        value: (grad.value - 1.5 * mass.value) / r.powi(5),
        quad_err: (grad.quad_err + 1.5 * mass.quad_err) / r.powi(5),
        tail_bound: (grad.tail_bound + 1.5 * mass.tail_bound) / r.powi(5),
    })
}

/// Slice Weiss energy `V0_{3/2}` at time `t < t0` (snapped to the nearest
/// stored level).
pub fn v_slice(u: &ScalarField, z0: &BasePoint, t: f64) -> f64 {
    v_slice_quad(u, z0, t).value
}

/// `V0_{3/2}` with its stride-2 quadrature error estimate.
pub fn v_slice_quad(u: &ScalarField, z0: &BasePoint, t: f64) -> QuadValue {
    let k = u.grid().nearest_time_level(t);
    let t = u.grid().time(k);
    let lag = z0.t - t;
    if lag <= 0.0 {
        return QuadValue::default();
    }
    let grad = slice_grad_sq(u, z0, t);
    let mass = slice_mass_sq(u, z0, t);
    QuadValue {
        value: (2.0 * lag * grad.value - 1.5 * mass.value) / lag.powf(1.5),
        quad_err: (2.0 * lag * grad.quad_err + 1.5 * mass.quad_err) / lag.powf(1.5),
        tail_bound: (2.0 * lag * grad.tail_bound + 1.5 * mass.tail_bound) / lag.powf(1.5),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{radius_adapted_grid, CalibrationField};
    use crate::geometry::TimeSampling;

    #[test]
    fn weiss_standard_constant_field() {
        // u = 1: W0 = -1.5 r^2 / r^5; at r=0.5 this is -12
        let r = 0.5;
        let g = radius_adapted_grid(2, r);
        let u = CalibrationField::Constant.field(g, TimeSampling::Full);
        let (w0, _) = weiss_standard(&u, &BasePoint::origin(), r).unwrap();
        assert!((w0 + 12.0).abs() < 0.005 * 12.0, "got {w0}");
    }

    #[test]
    fn weiss_standard_linear_field() {
        // u = x1: W0 = -1/(2r); at r=0.5 this is -1
        let r = 0.5;
        let g = radius_adapted_grid(2, r);
        let u = CalibrationField::Linear.field(g, TimeSampling::Full);
        let (w0, _) = weiss_standard(&u, &BasePoint::origin(), r).unwrap();
        assert!((w0 + 1.0).abs() < 5e-3, "got {w0}");
    }

    #[test]
    fn weiss_standard_profile_vanishes() {
        for r in [0.08, 0.2, 0.4] {
            let g = radius_adapted_grid(2, r);
            let u = CalibrationField::Profile.field(g, TimeSampling::Full);
            let (w0, _) = weiss_standard(&u, &BasePoint::origin(), r).unwrap();
            assert!(w0.abs() < 2e-3, "W0 at r={r}: {w0}");
        }
    }

    #[test]
    fn weiss_full_zero_field() {
        let g = radius_adapted_grid(2, 0.3);
        let u = CalibrationField::Constant.field(g, TimeSampling::Full).map(|_| 0.0);
        let w = weiss(
            &u,
            &BasePoint::origin(),
            0.3,
            &WeissParams::standard(),
            Some(0.0),
        )
        .unwrap();
        assert_eq!(w, 0.0);
    }
}
