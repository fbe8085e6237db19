use serde::{Deserialize, Serialize};

use crate::analytic::profile_value;
use crate::geometry::{slice_sum, strip_integral_driver, BasePoint, ScalarField, StripRegion};

use super::RescaleError;

/// Fitted blowup profile `c Re(x' . e + i |x_n|)^{3/2}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HomogeneousProfile {
    /// Amplitude `c > 0`.
    pub c: f64,
    /// Tangential unit direction (first `n-1` components used).
    pub e: [f64; 2],
    /// Relative weighted-L2 fit residual on `S_1`.
    pub residual: f64,
}

/// Relative residual above which a fit is rejected (signals a non-regular
/// point).
pub const FIT_TOL: f64 = 0.2;

fn inner_with_profile(
    v: &ScalarField,
    e: &[f64; 2],
    stride_t: usize,
) -> Result<(f64, f64), RescaleError> {
    // <v, P_e>_G and <P_e, P_e>_G over S_1
    let g = v.grid();
    let dim = g.dim;
    let z0 = BasePoint::origin();
    let region = StripRegion::full(z0, (-g.t_start).sqrt().min(1.0))?;
    let levels: Vec<usize> = v
        .stored_levels()
        .iter()
        .copied()
        .step_by(stride_t.max(1))
        .collect();
    let ev = [e[0], e[1]];
    let vp = strip_integral_driver(
        g,
        &levels,
        &region,
        |k, t, stride| {
            let s = v.slice(k).expect("stored");
            slice_sum(g, &z0, t, stride, |flat, x| {
                s[flat] * profile_value(x, dim, &ev, 1.0)
            })
        },
        0.0,
    )?;
    let pp = strip_integral_driver(
        g,
        &levels,
        &region,
        |_, t, stride| {
            slice_sum(g, &z0, t, stride, |_, x| {
                let p = profile_value(x, dim, &ev, 1.0);
                p * p
            })
        },
        0.0,
    )?;
    Ok((vp.value, pp.value))
}

fn norm_sq(v: &ScalarField) -> Result<f64, RescaleError> {
    let g = v.grid();
    let z0 = BasePoint::origin();
    let region = StripRegion::full(z0, (-g.t_start).sqrt().min(1.0))?;
    let q = crate::geometry::strip_mass_sq(v, &region)?;
    Ok(q.value)
}

/// Least squares over `(c > 0, e in dB'_1)` of the weighted L2 distance on
/// `S_1` between `v` and `c Re(x'.e + i|x_n|)^{3/2}`.
///
/// For `n = 2` the direction is discrete (`+-e_1`); for `n = 3` a dense
/// angular sweep is refined by golden section.
pub fn fit_profile(v: &ScalarField) -> Result<HomogeneousProfile, RescaleError> {
    let dim = v.grid().dim;
    let vv = norm_sq(v)?;
    if vv <= 0.0 {
        return Err(RescaleError::PoorFit { residual: 1.0 });
    }
    let best = if dim == 2 {
        let mut best: Option<(f64, [f64; 2], f64)> = None;
        for e in [[1.0, 0.0], [-1.0, 0.0]] {
            let (vp, pp) = inner_with_profile(v, &e, 1)?;
            if vp <= 0.0 {
                continue;
            }
            let c = vp / pp;
            let res2 = (1.0 - vp * vp / (vv * pp)).max(0.0);
            let cand = (c, e, res2.sqrt());
            if best.map_or(true, |b| cand.2 < b.2) {
                best = Some(cand);
            }
        }
        best
    } else {
        // coarse sweep (720 angles on a thinned quadrature), then refine
        let mut best_angle = 0.0f64;
        let mut best_score = f64::NEG_INFINITY;
        for k in 0..720 {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / 720.0;
            let e = [phi.cos(), phi.sin()];
            let (vp, pp) = inner_with_profile(v, &e, 8)?;
            let score = if vp > 0.0 { vp * vp / pp } else { f64::NEG_INFINITY };
            if score > best_score {
                best_score = score;
                best_angle = phi;
            }
        }
        let golden = (5.0_f64.sqrt() - 1.0) / 2.0;
        let (mut lo, mut hi) = (best_angle - 0.01, best_angle + 0.01);
        let score_at = |phi: f64| -> Result<f64, RescaleError> {
            let e = [phi.cos(), phi.sin()];
            let (vp, pp) = inner_with_profile(v, &e, 2)?;
            Ok(if vp > 0.0 { vp * vp / pp } else { f64::NEG_INFINITY })
        };
        for _ in 0..24 {
            let m1 = hi - golden * (hi - lo);
            let m2 = lo + golden * (hi - lo);
            if score_at(m1)? > score_at(m2)? {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let phi = 0.5 * (lo + hi);
        let e = [phi.cos(), phi.sin()];
        let (vp, pp) = inner_with_profile(v, &e, 1)?;
        if vp > 0.0 {
            let c = vp / pp;
            let res2 = (1.0 - vp * vp / (vv * pp)).max(0.0);
            Some((c, e, res2.sqrt()))
        } else {
            None
        }
    };
    match best {
        Some((c, e, residual)) if residual <= FIT_TOL && c > 0.0 => {
            Ok(HomogeneousProfile { c, e, residual })
        }
        Some((_, _, residual)) => Err(RescaleError::PoorFit { residual }),
        None => Err(RescaleError::PoorFit { residual: 1.0 }),
    }
}
