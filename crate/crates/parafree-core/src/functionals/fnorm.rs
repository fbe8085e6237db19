use crate::geometry::{slice_sum, strip_integral_driver, BasePoint, ScalarField, StripRegion};

/// The composite norm behind the additive error terms: the Gaussian-weighted
/// parabolic Sobolev norm over `R^n x (t_start, t0)`, the unweighted one over
/// the unit cylinder `B_1 x (t_start, t0)`, and the sup norm. All three
/// summands are 1-homogeneous.
pub fn f_norm(u: &ScalarField, z0: &BasePoint) -> f64 {
    weighted_sobolev(u, z0) + unweighted_cylinder(u, z0.t) + u.sup_abs()
}

/// `[ int (u^2 + (t0-t)(|grad u|^2 + (dt u)^2)) G_{z0} ]^{1/2}` over the full
/// sampled time range below `t0`.
pub fn weighted_sobolev(u: &ScalarField, z0: &BasePoint) -> f64 {
    let g = u.grid();
    let len = g.slice_len();
    let span = (z0.t - g.t_start).max(0.0);
    if span <= 0.0 {
        return 0.0;
    }
    let r_span = span.sqrt();
    let region = StripRegion {
        z0: *z0,
        r: r_span,
        rho: 0.0,
    };
    let limit = {
        let v = u.sample(&z0.x, z0.t);
        v * v
    };
    let q = strip_integral_driver(
        g,
        u.stored_levels(),
        &region,
        |k, t, stride| {
            let s = u.slice(k).expect("stored");
            let grad = u.gradient_slice(k);
            let dtu = u.time_derivative_slice(k);
            let lag = z0.t - t;
            slice_sum(g, z0, t, stride, |flat, _| {
                let mut g2 = 0.0;
                for d in 0..g.dim {
                    let gv = grad[d * len + flat];
                    g2 += gv * gv;
                }
                s[flat] * s[flat] + lag * (g2 + dtu[flat] * dtu[flat])
            })
        },
        limit,
    );
    q.map(|v| v.value.max(0.0).sqrt()).unwrap_or(0.0)
}

/// `[ int_{B_1 x (t_start, t0)} (u^2 + |grad u|^2 + (dt u)^2) ]^{1/2}` by
/// node-indicator trapezoid quadrature over the unit ball.
pub fn unweighted_cylinder(u: &ScalarField, t0: f64) -> f64 {
    let g = u.grid();
    let len = g.slice_len();
    let mut acc = 0.0;
    let mut prev_t: Option<f64> = None;
    let mut prev_v = 0.0;
    for &k in u.stored_levels() {
        let t = g.time(k);
        if t > t0 + 1e-12 {
            break;
        }
        let s = u.slice(k).unwrap();
        let grad = u.gradient_slice(k);
        let dtu = u.time_derivative_slice(k);
        let mut sv = 0.0;
        for flat in 0..len {
            let x = g.node_coords(flat);
            let r2: f64 = x[..g.dim].iter().map(|v| v * v).sum();
            if r2 > 1.0 {
                continue;
            }
            let idx = g.unflat(flat);
            let mut w = 1.0;
            for d in 0..g.dim {
                w *= g.trap_weight(idx[d]);
            }
            let mut g2 = 0.0;
            for d in 0..g.dim {
                let gv = grad[d * len + flat];
                g2 += gv * gv;
            }
            sv += w * (s[flat] * s[flat] + g2 + dtu[flat] * dtu[flat]);
        }
        if let Some(tp) = prev_t {
            acc += 0.5 * (prev_v + sv) * (t - tp);
        }
        prev_t = Some(t);
        prev_v = sv;
    }
    acc.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GridSpec, TimeSampling};
    use std::f64::consts::PI;

    #[test]
    fn f_norm_of_zero_is_zero() {
        let g = GridSpec::standard(2, 2.0, 65, 64);
        let u = ScalarField::from_fn(g, TimeSampling::Full, true, |_, _| 0.0);
        assert_eq!(f_norm(&u, &BasePoint::origin()), 0.0);
    }

    #[test]
    fn f_norm_of_one_matches_closed_forms() {
        // weighted part 1, unweighted part |Q_1|^{1/2} = sqrt(pi) in n=2,
        // sup part 1; the box must cover the kernel width at lag 1
        let g = GridSpec::standard(2, 6.0, 193, 64);
        let u = ScalarField::from_fn(g, TimeSampling::Full, true, |_, _| 1.0);
        let z0 = BasePoint::origin();
        let w = weighted_sobolev(&u, &z0);
        assert!((w - 1.0).abs() < 1e-3, "weighted part {w}");
        let c = unweighted_cylinder(&u, 0.0);
        // node-indicator ball quadrature carries an O(h) boundary error
        assert!((c - PI.sqrt()).abs() < 0.05, "cylinder part {c}");
        let f = f_norm(&u, &z0);
        assert!((f - (1.0 + PI.sqrt() + 1.0)).abs() < 0.05, "total {f}");
    }

    #[test]
    fn f_norm_is_one_homogeneous() {
        let g = GridSpec::standard(2, 2.0, 65, 64);
        let u = ScalarField::from_fn(g, TimeSampling::Full, true, |x, t| {
            x[0] * x[0] + 2.0 * t + x[1].abs()
        });
        let c = -3.7;
        let uc = u.map(|v| c * v);
        let z0 = BasePoint::origin();
        let a = f_norm(&uc, &z0);
        let b = c.abs() * f_norm(&u, &z0);
        assert!((a - b).abs() < 1e-10 * b.abs().max(1.0));
    }
}
