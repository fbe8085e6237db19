use std::f64::consts::PI;

use super::{BasePoint, GeometryError, GridSpec, ScalarField, StripRegion};

/// Result of a weighted quadrature: the value, a resolution error estimate
/// (|fine - coarse| on a stride-2 subgrid) and a Gaussian tail truncation
/// bound in the style of `G(x,t) <= e^{1/(17 t)}` off the box.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuadValue {
    pub value: f64,
    pub quad_err: f64,
    pub tail_bound: f64,
}

/// Per-axis trapezoid-weighted Gaussian factors on a stride-subsampled axis.
/// Entry `(i, w)` pairs an axis index with `trap_weight * exp(-(x_i-c)^2/(4 lag))`.
fn axis_gauss(grid: &GridSpec, center: f64, lag: f64, stride: usize) -> Vec<(usize, f64)> {
    let n = grid.nodes;
    let hh = grid.h() * stride as f64;
    let mut v = Vec::with_capacity(n / stride + 1);
    let mut i = 0;
    while i < n {
        let w = if i == 0 || i == n - 1 { 0.5 * hh } else { hh };
        let dx = grid.coord(i) - center;
        v.push((i, w * (-dx * dx / (4.0 * lag)).exp()));
        i += stride;
    }
    v
}

/// Weighted spatial sum at one time: `sum_i w_i f(flat_i, x_i) G_{z0}(x_i, t)`.
/// `f` receives full-grid flat indices even on the stride-2 pass.
pub fn slice_sum<F: Fn(usize, &[f64; 3]) -> f64>(
    grid: &GridSpec,
    z0: &BasePoint,
    t: f64,
    stride: usize,
    f: F,
) -> f64 {
    let lag = z0.t - t;
    if lag <= 0.0 {
        return 0.0;
    }
    let pref = (4.0 * PI * lag).powf(-(grid.dim as f64) / 2.0);
    let ax: Vec<Vec<(usize, f64)>> = (0..grid.dim)
        .map(|d| axis_gauss(grid, z0.x[d], lag, stride))
        .collect();
    let mut acc = 0.0;
    match grid.dim {
        2 => {
            let n = grid.nodes;
            for &(i, wi) in &ax[0] {
                let xi = grid.coord(i);
                let row = i * n;
                let mut rowacc = 0.0;
                for &(j, wj) in &ax[1] {
                    let x = [xi, grid.coord(j), 0.0];
                    rowacc += wj * f(row + j, &x);
                }
                acc += wi * rowacc;
            }
        }
        3 => {
            let n = grid.nodes;
            for &(i, wi) in &ax[0] {
                let xi = grid.coord(i);
                for &(j, wj) in &ax[1] {
                    let xj = grid.coord(j);
                    let base = (i * n + j) * n;
                    let mut rowacc = 0.0;
                    for &(k, wk) in &ax[2] {
                        let x = [xi, xj, grid.coord(k)];
                        rowacc += wk * f(base + k, &x);
                    }
                    acc += wi * wj * rowacc;
                }
            }
        }
        _ => unreachable!("dimension checked at grid construction"),
    }
    pref * acc
}

/// Tail truncation bound for a base point: mass-style estimate of the kernel
/// weight outside the box over backward lags up to `max_lag`.
pub fn tail_bound(grid: &GridSpec, z0: &BasePoint, max_lag: f64) -> f64 {
    if max_lag <= 0.0 {
        return 0.0;
    }
    let mut dmin = f64::INFINITY;
    for d in 0..grid.dim {
        dmin = dmin.min(grid.half_width - z0.x[d].abs());
    }
    if dmin <= 0.0 {
        return 1.0;
    }
    (2 * grid.dim) as f64 * (-dmin * dmin / (8.0 * max_lag)).exp()
}

/// Generic spatial quadrature of `f(x) G_{z0}(., t)` at a fixed time, for
/// integrands given in closed form (kernel calibration, moment oracles).
pub fn slice_integral_fn(
    grid: &GridSpec,
    z0: &BasePoint,
    t: f64,
    f: impl Fn(&[f64; 3]) -> f64,
) -> QuadValue {
    let fine = slice_sum(grid, z0, t, 1, |_, x| f(x));
    let coarse = slice_sum(grid, z0, t, 2, |_, x| f(x));
    QuadValue {
        value: fine,
        quad_err: (fine - coarse).abs(),
        tail_bound: tail_bound(grid, z0, z0.t - t),
    }
}

/// One time-sample of a strip integrand: the spatial slice integral at `t`.
#[derive(Debug, Clone, Copy)]
struct BandSample {
    t: f64,
    v: f64,
}

/// Integrate a piecewise-linear polyline of samples over `[t_lo, t_hi]`.
fn integrate_polyline(samples: &[BandSample], t_lo: f64, t_hi: f64) -> f64 {
    let mut acc = 0.0;
    for w in samples.windows(2) {
        let (a, b) = (w[0], w[1]);
        let lo = a.t.max(t_lo);
        let hi = b.t.min(t_hi);
        if hi <= lo {
            continue;
        }
        let dt = b.t - a.t;
        if dt <= 0.0 {
            continue;
        }
        let va = a.v + (b.v - a.v) * (lo - a.t) / dt;
        let vb = a.v + (b.v - a.v) * (hi - a.t) / dt;
        acc += 0.5 * (va + vb) * (hi - lo);
    }
    acc
}

/// Strip quadrature driver. `slice_val(k, t, stride)` evaluates the spatial
/// integral of the integrand against `G_{z0}` at stored level `k`;
/// `base_limit` is the analytic limit of that slice integral as `t -> t0^-`
/// (the kernel concentrates to a point mass, so the time integrand extends
/// continuously; the under-resolved final bands are bridged through it).
pub fn strip_integral_driver(
    u_grid: &GridSpec,
    stored: &[usize],
    region: &StripRegion,
    mut slice_val: impl FnMut(usize, f64, usize) -> f64,
    base_limit: f64,
) -> Result<QuadValue, GeometryError> {
    region.check_in_range(u_grid)?;
    let (t_lo, t_hi) = region.band();
    let t0 = region.z0.t;
    if t_hi - t_lo < 1e-14 {
        return Ok(QuadValue::default());
    }
    let h = u_grid.h();
    let resolved = |t: f64| t0 - t >= 2.0 * h * h;

    let build = |slice_val: &mut dyn FnMut(usize, f64, usize) -> f64,
                 stride_t: usize,
                 stride_x: usize|
     -> Vec<BandSample> {
        // stored levels inside [just-below t_lo, t_hi], thinned by stride_t
        let mut ks: Vec<usize> = Vec::new();
        let mut below: Option<usize> = None;
        for &k in stored {
            let t = u_grid.time(k);
            if t < t_lo - 1e-12 {
                below = Some(k);
            } else if t <= t_hi + 1e-12 {
                ks.push(k);
            } else if t <= t0 {
                // first level above the band closes the top interpolation
                ks.push(k);
                break;
            } else {
                break;
            }
        }
        if stride_t > 1 && ks.len() > 2 {
            let last = *ks.last().unwrap();
            let mut thinned: Vec<usize> = ks.iter().copied().step_by(stride_t).collect();
            if *thinned.last().unwrap() != last {
                thinned.push(last);
            }
            ks = thinned;
        }
        if let Some(kb) = below {
            ks.insert(0, kb);
        }
        let mut samples: Vec<BandSample> = Vec::with_capacity(ks.len() + 1);
        for k in ks {
            let t = u_grid.time(k);
            if t >= t0 || !resolved(t) {
                continue;
            }
            samples.push(BandSample {
                t,
                v: slice_val(k, t, stride_x),
            });
        }
        if region.rho == 0.0 {
            samples.push(BandSample {
                t: t0,
                v: base_limit,
            });
        }
        samples
    };

    let fine = build(&mut slice_val, 1, 1);
    if fine.len() < 2 {
        return Err(GeometryError::UnresolvedBand {
            r: region.r,
            h: u_grid.h(),
        });
    }
    let value = integrate_polyline(&fine, t_lo, t_hi);
    let coarse = build(&mut slice_val, 2, 2);
    let value_c = integrate_polyline(&coarse, t_lo, t_hi);
    Ok(QuadValue {
        value,
        quad_err: (value - value_c).abs(),
        tail_bound: tail_bound(u_grid, &region.z0, t0 - t_lo) * (t_hi - t_lo),
    })
}

/// Generic strip quadrature of a closed-form space-time integrand
/// `f(x, t) G_{z0}` with a supplied `t -> t0^-` slice limit.
pub fn strip_integral_fn(
    grid: &GridSpec,
    region: &StripRegion,
    f: impl Fn(&[f64; 3], f64) -> f64,
    base_limit: f64,
) -> Result<QuadValue, GeometryError> {
    let stored: Vec<usize> = (0..=grid.time_steps).collect();
    strip_integral_driver(
        grid,
        &stored,
        region,
        |_, t, stride| slice_sum(grid, &region.z0, t, stride, |_, x| f(x, t)),
        base_limit,
    )
}

/// `int_{strip} u^2 G_{z0}`.
pub fn strip_mass_sq(u: &ScalarField, region: &StripRegion) -> Result<QuadValue, GeometryError> {
    let g = u.grid();
    let limit = {
        let v = u.sample(&region.z0.x, region.z0.t);
        v * v
    };
    strip_integral_driver(
        g,
        u.stored_levels(),
        region,
        |k, t, stride| {
            let s = u.slice(k).expect("stored");
            slice_sum(g, &region.z0, t, stride, |flat, _| s[flat] * s[flat])
        },
        limit,
    )
}

/// `int_{strip} 2 (t0 - t) |grad u|^2 G_{z0}` with the even-extended gradient.
pub fn strip_grad_energy(
    u: &ScalarField,
    region: &StripRegion,
) -> Result<QuadValue, GeometryError> {
    let g = u.grid();
    let len = g.slice_len();
    strip_integral_driver(
        g,
        u.stored_levels(),
        region,
        |k, t, stride| {
            let grad = u.gradient_slice(k);
            let lag = region.z0.t - t;
            slice_sum(g, &region.z0, t, stride, |flat, _| {
                let mut s2 = 0.0;
                for d in 0..g.dim {
                    let gv = grad[d * len + flat];
                    s2 += gv * gv;
                }
                2.0 * lag * s2
            })
        },
        0.0,
    )
}

/// `int_{strip} (u - v)^2 G_{z0}` for two fields on the same spatial grid;
/// `v` is interpolated in time on its own stored levels.
pub fn strip_diff_sq(
    u: &ScalarField,
    v: &ScalarField,
    region: &StripRegion,
) -> Result<QuadValue, GeometryError> {
    let g = u.grid();
    let limit = {
        let du = u.sample(&region.z0.x, region.z0.t) - v.sample(&region.z0.x, region.z0.t);
        du * du
    };
    strip_integral_driver(
        g,
        u.stored_levels(),
        region,
        |k, t, stride| {
            let su = u.slice(k).expect("stored");
            let kv = v.grid().nearest_time_level(t);
            match v.slice(kv) {
                Some(sv) if (v.grid().time(kv) - t).abs() < 1e-9 => {
                    slice_sum(g, &region.z0, t, stride, |flat, _| {
                        let d = su[flat] - sv[flat];
                        d * d
                    })
                }
                _ => slice_sum(g, &region.z0, t, stride, |flat, x| {
                    let d = su[flat] - v.sample(x, t);
                    d * d
                }),
            }
        },
        limit,
    )
}

/// `int_{strip} (t0 - t) |grad(u - v)|^2 G_{z0}` (no factor 2), same-grid fields.
pub fn strip_grad_diff_energy(
    u: &ScalarField,
    v: &ScalarField,
    region: &StripRegion,
) -> Result<QuadValue, GeometryError> {
    let g = u.grid();
    let len = g.slice_len();
    strip_integral_driver(
        g,
        u.stored_levels(),
        region,
        |k, t, stride| {
            let gu = u.gradient_slice(k);
            let kv = v.grid().nearest_time_level(t);
            debug_assert!((v.grid().time(kv) - t).abs() < 1e-9);
            let gv = v.gradient_slice(kv);
            let lag = region.z0.t - t;
            slice_sum(g, &region.z0, t, stride, |flat, _| {
                let mut s2 = 0.0;
                for d in 0..g.dim {
                    let dg = gu[d * len + flat] - gv[d * len + flat];
                    s2 += dg * dg;
                }
                lag * s2
            })
        },
        0.0,
    )
}

/// `int_{S_r(t0)} (kappa u - (x-x0).grad u - 2(t-t0) dt u)(u - w) G_{z0}`,
/// the pairing of the homogeneity operator against a competitor difference.
pub fn strip_pairing(
    u: &ScalarField,
    w: &ScalarField,
    kappa: f64,
    region: &StripRegion,
) -> Result<QuadValue, GeometryError> {
    let g = u.grid();
    let len = g.slice_len();
    let limit = {
        let uv = u.sample(&region.z0.x, region.z0.t);
        let wv = w.sample(&region.z0.x, region.z0.t);
        kappa * uv * (uv - wv)
    };
    strip_integral_driver(
        g,
        u.stored_levels(),
        region,
        |k, t, stride| {
            let su = u.slice(k).expect("stored");
            let grad = u.gradient_slice(k);
            let dtu = u.time_derivative_slice(k);
            let kw = w.grid().nearest_time_level(t);
            let sw_ok = w
                .slice(kw)
                .filter(|_| (w.grid().time(kw) - t).abs() < 1e-9);
            let z0 = region.z0;
            slice_sum(g, &z0, t, stride, |flat, x| {
                let mut xdg = 0.0;
                for d in 0..g.dim {
                    xdg += (x[d] - z0.x[d]) * grad[d * len + flat];
                }
                let expr = kappa * su[flat] - xdg - 2.0 * (t - z0.t) * dtu[flat];
                let wv = match sw_ok {
                    Some(sw) => sw[flat],
                    None => w.sample(x, t),
                };
                expr * (su[flat] - wv)
            })
        },
        limit,
    )
}

/// Spatial slice integral `int u^2 G_{z0}(., t)` at the stored level nearest `t`.
pub fn slice_mass_sq(u: &ScalarField, z0: &BasePoint, t: f64) -> QuadValue {
    let g = u.grid();
    let k = g.nearest_time_level(t);
    let s = u.slice(k).expect("stored level near requested slice time");
    let t = g.time(k);
    let fine = slice_sum(g, z0, t, 1, |flat, _| s[flat] * s[flat]);
    let coarse = slice_sum(g, z0, t, 2, |flat, _| s[flat] * s[flat]);
    QuadValue {
        value: fine,
        quad_err: (fine - coarse).abs(),
        tail_bound: tail_bound(g, z0, z0.t - t),
    }
}

/// Spatial slice integral `int |grad u|^2 G_{z0}(., t)` (no factor 2).
pub fn slice_grad_sq(u: &ScalarField, z0: &BasePoint, t: f64) -> QuadValue {
    let g = u.grid();
    let len = g.slice_len();
    let k = g.nearest_time_level(t);
    let grad = u.gradient_slice(k);
    let t = g.time(k);
    let f = |flat: usize, _x: &[f64; 3]| {
        let mut s2 = 0.0;
        for d in 0..g.dim {
            let gv = grad[d * len + flat];
            s2 += gv * gv;
        }
        s2
    };
    let fine = slice_sum(g, z0, t, 1, f);
    let coarse = slice_sum(g, z0, t, 2, f);
    QuadValue {
        value: fine,
        quad_err: (fine - coarse).abs(),
        tail_bound: tail_bound(g, z0, z0.t - t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BasePoint, GridSpec, ScalarField, TimeSampling};

    fn origin() -> BasePoint {
        BasePoint::origin()
    }

    #[test]
    fn kernel_normalization_resolved_times() {
        // |int G dx - 1| small wherever L >= 6 sqrt(lag) holds with margin
        let g = GridSpec::standard(2, 6.0, 193, 256);
        for t in [-0.04, -0.25, -0.5] {
            let q = slice_integral_fn(&g, &origin(), t, |_| 1.0);
            assert!(
                (q.value - 1.0).abs() < 1e-6,
                "normalization off at t={t}: {}",
                q.value
            );
        }
    }

    #[test]
    fn gaussian_second_moment() {
        let g = GridSpec::standard(2, 6.0, 193, 256);
        for t in [-0.04, -0.25] {
            let q = slice_integral_fn(&g, &origin(), t, |x| x[0] * x[0]);
            assert!(
                (q.value - 2.0 * (-t)).abs() < 1e-5,
                "moment off at t={t}: {}",
                q.value
            );
        }
    }

    #[test]
    fn strip_of_one_is_band_length() {
        let g = GridSpec::standard(2, 6.0, 193, 256);
        let reg = StripRegion::full(origin(), 0.5).unwrap();
        let q = strip_integral_fn(&g, &reg, |_, _| 1.0, 1.0).unwrap();
        assert!((q.value - 0.25).abs() < 1e-6, "got {}", q.value);
    }

    #[test]
    fn strip_x1_squared_is_r4() {
        // int_{S_r} x1^2 G = int_0^{r^2} 2 s ds = r^4
        let g = GridSpec::standard(2, 6.0, 193, 256);
        let u = ScalarField::from_fn(g, TimeSampling::Full, false, |x, _| x[0]);
        let reg = StripRegion::full(origin(), 0.5).unwrap();
        let q = strip_mass_sq(&u, &reg).unwrap();
        assert!((q.value - 0.0625).abs() < 2e-6, "got {}", q.value);
    }

    #[test]
    fn empty_band_is_zero() {
        let g = GridSpec::standard(2, 6.0, 65, 64);
        let reg = StripRegion::new(origin(), 0.3, 0.3).unwrap();
        let q = strip_integral_fn(&g, &reg, |_, _| 123.0, 123.0).unwrap();
        assert_eq!(q.value, 0.0);
    }

    #[test]
    fn out_of_range_band_rejected() {
        let g = GridSpec::standard(2, 6.0, 65, 64);
        let reg = StripRegion::full(origin(), 1.5).unwrap();
        assert!(matches!(
            strip_integral_fn(&g, &reg, |_, _| 1.0, 1.0),
            Err(GeometryError::RegionOutOfRange { .. })
        ));
    }

    #[test]
    fn strip_symmetric_under_mirror() {
        // even integrand: value unchanged under x_n -> -x_n at node level
        let g = GridSpec::standard(2, 3.0, 97, 128);
        let u = ScalarField::from_fn(g, TimeSampling::Full, true, |x, _| {
            x[1].abs().powf(1.5) + x[0] * x[0]
        });
        let reg = StripRegion::full(origin(), 0.4).unwrap();
        let a = strip_mass_sq(&u, &reg).unwrap().value;
        // mirrored field is identical by the even invariant
        let um = u.map(|v| v);
        let b = strip_mass_sq(&um, &reg).unwrap().value;
        assert_eq!(a, b);
    }

    #[test]
    fn tail_bound_shrinks_with_box() {
        let lag = 1.0;
        let g6 = GridSpec::standard(2, 6.0, 65, 8);
        let g9 = GridSpec::standard(2, 9.0, 97, 8);
        let t6 = tail_bound(&g6, &origin(), lag);
        let t9 = tail_bound(&g9, &origin(), lag);
        assert!(t9 < t6);
        assert!(t6 <= 4.0 * (-36.0_f64 / 8.0).exp() + 1e-12);
    }
}
