use crate::geometry::{mirror_slice, ScalarField};

use super::RescaleError;

/// Parabolically `kappa`-homogeneous replacement of `u` in `S_r`:
///
/// `w(x,t) = (sqrt(-t)/r)^kappa u(r x / sqrt(-t), -r^2)`
///
/// It agrees with `u` on the slice `t = -r^2` (node-exactly when `r^2` is a
/// grid time), satisfies `kappa w - x . grad w - 2 t dt w = 0`, and its
/// self-similar transform is `tau`-independent. Arguments beyond the box are
/// clamped to the boundary value of the slice.
///
/// The returned field lives on a band grid over `[-r^2, 0]` with `u`'s
/// spatial layout and time step.
pub fn homogeneous_replacement(
    u: &ScalarField,
    r: f64,
    kappa: f64,
) -> Result<ScalarField, RescaleError> {
    let g = u.grid().clone();
    let t_slice = -r * r;
    if t_slice < g.t_start - 1e-9 * g.tau() {
        return Err(RescaleError::RegionOutOfRange(format!(
            "slice t=-r^2={} below grid start {}",
            t_slice, g.t_start
        )));
    }
    let k_slice = g.nearest_time_level(t_slice);
    let slice = u
        .slice(k_slice)
        .ok_or_else(|| RescaleError::RegionOutOfRange("slice level not stored".into()))?
        .to_vec();
    let r_grid = (-g.time(k_slice)).sqrt();

    let steps = g.time_steps - k_slice;
    let band = crate::geometry::GridSpec::new(g.dim, g.half_width, g.nodes, g.time(k_slice), steps)
        .map_err(RescaleError::from)?;
    let len = band.slice_len();
    let mid = band.center();
    let levels: Vec<usize> = (0..=steps).collect();
    let mut data = Vec::with_capacity(levels.len() * len);
    for &k in &levels {
        let t = band.time(k);
        let row_start = data.len();
        if t >= -1e-300 {
            // kappa > 0: w -> 0 at the base time
            data.extend(std::iter::repeat(0.0).take(len));
            continue;
        }
        let s = (-t).sqrt();
        let amp = (s / r_grid).powf(kappa);
        for flat in 0..len {
            let idx = band.unflat(flat);
            if u.even_xn() && idx[band.dim - 1] < mid {
                data.push(0.0);
                continue;
            }
            let x = band.node_coords(flat);
            let mut xs = [0.0f64; 3];
            for d in 0..band.dim {
                xs[d] = (r_grid * x[d] / s).clamp(-g.half_width, g.half_width);
            }
            data.push(amp * sample_slice_multilinear(&g, &slice, &xs));
        }
        if u.even_xn() {
            mirror_slice(&band, &mut data[row_start..row_start + len]);
        }
    }
    ScalarField::from_slices(band, u.even_xn(), levels, data).map_err(RescaleError::from)
}

fn sample_slice_multilinear(
    g: &crate::geometry::GridSpec,
    slice: &[f64],
    x: &[f64; 3],
) -> f64 {
    let h = g.h();
    let mut i0 = [0usize; 3];
    let mut frac = [0.0f64; 3];
    for d in 0..g.dim {
        let pos = (x[d].clamp(-g.half_width, g.half_width) + g.half_width) / h;
        let base = pos.floor().min((g.nodes - 2) as f64).max(0.0);
        i0[d] = base as usize;
        frac[d] = (pos - base).clamp(0.0, 1.0);
    }
    let mut acc = 0.0;
    for c in 0..(1usize << g.dim) {
        let mut idx = [0usize; 3];
        let mut w = 1.0;
        for d in 0..g.dim {
            if c >> d & 1 == 1 {
                idx[d] = i0[d] + 1;
                w *= frac[d];
            } else {
                idx[d] = i0[d];
                w *= 1.0 - frac[d];
            }
        }
        acc += w * slice[g.flat(&idx[..g.dim])];
    }
    acc
}

/// Max-node residual of the homogeneity identity
/// `kappa w - x . grad w - 2 t dt w = 0` over the interior of the band.
///
/// Nodes whose replacement argument `r x / sqrt(-t)` left the box (clamped
/// by the truncation) are excluded: the identity belongs to the untruncated
/// formula. The first and last levels are excluded too (one-sided time
/// differences onto the band ends).
pub fn homogeneity_residual(w: &ScalarField, kappa: f64) -> f64 {
    let g = w.grid();
    let len = g.slice_len();
    let r_grid = (-g.t_start).sqrt();
    let mut worst = 0.0f64;
    let levels = w.stored_levels();
    for (pos, &k) in levels.iter().enumerate() {
        if pos == 0 || pos + 1 >= levels.len() {
            continue;
        }
        let t = g.time(k);
        if t >= -1e-12 {
            continue;
        }
        let keep = 0.98 * g.half_width * (-t).sqrt() / r_grid;
        let s = w.slice(k).unwrap();
        let grad = w.gradient_slice(k);
        let dt = w.time_derivative_slice(k);
        for flat in 0..len {
            let idx = g.unflat(flat);
            // skip face nodes (one-sided gradients) and the thin plane kink
            let mut skip = idx[g.dim - 1] == g.center();
            for d in 0..g.dim {
                if idx[d] == 0 || idx[d] == g.nodes - 1 {
                    skip = true;
                }
            }
            if skip {
                continue;
            }
            let x = g.node_coords(flat);
            if x[..g.dim].iter().any(|v| v.abs() > keep) {
                continue;
            }
            let mut xg = 0.0;
            for d in 0..g.dim {
                xg += x[d] * grad[d * len + flat];
            }
            let res = kappa * s[flat] - xg - 2.0 * t * dt[flat];
            worst = worst.max(res.abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::CalibrationField;
    use crate::geometry::{GridSpec, TimeSampling};

    #[test]
    fn homogeneous_source_is_fixed_point() {
        let g = GridSpec::standard(2, 2.0, 97, 256);
        let u = CalibrationField::Profile.field(g.clone(), TimeSampling::Full);
        let r = 0.5;
        let w = homogeneous_replacement(&u, r, 1.5).unwrap();
        let mut worst = 0.0f64;
        for &k in w.stored_levels() {
            let t = w.grid().time(k);
            if t >= -0.01 {
                continue;
            }
            let sw = w.slice(k).unwrap();
            let ku = g.nearest_time_level(t);
            let su = u.slice(ku).unwrap();
            // compare inside the window |x| <= L sqrt(-t)/r where no clamp acts
            let keep = g.half_width * (-t).sqrt() / r;
            for flat in 0..g.slice_len() {
                let x = g.node_coords(flat);
                if x[0].abs() < keep && x[1].abs() < keep {
                    worst = worst.max((sw[flat] - su[flat]).abs());
                }
            }
        }
        assert!(worst < 2e-3, "fixed point drift {worst}");
    }

    #[test]
    fn slice_agreement_is_node_exact() {
        let g = GridSpec::standard(2, 2.0, 65, 64);
        let u = CalibrationField::Degree2.field(g.clone(), TimeSampling::Full);
        let r = 0.5; // r^2 = 0.25 = 16 tau: a grid time
        let w = homogeneous_replacement(&u, r, 2.0).unwrap();
        let sw = w.slice(0).unwrap();
        let su = u.slice(g.nearest_time_level(-0.25)).unwrap();
        for (a, b) in sw.iter().zip(su) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_source_formula() {
        // u = c: w = (sqrt(-t)/r)^{3/2} c
        let g = GridSpec::standard(2, 2.0, 33, 64);
        let u = CalibrationField::Constant.field(g.clone(), TimeSampling::Full);
        let r = 0.5;
        let w = homogeneous_replacement(&u, r, 1.5).unwrap();
        for &k in w.stored_levels() {
            let t = w.grid().time(k);
            if t >= -1e-12 {
                continue;
            }
            let expect = ((-t).sqrt() / r).powf(1.5);
            let s = w.slice(k).unwrap();
            for &v in s.iter().step_by(17) {
                assert!((v - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn homogeneity_identity_residual_small() {
        let g = GridSpec::standard(2, 2.0, 129, 256);
        let u = CalibrationField::Degree2.field(g, TimeSampling::Full);
        let w = homogeneous_replacement(&u, 0.5, 2.0).unwrap();
        let res = homogeneity_residual(&w, 2.0);
        let scale = w.sup_abs();
        let g2 = w.grid();
        let bound = 8.0 * (g2.h() + g2.tau()) * scale.max(1.0);
        assert!(res <= bound, "residual {res} vs bound {bound}");
    }
}
