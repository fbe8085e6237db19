use crate::geometry::{GeometryError, GridSpec, ScalarField};

use super::psor::{HalfGrid, NodeKind, PsorWorkspace};
use super::{InstanceDescriptor, Solution, SolverError};

/// Solve the Signorini evolution on the strip `(t0 - r^2, t0]`: initial
/// slice `v = u` at the bottom, thin constraint `v >= 0` on the plane, and
/// `v = u` on the box faces (the truncation of weighted zero-extension of
/// `v - u`). Returns the replacement on its own band grid, with time levels
/// aligned to `u`'s grid.
pub fn solve_strip_replacement(
    u: &ScalarField,
    r: f64,
    t0: f64,
) -> Result<Solution, SolverError> {
    let g = u.grid().clone();
    let t_lo = t0 - r * r;
    if t_lo < g.t_start - 1e-9 * g.tau() {
        return Err(GeometryError::RegionOutOfRange {
            needed: t_lo,
            have: g.t_start,
        }
        .into());
    }
    // snap the initial slice to the stored level at or below t0 - r^2
    let k_init = u
        .level_at_or_below(t_lo)
        .ok_or(GeometryError::RegionOutOfRange {
            needed: t_lo,
            have: g.t_start,
        })?;
    let k_end = g.nearest_time_level(t0.min(0.0));
    if k_end <= k_init {
        return Err(SolverError::IncompatibleData(format!(
            "strip band (r={r}, t0={t0}) contains no time steps"
        )));
    }
    // the band must be densely stored on u's grid for boundary data
    for k in k_init..=k_end {
        if u.slice(k).is_none() {
            return Err(SolverError::IncompatibleData(format!(
                "source field has no stored slice at level {k} inside the strip"
            )));
        }
    }
    let steps = k_end - k_init;
    let band = GridSpec::new(g.dim, g.half_width, g.nodes, g.time(k_init) - t0.min(0.0), steps)
        .map_err(SolverError::Geometry)?;
    // band grid times are relative to end 0 = t0; shift handled by caller
    let ginit = u.slice(k_init).unwrap().to_vec();
    let gslices: Vec<&[f64]> = (k_init..=k_end).map(|k| u.slice(k).unwrap()).collect();

    let half = HalfGrid::new(band.clone());
    let len = half.len();
    let tau = band.tau();
    let mut ws = PsorWorkspace::new(half);
    let mut v = vec![0.0f64; len];
    let mut v_prev = vec![0.0f64; len];
    let mid = band.center();
    for i in 0..len {
        let idx = ws.half.unflat(i);
        let mut fidx = idx;
        fidx[band.dim - 1] = mid + idx[band.dim - 1];
        let mut val = ginit[band.flat(&fidx[..band.dim])];
        if ws.kinds()[i] == NodeKind::Thin {
            val = val.max(0.0);
        }
        v[i] = val;
    }

    let slice_len = band.slice_len();
    let mut levels = Vec::with_capacity(steps + 1);
    let mut data = Vec::with_capacity((steps + 1) * slice_len);
    let mut contact = Vec::new();
    let mut inner_iterations = Vec::new();
    let mut residuals = Vec::new();
    let tol_contact = 1e-9;

    let store = |k: usize, vh: &[f64], levels: &mut Vec<usize>, data: &mut Vec<f64>, contact: &mut Vec<Vec<bool>>, ws: &PsorWorkspace| {
        let mut full = vec![0.0f64; slice_len];
        ws.half.mirror_into_full(vh, &mut full);
        levels.push(k);
        data.extend_from_slice(&full);
        let mut c = Vec::new();
        for i in 0..vh.len() {
            if ws.half.unflat(i)[band.dim - 1] == 0 {
                c.push(vh[i] <= tol_contact);
            }
        }
        contact.push(c);
    };
    store(0, &v, &mut levels, &mut data, &mut contact, &ws);

    ws.assemble_diag(tau);
    for step in 1..=steps {
        std::mem::swap(&mut v, &mut v_prev);
        v.copy_from_slice(&v_prev);
        let src = gslices[step];
        for i in 0..len {
            if ws.kinds()[i] == NodeKind::Dirichlet {
                let idx = ws.half.unflat(i);
                let mut fidx = idx;
                fidx[band.dim - 1] = mid + idx[band.dim - 1];
                v[i] = src[band.flat(&fidx[..band.dim])];
            }
        }
        ws.set_rhs(&v_prev, tau, None);
        let out = ws.solve_step(&mut v, &v_prev, tau, 1.5, 1e-10, 100_000, None)?;
        inner_iterations.push(out.sweeps);
        residuals.push(out.complementarity_residual);
        store(step, &v, &mut levels, &mut data, &mut contact, &ws);
    }

    let field = ScalarField::from_slices(band, true, levels, data)?;
    Ok(Solution {
        field,
        inner_iterations,
        residuals,
        contact,
        descriptor: InstanceDescriptor::custom("strip-replacement"),
    })
}

/// Cross-validation path for the strip replacement: solve in conformal
/// self-similar variables, where the evolution becomes an Ornstein-Uhlenbeck
/// Signorini problem `dtau v + y/2 . grad v - Lap v / 4 = 0` that is
/// self-adjoint under the Gaussian weight `e^{-|y|^2}`, then map back.
///
/// Returns the replacement sampled on the same band layout as
/// [`solve_strip_replacement`].
pub fn solve_strip_selfsimilar(
    u: &ScalarField,
    r: f64,
    t0: f64,
    y_half_width: f64,
    y_nodes: usize,
    tau_steps: usize,
) -> Result<ScalarField, SolverError> {
    let g = u.grid().clone();
    if t0.abs() > 1e-12 {
        return Err(SolverError::IncompatibleData(
            "self-similar strip path requires base time 0".into(),
        ));
    }
    let t_lo = -r * r;
    if t_lo < g.t_start - 1e-9 * g.tau() {
        return Err(GeometryError::RegionOutOfRange {
            needed: t_lo,
            have: g.t_start,
        }
        .into());
    }
    // tau in [tau_min, tau_max]; t = -e^{-tau}
    let tau_min = -2.0 * r.ln();
    let k_init = u.level_at_or_below(t_lo).ok_or(GeometryError::RegionOutOfRange {
        needed: t_lo,
        have: g.t_start,
    })?;
    let k_end = g.time_steps;
    let t_end = g.time(k_end - 1); // stop one source level short of t = 0
    let tau_max = -(-t_end).ln();
    let dtau = (tau_max - tau_min) / tau_steps as f64;

    // y-grid, even in y_n, with the Ornstein-Uhlenbeck operator in flux form
    // weighted by e^{-|y|^2}
    let ygrid = GridSpec::new(g.dim, y_half_width, y_nodes, -1.0, 2).map_err(SolverError::Geometry)?;
    let half = HalfGrid::new(ygrid.clone());
    let len = half.len();
    let hy = ygrid.h();
    let dim = g.dim;
    let _ = k_init;

    // weighted-flux coefficients: flux_d = (1/4) e^{-|y_mid|^2}; row weight
    // e^{-|y_i|^2}; dividing through by the node weight keeps an SPD system:
    // diag and neighbor coefficients scaled by e^{-(|y_mid|^2 - |y_i|^2)}
    let mut ws = PsorWorkspace::new(half);
    for d in 0..dim {
        for i in 0..len {
            let y = ws.half.coords(i);
            let y2: f64 = y[..dim].iter().map(|v| v * v).sum();
            let mut yp = y;
            yp[d] += 0.5 * hy;
            let mut ym = y;
            ym[d] -= 0.5 * hy;
            let y2p: f64 = yp[..dim].iter().map(|v| v * v).sum();
            let y2m: f64 = ym[..dim].iter().map(|v| v * v).sum();
            ws.aplus[d][i] = 0.25 * (-(y2p - y2)).exp();
            ws.aminus[d][i] = 0.25 * (-(y2m - y2)).exp();
        }
    }
    ws.assemble_diag(dtau);

    // initial data: vtilde(y, tau_min) = u(2 e^{-tau_min/2} y, -e^{-tau_min})
    let scale0 = 2.0 * (-tau_min / 2.0).exp();
    let mut v = vec![0.0f64; len];
    for i in 0..len {
        let y = ws.half.coords(i);
        let mut x = [0.0f64; 3];
        for d in 0..dim {
            x[d] = scale0 * y[d];
        }
        v[i] = u.sample(&x, -(-tau_min).exp());
        if ws.kinds()[i] == NodeKind::Thin {
            v[i] = v[i].max(0.0);
        }
    }
    let mut v_prev = vec![0.0f64; len];

    // march in tau, recording slices mapped back to the band layout
    let band_steps = k_end - u.level_at_or_below(t_lo).unwrap();
    let band = GridSpec::new(
        g.dim,
        g.half_width,
        g.nodes,
        g.time(u.level_at_or_below(t_lo).unwrap()),
        band_steps,
    )
    .map_err(SolverError::Geometry)?;
    let slice_len = band.slice_len();
    let mut band_data = vec![0.0f64; (band_steps + 1) * slice_len];
    let levels: Vec<usize> = (0..=band_steps).collect();

    // helper: write the self-similar state into every band level whose time
    // falls in the tau step just completed
    let half_view = ws.half.clone();
    let band_view = band.clone();
    let levels_view = levels.clone();
    let write_band = move |tau_now: f64, v: &[f64], band_data: &mut [f64]| {
        let (band, levels) = (&band_view, &levels_view);
        for (row, &k) in levels.iter().enumerate() {
            let t = band.time(k);
            if t >= -1e-300 {
                continue;
            }
            let tau_t = -(-t).ln();
            if (tau_t - tau_now).abs() <= 0.5 * dtau + 1e-12 {
                let s = (-t).sqrt();
                for flat in 0..slice_len {
                    let x = band.node_coords(flat);
                    let mut y = [0.0f64; 3];
                    for d in 0..dim {
                        y[d] = x[d] / (2.0 * s);
                    }
                    // sample the half-grid self-similar state at y
                    band_data[row * slice_len + flat] = sample_half(&half_view, v, &y);
                }
            }
        }
    };
    write_band(tau_min, &v, &mut band_data);

    for step in 1..=tau_steps {
        std::mem::swap(&mut v, &mut v_prev);
        v.copy_from_slice(&v_prev);
        // lateral boundary in y: keep the previous value (weight is ~0 there)
        ws.set_rhs(&v_prev, dtau, None);
        let _ = ws.solve_step(&mut v, &v_prev, dtau, 1.5, 1e-10, 100_000, None)?;
        write_band(tau_min + step as f64 * dtau, &v, &mut band_data);
    }
    // final band level (t = 0): limit of the self-similar state at y ~ 0
    for flat in 0..slice_len {
        let x = band.node_coords(flat);
        let mut y = [0.0f64; 3];
        let s = (0.5 * band.tau()).sqrt();
        for d in 0..dim {
            y[d] = x[d] / (2.0 * s);
        }
        let row = band_steps;
        band_data[row * slice_len + flat] = sample_half(&ws.half, &v, &y);
    }

    ScalarField::from_slices(band, true, levels, band_data).map_err(SolverError::Geometry)
}

/// Multilinear sample of a half-grid state at a point `y` (absolute
/// coordinates; the normal coordinate is folded by evenness), clamped.
fn sample_half(half: &HalfGrid, v: &[f64], y: &[f64; 3]) -> f64 {
    let g = &half.grid;
    let dim = g.dim;
    let h = g.h();
    let mut pos = [0.0f64; 3];
    for d in 0..dim - 1 {
        pos[d] = (y[d].clamp(-g.half_width, g.half_width) + g.half_width) / h;
    }
    let yn = y[dim - 1].abs().clamp(0.0, g.half_width);
    pos[dim - 1] = yn / h;
    let mut i0 = [0usize; 3];
    let mut frac = [0.0f64; 3];
    for d in 0..dim {
        let cap = if d == dim - 1 {
            half.hn as f64 - 2.0
        } else {
            g.nodes as f64 - 2.0
        };
        let base = pos[d].floor().min(cap).max(0.0);
        i0[d] = base as usize;
        frac[d] = (pos[d] - base).clamp(0.0, 1.0);
    }
    let mut acc = 0.0;
    for c in 0..(1usize << dim) {
        let mut idx = [0usize; 3];
        let mut w = 1.0;
        for d in 0..dim {
            if c >> d & 1 == 1 {
                idx[d] = i0[d] + 1;
                w *= frac[d];
            } else {
                idx[d] = i0[d];
                w *= 1.0 - frac[d];
            }
        }
        // half-flat index
        let mut flat = 0usize;
        for d in 0..dim - 1 {
            flat = flat * g.nodes + idx[d];
        }
        flat = flat * half.hn + idx[dim - 1];
        acc += w * v[flat];
    }
    acc
}
