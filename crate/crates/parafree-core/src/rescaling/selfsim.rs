use crate::geometry::{GridSpec, ScalarField};

use super::RescaleError;

/// A field in conformal self-similar coordinates:
/// `u_tilde(y, tau) = e^{kappa tau / 2} u(2 e^{-tau/2} y, -e^{-tau})` on a
/// grid over `[-Y, Y]^n x [tau_min, tau_max]` with `tau_min = -2 ln r`.
#[derive(Debug, Clone)]
pub struct SelfSimilarField {
    pub kappa: f64,
    pub y_half_width: f64,
    pub y_nodes: usize,
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_steps: usize,
    /// values[step * M^n + flat]
    pub values: Vec<f64>,
    pub dim: usize,
}

impl SelfSimilarField {
    pub fn y_h(&self) -> f64 {
        2.0 * self.y_half_width / (self.y_nodes - 1) as f64
    }

    pub fn dtau(&self) -> f64 {
        (self.tau_max - self.tau_min) / self.tau_steps as f64
    }

    pub fn slice(&self, step: usize) -> &[f64] {
        let len = self.y_nodes.pow(self.dim as u32);
        &self.values[step * len..(step + 1) * len]
    }

    pub fn y_coord(&self, i: usize) -> f64 {
        -self.y_half_width + i as f64 * self.y_h()
    }

    pub fn node_y(&self, flat: usize) -> [f64; 3] {
        let mut idx = [0usize; 3];
        let mut rest = flat;
        for d in (0..self.dim).rev() {
            idx[d] = rest % self.y_nodes;
            rest /= self.y_nodes;
        }
        let mut y = [0.0f64; 3];
        for d in 0..self.dim {
            y[d] = self.y_coord(idx[d]);
        }
        y
    }

    /// Max over nodes of `|dtau u_tilde|`, by forward differences (zero for
    /// kappa-homogeneous sources).
    pub fn max_tau_derivative(&self) -> f64 {
        let len = self.y_nodes.pow(self.dim as u32);
        let dt = self.dtau();
        let mut worst = 0.0f64;
        for s in 0..self.tau_steps {
            let (a, b) = (self.slice(s), self.slice(s + 1));
            for i in 0..len {
                worst = worst.max(((b[i] - a[i]) / dt).abs());
            }
        }
        worst
    }
}

/// Transform a field on `S_r` to conformal self-similar coordinates.
pub fn to_self_similar(
    u: &ScalarField,
    kappa: f64,
    r: f64,
    tau_max: f64,
    y_half_width: f64,
    y_nodes: usize,
    tau_steps: usize,
) -> Result<SelfSimilarField, RescaleError> {
    let g = u.grid();
    if r * r > -g.t_start + 1e-12 {
        return Err(RescaleError::RegionOutOfRange(format!(
            "strip radius {r} exceeds the grid time range"
        )));
    }
    let tau_min = -2.0 * r.ln();
    if 2.0 * r * y_half_width > g.half_width + 1e-12 {
        return Err(RescaleError::RegionOutOfRange(format!(
            "self-similar window 2 r Y = {} exceeds the box half-width {}",
            2.0 * r * y_half_width,
            g.half_width
        )));
    }
    if tau_max <= tau_min {
        return Err(RescaleError::RegionOutOfRange(format!(
            "tau_max {tau_max} must exceed tau_min {tau_min}"
        )));
    }
    let dim = g.dim;
    let len = y_nodes.pow(dim as u32);
    let mut values = vec![0.0f64; (tau_steps + 1) * len];
    let dtau = (tau_max - tau_min) / tau_steps as f64;
    for s in 0..=tau_steps {
        let tau = tau_min + s as f64 * dtau;
        let t = -(-tau).exp();
        let spatial_scale = 2.0 * (-tau / 2.0).exp();
        let amp = (kappa * tau / 2.0).exp();
        for flat in 0..len {
            let mut idx = [0usize; 3];
            let mut rest = flat;
            for d in (0..dim).rev() {
                idx[d] = rest % y_nodes;
                rest /= y_nodes;
            }
            let mut x = [0.0f64; 3];
            for d in 0..dim {
                let y = -y_half_width + idx[d] as f64 * 2.0 * y_half_width / (y_nodes - 1) as f64;
                x[d] = spatial_scale * y;
            }
            values[s * len + flat] = amp * u.sample(&x, t);
        }
    }
    Ok(SelfSimilarField {
        kappa,
        y_half_width,
        y_nodes,
        tau_min,
        tau_max,
        tau_steps,
        values,
        dim,
    })
}

/// Inverse transform: sample the self-similar field back at `(x, t)` points
/// of a target grid (round-trips within interpolation error).
pub fn from_self_similar(
    w: &SelfSimilarField,
    target: &GridSpec,
) -> Result<ScalarField, RescaleError> {
    let dim = w.dim;
    if target.dim != dim {
        return Err(RescaleError::RegionOutOfRange(
            "dimension mismatch in inverse transform".into(),
        ));
    }
    let len = target.slice_len();
    let levels: Vec<usize> = (0..=target.time_steps).collect();
    let mut data = Vec::with_capacity(levels.len() * len);
    for &k in &levels {
        let t = target.time(k);
        for flat in 0..len {
            if t >= 0.0 {
                // tau -> infinity limit is not sampled; extend by the last slice
                let x = target.node_coords(flat);
                data.push(sample_selfsim_at(w, &x, w.tau_max));
                continue;
            }
            let tau = -(-t).ln();
            let x = target.node_coords(flat);
            data.push(sample_selfsim_at(w, &x, tau));
        }
    }
    ScalarField::from_slices(target.clone(), false, levels, data).map_err(RescaleError::from)
}

fn sample_selfsim_at(w: &SelfSimilarField, x: &[f64; 3], tau: f64) -> f64 {
    let tau_cl = tau.clamp(w.tau_min, w.tau_max);
    let spatial_scale = 2.0 * (-tau_cl / 2.0).exp();
    let amp = (-w.kappa * tau_cl / 2.0).exp();
    // y = x / (2 e^{-tau/2})
    let hy = w.y_h();
    let len = w.y_nodes.pow(w.dim as u32);
    let pos_tau = (tau_cl - w.tau_min) / w.dtau();
    let s0 = (pos_tau.floor() as usize).min(w.tau_steps - 1);
    let ft = (pos_tau - s0 as f64).clamp(0.0, 1.0);
    let mut acc = 0.0;
    for (snap, wt) in [(s0, 1.0 - ft), (s0 + 1, ft)] {
        if wt == 0.0 {
            continue;
        }
        let sl = &w.values[snap * len..(snap + 1) * len];
        // multilinear in y
        let mut i0 = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for d in 0..w.dim {
            let y = (x[d] / spatial_scale).clamp(-w.y_half_width, w.y_half_width);
            let p = (y + w.y_half_width) / hy;
            let base = p.floor().min((w.y_nodes - 2) as f64).max(0.0);
            i0[d] = base as usize;
            frac[d] = (p - base).clamp(0.0, 1.0);
        }
        let mut v = 0.0;
        for c in 0..(1usize << w.dim) {
            let mut wgt = 1.0;
            let mut flat = 0usize;
            for d in 0..w.dim {
                let (i, f) = if c >> d & 1 == 1 {
                    (i0[d] + 1, frac[d])
                } else {
                    (i0[d], 1.0 - frac[d])
                };
                wgt *= f;
                flat = flat * w.y_nodes + i;
            }
            v += wgt * sl[flat];
        }
        acc += wt * v;
    }
    amp * acc
}
