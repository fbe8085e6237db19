use crate::geometry::{GeometryError, ScalarField};

/// Quintic smoothstep, clamped: `s(q) = 6q^5 - 15q^4 + 10q^3` on `[0,1]`.
fn smoothstep(q: f64) -> f64 {
    if q <= 0.0 {
        0.0
    } else if q >= 1.0 {
        1.0
    } else {
        q * q * q * (10.0 + q * (-15.0 + 6.0 * q))
    }
}

/// The standard radial cutoff `psi(x) = s(2 - 2|x|)`: identically 1 on
/// `B_{1/2}`, supported in `B_1`.
pub fn cutoff_value(x: &[f64; 3], dim: usize) -> f64 {
    let r: f64 = x[..dim].iter().map(|v| v * v).sum::<f64>().sqrt();
    smoothstep(2.0 - 2.0 * r)
}

/// Multiply a field by the radial cutoff. The product of an almost
/// minimizer with this cutoff satisfies the weighted almost-Signorini
/// property on the full strip.
pub fn cutoff_multiply(u: &ScalarField) -> ScalarField {
    let dim = u.grid().dim;
    u.map_with_coords(move |v, x| v * cutoff_value(x, dim))
}

/// Spatial convolution with a compactly supported normalized bump of radius
/// `mu` (discrete stencil, renormalized over in-box nodes; even symmetry and
/// constants are preserved exactly, linear fields away from the faces).
pub fn mollify(u: &ScalarField, mu: f64) -> Result<ScalarField, GeometryError> {
    let g = u.grid().clone();
    let h = g.h();
    if mu < h {
        return Err(GeometryError::InvalidGrid(format!(
            "mollifier radius {mu} below mesh width {h}"
        )));
    }
    let reach = (mu / h).floor() as isize;
    // bump profile (1 - s^2)^3 sampled on the stencil
    let mut stencil: Vec<(Vec<isize>, f64)> = Vec::new();
    let mut offsets = vec![0isize; g.dim];
    build_stencil(&mut stencil, &mut offsets, 0, reach, mu, h, g.dim);
    let total: f64 = stencil.iter().map(|(_, w)| w).sum();
    for (_, w) in stencil.iter_mut() {
        *w /= total;
    }

    let n = g.nodes as isize;
    let len = g.slice_len();
    let mid = g.center();
    let levels: Vec<usize> = u.stored_levels().to_vec();
    let mut new_data = Vec::with_capacity(levels.len() * len);
    for &k in &levels {
        let s = u.slice(k).unwrap();
        let row_start = new_data.len();
        for flat in 0..len {
            let idx = g.unflat(flat);
            // for an even field compute only x_n >= 0 and mirror afterwards,
            // so the symmetry invariant survives node-exactly
            if u.even_xn() && idx[g.dim - 1] < mid {
                new_data.push(0.0);
                continue;
            }
            let mut acc = 0.0;
            let mut wsum = 0.0;
            for (off, w) in &stencil {
                let mut nidx = [0usize; 3];
                let mut ok = true;
                for d in 0..g.dim {
                    let ii = idx[d] as isize + off[d];
                    if ii < 0 || ii >= n {
                        ok = false;
                        break;
                    }
                    nidx[d] = ii as usize;
                }
                if ok {
                    acc += w * s[g.flat(&nidx[..g.dim])];
                    wsum += w;
                }
            }
            new_data.push(if wsum > 0.0 { acc / wsum } else { s[flat] });
        }
        if u.even_xn() {
            crate::geometry::mirror_slice(&g, &mut new_data[row_start..row_start + len]);
        }
    }
    ScalarField::from_slices(g, u.even_xn(), levels, new_data)
}

fn build_stencil(
    stencil: &mut Vec<(Vec<isize>, f64)>,
    offsets: &mut Vec<isize>,
    d: usize,
    reach: isize,
    mu: f64,
    h: f64,
    dim: usize,
) {
    if d == dim {
        let mut s2 = 0.0;
        for &o in offsets.iter() {
            let x = o as f64 * h / mu;
            s2 += x * x;
        }
        if s2 < 1.0 {
            let w = (1.0 - s2).powi(3);
            stencil.push((offsets.clone(), w));
        }
        return;
    }
    for o in -reach..=reach {
        offsets[d] = o;
        build_stencil(stencil, offsets, d + 1, reach, mu, h, dim);
    }
}
