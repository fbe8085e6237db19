use crate::geometry::{BasePoint, ScalarField};

/// Positivity threshold on the thin space: ten times the default PSOR
/// tolerance.
pub const POS_TOL: f64 = 1e-9;

/// Thin-grid free-boundary locations at one stored level: nodes where the
/// indicator of `{u > pos_tol}` changes across a tangential neighbor.
pub fn extract_free_boundary_at_level(u: &ScalarField, level: usize) -> Vec<BasePoint> {
    let g = u.grid();
    let mid = g.center();
    let t = g.time(level);
    let s = match u.slice(level) {
        Some(s) => s,
        None => return Vec::new(),
    };
    let mut out = Vec::new();
    let dim = g.dim;
    // iterate tangential indices (interior only)
    let mut idx = [0usize; 3];
    idx[dim - 1] = mid;
    let mut walk = vec![1usize; dim - 1];
    loop {
        for d in 0..dim - 1 {
            idx[d] = walk[d];
        }
        let here = s[g.flat(&idx[..dim])] > POS_TOL;
        let mut boundary = false;
        for d in 0..dim - 1 {
            for step in [-1isize, 1] {
                let mut nidx = idx;
                let ni = idx[d] as isize + step;
                if ni < 0 || ni as usize >= g.nodes {
                    continue;
                }
                nidx[d] = ni as usize;
                if (s[g.flat(&nidx[..dim])] > POS_TOL) != here {
                    boundary = true;
                }
            }
        }
        if boundary {
            let mut x = [0.0f64; 3];
            for d in 0..dim - 1 {
                x[d] = g.coord(idx[d]);
            }
            out.push(BasePoint::new(x, t));
        }
        // advance the tangential walker
        let mut d = 0;
        loop {
            walk[d] += 1;
            if walk[d] < g.nodes - 1 {
                break;
            }
            walk[d] = 1;
            d += 1;
            if d == dim - 1 {
                return out;
            }
        }
    }
}

/// Free-boundary locations over all stored levels.
pub fn extract_free_boundary(u: &ScalarField) -> Vec<BasePoint> {
    let mut out = Vec::new();
    for &k in u.stored_levels() {
        out.extend(extract_free_boundary_at_level(u, k));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::CalibrationField;
    use crate::geometry::{GridSpec, TimeSampling};

    #[test]
    fn profile_boundary_at_origin_line() {
        // contact set {x1 <= 0}: boundary within one cell of x1 = 0, at
        // every time level
        let g = GridSpec::standard(2, 1.5, 49, 8);
        let u = CalibrationField::Profile.field(g.clone(), TimeSampling::Full);
        let pts = extract_free_boundary_at_level(&u, 8);
        assert!(!pts.is_empty());
        for p in &pts {
            assert!(p.x[0].abs() <= g.h() + 1e-12, "off-line point {:?}", p.x);
        }
    }

    #[test]
    fn positive_field_has_empty_boundary() {
        let g = GridSpec::standard(2, 1.5, 33, 4);
        let u = CalibrationField::Constant.field(g, TimeSampling::Full);
        assert!(extract_free_boundary(&u).is_empty());
    }

    #[test]
    fn zero_field_has_empty_boundary() {
        let g = GridSpec::standard(2, 1.5, 33, 4);
        let u = CalibrationField::Constant
            .field(g, TimeSampling::Full)
            .map(|_| 0.0);
        assert!(extract_free_boundary(&u).is_empty());
    }

    #[test]
    fn works_in_three_dimensions() {
        let g = GridSpec::standard(3, 1.2, 25, 4);
        let u = CalibrationField::Profile.field(g.clone(), TimeSampling::Full);
        let pts = extract_free_boundary_at_level(&u, 4);
        assert!(!pts.is_empty());
        for p in &pts {
            assert!(p.x[0].abs() <= g.h() + 1e-12);
        }
    }
}
