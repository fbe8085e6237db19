use serde::{Deserialize, Serialize};

use super::{FreeBoundaryError, FreeBoundaryPoint, PointClass};

/// Pairwise blowup-dependence table: parabolic distance against amplitude
/// and direction differences, with a fitted Hoelder exponent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DependenceTable {
    /// Rows `(||z1 - z2||, |c1 - c2|, |e1 - e2|)`.
    pub rows: Vec<(f64, f64, f64)>,
    /// Fitted exponent of `max(|dc|, |de|) ~ C ||dz||^gamma`, when the
    /// differences rise above the noise floor.
    pub fitted_exponent: Option<f64>,
}

const DIFF_NOISE: f64 = 1e-9;

/// Tabulate pairwise blowup differences over Regular points with profiles.
pub fn blowup_dependence(points: &[FreeBoundaryPoint]) -> Result<DependenceTable, FreeBoundaryError> {
    let regular: Vec<&FreeBoundaryPoint> = points
        .iter()
        .filter(|p| p.class == PointClass::Regular && p.profile.is_some())
        .collect();
    if regular.len() < 2 {
        return Err(FreeBoundaryError::InsufficientPoints {
            need: 2,
            have: regular.len(),
        });
    }
    let dim = 3; // parabolic norm uses only stored coordinates; zeros are inert
    let mut rows = Vec::new();
    let mut pairs = Vec::new();
    for i in 0..regular.len() {
        for j in i + 1..regular.len() {
            let (a, b) = (regular[i], regular[j]);
            let dz = a.z0.parabolic_dist(&b.z0, dim);
            let (pa, pb) = (a.profile.as_ref().unwrap(), b.profile.as_ref().unwrap());
            let dc = (pa.c - pb.c).abs();
            let de = ((pa.e[0] - pb.e[0]).powi(2) + (pa.e[1] - pb.e[1]).powi(2)).sqrt();
            rows.push((dz, dc, de));
            pairs.push((dz, dc.max(de)));
        }
    }
    let fitted_exponent = super::fitting::envelope_exponent(&pairs, DIFF_NOISE);
    Ok(DependenceTable {
        rows,
        fitted_exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BasePoint;
    use crate::rescaling::HomogeneousProfile;

    fn mk(x1: f64, c: f64, phi: f64) -> FreeBoundaryPoint {
        FreeBoundaryPoint {
            z0: BasePoint::new([x1, 0.0, 0.0], 0.0),
            kappa_hat: 1.5,
            confidence: 1.0,
            class: PointClass::Regular,
            profile: Some(HomogeneousProfile {
                c,
                e: [phi.cos(), phi.sin()],
                residual: 0.01,
            }),
            radius_used: 0.4,
            radii_count: 5,
            note: String::new(),
        }
    }

    #[test]
    fn identical_blowups_give_zero_rows() {
        let pts = vec![mk(0.0, 1.0, 0.0), mk(0.2, 1.0, 0.0), mk(0.4, 1.0, 0.0)];
        let t = blowup_dependence(&pts).unwrap();
        for (_, dc, de) in &t.rows {
            assert_eq!(*dc, 0.0);
            assert_eq!(*de, 0.0);
        }
        assert!(t.fitted_exponent.is_none());
    }

    #[test]
    fn synthesized_family_recovers_exponent() {
        // c(x1) = 1 + |x1|^{0.7}: differences scale with exponent 0.7
        let gamma = 0.7;
        let pts: Vec<FreeBoundaryPoint> = (0..12)
            .map(|i| {
                let x = i as f64 * 0.05;
                mk(x, 1.0 + x.powf(gamma), 0.0)
            })
            .collect();
        let t = blowup_dependence(&pts).unwrap();
        let g = t.fitted_exponent.unwrap();
        assert!((g - gamma).abs() < 0.1, "fitted {g}");
        assert!(g > 0.0);
    }

    #[test]
    fn single_point_rejected() {
        let pts = vec![mk(0.0, 1.0, 0.0)];
        assert!(matches!(
            blowup_dependence(&pts),
            Err(FreeBoundaryError::InsufficientPoints { .. })
        ));
    }
}
