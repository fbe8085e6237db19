use serde::{Deserialize, Serialize};

use super::{FreeBoundaryError, FreeBoundaryPoint, PointClass};

/// Local graph description of the regular set: after rotating the mean
/// blowup direction onto `+x_{n-1}`, the free boundary is sampled as
/// `x_{n-1} = g(x'', t)` with a fitted tangential gradient per sample and a
/// parabolic Hoelder exponent estimate for that gradient.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularGraph {
    /// Chart direction (the rotated mean of the blowup directions).
    pub direction: [f64; 2],
    /// Samples `(x'', t, g)` in rotated coordinates; `x''` is empty in n=2.
    pub samples: Vec<([f64; 2], f64, f64)>,
    /// Fitted `grad'' g` per sample (finite windows of neighbors).
    pub gradients: Vec<[f64; 2]>,
    /// Estimated Hoelder exponent of `grad'' g` in the parabolic metric.
    pub gamma_hat: f64,
    /// Number of sample pairs entering the exponent estimate.
    pub pair_count: usize,
}

/// Noise floor under which gradient differences are treated as zero.
const GRAD_NOISE: f64 = 1e-9;

/// Fit the regular-set graph through classified Regular points.
///
/// Requires at least 8 Regular points whose directions lie within 30 degrees
/// of one another (chart openness); rotates so the mean direction is
/// `+x_{n-1}`, interpolates `g`, fits local least-squares planes for
/// `grad'' g`, and estimates the largest exponent `gamma` with
/// `|grad''g(z1) - grad''g(z2)| / ||z1 - z2||^gamma` bounded over pairs.
pub fn fit_regular_graph(points: &[FreeBoundaryPoint]) -> Result<RegularGraph, FreeBoundaryError> {
    let regular: Vec<&FreeBoundaryPoint> = points
        .iter()
        .filter(|p| p.class == PointClass::Regular && p.profile.is_some())
        .collect();
    if regular.len() < 8 {
        return Err(FreeBoundaryError::InsufficientPoints {
            need: 8,
            have: regular.len(),
        });
    }
    // mean direction and spread
    let mut mean = [0.0f64; 2];
    for p in &regular {
        let e = p.profile.as_ref().unwrap().e;
        mean[0] += e[0];
        mean[1] += e[1];
    }
    let norm = (mean[0] * mean[0] + mean[1] * mean[1]).sqrt();
    if norm == 0.0 {
        return Err(FreeBoundaryError::InconsistentDirections { spread_deg: 180.0 });
    }
    mean[0] /= norm;
    mean[1] /= norm;
    let mut worst_dot = 1.0f64;
    for p in &regular {
        let e = p.profile.as_ref().unwrap().e;
        let dot = (e[0] * mean[0] + e[1] * mean[1]).clamp(-1.0, 1.0);
        worst_dot = worst_dot.min(dot);
    }
    let spread_deg = worst_dot.acos().to_degrees();
    if spread_deg > 30.0 {
        return Err(FreeBoundaryError::InconsistentDirections { spread_deg });
    }

    // rotate so mean -> +x_{n-1}: in the tangential plane (x_1, .., x_{n-1})
    // the new (n-1)-coordinate is x' . mean, the residual tangential
    // coordinate is x' . mean_perp (n=3) or absent (n=2)
    let perp = [-mean[1], mean[0]];
    let mut samples = Vec::with_capacity(regular.len());
    for p in &regular {
        let x = p.z0.x;
        let g = x[0] * mean[0] + x[1] * mean[1];
        let xpp = [x[0] * perp[0] + x[1] * perp[1], 0.0];
        samples.push((xpp, p.z0.t, g));
    }

    // local least-squares plane g ~ a + b . x'' over parabolic neighborhoods
    let n_pts = samples.len();
    let mut gradients = Vec::with_capacity(n_pts);
    for i in 0..n_pts {
        // nearest neighbors in the parabolic metric (up to 6)
        let mut order: Vec<usize> = (0..n_pts).filter(|&j| j != i).collect();
        let dist = |a: usize, b: usize| -> f64 {
            let (xa, ta, _) = samples[a];
            let (xb, tb, _) = samples[b];
            let dx = xa[0] - xb[0];
            (dx * dx + (ta - tb).abs()).sqrt()
        };
        order.sort_by(|&a, &b| dist(i, a).partial_cmp(&dist(i, b)).unwrap());
        order.truncate(6);
        // 1-D weighted least squares in x'' (the time drift is absorbed in
        // the residual; only the spatial gradient is needed)
        let (xi, _, gi) = samples[i];
        let mut sxx = 0.0;
        let mut sxg = 0.0;
        for &j in &order {
            let (xj, _, gj) = samples[j];
            let dx = xj[0] - xi[0];
            sxx += dx * dx;
            sxg += dx * (gj - gi);
        }
        let b = if sxx > 1e-30 { sxg / sxx } else { 0.0 };
        gradients.push([b, 0.0]);
    }

    // sup-ratio exponent over pairs with signal above the noise floor
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for i in 0..n_pts {
        for j in i + 1..n_pts {
            let dgrad = (gradients[i][0] - gradients[j][0]).abs();
            let (xi, ti, _) = samples[i];
            let (xj, tj, _) = samples[j];
            let dx = xi[0] - xj[0];
            let dz = (dx * dx + (ti - tj).abs()).sqrt();
            pairs.push((dz, dgrad));
        }
    }
    let pair_count = pairs
        .iter()
        .filter(|&&(dz, df)| dz > 1e-12 && df > GRAD_NOISE)
        .count();
    // flat gradient fields leave nothing to fit: every exponent passes,
    // report the cap
    let gamma_hat = super::fitting::envelope_exponent(&pairs, GRAD_NOISE)
        .map(|g| g.clamp(0.0, 2.0))
        .unwrap_or(1.0);
    Ok(RegularGraph {
        direction: mean,
        samples,
        gradients,
        gamma_hat,
        pair_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BasePoint;
    use crate::rescaling::HomogeneousProfile;

    fn mk_point(x: [f64; 3], t: f64, e: [f64; 2], c: f64) -> FreeBoundaryPoint {
        FreeBoundaryPoint {
            z0: BasePoint::new(x, t),
            kappa_hat: 1.5,
            confidence: 1.0,
            class: PointClass::Regular,
            profile: Some(HomogeneousProfile {
                c,
                e,
                residual: 0.01,
            }),
            radius_used: 0.4,
            radii_count: 5,
            note: String::new(),
        }
    }

    #[test]
    fn linear_graph_passes_with_cap_exponent() {
        // straight free boundary in n=3: direction constant, g linear in x''
        let e = [0.6f64.cos(), 0.6f64.sin()];
        let perp = [-e[1], e[0]];
        let mut pts = Vec::new();
        for i in 0..10 {
            let s = -0.5 + i as f64 * 0.1;
            // point = s * perp (graph g = 0 over x'' = s)
            let x = [s * perp[0], s * perp[1], 0.0];
            pts.push(mk_point(x, -0.1 * (i % 3) as f64, e, 1.0));
        }
        let g = fit_regular_graph(&pts).unwrap();
        assert!((g.direction[0] - e[0]).abs() < 1e-12);
        for gr in &g.gradients {
            assert!(gr[0].abs() < 1e-9, "gradient should vanish: {}", gr[0]);
        }
        assert_eq!(g.gamma_hat, 1.0);
    }

    #[test]
    fn synthesized_hoelder_family_recovers_exponent() {
        // direction constant, graph g(x'') = |x''|^{1+gamma} so grad g has
        // Hoelder exponent gamma
        let gamma = 0.6;
        let e = [1.0, 0.0];
        let mut pts = Vec::new();
        for i in 0..14 {
            let s = -0.65 + i as f64 * 0.1;
            let g_val = s.abs().powf(1.0 + gamma);
            // x = g * e + s * perp, perp = (0, 1)
            let x = [g_val, s, 0.0];
            pts.push(mk_point(x, 0.0, e, 1.0));
        }
        let g = fit_regular_graph(&pts).unwrap();
        assert!(
            g.gamma_hat >= gamma - 0.1,
            "gamma_hat {} vs synthesis {gamma}",
            g.gamma_hat
        );
        assert!(g.pair_count > 10);
    }

    #[test]
    fn too_few_points_rejected() {
        let pts = vec![
            mk_point([0.0, 0.0, 0.0], 0.0, [1.0, 0.0], 1.0),
            mk_point([0.1, 0.0, 0.0], 0.0, [1.0, 0.0], 1.0),
        ];
        assert!(matches!(
            fit_regular_graph(&pts),
            Err(FreeBoundaryError::InsufficientPoints { .. })
        ));
    }

    #[test]
    fn inconsistent_directions_rejected() {
        let mut pts = Vec::new();
        for i in 0..10 {
            let phi = i as f64 * 0.35; // up to ~180 degrees apart
            pts.push(mk_point(
                [0.1 * i as f64, 0.0, 0.0],
                0.0,
                [phi.cos(), phi.sin()],
                1.0,
            ));
        }
        assert!(matches!(
            fit_regular_graph(&pts),
            Err(FreeBoundaryError::InconsistentDirections { .. })
        ));
    }
}
