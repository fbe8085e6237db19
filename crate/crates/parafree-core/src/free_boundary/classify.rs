use serde::{Deserialize, Serialize};

use crate::functionals::{evaluate_curve, frequency_limit, FunctionalError, WeissParams};
use crate::geometry::{BasePoint, ScalarField};
use crate::rescaling::{blowup, fit_profile, HomogeneousProfile, RescaleError};

use super::FreeBoundaryError;

/// Regular / non-regular decision for a free-boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointClass {
    Regular,
    NonRegular,
    Undetermined,
}

/// A classified thin-space free-boundary point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FreeBoundaryPoint {
    pub z0: BasePoint,
    pub kappa_hat: f64,
    pub confidence: f64,
    pub class: PointClass,
    pub profile: Option<HomogeneousProfile>,
    /// Largest radius of the frequency ladder used.
    pub radius_used: f64,
    pub radii_count: usize,
    pub note: String,
}

/// Knobs of the classification rule.
#[derive(Debug, Clone, Copy)]
pub struct ClassifyParams {
    /// Half-width of the frequency gap window around 3/2 and below 2.
    pub gap_tol: f64,
    /// Profile fit residual cap for a Regular verdict.
    pub fit_tol: f64,
    /// Confidence floor below which a verdict is withheld.
    pub confidence_floor: f64,
    /// Largest ladder radius (clipped by grid limits).
    pub r_start: f64,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        Self {
            gap_tol: 0.15,
            fit_tol: crate::rescaling::FIT_TOL,
            confidence_floor: 0.5,
            r_start: 0.4,
        }
    }
}

/// Radius ladder for frequency evaluation at a base point: geometric with
/// ratio `1/sqrt(2)` from the largest admissible radius down to the
/// quadrature floor `max(8h, sqrt(8 tau))` (below which the strip holds too
/// few cells for stable quadrature).
pub fn classification_radii(u: &ScalarField, z0: &BasePoint, r_start: f64) -> Vec<f64> {
    let g = u.grid();
    let h = g.h();
    let tau = g.tau();
    let floor = (8.0 * h).max((8.0 * tau).sqrt());
    let mut cap = r_start;
    // kernel tail control: box must cover ~6 sigma around the base point
    let mut dmin = f64::INFINITY;
    for d in 0..g.dim {
        dmin = dmin.min(g.half_width - z0.x[d].abs());
    }
    cap = cap.min(dmin / 6.0);
    // the strip must stay inside the time range
    cap = cap.min(((z0.t - g.t_start).max(0.0)).sqrt() * 0.999);
    let mut out = Vec::new();
    let mut r = cap;
    while r >= floor * 0.999 {
        out.push(r);
        r /= 2.0_f64.sqrt();
    }
    out.reverse();
    out
}

/// Classify a free-boundary point: build the frequency curve along the
/// ladder, extrapolate the limit, apply the 3/2-vs-2 gap rule, and attach a
/// blowup profile when a Regular verdict is plausible.
pub fn classify(
    u: &ScalarField,
    z0: &BasePoint,
    params: &WeissParams,
    rules: &ClassifyParams,
) -> Result<FreeBoundaryPoint, FreeBoundaryError> {
    let radii = classification_radii(u, z0, rules.r_start);
    let undetermined = |note: String, radii: &[f64]| FreeBoundaryPoint {
        z0: *z0,
        kappa_hat: f64::NAN,
        confidence: 0.0,
        class: PointClass::Undetermined,
        profile: None,
        radius_used: radii.last().copied().unwrap_or(0.0),
        radii_count: radii.len(),
        note,
    };
    if radii.len() < 5 {
        return Ok(undetermined(
            format!("only {} admissible radii", radii.len()),
            &radii,
        ));
    }
    let curve = match evaluate_curve(u, z0, &radii, params) {
        Ok(c) => c,
        Err(FunctionalError::DegenerateDenominator { .. }) => {
            return Ok(undetermined("degenerate strip mass".into(), &radii));
        }
        Err(e) => return Err(e.into()),
    };
    let limit = match frequency_limit(&curve) {
        Ok(l) => l,
        Err(FunctionalError::InsufficientRadii { .. }) => {
            return Ok(undetermined("insufficient ladder span".into(), &radii));
        }
        Err(e) => return Err(e.into()),
    };
    let kappa_hat = limit.kappa_hat;
    let confidence = limit.confidence;
    let r_used = *radii.last().unwrap();

    let mut class = PointClass::Undetermined;
    let mut profile = None;
    let mut note = String::new();
    if confidence < rules.confidence_floor {
        note = format!("confidence {confidence:.3} below floor");
    } else if (kappa_hat - 1.5).abs() <= rules.gap_tol {
        // Regular is confirmed only with a matching blowup profile
        let blow_radii: Vec<f64> = radii.iter().rev().copied().collect();
        match blowup(u, z0, 1.5, &blow_radii) {
            Ok((field, _rep)) => match fit_profile(&field) {
                Ok(p) if p.residual <= rules.fit_tol => {
                    class = PointClass::Regular;
                    profile = Some(p);
                }
                Ok(p) => {
                    note = format!("fit residual {:.3} above tolerance", p.residual);
                }
                Err(RescaleError::PoorFit { residual }) => {
                    note = format!("poor profile fit ({residual:.3})");
                }
                Err(e) => return Err(e.into()),
            },
            Err(RescaleError::NotConverged { distances }) => {
                note = format!("blowup not converged: {distances:?}");
            }
            Err(RescaleError::DegenerateDenominator { .. }) => {
                note = "degenerate blowup normalization".into();
            }
            Err(e) => return Err(e.into()),
        }
    } else if kappa_hat >= 2.0 - rules.gap_tol {
        class = PointClass::NonRegular;
    } else {
        note = format!("frequency {kappa_hat:.3} outside both classes");
    }
    Ok(FreeBoundaryPoint {
        z0: *z0,
        kappa_hat,
        confidence,
        class,
        profile,
        radius_used: r_used,
        radii_count: radii.len(),
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{experiment_grid, CalibrationField};

    #[test]
    fn ladder_has_five_radii_over_two_octaves() {
        let (g, sampling) = experiment_grid(2);
        let u = CalibrationField::Profile.field(g, sampling);
        let radii = classification_radii(&u, &BasePoint::origin(), 0.4);
        assert!(radii.len() >= 5, "ladder {radii:?}");
        assert!(radii[radii.len() - 1] / radii[0] >= 3.99);
        // slightly off-center points keep the full ladder
        let off = BasePoint::new([0.05, 0.0, 0.0], 0.0);
        let radii_off = classification_radii(&u, &off, 0.4);
        assert!(radii_off.len() >= 5, "off-center ladder {radii_off:?}");
    }

    #[test]
    fn exact_profile_classifies_regular() {
        let (g, sampling) = experiment_grid(2);
        let u = CalibrationField::Profile.field(g, sampling);
        let fbp = classify(
            &u,
            &BasePoint::origin(),
            &WeissParams::standard(),
            &ClassifyParams::default(),
        )
        .unwrap();
        assert_eq!(fbp.class, PointClass::Regular, "note: {}", fbp.note);
        assert!(
            (fbp.kappa_hat - 1.5).abs() <= 0.02,
            "kappa {}",
            fbp.kappa_hat
        );
        let p = fbp.profile.unwrap();
        assert!((p.e[0] - 1.0).abs() <= 1e-2);
    }

    #[test]
    fn degenerate_point_is_undetermined() {
        let (g, sampling) = experiment_grid(2);
        let u = CalibrationField::Constant
            .field(g, sampling)
            .map(|_| 0.0);
        let fbp = classify(
            &u,
            &BasePoint::origin(),
            &WeissParams::standard(),
            &ClassifyParams::default(),
        )
        .unwrap();
        assert_eq!(fbp.class, PointClass::Undetermined);
    }
}
