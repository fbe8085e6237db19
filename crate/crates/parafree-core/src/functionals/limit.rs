use serde::{Deserialize, Serialize};

use super::{FrequencyCurve, FunctionalError};

/// Result of extrapolating the frequency limit `r -> 0+`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrequencyLimit {
    /// Extrapolated limit `kappa_hat`.
    pub kappa_hat: f64,
    /// Confidence in `[0, 1]`, derived from the fit residual.
    pub confidence: f64,
    /// Root-mean-square residual of the fitted model.
    pub fit_rms: f64,
    /// Fitted drift amplitude and exponent of `kappa + A r^s`.
    pub amplitude: f64,
    pub exponent: f64,
    /// Radii whose quadrature-error estimate exceeds 10% of their distance
    /// to the fitted limit.
    pub flagged_radii: Vec<f64>,
}

/// Fit `N(r) ~ kappa + A r^s` (s > 0) by least squares over the sampled
/// radii and return the extrapolated limit.
///
/// The fitted column is `N0`: the truncated frequency and `N0` share the
/// same `r -> 0+` limit, but the additive exponential error saturates the
/// truncated variants at grid-resolvable radii, so the exponential-free
/// column is the usable estimator of that common limit.
pub fn frequency_limit(curve: &FrequencyCurve) -> Result<FrequencyLimit, FunctionalError> {
    let radii = curve.radii();
    let n = radii.len();
    if n < 5 {
        return Err(FunctionalError::InsufficientRadii {
            have: n,
            need: 5,
        });
    }
    let span = radii[n - 1] / radii[0];
    if span < 3.999 {
        return Err(FunctionalError::InsufficientRadii { have: n, need: 5 });
    }
    let values: Vec<f64> = curve.rows.iter().map(|row| row.n0).collect();

    // grid search over the drift exponent with closed-form (kappa, A) per s,
    // then golden-section refinement
    let objective = |s: f64| -> (f64, f64, f64) {
        // linear LS for v ~ kappa + A r^s
        let m = n as f64;
        let sx: f64 = radii.iter().map(|r| r.powf(s)).sum();
        let sxx: f64 = radii.iter().map(|r| r.powf(2.0 * s)).sum();
        let sy: f64 = values.iter().sum();
        let sxy: f64 = radii
            .iter()
            .zip(&values)
            .map(|(r, v)| r.powf(s) * v)
            .sum();
        let det = m * sxx - sx * sx;
        if det.abs() < 1e-30 {
            return (f64::INFINITY, 0.0, 0.0);
        }
        let a = (m * sxy - sx * sy) / det;
        let k = (sy - a * sx) / m;
        let rss: f64 = radii
            .iter()
            .zip(&values)
            .map(|(r, v)| {
                let e = v - k - a * r.powf(s);
                e * e
            })
            .sum();
        (rss, k, a)
    };

    let mut best = (f64::INFINITY, 0.0, 0.0, 1.0);
    let mut s = 0.1;
    while s <= 3.0 + 1e-9 {
        let (rss, k, a) = objective(s);
        if rss < best.0 {
            best = (rss, k, a, s);
        }
        s += 0.05;
    }
    // golden-section refine around the best exponent
    let (mut lo, mut hi) = ((best.3 - 0.05).max(0.01), best.3 + 0.05);
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    for _ in 0..40 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if objective(m1).0 < objective(m2).0 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let s_star = 0.5 * (lo + hi);
    let (rss, kappa_hat, amplitude) = objective(s_star);
    let fit_rms = (rss / n as f64).sqrt();
    let scale = kappa_hat.abs().max(1.0);
    let confidence = (1.0 - 5.0 * fit_rms / scale).clamp(0.0, 1.0);
    let flagged_radii = curve
        .rows
        .iter()
        .filter(|row| row.quad_err > 0.1 * (row.n0 - kappa_hat).abs().max(1e-12))
        .map(|row| row.r)
        .collect();
    Ok(FrequencyLimit {
        kappa_hat,
        confidence,
        fit_rms,
        amplitude,
        exponent: s_star,
        flagged_radii,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BasePoint;
    use crate::functionals::FrequencyRow;

    fn curve_from(values: &[(f64, f64)]) -> FrequencyCurve {
        FrequencyCurve {
            z0: BasePoint::origin(),
            dim: 2,
            rows: values
                .iter()
                .map(|&(r, n0)| FrequencyRow {
                    r,
                    n0,
                    n_delta: n0,
                    n_tilde: n0,
                    n_hat: n0,
                    poon: n0 / 2.0,
                    w0: 0.0,
                    v0: 0.0,
                    w_full_practical: 0.0,
                    w_full_exact: 0.0,
                    m: 1.0,
                    quad_err: 1e-6,
                })
                .collect(),
        }
    }

    #[test]
    fn constant_curve_recovers_limit() {
        let c = curve_from(&[
            (0.1, 1.5),
            (0.1414, 1.5),
            (0.2, 1.5),
            (0.2828, 1.5),
            (0.4, 1.5),
        ]);
        let l = frequency_limit(&c).unwrap();
        assert!((l.kappa_hat - 1.5).abs() < 1e-9);
        assert!(l.confidence > 0.9);
    }

    #[test]
    fn drifting_curve_extrapolates() {
        // N(r) = 2 + 0.3 r^{0.8}
        let rows: Vec<(f64, f64)> = [0.05, 0.08, 0.12, 0.2, 0.3, 0.45]
            .iter()
            .map(|&r: &f64| (r, 2.0 + 0.3 * r.powf(0.8)))
            .collect();
        let l = frequency_limit(&curve_from(&rows)).unwrap();
        assert!((l.kappa_hat - 2.0).abs() < 5e-3, "kappa {}", l.kappa_hat);
        assert!((l.exponent - 0.8).abs() < 0.1, "s {}", l.exponent);
    }

    #[test]
    fn noisy_tail_reduces_confidence_without_crashing() {
        let rows = [
            (0.1, 1.52),
            (0.1414, 1.46),
            (0.2, 1.55),
            (0.2828, 1.44),
            (0.4, 1.58),
        ];
        let l = frequency_limit(&curve_from(&rows)).unwrap();
        assert!(l.fit_rms > 1e-3);
        assert!(l.confidence < 1.0);
    }

    #[test]
    fn too_few_radii_rejected() {
        let rows = [(0.1, 1.5), (0.2, 1.5), (0.4, 1.5)];
        assert!(matches!(
            frequency_limit(&curve_from(&rows)),
            Err(FunctionalError::InsufficientRadii { .. })
        ));
    }

    #[test]
    fn narrow_span_rejected() {
        let rows = [
            (0.2, 1.5),
            (0.23, 1.5),
            (0.27, 1.5),
            (0.32, 1.5),
            (0.38, 1.5),
        ];
        assert!(matches!(
            frequency_limit(&curve_from(&rows)),
            Err(FunctionalError::InsufficientRadii { .. })
        ));
    }
}
