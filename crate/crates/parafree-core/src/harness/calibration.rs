use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::{radius_adapted_grid, CalibrationField};
use crate::functionals::{almgren, scalar_weight_residuals, weiss_standard, WeissParams};
use crate::geometry::{slice_integral_fn, BasePoint, TimeSampling};

use super::{ExperimentReport, Verdict};

/// Outcome of the calibration gate: the analytic-field checks that must pass
/// before any solved-instance experiment is trusted.
#[derive(Debug)]
pub struct CalibrationOutcome {
    pub reports: Vec<ExperimentReport>,
    pub passed: bool,
}

/// Run the calibration gate: kernel/quadrature normalization and moments,
/// homogeneous frequency calibration on the analytic fields, standard Weiss
/// vanishing/closed forms, and the scalar-weight inequality suite.
pub fn calibration_gate() -> CalibrationOutcome {
    let mut reports = Vec::new();

    // kernel normalization and second moments at resolvable lags
    let mut kernel = ExperimentReport::new("calibration_kernel", "analytic", String::new());
    kernel.headers = vec!["t".into(), "norm_err".into(), "moment_err".into()];
    kernel.tolerance = 1e-6;
    let g = crate::geometry::GridSpec::standard(2, 6.0, 193, 256);
    for t in [-0.04, -0.25] {
        let z0 = BasePoint::origin();
        let qn = slice_integral_fn(&g, &z0, t, |_| 1.0);
        let qm = slice_integral_fn(&g, &z0, t, |x| x[0] * x[0]);
        let (en, em) = ((qn.value - 1.0).abs(), (qm.value - 2.0 * (-t)).abs());
        kernel.rows.push(vec![t, en, em]);
        if en > 1e-6 {
            kernel.violation(en - 1e-6, qn.quad_err, format!("normalization at t={t}"));
        }
        if em > 1e-5 {
            kernel.violation(em - 1e-5, qm.quad_err, format!("moment at t={t}"));
        }
    }
    reports.push(kernel);

    // homogeneous frequency calibration: N0 = kappa within 1%
    let mut freq = ExperimentReport::new("calibration_frequency", "analytic", String::new());
    freq.headers = vec!["kappa".into(), "r".into(), "N0".into()];
    freq.tolerance = 0.01;
    for field in [
        CalibrationField::Linear,
        CalibrationField::Profile,
        CalibrationField::Degree2,
    ] {
        for r in [0.1, 0.2, 0.4] {
            let grid = radius_adapted_grid(2, r);
            let u = field.field(grid, TimeSampling::Full);
            match almgren(
                &u,
                &BasePoint::origin(),
                r,
                &WeissParams::standard(),
                Some(1.0),
            ) {
                Ok(v) => {
                    freq.rows.push(vec![field.degree(), r, v.n0]);
                    let rel = (v.n0 - field.degree()).abs() / field.degree();
                    if rel > 0.01 {
                        freq.violation(
                            rel - 0.01,
                            0.0,
                            format!("N0({}) at r={r}: {}", field.name(), v.n0),
                        );
                    }
                }
                Err(e) => freq.inconclusive(format!("{} at r={r}: {e}", field.name())),
            }
        }
    }
    reports.push(freq);

    // standard Weiss: profile vanishes, constant matches the closed form
    let mut weiss = ExperimentReport::new("calibration_weiss", "analytic", String::new());
    weiss.headers = vec!["r".into(), "W0_profile".into(), "W0_const".into()];
    weiss.tolerance = 2e-3;
    for r in [0.05, 0.1, 0.2, 0.4] {
        let grid = radius_adapted_grid(2, r);
        let up = CalibrationField::Profile.field(grid.clone(), TimeSampling::Full);
        let uc = CalibrationField::Constant.field(grid, TimeSampling::Full);
        let z0 = BasePoint::origin();
        let (wp, _) = weiss_standard(&up, &z0, r).unwrap_or((f64::NAN, 0.0));
        let (wc, _) = weiss_standard(&uc, &z0, r).unwrap_or((f64::NAN, 0.0));
        weiss.rows.push(vec![r, wp, wc]);
        if wp.abs() > 2e-3 {
            weiss.violation(wp.abs() - 2e-3, 0.0, format!("W0(profile) at r={r}: {wp}"));
        }
        let expect = -1.5 / r.powi(3);
        let rel = (wc - expect).abs() / expect.abs();
        if rel > 0.005 {
            weiss.violation(rel - 0.005, 0.0, format!("W0(const) at r={r}: {wc} vs {expect}"));
        }
    }
    reports.push(weiss);

    // scalar-weight inequality suite, exact arithmetic
    let mut suite = ExperimentReport::new("calibration_weights", "analytic", String::new());
    suite.tolerance = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_613);
    let mut checked = 0usize;
    for _ in 0..1000 {
        let kappa0 = rng.gen_range(2.0 + 1e-6..5.0);
        let alpha = rng.gen_range(0.15..0.95);
        let epsilon = rng.gen_range(0.1..alpha);
        let kappa = rng.gen_range(1e-3..kappa0 - 1e-6);
        let params = WeissParams::new(kappa, kappa0, alpha, epsilon, 1.0);
        let r = rng.gen_range(1e-6..1.0) * params.r0();
        let rho = rng.gen_range(0.0..1.0 / 2.0_f64.sqrt()) * r;
        let (i1, i2, i3, i4) = scalar_weight_residuals(r, rho, &params);
        let scale = params.b_exact() * r.powf(epsilon) * (2.0 * kappa + 2.0) + 1.0;
        let tol = -1e-12 * scale;
        for (tag, v) in [(1, i1), (2, i2), (3, i3), (4, i4)] {
            if v < tol {
                suite.violation(
                    tol - v,
                    0.0,
                    format!("inequality {tag} violated by {v:.3e} at kappa={kappa}, r={r}"),
                );
            }
        }
        checked += 1;
    }
    suite.notes.push(format!("{checked} tuples checked"));
    reports.push(suite);

    let passed = reports.iter().all(|r| r.verdict != Verdict::Fail);
    CalibrationOutcome { reports, passed }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_passes() {
        let out = calibration_gate();
        for r in &out.reports {
            assert_ne!(r.verdict, Verdict::Fail, "{}: {:?}", r.name, r.failures);
        }
        assert!(out.passed);
    }
}
