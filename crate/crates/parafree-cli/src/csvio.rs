use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;

use parafree_core::free_boundary::{FreeBoundaryPoint, PointClass, RegularGraph};
use parafree_core::functionals::FrequencyCurve;
use parafree_core::harness::ExperimentReport;

/// Deterministic float formatting for CSV cells.
pub fn fmt(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.12e}")
    }
}

/// Header of the frequency-curve CSV for a given dimension; stable across
/// versions (golden-header test below).
pub fn frequency_curve_header(dim: usize) -> String {
    let mut h = String::new();
    for d in 0..dim {
        let _ = write!(h, "z0_x{},", d + 1);
    }
    h.push_str("z0_t,r,N0,Ndelta,Ntilde,Nhat,Poon,W0,V0,W_full_practical,W_full_exact,m,quad_err");
    h
}

pub fn write_frequency_curves(path: &Path, curves: &[FrequencyCurve]) -> Result<()> {
    let dim = curves.first().map(|c| c.dim).unwrap_or(2);
    let mut out = frequency_curve_header(dim);
    out.push('\n');
    for c in curves {
        for row in &c.rows {
            for d in 0..dim {
                out.push_str(&fmt(c.z0.x[d]));
                out.push(',');
            }
            let cells = [
                c.z0.t,
                row.r,
                row.n0,
                row.n_delta,
                row.n_tilde,
                row.n_hat,
                row.poon,
                row.w0,
                row.v0,
                row.w_full_practical,
                row.w_full_exact,
                row.m,
                row.quad_err,
            ];
            out.push_str(
                &cells
                    .iter()
                    .map(|v| fmt(*v))
                    .collect::<Vec<_>>()
                    .join(","),
            );
            out.push('\n');
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn class_tag(c: PointClass) -> &'static str {
    match c {
        PointClass::Regular => "regular",
        PointClass::NonRegular => "nonregular",
        PointClass::Undetermined => "undetermined",
    }
}

pub fn write_fb_points(path: &Path, dim: usize, points: &[FreeBoundaryPoint]) -> Result<()> {
    let mut out = String::new();
    for d in 0..dim - 1 {
        let _ = write!(out, "x{},", d + 1);
    }
    out.push_str("t,kappa_hat,confidence,class,c,e1,e2,fit_residual\n");
    for p in points {
        for d in 0..dim - 1 {
            out.push_str(&fmt(p.z0.x[d]));
            out.push(',');
        }
        let (c, e1, e2, res) = match &p.profile {
            Some(q) => (q.c, q.e[0], q.e[1], q.residual),
            None => (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
        };
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{}\n",
            fmt(p.z0.t),
            fmt(p.kappa_hat),
            fmt(p.confidence),
            class_tag(p.class),
            fmt(c),
            fmt(e1),
            fmt(e2),
            fmt(res)
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_regular_graph(path: &Path, graph: &RegularGraph) -> Result<()> {
    let mut out = String::from("x_pp,t,g,grad_g,gamma_hat,pair_count\n");
    for (i, (xpp, t, g)) in graph.samples.iter().enumerate() {
        let _ = write!(
            out,
            "{},{},{},{},{},{}\n",
            fmt(xpp[0]),
            fmt(*t),
            fmt(*g),
            fmt(graph.gradients[i][0]),
            fmt(graph.gamma_hat),
            graph.pair_count
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_experiment_csv(path: &Path, rep: &ExperimentReport) -> Result<()> {
    let mut out = rep.headers.join(",");
    out.push('\n');
    for row in &rep.rows {
        out.push_str(&row.iter().map(|v| fmt(*v)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_frequency_header() {
        assert_eq!(
            frequency_curve_header(2),
            "z0_x1,z0_x2,z0_t,r,N0,Ndelta,Ntilde,Nhat,Poon,W0,V0,W_full_practical,W_full_exact,m,quad_err"
        );
        assert_eq!(
            frequency_curve_header(3),
            "z0_x1,z0_x2,z0_x3,z0_t,r,N0,Ndelta,Ntilde,Nhat,Poon,W0,V0,W_full_practical,W_full_exact,m,quad_err"
        );
    }

    #[test]
    fn float_formatting_is_stable() {
        assert_eq!(fmt(0.1), "1.000000000000e-1");
        assert_eq!(fmt(f64::NAN), "nan");
        assert_eq!(fmt(-12.0), "-1.200000000000e1");
    }
}
