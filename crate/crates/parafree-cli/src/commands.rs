use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use parafree_core::free_boundary::{
    classification_radii, classify, extract_free_boundary_at_level, fit_regular_graph,
    ClassifyParams, FreeBoundaryPoint, PointClass,
};
use parafree_core::functionals::evaluate_curve;
use parafree_core::geometry::{BasePoint, ScalarField};
use parafree_core::harness::{
    calibration_gate, verify_almgren, verify_blowup_pipeline, verify_epiperimetric,
    verify_growth, verify_replacement_estimates, verify_rotation, verify_weiss_monotonicity,
    ExperimentReport, Verdict,
};
use parafree_core::solver::{
    make_drift_instance, make_exact_profile_instance, make_heat_positive_instance,
    make_perturbed_profile_instance, make_variable_coefficient_instance, solve_cylinder,
    SignoriniConfig,
};

use crate::config::RunConfig;
use crate::csvio;
use crate::dump;

pub fn build_instance(cfg: &RunConfig) -> Result<SignoriniConfig> {
    let grid = cfg.grid.clone();
    let inst = &cfg.instance;
    let mut built = match inst.kind.as_str() {
        "exact32" => make_exact_profile_instance(grid),
        "heat-positive" => make_heat_positive_instance(grid),
        "perturbed32" => make_perturbed_profile_instance(grid, inst.amplitude),
        "varcoef" => {
            make_variable_coefficient_instance(grid, inst.alpha, inst.amplitude, cfg.seed)
                .map_err(|e| anyhow::anyhow!("{e}"))?
        }
        "drift" => make_drift_instance(grid, inst.p, inst.magnitude, cfg.seed)
            .map_err(|e| anyhow::anyhow!("{e}"))?,
        "custom-table" => {
            let table = inst
                .table
                .as_ref()
                .context("[instance]: custom-table requires 'table = <dump dir>'")?;
            let (field, _) = dump::read_dump(table)?;
            let grid = cfg.grid.clone();
            if field.grid().dim != grid.dim {
                bail!("custom table dimension mismatch");
            }
            let f0 = std::sync::Arc::new({
                let field = field.clone();
                move |x: &[f64; 3]| field.sample(x, field.grid().t_start)
            });
            let fb = std::sync::Arc::new({
                let field = field.clone();
                move |x: &[f64; 3], t: f64| field.sample(x, t)
            });
            let mut c = SignoriniConfig::new(grid, f0, fb);
            c.descriptor = parafree_core::solver::InstanceDescriptor::custom("custom-table");
            c
        }
        other => bail!("unknown instance kind '{other}'"),
    };
    built.sampling = cfg.sampling;
    Ok(built)
}

pub fn out_dir(cfg_out: &Path, flag: Option<&Path>) -> PathBuf {
    if let Ok(env) = std::env::var("PARAFREE_OUT") {
        return PathBuf::from(env);
    }
    flag.map(|p| p.to_path_buf())
        .unwrap_or_else(|| cfg_out.to_path_buf())
}

pub fn cmd_solve(cfg: &RunConfig, out: &Path) -> Result<()> {
    let instance = build_instance(cfg)?;
    let sol = solve_cylinder(&instance).map_err(|e| anyhow::anyhow!("solver: {e}"))?;
    let checksum = dump::write_dump(
        out,
        &sol.field,
        &sol.descriptor,
        sol.worst_residual(),
        sol.inner_iterations.iter().sum(),
    )?;
    println!(
        "solved {} on {}x{} grid, K={}; worst residual {:.3e}; checksum {}",
        sol.descriptor.kind,
        cfg.grid.nodes,
        cfg.grid.nodes,
        cfg.grid.time_steps,
        sol.worst_residual(),
        &checksum[..16]
    );
    Ok(())
}

fn ladder(cfg: &RunConfig, field: &ScalarField, z0: &BasePoint) -> Vec<f64> {
    match &cfg.radii.explicit {
        Some(rs) => {
            let mut rs = rs.clone();
            rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            rs
        }
        None => classification_radii(field, z0, cfg.radii.start),
    }
}

pub fn cmd_functionals(cfg: &RunConfig, solution: &Path, out: &Path) -> Result<i32> {
    let (field, _) = dump::read_dump(solution)?;
    std::fs::create_dir_all(out)?;
    let z0 = BasePoint::origin();
    let radii = ladder(cfg, &field, &z0);
    let path = out.join("frequency_curve.csv");
    if radii.is_empty() {
        std::fs::write(
            &path,
            format!("{}\n", csvio::frequency_curve_header(field.grid().dim)),
        )?;
        println!("no admissible radii; wrote header-only curve");
        return Ok(0);
    }
    let curve = evaluate_curve(&field, &z0, &radii, &cfg.params)
        .map_err(|e| anyhow::anyhow!("functionals: {e}"))?;
    csvio::write_frequency_curves(&path, &[curve])?;
    println!("wrote {}", path.display());
    Ok(0)
}

/// Classify free-boundary points at the final time level (closest to the
/// base time of all functionals); caps the point count for tractability.
pub fn classify_points(
    cfg: &RunConfig,
    field: &ScalarField,
    max_points: usize,
) -> Result<Vec<FreeBoundaryPoint>> {
    let k_last = *field.stored_levels().last().unwrap();
    let mut locations = extract_free_boundary_at_level(field, k_last);
    locations.sort_by(|a, b| {
        a.parabolic_norm(field.grid().dim)
            .partial_cmp(&b.parabolic_norm(field.grid().dim))
            .unwrap()
    });
    locations.truncate(max_points);
    let rules = ClassifyParams {
        r_start: cfg.radii.start,
        ..ClassifyParams::default()
    };
    let mut out = Vec::new();
    for loc in &locations {
        let fbp = classify(field, loc, &cfg.params, &rules)
            .map_err(|e| anyhow::anyhow!("classify at {:?}: {e}", loc.x))?;
        out.push(fbp);
    }
    Ok(out)
}

pub fn cmd_classify(cfg: &RunConfig, solution: &Path, out: &Path) -> Result<i32> {
    let (field, _) = dump::read_dump(solution)?;
    std::fs::create_dir_all(out)?;
    let points = classify_points(cfg, &field, 25)?;
    csvio::write_fb_points(&out.join("fb_points.csv"), field.grid().dim, &points)?;
    let regular: Vec<&FreeBoundaryPoint> = points
        .iter()
        .filter(|p| p.class == PointClass::Regular)
        .collect();
    println!(
        "classified {} points: {} regular, {} nonregular, {} undetermined",
        points.len(),
        regular.len(),
        points
            .iter()
            .filter(|p| p.class == PointClass::NonRegular)
            .count(),
        points
            .iter()
            .filter(|p| p.class == PointClass::Undetermined)
            .count(),
    );
    if regular.len() >= 8 {
        match fit_regular_graph(&points) {
            Ok(graph) => {
                csvio::write_regular_graph(&out.join("regular_graph.csv"), &graph)?;
                println!("wrote regular_graph.csv (gamma_hat={:.3})", graph.gamma_hat);
            }
            Err(e) => println!("regular graph not fitted: {e}"),
        }
    }
    Ok(0)
}

pub fn cmd_verify(
    cfg: &RunConfig,
    solution: &Path,
    experiments: &[String],
    out: &Path,
) -> Result<i32> {
    let (field, header) = dump::read_dump(solution)?;
    std::fs::create_dir_all(out)?;
    let instance = header.instance.kind.clone();

    // calibration gate first: analytic-field checks must pass before any
    // solved-instance experiment is trusted
    let gate = calibration_gate();
    for rep in &gate.reports {
        write_report(out, rep)?;
    }
    if !gate.passed {
        let summary = summarize(&gate.reports);
        std::fs::write(out.join("summary.csv"), summary)?;
        eprintln!("calibration gate failed; solved-instance experiments skipped");
        return Ok(1);
    }

    // base point: the free-boundary point closest to the origin at the
    // final level, if any; the origin otherwise
    let k_last = *field.stored_levels().last().unwrap();
    let mut fb = extract_free_boundary_at_level(&field, k_last);
    fb.sort_by(|a, b| {
        a.parabolic_norm(field.grid().dim)
            .partial_cmp(&b.parabolic_norm(field.grid().dim))
            .unwrap()
    });
    let z0 = fb.first().copied().unwrap_or(BasePoint::origin());
    let radii = ladder(cfg, &field, &z0);

    // classification feeds growth and the blowup pipeline
    let rules = ClassifyParams {
        r_start: cfg.radii.start,
        ..ClassifyParams::default()
    };
    let point = classify(&field, &z0, &cfg.params, &rules)
        .map_err(|e| anyhow::anyhow!("classify: {e}"))?;

    // experiment jobs fan out over the configured parallelism; results are
    // collected into fixed slots and written in a fixed order, keeping every
    // output file single-writer and byte-reproducible
    type Job<'a> = Box<dyn Fn() -> Vec<ExperimentReport> + Send + Sync + 'a>;
    let field_ref = &field;
    let radii_ref = &radii;
    let instance_ref = instance.as_str();
    let params_ref = &cfg.params;
    let point_ref = &point;
    let mut jobs: Vec<(String, Job)> = Vec::new();
    for name in experiments {
        let job: Job = match name.as_str() {
            "weiss" => Box::new(move || {
                let mut reps = vec![verify_weiss_monotonicity(
                    field_ref, &z0, params_ref, radii_ref, instance_ref,
                )];
                // the rho > 0 branch of the derivative bound
                if let Some(&r_min) = radii_ref.first() {
                    let rho = r_min / 2.0;
                    let p = params_ref.with_rho(rho);
                    let mut rep2 =
                        verify_weiss_monotonicity(field_ref, &z0, &p, radii_ref, instance_ref);
                    rep2.name = "weiss_monotonicity_rho".into();
                    reps.push(rep2);
                }
                reps
            }),
            "almgren" => Box::new(move || {
                vec![verify_almgren(field_ref, &z0, params_ref, radii_ref, instance_ref)]
            }),
            "growth" => {
                let kappa = if point_ref.kappa_hat.is_nan() {
                    1.5
                } else {
                    point_ref.kappa_hat
                };
                let regular = point_ref.class == PointClass::Regular;
                Box::new(move || {
                    vec![verify_growth(
                        field_ref, &z0, radii_ref, kappa, regular, instance_ref,
                    )]
                })
            }
            "epiperimetric" => Box::new(move || {
                vec![verify_epiperimetric(field_ref, &z0, -0.16, 5, instance_ref)]
            }),
            "rotation" => Box::new(move || vec![verify_rotation(field_ref, &z0, instance_ref)]),
            "replacement" => {
                let alpha = cfg.instance.alpha;
                Box::new(move || {
                    vec![verify_replacement_estimates(
                        field_ref,
                        &z0,
                        radii_ref,
                        3.0 * field_ref.grid().h(),
                        alpha,
                        instance_ref,
                    )]
                })
            }
            "blowup" => Box::new(move || {
                vec![verify_blowup_pipeline(
                    field_ref,
                    std::slice::from_ref(point_ref),
                    instance_ref,
                )]
            }),
            other => bail!("unknown experiment '{other}'"),
        };
        jobs.push((name.clone(), job));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| anyhow::anyhow!("thread pool: {e}"))?;
    let results: Vec<Vec<ExperimentReport>> = pool.install(|| {
        use rayon::prelude::*;
        jobs.par_iter().map(|(_, job)| job()).collect()
    });
    let mut reports: Vec<ExperimentReport> = gate.reports;
    for reps in results {
        for rep in reps {
            write_report(out, &rep)?;
            reports.push(rep);
        }
    }

    let summary = summarize(&reports);
    std::fs::write(out.join("summary.csv"), &summary)?;
    let timing: String = reports
        .iter()
        .map(|r| format!("{} {} ms\n", r.name, r.wall_ms))
        .collect();
    std::fs::write(out.join("timing.log"), timing)?;
    for r in &reports {
        println!("{}", r.summary_line());
    }
    let any_fail = reports.iter().any(|r| r.verdict == Verdict::Fail);
    Ok(if any_fail { 1 } else { 0 })
}

fn write_report(out: &Path, rep: &ExperimentReport) -> Result<()> {
    let base = rep.name.replace([' ', '/'], "_");
    let json = serde_json::to_string_pretty(rep)?;
    std::fs::write(out.join(format!("{base}.json")), json)?;
    csvio::write_experiment_csv(&out.join(format!("{base}.csv")), rep)?;
    Ok(())
}

fn summarize(reports: &[ExperimentReport]) -> String {
    let mut s = String::from("experiment,instance,verdict,rows,failures\n");
    for r in reports {
        s.push_str(&format!(
            "{},{},{:?},{},{}\n",
            r.name,
            r.instance,
            r.verdict,
            r.rows.len(),
            r.failures.len()
        ));
    }
    s
}

pub fn cmd_report(dir: &Path) -> Result<i32> {
    let mut any_fail = false;
    let mut names: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("cannot read {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map_or(false, |x| x == "json"))
        .collect();
    names.sort();
    if names.is_empty() {
        bail!("no report JSON files under {}", dir.display());
    }
    println!(
        "{:<28} {:<14} {:<13} {:>5} {:>9}",
        "experiment", "instance", "verdict", "rows", "failures"
    );
    for p in names {
        let text = std::fs::read_to_string(&p)?;
        let rep: ExperimentReport = match serde_json::from_str(&text) {
            Ok(r) => r,
            Err(_) => continue, // non-report json (e.g. field sidecar)
        };
        println!(
            "{:<28} {:<14} {:<13} {:>5} {:>9}",
            rep.name,
            rep.instance,
            format!("{:?}", rep.verdict),
            rep.rows.len(),
            rep.failures.len()
        );
        if rep.verdict == Verdict::Fail {
            any_fail = true;
            for f in &rep.failures {
                println!("    ! {f}");
            }
        }
    }
    Ok(if any_fail { 1 } else { 0 })
}
