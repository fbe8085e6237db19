use crate::geometry::ScalarField;

use super::psor::{HalfGrid, NodeKind, PsorWorkspace};
use super::{SignoriniConfig, Solution, SolverError};

/// Solve the variational inequality on the full cylinder: backward Euler in
/// time, projected SOR per step on the `x_n >= 0` half grid with the thin
/// constraint at `x_n = 0`, Dirichlet data on the box faces, and even
/// mirroring into the returned field.
pub fn solve_cylinder(cfg: &SignoriniConfig) -> Result<Solution, SolverError> {
    solve_cylinder_with_observer(cfg, |_, _, _| {})
}

/// Same as [`solve_cylinder`], invoking `observe(level, t, half_slice)` for
/// every computed step (including the initial one) before storage decisions.
pub fn solve_cylinder_with_observer(
    cfg: &SignoriniConfig,
    mut observe: impl FnMut(usize, f64, &[f64]),
) -> Result<Solution, SolverError> {
    cfg.validate()?;
    let g = cfg.grid.clone();
    let half = HalfGrid::new(g.clone());
    let len = half.len();
    let tau = g.tau();
    let dim = g.dim;
    let h = g.h();

    let mut ws = PsorWorkspace::new(half);
    let mut u = vec![0.0f64; len];
    let mut u_prev = vec![0.0f64; len];

    // initial datum, thin nodes clamped to the constraint
    for i in 0..len {
        let x = ws.half.coords(i);
        u[i] = (cfg.initial)(&x);
        if ws.kinds()[i] == NodeKind::Thin {
            u[i] = u[i].max(0.0);
        }
    }
    observe(0, g.t_start, &u);

    let stores_level = |k: usize| -> bool {
        match cfg.sampling {
            crate::geometry::TimeSampling::Full => true,
            crate::geometry::TimeSampling::DenseLate { dense_from, stride } => {
                k >= dense_from || k % stride.max(1) == 0 || k == 0 || k == g.time_steps
            }
        }
    };

    let slice_len = g.slice_len();
    let mut levels: Vec<usize> = Vec::new();
    let mut data: Vec<f64> = Vec::new();
    let mut contact: Vec<Vec<bool>> = Vec::new();
    let store = |k: usize,
                     half: &HalfGrid,
                     uh: &[f64],
                     kinds: &[NodeKind],
                     levels: &mut Vec<usize>,
                     data: &mut Vec<f64>,
                     contact: &mut Vec<Vec<bool>>| {
        let mut full = vec![0.0f64; slice_len];
        half.mirror_into_full(uh, &mut full);
        levels.push(k);
        data.extend_from_slice(&full);
        let tol = 10.0 * cfg.tol_psor;
        let mut c = Vec::with_capacity(half.tang);
        for i in 0..uh.len() {
            let idx = half.unflat(i);
            if idx[half.grid.dim - 1] == 0 {
                let _ = kinds;
                c.push(uh[i] <= tol);
            }
        }
        contact.push(c);
    };

    if stores_level(0) {
        store(
            0,
            &ws.half,
            &u,
            ws.kinds(),
            &mut levels,
            &mut data,
            &mut contact,
        );
    }

    let mut inner_iterations = Vec::with_capacity(g.time_steps);
    let mut residuals = Vec::with_capacity(g.time_steps);

    // coefficient midpoint samples, refreshed per step when time dependent
    let sample_coeffs = |ws: &mut PsorWorkspace, t: f64| {
        if let Some(cf) = &cfg.coeff {
            for d in 0..dim {
                for i in 0..len {
                    let idx = ws.half.unflat(i);
                    if ws.kinds()[i] == NodeKind::Dirichlet {
                        continue;
                    }
                    let x = ws.half.coords(i);
                    let mut xp = x;
                    xp[d] += 0.5 * h;
                    let mut xm = x;
                    xm[d] -= 0.5 * h;
                    let ap = cf(&xp, t)[d];
                    let am = cf(&xm, t)[d];
                    let _ = idx;
                    ws.aplus[d][i] = ap;
                    ws.aminus[d][i] = am;
                }
            }
        }
    };

    for k in 1..=g.time_steps {
        let t = g.time(k);
        std::mem::swap(&mut u, &mut u_prev);
        u.copy_from_slice(&u_prev);
        // Dirichlet values at the new time level
        for i in 0..len {
            if ws.kinds()[i] == NodeKind::Dirichlet {
                let x = ws.half.coords(i);
                u[i] = (cfg.boundary)(&x, t);
            }
        }
        sample_coeffs(&mut ws, t);
        ws.assemble_diag(tau);
        ws.set_rhs(&u_prev, tau, None);

        let outcome = match &cfg.drift {
            None => ws.solve_step(&mut u, &u_prev, tau, cfg.omega, cfg.tol_psor, cfg.max_inner, None)?,
            Some(b) => {
                let half = ws.half.clone();
                let kinds: Vec<NodeKind> = ws.kinds().to_vec();
                let bput = b.clone();
                let mut refresh = move |uc: &[f64], src: &mut [f64]| {
                    for i in 0..uc.len() {
                        if kinds[i] == NodeKind::Dirichlet {
                            src[i] = 0.0;
                            continue;
                        }
                        let x = half.coords(i);
                        let bv = bput(&x, t);
                        let mut adv = 0.0;
                        for d in 0..dim {
                            let st = half.stride(d);
                            let idx = half.unflat(i);
                            let grad = if d == dim - 1 && idx[dim - 1] == 0 {
                                // even symmetry: normal derivative vanishes
                                0.0
                            } else {
                                let up = if d == dim - 1 && idx[dim - 1] == half.hn - 1 {
                                    uc[i]
                                } else {
                                    uc[i + st]
                                };
                                let dn = if idx[d] == 0 { uc[i] } else { uc[i - st] };
                                (up - dn) / (2.0 * h)
                            };
                            adv += bv[d] * grad;
                        }
                        src[i] = -adv;
                    }
                };
                ws.solve_step(
                    &mut u,
                    &u_prev,
                    tau,
                    cfg.omega,
                    cfg.tol_psor,
                    cfg.max_inner,
                    Some(&mut refresh),
                )?
            }
        };
        inner_iterations.push(outcome.sweeps);
        residuals.push(outcome.complementarity_residual);
        observe(k, t, &u);
        if stores_level(k) {
            store(
                k,
                &ws.half,
                &u,
                ws.kinds(),
                &mut levels,
                &mut data,
                &mut contact,
            );
        }
    }

    let field = ScalarField::from_slices(g, true, levels, data)?;
    Ok(Solution {
        field,
        inner_iterations,
        residuals,
        contact,
        descriptor: cfg.descriptor.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::profile_e1;
    use crate::geometry::{GridSpec, TimeSampling};
    use crate::solver::{make_exact_profile_instance, make_heat_positive_instance};

    #[test]
    fn constant_positive_data_stays_constant() {
        // phi0 = g = 1: no contact, caloric constant
        let g = GridSpec::standard(2, 1.5, 33, 16);
        let cfg = make_heat_positive_instance(g);
        let sol = solve_cylinder(&cfg).unwrap();
        let last = sol.field.slice(16).unwrap();
        for &v in last {
            assert!((v - 1.0).abs() < 1e-9, "drifted to {v}");
        }
        // strictly positive data: no contact anywhere
        assert!(sol.contact.iter().all(|c| c.iter().all(|&b| !b)));
    }

    #[test]
    fn profile_data_is_near_stationary() {
        let g = GridSpec::standard(2, 1.5, 65, 64);
        let cfg = make_exact_profile_instance(g.clone());
        let sol = solve_cylinder(&cfg).unwrap();
        let mut worst = 0.0f64;
        for &k in sol.field.stored_levels() {
            let s = sol.field.slice(k).unwrap();
            for (flat, &v) in s.iter().enumerate() {
                let x = g.node_coords(flat);
                worst = worst.max((v - profile_e1(&x, 2)).abs());
            }
        }
        assert!(worst < 5e-3, "sup error {worst}");
    }

    #[test]
    fn thin_constraint_holds_exactly() {
        let g = GridSpec::standard(2, 1.5, 49, 32);
        let cfg = make_exact_profile_instance(g.clone());
        let sol = solve_cylinder(&cfg).unwrap();
        let mid = g.center();
        for &k in sol.field.stored_levels() {
            let s = sol.field.slice(k).unwrap();
            for i in 0..g.nodes {
                let v = s[g.flat(&[i, mid])];
                assert!(v >= 0.0, "constraint violated: {v}");
            }
        }
    }

    #[test]
    fn output_is_even_symmetric() {
        let g = GridSpec::standard(2, 1.5, 33, 16);
        let cfg = make_exact_profile_instance(g);
        let sol = solve_cylinder(&cfg).unwrap();
        assert!(sol.field.verify_even());
    }

    #[test]
    fn incompatible_initial_datum_rejected() {
        let g = GridSpec::standard(2, 1.5, 33, 16);
        let mut cfg = make_heat_positive_instance(g);
        cfg.initial = std::sync::Arc::new(|x: &[f64; 3]| x[0]);
        // x1 is negative on half the thin plane
        assert!(matches!(
            solve_cylinder(&cfg),
            Err(SolverError::IncompatibleData(_))
        ));
    }

    #[test]
    fn dense_late_storage_solves_and_stores() {
        let g = GridSpec::standard(2, 1.5, 33, 64);
        let cfg = make_exact_profile_instance(g).with_sampling(TimeSampling::DenseLate {
            dense_from: 48,
            stride: 8,
        });
        let sol = solve_cylinder(&cfg).unwrap();
        assert!(sol.field.slice(64).is_some());
        assert!(sol.field.slice(48).is_some());
        assert!(sol.field.slice(47).is_none());
    }
}
