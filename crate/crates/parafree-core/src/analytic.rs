//! Closed-form calibration fields.
//!
//! These are the reference inputs every functional is calibrated against: a
//! constant, the caloric monomials `x_1` and `x_1^2 + 2t`, and the
//! half-space contact profile `Re(x' . e + i |x_n|)^{3/2}` whose parabolic
//! homogeneity degree is 3/2.

use crate::geometry::{GridSpec, ScalarField, TimeSampling};

/// `Re(w)^{3/2}` for `w = p + i q`, `q >= 0`; the branch with argument in
/// `[0, pi]`.
fn re_pow_three_halves(p: f64, q: f64) -> f64 {
    let r = p.hypot(q);
    if r == 0.0 {
        return 0.0;
    }
    if q == 0.0 {
        // exact values on the thin plane: p^{3/2} on the positive ray,
        // 0 on the contact ray (cos(3 pi / 2) would round off otherwise)
        return if p > 0.0 { p * p.sqrt() } else { 0.0 };
    }
    let theta = q.atan2(p);
    r.powf(1.5) * (1.5 * theta).cos()
}

/// Contact profile `Re(x' . e + i |x_n|)^{3/2}` with tangential direction `e`.
///
/// Time independent, caloric off the contact set, nonnegative on the thin
/// plane with contact exactly on `{x' . e <= 0}`.
pub fn profile_value(x: &[f64; 3], dim: usize, e: &[f64], scale: f64) -> f64 {
    let mut p = 0.0;
    for d in 0..dim - 1 {
        p += x[d] * e[d];
    }
    scale * re_pow_three_halves(p, x[dim - 1].abs())
}

/// The standard profile with `e = e_1` and unit amplitude.
pub fn profile_e1(x: &[f64; 3], dim: usize) -> f64 {
    profile_value(x, dim, &[1.0, 0.0], 1.0)
}

/// Which calibration field to materialize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibrationField {
    /// `u = 1`.
    Constant,
    /// `u = x_1`, caloric of parabolic degree 1.
    Linear,
    /// `u = Re(x_1 + i |x_n|)^{3/2}`, degree 3/2.
    Profile,
    /// `u = x_1^2 + 2t`, caloric of degree 2.
    Degree2,
}

impl CalibrationField {
    pub fn name(&self) -> &'static str {
        match self {
            CalibrationField::Constant => "constant",
            CalibrationField::Linear => "x1",
            CalibrationField::Profile => "profile32",
            CalibrationField::Degree2 => "degree2",
        }
    }

    /// Exact parabolic homogeneity degree (frequency) of the field.
    pub fn degree(&self) -> f64 {
        match self {
            CalibrationField::Constant => 0.0,
            CalibrationField::Linear => 1.0,
            CalibrationField::Profile => 1.5,
            CalibrationField::Degree2 => 2.0,
        }
    }

    pub fn eval(&self, x: &[f64; 3], t: f64, dim: usize) -> f64 {
        match self {
            CalibrationField::Constant => 1.0,
            CalibrationField::Linear => x[0],
            CalibrationField::Profile => profile_e1(x, dim),
            CalibrationField::Degree2 => x[0] * x[0] + 2.0 * t,
        }
    }

    /// Even in `x_n`?
    pub fn even_xn(&self) -> bool {
        !matches!(self, CalibrationField::Linear) || true
    }

    /// Materialize on a grid.
    pub fn field(&self, grid: GridSpec, sampling: TimeSampling) -> ScalarField {
        let dim = grid.dim;
        let kind = *self;
        ScalarField::from_fn(grid, sampling, true, move |x, t| kind.eval(x, t, dim))
    }
}

/// Standard experiment grid for solved instances and classification runs:
/// `h = 0.0125` and `tau = 1/800` put the frequency-ladder floor
/// `max(8h, sqrt(8 tau))` at 0.1, giving five ladder radii over two octaves
/// below 0.4; the half-width leaves the same ladder available at
/// free-boundary points slightly off the origin. Slices are dense where the
/// strip functionals look (`t >= -0.2`) and strided earlier.
pub fn experiment_grid(dim: usize) -> (GridSpec, TimeSampling) {
    let (half_width, nodes, steps) = match dim {
        2 => (2.6, 417, 800),
        _ => (1.3, 105, 400),
    };
    let grid = GridSpec::new(dim, half_width, nodes, -1.0, steps).expect("experiment grid");
    let dense_from = (0.8 * steps as f64) as usize;
    (
        grid,
        TimeSampling::DenseLate {
            dense_from,
            stride: 16,
        },
    )
}

/// Grid adapted to quadrature at a single radius `r` around the origin:
/// box `[-L_r, L_r]^n` with `L_r = max(1, 7.5 r)` and a time range just
/// covering the strip `(-1.1 r^2, 0]`, resolved so that all but the final
/// band see a well-sampled kernel.
pub fn radius_adapted_grid(dim: usize, r: f64) -> GridSpec {
    let half_width = (7.5 * r).max(1.0);
    // target h ~ 0.078 r, odd node count, at least 65
    let mut nodes = (2.0 * half_width / (0.078 * r)).ceil() as usize + 1;
    if nodes % 2 == 0 {
        nodes += 1;
    }
    nodes = nodes.max(65);
    let t_start = -1.1 * r * r;
    let time_steps = 88;
    GridSpec::new(dim, half_width, nodes, t_start, time_steps).expect("adapted grid valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_branch_values() {
        // positive ray: u = x1^{3/2}; contact ray: u = 0
        assert!((profile_e1(&[1.0, 0.0, 0.0], 2) - 1.0).abs() < 1e-14);
        assert!((profile_e1(&[4.0, 0.0, 0.0], 2) - 8.0).abs() < 1e-13);
        assert!(profile_e1(&[-1.0, 0.0, 0.0], 2).abs() < 1e-13);
        // off the plane the sign follows cos(3 theta / 2): positive below
        // theta = pi/3, negative beyond
        assert!(profile_e1(&[1.0, 0.5, 0.0], 2) > 0.0);
        assert!(profile_e1(&[0.0, 1.0, 0.0], 2) < 0.0);
    }

    #[test]
    fn profile_homogeneity() {
        let x = [0.3, 0.2, 0.0];
        let lam = 0.37;
        let xl = [lam * 0.3, lam * 0.2, 0.0];
        let a = profile_e1(&xl, 2);
        let b = lam.powf(1.5) * profile_e1(&x, 2);
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn profile_signorini_conditions_on_plane() {
        // On the thin plane: u >= 0 everywhere, and the one-sided normal
        // derivative vanishes on the positivity set {x1 > 0}.
        for x1 in [-0.8, -0.2, 0.1, 0.7] {
            let u0 = profile_e1(&[x1, 0.0, 0.0], 2);
            assert!(u0 >= 0.0);
        }
        let eps = 1e-7;
        let d = (profile_e1(&[0.5, eps, 0.0], 2) - profile_e1(&[0.5, 0.0, 0.0], 2)) / eps;
        assert!(d.abs() < 1e-3, "flux should vanish on positivity set: {d}");
        let dc = (profile_e1(&[-0.5, eps, 0.0], 2) - profile_e1(&[-0.5, 0.0, 0.0], 2)) / eps;
        assert!(dc < 0.0, "flux should be nonpositive on contact: {dc}");
    }
}
