use std::f64::consts::PI;

use super::BasePoint;

/// Backward heat kernel translated to a base point `z_0`:
///
/// `G_{z0}(x, t) = (-4 pi (t - t0))^{-n/2} exp(|x - x0|^2 / (4 (t - t0)))`
/// for `t < t0`, and `0` for `t >= t0`.
///
/// Nonnegative everywhere, with unit spatial integral for every `t < t0`.
#[derive(Debug, Clone, Copy)]
pub struct HeatKernelWeight {
    pub z0: BasePoint,
    pub dim: usize,
}

impl HeatKernelWeight {
    pub fn new(z0: BasePoint, dim: usize) -> Self {
        Self { z0, dim }
    }

    /// Kernel value at `(x, t)`.
    pub fn value(&self, x: &[f64], t: f64) -> f64 {
        kernel_value(x, t, &self.z0, self.dim)
    }

    /// Normalizing prefactor `(4 pi (t0 - t))^{-n/2}` at backward lag `t0 - t`.
    pub fn prefactor(&self, lag: f64) -> f64 {
        (4.0 * PI * lag).powf(-(self.dim as f64) / 2.0)
    }
}

/// `G_{z0}(x, t)`; returns 0 for `t >= t0`.
pub fn kernel_value(x: &[f64], t: f64, z0: &BasePoint, dim: usize) -> f64 {
    let lag = z0.t - t;
    if lag <= 0.0 {
        return 0.0;
    }
    let mut d2 = 0.0;
    for d in 0..dim {
        let dx = x[d] - z0.x[d];
        d2 += dx * dx;
    }
    (4.0 * PI * lag).powf(-(dim as f64) / 2.0) * (-d2 / (4.0 * lag)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_at_origin_n2() {
        // (x=0, t=-1, z0=0, n=2) -> 1/(4 pi)
        let v = kernel_value(&[0.0, 0.0], -1.0, &BasePoint::origin(), 2);
        assert!((v - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!((v - 0.079_577_47).abs() < 1e-7);
    }

    #[test]
    fn zero_at_or_after_base_time() {
        let z0 = BasePoint::origin();
        assert_eq!(kernel_value(&[0.3, 0.1], 0.0, &z0, 2), 0.0);
        assert_eq!(kernel_value(&[0.3, 0.1], 0.5, &z0, 2), 0.0);
    }

    #[test]
    fn nonnegative_and_translation() {
        let z0 = BasePoint::new([0.25, -0.5, 0.0], -0.1);
        let v1 = kernel_value(&[0.25, -0.5], -0.4, &z0, 2);
        let v2 = kernel_value(&[0.0, 0.0], -0.3, &BasePoint::origin(), 2);
        assert!(v1 > 0.0);
        assert!((v1 - v2).abs() < 1e-15);
    }
}
