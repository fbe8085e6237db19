use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Uniform space-time grid over the truncated box `[-L, L]^n x (t_start, 0]`.
///
/// The node count per axis is odd so that `x = 0` is a node and the grid is
/// symmetric under `x_n -> -x_n`; the thin hyperplane `{x_n = 0}` is a node
/// plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Spatial dimension, 2 or 3.
    pub dim: usize,
    /// Spatial half-width `L` of the box.
    pub half_width: f64,
    /// Nodes per axis `M` (odd).
    pub nodes: usize,
    /// Start of the time interval; the end is always 0.
    pub t_start: f64,
    /// Number of time steps `K`.
    pub time_steps: usize,
}

impl GridSpec {
    pub fn new(
        dim: usize,
        half_width: f64,
        nodes: usize,
        t_start: f64,
        time_steps: usize,
    ) -> Result<Self, GeometryError> {
        if dim != 2 && dim != 3 {
            return Err(GeometryError::InvalidGrid(format!(
                "dimension must be 2 or 3, got {dim}"
            )));
        }
        if nodes < 5 || nodes % 2 == 0 {
            return Err(GeometryError::InvalidGrid(format!(
                "nodes per axis must be odd and >= 5, got {nodes}"
            )));
        }
        if !(half_width > 0.0) {
            return Err(GeometryError::InvalidGrid(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        if !(t_start < 0.0) {
            return Err(GeometryError::InvalidGrid(format!(
                "t_start must be negative, got {t_start}"
            )));
        }
        if time_steps < 2 {
            return Err(GeometryError::InvalidGrid(format!(
                "need at least 2 time steps, got {time_steps}"
            )));
        }
        Ok(Self {
            dim,
            half_width,
            nodes,
            t_start,
            time_steps,
        })
    }

    /// Standard full-size grid over `[-L, L]^n x (-1, 0]`.
    pub fn standard(dim: usize, half_width: f64, nodes: usize, time_steps: usize) -> Self {
        Self::new(dim, half_width, nodes, -1.0, time_steps).expect("valid standard grid")
    }

    /// Spatial mesh width `h = 2L/(M-1)`.
    pub fn h(&self) -> f64 {
        2.0 * self.half_width / (self.nodes - 1) as f64
    }

    /// Time step `tau = -t_start / K` (equals `1/K` on the standard grid).
    pub fn tau(&self) -> f64 {
        -self.t_start / self.time_steps as f64
    }

    /// Coordinate of node `i` along any axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.h()
    }

    /// Time of level `k`: `t_start + k*tau`, with `t_K = 0` exactly.
    pub fn time(&self, k: usize) -> f64 {
        if k == self.time_steps {
            0.0
        } else {
            self.t_start + k as f64 * self.tau()
        }
    }

    /// Axis index of the center node `x = 0`.
    pub fn center(&self) -> usize {
        (self.nodes - 1) / 2
    }

    /// Number of nodes per time slice, `M^n`.
    pub fn slice_len(&self) -> usize {
        self.nodes.pow(self.dim as u32)
    }

    /// Flat index of a spatial node from per-axis indices (only the first
    /// `dim` entries are used; axis n-1 is the thin direction `x_n`).
    pub fn flat(&self, idx: &[usize]) -> usize {
        let mut f = 0;
        for d in 0..self.dim {
            f = f * self.nodes + idx[d];
        }
        f
    }

    /// Per-axis indices from a flat node index.
    pub fn unflat(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for d in (0..self.dim).rev() {
            idx[d] = flat % self.nodes;
            flat /= self.nodes;
        }
        idx
    }

    /// Spatial coordinates of a flat node index.
    pub fn node_coords(&self, flat: usize) -> [f64; 3] {
        let idx = self.unflat(flat);
        let mut x = [0.0; 3];
        for d in 0..self.dim {
            x[d] = self.coord(idx[d]);
        }
        x
    }

    /// Nearest axis index for a coordinate (clamped to the box).
    pub fn nearest_index(&self, x: f64) -> usize {
        let i = ((x + self.half_width) / self.h()).round();
        (i.max(0.0) as usize).min(self.nodes - 1)
    }

    /// Nearest time level for a time value (clamped to the range).
    pub fn nearest_time_level(&self, t: f64) -> usize {
        let k = ((t - self.t_start) / self.tau()).round();
        (k.max(0.0) as usize).min(self.time_steps)
    }

    /// Trapezoid weight of axis index `i` (h at interior nodes, h/2 on faces).
    pub fn trap_weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.nodes - 1 {
            0.5 * self.h()
        } else {
            self.h()
        }
    }
}

/// A space-time base point `z_0 = (x_0, t_0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasePoint {
    pub x: [f64; 3],
    pub t: f64,
}

impl BasePoint {
    pub fn new(x: [f64; 3], t: f64) -> Self {
        Self { x, t }
    }

    /// Origin base point `(0, 0)`.
    pub fn origin() -> Self {
        Self { x: [0.0; 3], t: 0.0 }
    }

    /// Parabolic norm `(|x|^2 + |t|)^{1/2}`.
    pub fn parabolic_norm(&self, dim: usize) -> f64 {
        let xx: f64 = self.x[..dim].iter().map(|v| v * v).sum();
        (xx + self.t.abs()).sqrt()
    }

    /// Parabolic distance to another point.
    pub fn parabolic_dist(&self, other: &BasePoint, dim: usize) -> f64 {
        let mut xx = 0.0;
        for d in 0..dim {
            let dx = self.x[d] - other.x[d];
            xx += dx * dx;
        }
        (xx + (self.t - other.t).abs()).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_basics() {
        let g = GridSpec::standard(2, 6.0, 193, 256);
        assert!((g.h() - 0.0625).abs() < 1e-15);
        assert!((g.tau() - 1.0 / 256.0).abs() < 1e-18);
        assert_eq!(g.coord(g.center()), 0.0);
        assert_eq!(g.time(256), 0.0);
        assert!((g.time(0) - (-1.0)).abs() < 1e-15);
        // symmetric under x_n -> -x_n: mirrored coordinates match
        let i = 40;
        assert!((g.coord(i) + g.coord(g.nodes - 1 - i)).abs() < 1e-13);
    }

    #[test]
    fn grid_rejects_even_nodes() {
        assert!(GridSpec::new(2, 2.0, 128, -1.0, 16).is_err());
        assert!(GridSpec::new(4, 2.0, 129, -1.0, 16).is_err());
    }

    #[test]
    fn flat_roundtrip() {
        let g = GridSpec::standard(3, 1.0, 9, 4);
        for flat in [0usize, 17, 500, 728] {
            let idx = g.unflat(flat);
            assert_eq!(g.flat(&idx[..3]), flat);
        }
    }
}
