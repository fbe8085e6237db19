use super::{GeometryError, GridSpec};

/// Which time levels of a field are materialized.
///
/// Strip functionals only read slices near the base time, while the early
/// part of the time range is needed only for coarse norms, so solver-scale
/// fields keep a dense tail and a strided head.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeSampling {
    /// Every level `0..=K`.
    Full,
    /// All levels `k >= dense_from`, plus every `stride`-th level before it.
    /// Levels 0 and K are always kept.
    DenseLate { dense_from: usize, stride: usize },
}

impl TimeSampling {
    fn levels(&self, steps: usize) -> Vec<usize> {
        match *self {
            TimeSampling::Full => (0..=steps).collect(),
            TimeSampling::DenseLate { dense_from, stride } => {
                let stride = stride.max(1);
                let dense_from = dense_from.min(steps);
                let mut v: Vec<usize> = (0..dense_from).step_by(stride).collect();
                v.extend(dense_from..=steps);
                if !v.contains(&0) {
                    v.insert(0, 0);
                }
                v
            }
        }
    }
}

/// A discrete space-time scalar function on a [`GridSpec`].
///
/// Values are stored per time level in row-major node order. The
/// even-symmetry flag records that `u(x', x_n, t) = u(x', -x_n, t)` holds
/// exactly at the nodes.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: GridSpec,
    even_xn: bool,
    stored: Vec<usize>,
    level_row: Vec<Option<usize>>,
    data: Vec<f64>,
}

impl ScalarField {
    /// Build a field by evaluating `f(x, t)` at the sampled nodes. With
    /// `even_xn` set, only `x_n >= 0` is evaluated and the lower half is
    /// mirrored, so the symmetry invariant holds exactly.
    pub fn from_fn(
        grid: GridSpec,
        sampling: TimeSampling,
        even_xn: bool,
        f: impl Fn(&[f64; 3], f64) -> f64 + Sync,
    ) -> Self {
        let stored = sampling.levels(grid.time_steps);
        let slice_len = grid.slice_len();
        let mut data = vec![0.0; stored.len() * slice_len];
        let mid = grid.center();
        for (row, &k) in stored.iter().enumerate() {
            let t = grid.time(k);
            let dst = &mut data[row * slice_len..(row + 1) * slice_len];
            for (flat, v) in dst.iter_mut().enumerate() {
                let idx = grid.unflat(flat);
                if even_xn && idx[grid.dim - 1] < mid {
                    continue;
                }
                *v = f(&grid.node_coords(flat), t);
            }
            if even_xn {
                mirror_slice(&grid, dst);
            }
        }
        let mut level_row = vec![None; grid.time_steps + 1];
        for (row, &k) in stored.iter().enumerate() {
            level_row[k] = Some(row);
        }
        Self {
            grid,
            even_xn,
            stored,
            level_row,
            data,
        }
    }

    /// Assemble from already-computed slices (used by the solver).
    pub fn from_slices(
        grid: GridSpec,
        even_xn: bool,
        levels: Vec<usize>,
        data: Vec<f64>,
    ) -> Result<Self, GeometryError> {
        if levels.len() * grid.slice_len() != data.len() {
            return Err(GeometryError::InvalidGrid(format!(
                "slice data length {} does not match {} levels of {} nodes",
                data.len(),
                levels.len(),
                grid.slice_len()
            )));
        }
        let mut level_row = vec![None; grid.time_steps + 1];
        for (row, &k) in levels.iter().enumerate() {
            if k > grid.time_steps {
                return Err(GeometryError::InvalidGrid(format!(
                    "time level {k} beyond K={}",
                    grid.time_steps
                )));
            }
            level_row[k] = Some(row);
        }
        Ok(Self {
            grid,
            even_xn,
            stored: levels,
            level_row,
            data,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn even_xn(&self) -> bool {
        self.even_xn
    }

    pub fn stored_levels(&self) -> &[usize] {
        &self.stored
    }

    pub fn slice(&self, k: usize) -> Option<&[f64]> {
        let row = *self.level_row.get(k)?;
        let row = row?;
        let len = self.grid.slice_len();
        Some(&self.data[row * len..(row + 1) * len])
    }

    /// Value at a stored level and flat node index.
    pub fn value(&self, k: usize, flat: usize) -> f64 {
        self.slice(k).expect("stored level")[flat]
    }

    /// Raw stored data (row-major per stored level).
    pub fn raw_data(&self) -> &[f64] {
        &self.data
    }

    /// Greatest stored level with time <= t (within rounding slack).
    pub fn level_at_or_below(&self, t: f64) -> Option<usize> {
        let slack = 1e-9 * self.grid.tau().max(1e-30);
        self.stored
            .iter()
            .copied()
            .take_while(|&k| self.grid.time(k) <= t + slack)
            .last()
    }

    /// Multilinear space / linear time interpolation, clamped to the grid.
    pub fn sample(&self, x: &[f64; 3], t: f64) -> f64 {
        let (k0, k1, wt) = self.bracket_time(t);
        let v0 = self.sample_slice(k0, x);
        if k1 == k0 {
            return v0;
        }
        let v1 = self.sample_slice(k1, x);
        v0 * (1.0 - wt) + v1 * wt
    }

    fn bracket_time(&self, t: f64) -> (usize, usize, f64) {
        let first = self.stored[0];
        let last = *self.stored.last().unwrap();
        if t <= self.grid.time(first) {
            return (first, first, 0.0);
        }
        if t >= self.grid.time(last) {
            return (last, last, 0.0);
        }
        // binary search over stored times
        let times: Vec<f64> = Vec::new();
        let _ = times;
        let mut lo = 0usize;
        let mut hi = self.stored.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.grid.time(self.stored[mid]) <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t0 = self.grid.time(self.stored[lo]);
        let t1 = self.grid.time(self.stored[hi]);
        let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        (self.stored[lo], self.stored[hi], w)
    }

    /// Multilinear interpolation within a stored slice, clamped to the box.
    pub fn sample_slice(&self, k: usize, x: &[f64; 3]) -> f64 {
        let g = &self.grid;
        let s = self.slice(k).expect("stored level");
        let h = g.h();
        let mut i0 = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for d in 0..g.dim {
            let pos = (x[d].clamp(-g.half_width, g.half_width) + g.half_width) / h;
            let base = pos.floor().min((g.nodes - 2) as f64).max(0.0);
            i0[d] = base as usize;
            frac[d] = (pos - base).clamp(0.0, 1.0);
        }
        let mut acc = 0.0;
        let corners = 1usize << g.dim;
        for c in 0..corners {
            let mut idx = [0usize; 3];
            let mut w = 1.0;
            for d in 0..g.dim {
                if c >> d & 1 == 1 {
                    idx[d] = i0[d] + 1;
                    w *= frac[d];
                } else {
                    idx[d] = i0[d];
                    w *= 1.0 - frac[d];
                }
            }
            acc += w * s[g.flat(&idx[..g.dim])];
        }
        acc
    }

    /// Finite-difference spatial gradient of a stored slice, laid out as
    /// `grad[axis * slice_len + flat]`.
    ///
    /// Central differences in the interior, one-sided at the box faces; on an
    /// even-symmetric field the normal derivative at the thin plane is the
    /// one-sided difference from `x_n > 0` (Lemma-2.2 style even extension).
    pub fn gradient_slice(&self, k: usize) -> Vec<f64> {
        let g = &self.grid;
        let s = self.slice(k).expect("stored level");
        let len = g.slice_len();
        let h = g.h();
        let mid = g.center();
        let mut out = vec![0.0; g.dim * len];
        let mut stride = vec![0usize; g.dim];
        for d in 0..g.dim {
            let mut st = 1;
            for _ in d + 1..g.dim {
                st *= g.nodes;
            }
            stride[d] = st;
        }
        for flat in 0..len {
            let idx = g.unflat(flat);
            for d in 0..g.dim {
                let i = idx[d];
                let st = stride[d];
                let val = if d == g.dim - 1 && self.even_xn && i == mid {
                    (s[flat + st] - s[flat]) / h
                } else if i == 0 {
                    (s[flat + st] - s[flat]) / h
                } else if i == g.nodes - 1 {
                    (s[flat] - s[flat - st]) / h
                } else {
                    (s[flat + st] - s[flat - st]) / (2.0 * h)
                };
                out[d * len + flat] = val;
            }
        }
        out
    }

    /// Backward-difference time derivative at a stored level, matching the
    /// time stepping; forward difference at the first stored level.
    pub fn time_derivative_slice(&self, k: usize) -> Vec<f64> {
        let g = &self.grid;
        let len = g.slice_len();
        let pos = self
            .stored
            .iter()
            .position(|&kk| kk == k)
            .expect("stored level");
        let (ka, kb) = if pos == 0 {
            (self.stored[0], self.stored[1])
        } else {
            (self.stored[pos - 1], self.stored[pos])
        };
        let dt = g.time(kb) - g.time(ka);
        let sa = self.slice(ka).unwrap();
        let sb = self.slice(kb).unwrap();
        let mut out = vec![0.0; len];
        for i in 0..len {
            out[i] = (sb[i] - sa[i]) / dt;
        }
        out
    }

    /// Pointwise map into a new field on the same grid/sampling.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = f(*v);
        }
        out
    }

    /// Pointwise combination with node coordinates (value, x) -> value.
    pub fn map_with_coords(&self, f: impl Fn(f64, &[f64; 3]) -> f64) -> ScalarField {
        let mut out = self.clone();
        let len = self.grid.slice_len();
        for row in 0..self.stored.len() {
            for flat in 0..len {
                let x = self.grid.node_coords(flat);
                let v = &mut out.data[row * len + flat];
                *v = f(*v, &x);
            }
        }
        out
    }

    /// Maximum absolute value over all stored nodes.
    pub fn sup_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Check the even-symmetry invariant at node level.
    pub fn verify_even(&self) -> bool {
        let g = &self.grid;
        let len = g.slice_len();
        for row in 0..self.stored.len() {
            let s = &self.data[row * len..(row + 1) * len];
            for flat in 0..len {
                let mut idx = g.unflat(flat);
                let i = idx[g.dim - 1];
                idx[g.dim - 1] = g.nodes - 1 - i;
                let m = g.flat(&idx[..g.dim]);
                if s[flat] != s[m] && (s[flat] - s[m]).abs() > 0.0 {
                    return false;
                }
            }
        }
        true
    }
}

/// Mirror the `x_n > 0` half of a slice onto `x_n < 0` in place.
pub fn mirror_slice(grid: &GridSpec, slice: &mut [f64]) {
    let mid = grid.center();
    for flat in 0..grid.slice_len() {
        let idx = grid.unflat(flat);
        let i = idx[grid.dim - 1];
        if i < mid {
            let mut midx = idx;
            midx[grid.dim - 1] = grid.nodes - 1 - i;
            slice[flat] = slice[grid.flat(&midx[..grid.dim])];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GridSpec;

    #[test]
    fn linear_field_gradient_exact() {
        let g = GridSpec::standard(2, 1.0, 17, 4);
        let u = ScalarField::from_fn(g.clone(), TimeSampling::Full, false, |x, _| x[0]);
        let grad = u.gradient_slice(2);
        let len = g.slice_len();
        for flat in 0..len {
            let idx = g.unflat(flat);
            // interior in x1
            if idx[0] > 0 && idx[0] < g.nodes - 1 {
                assert!((grad[flat] - 1.0).abs() < 1e-13);
            }
            assert!(grad[len + flat].abs() < 1e-13);
        }
        let dt = u.time_derivative_slice(2);
        assert!(dt.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn quadratic_caloric_derivatives_exact() {
        // u = x1^2 + 2t: dt u = 2, d1 u = 2 x1, exact for central differences
        let g = GridSpec::standard(2, 1.0, 17, 8);
        let u = ScalarField::from_fn(g.clone(), TimeSampling::Full, false, |x, t| {
            x[0] * x[0] + 2.0 * t
        });
        let grad = u.gradient_slice(4);
        let dt = u.time_derivative_slice(4);
        let len = g.slice_len();
        for flat in 0..len {
            let idx = g.unflat(flat);
            if idx[0] > 0 && idx[0] < g.nodes - 1 {
                let x1 = g.coord(idx[0]);
                assert!((grad[flat] - 2.0 * x1).abs() < 1e-12);
            }
            assert!((dt[flat] - 2.0).abs() < 1e-11);
        }
    }

    #[test]
    fn one_sided_normal_derivative_three_halves() {
        // u = |x_n|^{3/2}: d+_{x_n} u at the plane is O(h^{1/2})
        for nodes in [33usize, 129] {
            let g = GridSpec::standard(2, 1.0, nodes, 4);
            let u = ScalarField::from_fn(g.clone(), TimeSampling::Full, true, |x, _| {
                x[1].abs().powf(1.5)
            });
            let grad = u.gradient_slice(0);
            let len = g.slice_len();
            let mid = g.center();
            let flat = g.flat(&[5, mid]);
            let dplus = grad[len + flat];
            let h = g.h();
            assert!(
                dplus.abs() <= 1.01 * h.sqrt(),
                "one-sided derivative {dplus} not O(h^1/2) for h={h}"
            );
        }
    }

    #[test]
    fn even_construction_is_exact() {
        let g = GridSpec::standard(3, 1.0, 9, 4);
        let u = ScalarField::from_fn(g, TimeSampling::Full, true, |x, t| {
            x[2].abs().powf(1.5) + x[0] * t
        });
        assert!(u.verify_even());
    }

    #[test]
    fn dense_late_sampling_keeps_endpoints() {
        let g = GridSpec::standard(2, 1.0, 9, 64);
        let u = ScalarField::from_fn(
            g,
            TimeSampling::DenseLate {
                dense_from: 48,
                stride: 8,
            },
            false,
            |x, t| x[0] + t,
        );
        let lv = u.stored_levels();
        assert_eq!(lv[0], 0);
        assert_eq!(*lv.last().unwrap(), 64);
        assert!(lv.contains(&48) && lv.contains(&56) && lv.contains(&8));
        assert!(!lv.contains(&41));
    }

    #[test]
    fn interpolation_reproduces_linear() {
        let g = GridSpec::standard(2, 1.0, 17, 8);
        let u = ScalarField::from_fn(g, TimeSampling::Full, false, |x, t| {
            1.0 + 2.0 * x[0] - 0.5 * x[1] + 3.0 * t
        });
        let v = u.sample(&[0.13, -0.41, 0.0], -0.37);
        assert!((v - (1.0 + 2.0 * 0.13 + 0.5 * 0.41 - 3.0 * 0.37)).abs() < 1e-12);
    }
}
