use rayon::prelude::*;

use crate::geometry::GridSpec;

use super::SolverError;

/// Index helpers for the `x_n >= 0` half of a grid slice. The thin plane is
/// local index 0 along the normal axis; full index `mid + j`.
#[derive(Debug, Clone)]
pub struct HalfGrid {
    pub grid: GridSpec,
    /// Nodes along the normal axis on the half, `(M+1)/2`.
    pub hn: usize,
    /// Tangential extent (product over tangential axes).
    pub tang: usize,
}

impl HalfGrid {
    pub fn new(grid: GridSpec) -> Self {
        let hn = grid.center() + 1;
        let tang = grid.nodes.pow((grid.dim - 1) as u32);
        Self { grid, hn, tang }
    }

    pub fn len(&self) -> usize {
        self.tang * self.hn
    }

    /// Per-axis indices of a half-grid flat index; the last entry is the
    /// local normal index `j` (full index `mid + j`).
    pub fn unflat(&self, flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        idx[self.grid.dim - 1] = flat % self.hn;
        let mut rest = flat / self.hn;
        for d in (0..self.grid.dim - 1).rev() {
            idx[d] = rest % self.grid.nodes;
            rest /= self.grid.nodes;
        }
        idx
    }

    pub fn coords(&self, flat: usize) -> [f64; 3] {
        let idx = self.unflat(flat);
        let mut x = [0.0f64; 3];
        for d in 0..self.grid.dim - 1 {
            x[d] = self.grid.coord(idx[d]);
        }
        x[self.grid.dim - 1] = self.grid.coord(self.grid.center() + idx[self.grid.dim - 1]);
        x
    }

    /// Neighbor stride along axis `d` in half-flat units.
    pub fn stride(&self, d: usize) -> usize {
        if d == self.grid.dim - 1 {
            1
        } else {
            let mut s = self.hn;
            for _ in d + 1..self.grid.dim - 1 {
                s *= self.grid.nodes;
            }
            s
        }
    }

    /// Is the node on a Dirichlet face (tangential box faces or top face)?
    pub fn is_dirichlet(&self, idx: &[usize; 3]) -> bool {
        let n = self.grid.nodes;
        for d in 0..self.grid.dim - 1 {
            if idx[d] == 0 || idx[d] == n - 1 {
                return true;
            }
        }
        idx[self.grid.dim - 1] == self.hn - 1
    }

    /// Is the node on the thin plane (and not Dirichlet)?
    pub fn is_thin(&self, idx: &[usize; 3]) -> bool {
        idx[self.grid.dim - 1] == 0 && !self.is_dirichlet(idx)
    }

    /// Mirror a half slice into a full-grid slice.
    pub fn mirror_into_full(&self, half: &[f64], full: &mut [f64]) {
        let g = &self.grid;
        let mid = g.center();
        for hf in 0..self.len() {
            let idx = self.unflat(hf);
            let j = idx[g.dim - 1];
            let mut fidx = idx;
            fidx[g.dim - 1] = mid + j;
            full[g.flat(&fidx[..g.dim])] = half[hf];
            if j > 0 {
                fidx[g.dim - 1] = mid - j;
                full[g.flat(&fidx[..g.dim])] = half[hf];
            }
        }
    }
}

/// Node classification for the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Dirichlet,
    Thin,
    Interior,
}

/// Per-step projected SOR solve of the backward-Euler system
///
/// `u/tau - div(A grad u) + b . grad u = u_prev/tau`,
///
/// with the unilateral constraint `u >= 0` at thin-plane nodes, Dirichlet
/// values preloaded in `u`, and diagonal coefficient fields sampled at cell
/// midpoints. Red-black ordering; each color is updated from a snapshot of
/// the other, so the sweep parallelizes deterministically.
pub struct PsorWorkspace {
    pub half: HalfGrid,
    kinds: Vec<NodeKind>,
    red: Vec<usize>,
    black: Vec<usize>,
    /// aplus[d][i], aminus[d][i] coefficient samples, updated per step.
    pub aplus: Vec<Vec<f64>>,
    pub aminus: Vec<Vec<f64>>,
    diag: Vec<f64>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
}

pub struct PsorOutcome {
    pub sweeps: usize,
    pub final_update: f64,
    pub complementarity_residual: f64,
}

impl PsorWorkspace {
    pub fn new(half: HalfGrid) -> Self {
        let len = half.len();
        let dim = half.grid.dim;
        let mut kinds = vec![NodeKind::Interior; len];
        let mut red = Vec::new();
        let mut black = Vec::new();
        for i in 0..len {
            let idx = half.unflat(i);
            kinds[i] = if half.is_dirichlet(&idx) {
                NodeKind::Dirichlet
            } else if half.is_thin(&idx) {
                NodeKind::Thin
            } else {
                NodeKind::Interior
            };
            if kinds[i] != NodeKind::Dirichlet {
                let parity: usize = idx[..dim].iter().sum::<usize>() % 2;
                if parity == 0 {
                    red.push(i);
                } else {
                    black.push(i);
                }
            }
        }
        Self {
            half,
            kinds,
            red,
            black,
            aplus: vec![vec![1.0; len]; dim],
            aminus: vec![vec![1.0; len]; dim],
            diag: vec![0.0; len],
            rhs: vec![0.0; len],
            scratch: vec![0.0; len],
        }
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    /// Recompute the diagonal from the current coefficient samples.
    pub fn assemble_diag(&mut self, tau: f64) {
        let h2 = self.half.grid.h().powi(2);
        let dim = self.half.grid.dim;
        for i in 0..self.half.len() {
            let mut d = 1.0 / tau;
            match self.kinds[i] {
                NodeKind::Dirichlet => {
                    self.diag[i] = 1.0;
                    continue;
                }
                NodeKind::Thin => {
                    for dd in 0..dim - 1 {
                        d += (self.aplus[dd][i] + self.aminus[dd][i]) / h2;
                    }
                    d += 2.0 * self.aplus[dim - 1][i] / h2;
                }
                NodeKind::Interior => {
                    for dd in 0..dim {
                        d += (self.aplus[dd][i] + self.aminus[dd][i]) / h2;
                    }
                }
            }
            self.diag[i] = d;
        }
    }

    /// Load `u_prev/tau` plus an optional extra source into the right side.
    pub fn set_rhs(&mut self, u_prev: &[f64], tau: f64, source: Option<&[f64]>) {
        for i in 0..self.rhs.len() {
            self.rhs[i] = u_prev[i] / tau
                + match source {
                    Some(s) => s[i],
                    None => 0.0,
                };
        }
    }

    fn neighbor_sum(&self, u: &[f64], i: usize) -> f64 {
        let dim = self.half.grid.dim;
        let h2 = self.half.grid.h().powi(2);
        let mut acc = 0.0;
        match self.kinds[i] {
            NodeKind::Thin => {
                for d in 0..dim - 1 {
                    let st = self.half.stride(d);
                    acc += self.aplus[d][i] * u[i + st] + self.aminus[d][i] * u[i - st];
                }
                acc += 2.0 * self.aplus[dim - 1][i] * u[i + 1];
            }
            _ => {
                for d in 0..dim {
                    let st = self.half.stride(d);
                    acc += self.aplus[d][i] * u[i + st] + self.aminus[d][i] * u[i - st];
                }
            }
        }
        acc / h2
    }

    /// One red-black PSOR sweep; returns the max absolute update.
    pub fn sweep(&mut self, u: &mut [f64], omega: f64) -> f64 {
        let mut worst = 0.0f64;
        for pass in 0..2 {
            let nodes = if pass == 0 { &self.red } else { &self.black };
            // compute phase: each node from a snapshot of the current state
            let kinds = &self.kinds;
            let diag = &self.diag;
            let rhs = &self.rhs;
            let uread: &[f64] = u;
            let updates: Vec<(usize, f64)> = nodes
                .par_iter()
                .map(|&i| {
                    let gs = (rhs[i] + self.neighbor_sum(uread, i)) / diag[i];
                    let mut v = uread[i] + omega * (gs - uread[i]);
                    if kinds[i] == NodeKind::Thin && v < 0.0 {
                        v = 0.0;
                    }
                    (i, v)
                })
                .collect();
            let mut local = 0.0f64;
            for (i, v) in updates {
                local = local.max((v - u[i]).abs());
                u[i] = v;
            }
            worst = worst.max(local);
        }
        worst
    }

    /// Iterate sweeps until the max update drops below `tol`; optionally
    /// refreshing a drift source each sweep via `refresh`.
    pub fn solve_step(
        &mut self,
        u: &mut [f64],
        u_prev: &[f64],
        tau: f64,
        omega: f64,
        tol: f64,
        max_sweeps: usize,
        mut refresh: Option<&mut dyn FnMut(&[f64], &mut [f64])>,
    ) -> Result<PsorOutcome, SolverError> {
        let mut sweeps = 0;
        loop {
            if let Some(f) = refresh.as_deref_mut() {
                // drift source recomputed from the current iterate
                self.scratch.iter_mut().for_each(|v| *v = 0.0);
                let mut src = std::mem::take(&mut self.scratch);
                f(u, &mut src);
                for i in 0..self.rhs.len() {
                    self.rhs[i] = u_prev[i] / tau + src[i];
                }
                self.scratch = src;
            }
            let upd = self.sweep(u, omega);
            sweeps += 1;
            if upd < tol {
                let res = self.complementarity_residual(u);
                return Ok(PsorOutcome {
                    sweeps,
                    final_update: upd,
                    complementarity_residual: res,
                });
            }
            if sweeps >= max_sweeps {
                return Err(SolverError::NoConvergence {
                    sweeps,
                    worst_update: upd,
                    worst_residual: self.complementarity_residual(u),
                });
            }
        }
    }

    /// Max over nodes of the discrete variational-inequality residual:
    /// `|A u - rhs|` at unconstrained nodes, `|min(u, A u - rhs)|` at thin
    /// nodes.
    pub fn complementarity_residual(&self, u: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..u.len() {
            match self.kinds[i] {
                NodeKind::Dirichlet => {}
                NodeKind::Interior => {
                    let r = self.diag[i] * u[i] - self.neighbor_sum(u, i) - self.rhs[i];
                    worst = worst.max(r.abs());
                }
                NodeKind::Thin => {
                    let r = self.diag[i] * u[i] - self.neighbor_sum(u, i) - self.rhs[i];
                    worst = worst.max(u[i].min(r).abs());
                }
            }
        }
        worst
    }
}
