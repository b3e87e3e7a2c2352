//! Cauchy transform of node densities on the six-ray contour, off the
//! contour and as boundary values.
//!
//! Each radial panel is parametrized outward, s = dir (mid + half tau).
//! Far panels use the panel's own Gauss-Legendre rule. Near panels and
//! self-interaction use product integration: the density is expanded in
//! Legendre polynomials and the moments q_k = int P_k / (tau - zeta) are
//! computed by recurrence (forward near the segment, Miller backward
//! further out). Boundary values come from the limit of q_0 onto the
//! segment, so C+ - C- = identity holds node by node.

use crate::contour::{two_pi_i, ContourGrid, RayId};
use crate::core::mat2::{re, Mat2, C64};
use crate::core::panel::gauss_legendre;
use crate::error::{kstr, Error, Result};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Which boundary value: + is the left of the oriented contour.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// Bernstein parameter below which a panel counts as near.
const NEAR: f64 = 2.6;
/// Switch from forward to backward recurrence for q_k.
const FORWARD_MAX: f64 = 1.5;

#[derive(Clone, Debug)]
struct Panel {
    ray: RayId,
    mid: f64,
    half: f64,
    /// Index of the panel's first node in the grid.
    first: usize,
}

/// Precomputed panel geometry and Legendre tables for one grid.
#[derive(Clone, Debug)]
pub struct CauchyOp {
    pub grid: ContourGrid,
    n: usize,
    panels: Vec<Panel>,
    tau: Vec<f64>,
    /// proj[k * n + j] = (2k+1)/2 W_j P_k(tau_j): maps node values to
    /// Legendre coefficients.
    proj: Vec<f64>,
}

fn legendre_p(x: f64, n: usize) -> Vec<f64> {
    let mut p = vec![1.0; n.max(1)];
    if n > 1 {
        p[1] = x;
    }
    for k in 1..n.saturating_sub(1) {
        p[k + 1] = ((2 * k + 1) as f64 * x * p[k] - k as f64 * p[k - 1]) / (k + 1) as f64;
    }
    p
}

fn bernstein(z: C64) -> f64 {
    (z + (z - 1.0).sqrt() * (z + 1.0).sqrt()).norm()
}

/// q_k(zeta) = int_{-1}^{1} P_k(tau) / (tau - zeta) dtau for k < n.
/// `on_segment` carries the sign of Im zeta for a limit onto (-1, 1).
fn legendre_q(zeta: C64, n: usize, on_segment: Option<f64>) -> Vec<C64> {
    let mut q = vec![re(0.0); n];
    let forward = |q: &mut Vec<C64>| {
        for k in 0..n - 1 {
            let src = if k == 0 { 2.0 } else { 0.0 };
            let prev = if k == 0 { re(0.0) } else { q[k - 1] };
            q[k + 1] = ((2 * k + 1) as f64 * (zeta * q[k] + src) - k as f64 * prev) / (k + 1) as f64;
        }
    };
    if let Some(s) = on_segment {
        let x = zeta.re;
        q[0] = C64::new(((1.0 - x) / (1.0 + x)).ln(), s * PI);
        forward(&mut q);
        return q;
    }
    q[0] = ((zeta - 1.0) / (zeta + 1.0)).ln();
    let rho = bernstein(zeta);
    if rho < FORWARD_MAX || n == 1 {
        forward(&mut q);
        return q;
    }
    // Miller: the q_k for k >= 0 obey the homogeneous three-term recurrence
    // for k >= 1 and are its minimal solution.
    let top = n + (40.0 / rho.ln()).ceil() as usize + 8;
    let (mut hi, mut mid) = (re(0.0), re(1.0));
    let mut tail = vec![re(0.0); n];
    for k in (1..=top).rev() {
        // q_{k-1} = ((2k+1) zeta q_k - (k+1) q_{k+1}) / k
        let lo = ((2 * k + 1) as f64 * zeta * mid - (k + 1) as f64 * hi) / k as f64;
        hi = mid;
        mid = lo;
        if k - 1 < n {
            tail[k - 1] = lo;
        }
        if mid.norm() > 1e150 {
            hi /= 1e150;
            mid /= 1e150;
            for v in tail.iter_mut() {
                *v /= 1e150;
            }
        }
    }
    let scale = q[0] / tail[0];
    for k in 1..n {
        q[k] = tail[k] * scale;
    }
    q
}

impl CauchyOp {
    pub fn new(grid: &ContourGrid) -> Self {
        let n = grid.nodes_per_panel;
        let g = gauss_legendre(n);
        let mut proj = vec![0.0; n * n];
        for j in 0..n {
            let p = legendre_p(g.0[j], n);
            for k in 0..n {
                proj[k * n + j] = (2 * k + 1) as f64 / 2.0 * g.1[j] * p[k];
            }
        }
        let mut panels = Vec::new();
        for r in RayId::ALL {
            for (p, &(a, b)) in grid.panels.iter().enumerate() {
                panels.push(Panel { ray: r, mid: 0.5 * (a + b), half: 0.5 * (b - a), first: grid.index(r, p * n) });
            }
        }
        CauchyOp { grid: grid.clone(), n, panels, tau: g.0.clone(), proj }
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.n
    }

    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }

    /// Panels lying on the given ray.
    pub fn panels_on(&self, r: RayId) -> impl Iterator<Item = usize> + '_ {
        self.panels.iter().enumerate().filter(move |(_, p)| p.ray == r).map(|(i, _)| i)
    }

    pub fn panel_first(&self, p: usize) -> usize {
        self.panels[p].first
    }

    /// Weights c_j with int_panel f(s) ds / (s - z) ~ sum_j c_j f_j, where
    /// the integral runs with the contour's orientation. `node` is the local
    /// index and side when z is one of the panel's own nodes.
    fn panel_weights(&self, p: usize, z: C64, node: Option<(usize, Side)>, out: &mut [C64]) {
        let pn = &self.panels[p];
        let n = self.n;
        let orient = pn.ray.orientation();
        let (zeta, seg) = match node {
            Some((j, side)) => (re(self.tau[j]), Some(side.sign() * orient)),
            None => ((z * pn.ray.dir().conj() - pn.mid) / pn.half, None),
        };
        if seg.is_none() && bernstein(zeta) >= NEAR {
            for j in 0..n {
                let i = pn.first + j;
                out[j] = self.grid.weights[i] / (self.grid.nodes[i] - z);
            }
            return;
        }
        let q = legendre_q(zeta, n, seg);
        for j in 0..n {
            let mut s = re(0.0);
            for k in 0..n {
                s += q[k] * self.proj[k * n + j];
            }
            out[j] = s * orient;
        }
    }

    /// Row of the discrete Cauchy operator at z, restricted to the listed
    /// source panels: (C f)(z) ~ sum over those panels' nodes of row * f.
    /// For a grid node pass `at = Some((node, side))` to get C+ or C-.
    pub fn row(&self, z: C64, at: Option<(usize, Side)>, sources: &[usize]) -> Vec<C64> {
        let n = self.n;
        let mut row = vec![re(0.0); sources.len() * n];
        let scale = two_pi_i().inv();
        for (ci, &p) in sources.iter().enumerate() {
            let first = self.panels[p].first;
            let own = at.and_then(|(i, s)| (i >= first && i < first + n).then(|| (i - first, s)));
            let seg = &mut row[ci * n..(ci + 1) * n];
            self.panel_weights(p, z, own, seg);
            for v in seg.iter_mut() {
                *v *= scale;
            }
        }
        row
    }

    /// Dense block: rows are target nodes (boundary values on `side`),
    /// columns the nodes of the source panels.
    pub fn boundary_block(&self, targets: &[usize], side: Side, sources: &[usize]) -> Vec<C64> {
        let rows: Vec<Vec<C64>> = targets
            .par_iter()
            .map(|&i| self.row(self.grid.nodes[i], Some((i, side)), sources))
            .collect();
        rows.concat()
    }

    /// Nodes of the given panels, in column order.
    pub fn panel_nodes(&self, sources: &[usize]) -> Vec<usize> {
        sources.iter().flat_map(|&p| (0..self.n).map(move |j| self.panels[p].first + j)).collect()
    }

    pub fn all_panels(&self) -> Vec<usize> {
        (0..self.panels.len()).collect()
    }

    fn check_off(&self, z: C64) -> Result<()> {
        let d = self.grid.distance(z);
        let h = self.grid.local_spacing(z.norm().min(self.grid.r_max));
        if !(d > 5.0 * h) {
            return Err(Error::TooCloseToContour(kstr(z)));
        }
        Ok(())
    }

    /// Cauchy transform of a Mat2 density at z off the contour.
    pub fn cauchy(&self, vals: &[Mat2], z: C64) -> Result<Mat2> {
        self.check_off(z)?;
        let all = self.all_panels();
        let row = self.row(z, None, &all);
        let cols = self.panel_nodes(&all);
        Ok(cols.iter().zip(&row).fold(Mat2::zero(), |acc, (&i, w)| acc + vals[i] * *w))
    }

    /// Boundary value C+ or C- of a Mat2 density at a grid node.
    pub fn cauchy_boundary(&self, vals: &[Mat2], node: usize, side: Side) -> Mat2 {
        let all = self.all_panels();
        let row = self.row(self.grid.nodes[node], Some((node, side)), &all);
        let cols = self.panel_nodes(&all);
        cols.iter().zip(&row).fold(Mat2::zero(), |acc, (&i, w)| acc + vals[i] * *w)
    }
}
