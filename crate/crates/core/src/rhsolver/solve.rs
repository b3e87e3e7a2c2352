//! Grid selection and the singular integral equation mu - I = C_w mu.
//!
//! With w- lower and w+ upper triangular, a row (p, q) of mu obeys
//!   p - d1 = C+(q om_m)   on the support S+ of om_p,
//!   q - d2 = C-(p om_p)   on the support S- of om_m,
//! so the unknowns are p on S+ and q on S-. Writing P = C+ om_m and
//! Q = C- om_p, eliminating p leaves (I - Q P) q = d2 + Q d1 on S-.

use super::cauchy::{CauchyOp, Side};
use super::jump::JumpData;
use crate::contour::{two_pi_i, ContourGrid, RayId};
use crate::core::linalg::{gmres, DenseLu};
use crate::core::mat2::{re, Mat2, C64};
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Auto,
    Direct,
    Gmres,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RhOptions {
    pub nodes_per_panel: usize,
    /// Ratio of consecutive panel edges away from the origin.
    pub grading: f64,
    /// Length of the panel touching the origin.
    pub r_min: f64,
    pub max_panel_len: f64,
    /// Accuracy asked of each panel's interpolant, relative to |w| there.
    pub quad_tol: f64,
    /// Tolerated size of the discarded tail of the jump (see `tail_weight`).
    pub tail_tol: f64,
    /// Power p of the weight (1 + |k|)^p in the tail estimate: 0 for u,
    /// 2 when the third moment is needed.
    pub tail_weight: i32,
    pub max_nodes_per_ray: usize,
    /// Rays where |w| stays below this are left out of the system.
    pub drop_below: f64,
    pub solver: SolverKind,
    /// Largest reduced system solved by LU under `Auto`.
    pub lu_max: usize,
    pub tol: f64,
}

impl Default for RhOptions {
    fn default() -> Self {
        RhOptions {
            nodes_per_panel: 16,
            grading: 1.6,
            r_min: 0.05,
            max_panel_len: 4.0,
            quad_tol: 1e-12,
            tail_tol: 1e-8,
            tail_weight: 0,
            max_nodes_per_ray: 2400,
            drop_below: 1e-12,
            solver: SolverKind::Auto,
            lu_max: 900,
            tol: 1e-13,
        }
    }
}

impl RhOptions {
    pub fn check(&self) -> Result<()> {
        if self.nodes_per_panel < 4
            || !(self.grading > 1.0)
            || !(self.r_min > 0.0)
            || !(self.max_panel_len > 0.0)
            || !(self.quad_tol > 0.0)
            || !(self.tail_tol > 0.0)
            || !(self.tol > 0.0)
            || !(self.drop_below >= 0.0)
            || !(0..=4).contains(&self.tail_weight)
        {
            return Err(Error::BadParams(format!("invalid RH options {self:?}")));
        }
        Ok(())
    }
}

/// A contour grid chosen for a window of (x, t).
#[derive(Clone, Debug)]
pub struct RhGrid {
    pub grid: ContourGrid,
    pub r_cut: f64,
    pub tail_estimate: f64,
}

/// Envelope of |w| sampled on a radial table, per ray.
pub struct Envelope<'a> {
    pub radial: &'a [f64],
    pub radial_w: &'a [f64],
    /// env[ray][i] at radial[i]; rays with an all-zero row are inactive.
    pub env: [Vec<f64>; 6],
    pub r_cap: f64,
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

/// Truncation radius and panels. `tail_rate(rho)` is a lower and
/// `panel_rate(rho)` an upper bound for the derivative of the jump's phase
/// along the rays, over the (x, t) window the grid must serve.
///
/// The discarded tail is bounded by the smaller of its absolute integral
/// and, integrating by parts against the phase, 2 max |w| / phase'.
pub fn choose_grid(
    envl: &Envelope,
    tail_rate: impl Fn(f64) -> f64,
    panel_rate: impl Fn(f64) -> f64,
    o: &RhOptions,
) -> Result<RhGrid> {
    o.check()?;
    let m = envl.radial.len();
    let emax: Vec<f64> = (0..m).map(|i| envl.env.iter().map(|e| e[i]).fold(0.0, f64::max)).collect();
    let weighted: Vec<f64> = (0..m)
        .map(|i| envl.env.iter().map(|e| e[i]).sum::<f64>() * (1.0 + envl.radial[i]).powi(o.tail_weight))
        .collect();
    let (mut abs_tail, mut osc_tail) = (0.0, 0.0f64);
    let mut tail = 0.0;
    let mut cut = m;
    for i in (0..m).rev() {
        let a = abs_tail + weighted[i] * envl.radial_w[i];
        let rate = tail_rate(envl.radial[i]);
        let b = if rate > 0.0 { osc_tail.max(2.0 * weighted[i] / rate) } else { f64::INFINITY };
        let est = a.min(b) / PI;
        if est > o.tail_tol {
            break;
        }
        (abs_tail, osc_tail, tail, cut) = (a, b, est, i);
    }
    let r_cut = if cut == m {
        envl.r_cap
    } else if cut == 0 {
        1.0f64.min(envl.r_cap)
    } else {
        envl.radial[cut].max(1.0).min(envl.r_cap)
    };
    let n = o.nodes_per_panel;
    let nfact = factorial(n);
    let env_near = |rho: f64| -> f64 {
        let (lo, hi) = (rho / 1.3, rho * 1.3);
        let mut best: f64 = 0.0;
        for i in 0..m {
            if envl.radial[i] >= lo && envl.radial[i] <= hi {
                best = best.max(emax[i]);
            }
        }
        best
    };
    let mut edges = vec![0.0];
    let mut cur = 0.0;
    while cur < r_cut {
        let mut len = if cur == 0.0 { o.r_min } else { (cur * (o.grading - 1.0)).min(o.max_panel_len) };
        for _ in 0..3 {
            let mid = cur + 0.5 * len;
            let e = env_near(mid).max(1e-300);
            let phi = (4.0 * (o.quad_tol * nfact / e).powf(1.0 / n as f64)).clamp(4.0, 40.0);
            len = len.min(phi / panel_rate(cur + len).max(1e-300));
        }
        let mut next = (cur + len).min(r_cut);
        if r_cut - next < 0.3 * len {
            next = r_cut;
        }
        edges.push(next);
        cur = next;
        if edges.len() * n > o.max_nodes_per_ray {
            return Err(Error::BadParams(format!(
                "RH grid needs more than {} nodes per ray (R = {r_cut:.3})",
                o.max_nodes_per_ray
            )));
        }
    }
    let panels = edges.windows(2).map(|w| (w[0], w[1])).collect();
    Ok(RhGrid { grid: ContourGrid::from_panels(panels, n)?, r_cut, tail_estimate: tail })
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct SolveDiagnostics {
    pub unknowns: usize,
    pub method: String,
    pub iterations: usize,
    /// max over nodes of |mu - I - C_w mu|.
    pub residual: f64,
    /// Condition estimate of the reduced operator I - QP.
    pub cond_estimate: f64,
    /// Power-iteration estimate of the 2-norm of C_w.
    pub cw_norm_estimate: f64,
    /// max |mu_direct - mu_neumann| when the Neumann series was run.
    pub neumann_gap: Option<f64>,
    pub r_cut: f64,
    pub tail_estimate: f64,
}

/// Solution of the mu equation at one (x, t).
pub struct RhSolution {
    pub jd: JumpData,
    pub op: CauchyOp,
    /// Grid nodes of S+ and S-.
    pub s_plus: Vec<usize>,
    pub s_minus: Vec<usize>,
    /// p[row] on S+, q[row] on S-, for the two rows of mu.
    pub p: [Vec<C64>; 2],
    pub q: [Vec<C64>; 2],
    pub diag: SolveDiagnostics,
}

fn active_panels(op: &CauchyOp, jd: &JumpData, om: &[C64], floor: f64) -> Vec<usize> {
    let g = &jd.grid;
    let mut out = Vec::new();
    for r in RayId::ALL {
        let on = (0..g.per_ray()).any(|j| om[g.index(r, j)].norm() > floor);
        if on {
            out.extend(op.panels_on(r));
        }
    }
    out
}

struct Blocks {
    /// n+ x n-: C+ at S+ nodes of (om_m q) on S-.
    pm: Vec<C64>,
    /// n- x n+: C- at S- nodes of (om_p p) on S+.
    qm: Vec<C64>,
    np: usize,
    nm: usize,
}

impl Blocks {
    fn p_apply(&self, q: &[C64], out: &mut [C64]) {
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            *o = self.pm[i * self.nm..(i + 1) * self.nm].iter().zip(q).map(|(a, b)| a * b).sum();
        });
    }

    fn q_apply(&self, p: &[C64], out: &mut [C64]) {
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            *o = self.qm[i * self.np..(i + 1) * self.np].iter().zip(p).map(|(a, b)| a * b).sum();
        });
    }

    fn p_adj(&self, y: &[C64]) -> Vec<C64> {
        (0..self.nm)
            .into_par_iter()
            .map(|j| (0..self.np).map(|i| self.pm[i * self.nm + j].conj() * y[i]).sum())
            .collect()
    }

    fn q_adj(&self, y: &[C64]) -> Vec<C64> {
        (0..self.np)
            .into_par_iter()
            .map(|j| (0..self.nm).map(|i| self.qm[i * self.np + j].conj() * y[i]).sum())
            .collect()
    }

    /// y = (I - QP) x on S-.
    fn reduced(&self, x: &[C64], y: &mut [C64]) {
        let mut t = vec![re(0.0); self.np];
        self.p_apply(x, &mut t);
        self.q_apply(&t, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = xi - *yi;
        }
    }

    fn dense_reduced(&self) -> Vec<C64> {
        let (np, nm) = (self.np, self.nm);
        let mut a: Vec<C64> = (0..nm)
            .into_par_iter()
            .flat_map_iter(|i| {
                let qrow = &self.qm[i * np..(i + 1) * np];
                let mut row = vec![re(0.0); nm];
                for (k, qk) in qrow.iter().enumerate() {
                    if qk.re == 0.0 && qk.im == 0.0 {
                        continue;
                    }
                    for (r, pv) in row.iter_mut().zip(&self.pm[k * nm..(k + 1) * nm]) {
                        *r -= qk * pv;
                    }
                }
                row
            })
            .collect();
        for i in 0..nm {
            a[i * nm + i] += 1.0;
        }
        a
    }

    /// 2-norm estimate of C_w = [[0, P], [Q, 0]] by power iteration.
    fn cw_norm(&self) -> f64 {
        let (np, nm) = (self.np, self.nm);
        let mut v: Vec<C64> = (0..np + nm).map(|i| re(1.0 + (i % 7) as f64 * 0.1)).collect();
        let mut est = 0.0;
        for _ in 0..30 {
            let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if nv == 0.0 {
                return 0.0;
            }
            v.iter_mut().for_each(|z| *z /= nv);
            let (mut a, mut b) = (vec![re(0.0); np], vec![re(0.0); nm]);
            self.p_apply(&v[np..], &mut a);
            self.q_apply(&v[..np], &mut b);
            let w1 = self.q_adj(&b);
            let w2 = self.p_adj(&a);
            let nw: Vec<C64> = w1.into_iter().chain(w2).collect();
            let lam = nw.iter().zip(&v).map(|(x, y)| (x * y.conj()).re).sum::<f64>();
            let new = lam.max(0.0).sqrt();
            v = nw;
            if (new - est).abs() <= 1e-6 * new {
                est = new;
                break;
            }
            est = new;
        }
        est
    }
}

impl RhSolution {
    pub fn solve(jd: JumpData, o: &RhOptions, r_cut: f64, tail_estimate: f64) -> Result<RhSolution> {
        o.check()?;
        let op = CauchyOp::new(&jd.grid);
        let pan_m = active_panels(&op, &jd, &jd.om_m, o.drop_below);
        let pan_p = active_panels(&op, &jd, &jd.om_p, o.drop_below);
        let s_minus = op.panel_nodes(&pan_m);
        let s_plus = op.panel_nodes(&pan_p);
        let (np, nm) = (s_plus.len(), s_minus.len());
        let mut diag = SolveDiagnostics { unknowns: nm, r_cut, tail_estimate, ..Default::default() };
        if np == 0 || nm == 0 {
            // one factor vanishes identically: mu = I on the supports
            diag.method = "trivial".into();
            diag.cond_estimate = 1.0;
            return Ok(RhSolution {
                p: [vec![re(1.0); np], vec![re(0.0); np]],
                q: [vec![re(0.0); nm], vec![re(1.0); nm]],
                jd,
                op,
                s_plus,
                s_minus,
                diag,
            });
        }
        let mut pm = op.boundary_block(&s_plus, Side::Plus, &pan_m);
        let mut qm = op.boundary_block(&s_minus, Side::Minus, &pan_p);
        pm.par_chunks_mut(nm).for_each(|row| {
            for (v, &j) in row.iter_mut().zip(&s_minus) {
                *v *= jd.om_m[j];
            }
        });
        qm.par_chunks_mut(np).for_each(|row| {
            for (v, &j) in row.iter_mut().zip(&s_plus) {
                *v *= jd.om_p[j];
            }
        });
        let blk = Blocks { pm, qm, np, nm };
        diag.cw_norm_estimate = blk.cw_norm();
        // right-hand sides of the reduced system: d2 + Q d1
        let mut rhs = [vec![re(0.0); nm], vec![re(1.0); nm]];
        let ones = vec![re(1.0); np];
        blk.q_apply(&ones, &mut rhs[0]);
        let direct = match o.solver {
            SolverKind::Direct => true,
            SolverKind::Gmres => false,
            SolverKind::Auto => nm <= o.lu_max,
        };
        let mut q = rhs.clone();
        if direct {
            let a = blk.dense_reduced();
            let anorm = crate::core::linalg::norm1(&a, nm);
            let lu = DenseLu::factor(a, nm)?;
            for v in q.iter_mut() {
                lu.solve(v);
            }
            diag.cond_estimate = anorm * lu.inv_norm1_estimate();
            diag.method = "lu".into();
        } else {
            let mv = |x: &[C64], y: &mut [C64]| blk.reduced(x, y);
            let mut ratio: f64 = 1.0;
            for (v, b) in q.iter_mut().zip(&rhs) {
                let info = gmres(&mv, b, v, o.tol, 120, 4000)?;
                diag.iterations += info.iters;
                let bn = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                let xn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if bn > 0.0 {
                    ratio = ratio.max(xn / bn);
                }
            }
            // lower bound: ||I - QP|| ||x|| / ||b||
            diag.cond_estimate = (1.0 + diag.cw_norm_estimate.powi(2)) * ratio;
            diag.method = "gmres".into();
        }
        if !(diag.cond_estimate <= 1e10) {
            return Err(Error::IllConditioned(diag.cond_estimate));
        }
        // back-substitute p = d1 + P q
        let mut p = [vec![re(0.0); np], vec![re(0.0); np]];
        for row in 0..2 {
            blk.p_apply(&q[row], &mut p[row]);
            if row == 0 {
                p[row].iter_mut().for_each(|v| *v += 1.0);
            }
        }
        // residual of the unreduced system
        let mut worst: f64 = 0.0;
        for row in 0..2 {
            let (d1, d2) = if row == 0 { (1.0, 0.0) } else { (0.0, 1.0) };
            let mut t = vec![re(0.0); np];
            blk.p_apply(&q[row], &mut t);
            for i in 0..np {
                worst = worst.max((p[row][i] - d1 - t[i]).norm());
            }
            let mut s = vec![re(0.0); nm];
            blk.q_apply(&p[row], &mut s);
            for i in 0..nm {
                worst = worst.max((q[row][i] - d2 - s[i]).norm());
            }
        }
        diag.residual = worst;
        if diag.cw_norm_estimate < 0.5 {
            // Neumann series mu = sum_k C_w^k I as an independent path
            let mut gap: f64 = 0.0;
            for row in 0..2 {
                let (d1, d2) = if row == 0 { (1.0, 0.0) } else { (0.0, 1.0) };
                let (mut pn, mut qn) = (vec![re(d1); np], vec![re(d2); nm]);
                for _ in 0..400 {
                    let (mut a, mut b) = (vec![re(0.0); np], vec![re(0.0); nm]);
                    blk.p_apply(&qn, &mut a);
                    blk.q_apply(&pn, &mut b);
                    let mut change: f64 = 0.0;
                    for i in 0..np {
                        let v = a[i] + d1;
                        change = change.max((v - pn[i]).norm());
                        pn[i] = v;
                    }
                    for i in 0..nm {
                        let v = b[i] + d2;
                        change = change.max((v - qn[i]).norm());
                        qn[i] = v;
                    }
                    if change < 1e-15 {
                        break;
                    }
                }
                for i in 0..np {
                    gap = gap.max((pn[i] - p[row][i]).norm());
                }
                for i in 0..nm {
                    gap = gap.max((qn[i] - q[row][i]).norm());
                }
            }
            diag.neumann_gap = Some(gap);
        }
        Ok(RhSolution { jd, op, s_plus, s_minus, p, q, diag })
    }

    /// mu (w+ + w-) at every grid node.
    pub fn density(&self) -> Vec<Mat2> {
        let mut d = vec![Mat2::zero(); self.jd.grid.len()];
        for (ix, &i) in self.s_minus.iter().enumerate() {
            let w = self.jd.om_m[i];
            d[i].e[0] = self.q[0][ix] * w;
            d[i].e[2] = self.q[1][ix] * w;
        }
        for (ix, &i) in self.s_plus.iter().enumerate() {
            let w = self.jd.om_p[i];
            d[i].e[1] = self.p[0][ix] * w;
            d[i].e[3] = self.p[1][ix] * w;
        }
        d
    }

    /// m = I + C(mu (w+ + w-)) off the contour.
    pub fn m_at(&self, z: C64) -> Result<Mat2> {
        Ok(Mat2::identity() + self.op.cauchy(&self.density(), z)?)
    }

    /// Boundary values m+- at every grid node.
    pub fn m_boundary(&self, side: Side) -> Vec<Mat2> {
        let d = self.density();
        let all = self.op.all_panels();
        let cols = self.op.panel_nodes(&all);
        (0..self.jd.grid.len())
            .into_par_iter()
            .map(|i| {
                let row = self.op.row(self.jd.grid.nodes[i], Some((i, side)), &all);
                Mat2::identity() + cols.iter().zip(&row).fold(Mat2::zero(), |acc, (&j, w)| acc + d[j] * *w)
            })
            .collect()
    }

    /// m_j = -(1/2 pi i) int mu (w+ + w-) s^{j-1} ds, j = 1, 2, 3.
    pub fn moments(&self) -> [Mat2; 3] {
        let d = self.density();
        let g = &self.jd.grid;
        let mut out = [Mat2::zero(); 3];
        for i in 0..g.len() {
            let mut s = g.weights[i];
            for m in out.iter_mut() {
                *m += d[i] * s;
                s *= g.nodes[i];
            }
        }
        let f = -two_pi_i().inv();
        out.map(|m| m * f)
    }

    /// (1/pi) int (mu (w+ + w-))_12 ds.
    pub fn u_complex(&self) -> C64 {
        let g = &self.jd.grid;
        let mut s = re(0.0);
        for (ix, &i) in self.s_plus.iter().enumerate() {
            s += self.p[0][ix] * self.jd.om_p[i] * g.weights[i];
        }
        s / PI
    }

    /// max over nodes away from the truncation of |m+ - m- v|.
    pub fn jump_residual(&self) -> f64 {
        let (mp, mm) = (self.m_boundary(Side::Plus), self.m_boundary(Side::Minus));
        let g = &self.jd.grid;
        let inner = g.per_ray() - g.nodes_per_panel;
        (0..g.len())
            .filter(|&i| g.radial_index(i) < inner)
            .map(|i| (mp[i] - mm[i] * self.jd.v(i)).norm_max())
            .fold(0.0, f64::max)
    }
}
