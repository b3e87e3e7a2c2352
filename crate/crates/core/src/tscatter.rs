//! t-part of the Lax pair: eigenfunctions T (normalized at the far end) and
//! U (normalized at t = 0), the spectral functions A, B, and the three-term
//! large-k recursions.

use crate::contour::{classify, in_closed_minus, in_closed_plus};
use crate::core::expint::{integrate, integrate_fixed, Trajectory};
use crate::core::jet::JetField;
use crate::core::mat2::{c, re, Mat2, C64, I};
use crate::core::panel::PanelGrid;
use crate::core::{sigma_lambda, BoundaryProfile, Lambda, EXP_LIMIT};
use crate::error::{kstr, Error, Result};
use crate::xscatter::{coeff_panel, EigenColumn, Method, SwitchPolicy};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// The t-part potential at (t, k) for boundary values (g0, g1, g2).
pub fn v_matrix(lambda: Lambda, g: [f64; 3], k: C64) -> Mat2 {
    let l = lambda.f();
    let [g0, g1, g2] = g;
    let c0 = g2 - 2.0 * l * g0 * g0 * g0;
    let d = I * (2.0 * l * g0 * g0) * k;
    Mat2::new(
        -d,
        -4.0 * k * k * g0 + 2.0 * I * k * g1 + c0,
        -4.0 * l * k * k * g0 - 2.0 * I * l * k * g1 + l * c0,
        d,
    )
}

pub fn build_v(p: &BoundaryProfile, t: f64, k: C64) -> Result<Mat2> {
    let g = [p.eval(0, t, 0)?, p.eval(1, t, 0)?, p.eval(2, t, 0)?];
    Ok(v_matrix(p.lambda, g, k))
}

fn vm(p: &BoundaryProfile, t: f64, k: C64) -> Mat2 {
    let t = t.clamp(0.0, p.t_trunc);
    let g = [
        p.g[0].value(t, 0).unwrap_or(0.0),
        p.g[1].value(t, 0).unwrap_or(0.0),
        p.g[2].value(t, 0).unwrap_or(0.0),
    ];
    v_matrix(p.lambda, g, k)
}

fn steps0(len: f64, k: C64) -> usize {
    ((len * (1.0 + k.norm())).ceil() as usize).clamp(2, 1 << 12)
}

fn backward(p: &BoundaryProfile, d: [C64; 2], z0: [C64; 2], k: C64, tol: f64) -> Result<Trajectory> {
    let tt = p.t_trunc;
    let nf = |tau: f64| -vm(p, tt - tau, k);
    integrate(d, &nf, z0, tt, steps0(tt, k), tol, k)
}

fn reversed(tr: Trajectory, l: f64, k: C64, column: u8) -> EigenColumn {
    let grid: Vec<f64> = tr.tau.iter().rev().map(|t| (l - t).max(0.0)).collect();
    let values: Vec<[C64; 2]> = tr.z.iter().rev().copied().collect();
    EigenColumn { k, column, grid, values, method: Method::Ode, err_est: tr.err_est }
}

fn constant_column(l: f64, k: C64, column: u8, v: [C64; 2]) -> EigenColumn {
    EigenColumn { k, column, grid: vec![0.0, l], values: vec![v, v], method: Method::Ode, err_est: 0.0 }
}

/// Second column of T; requires k in the closure of D+.
pub fn solve_t_col2(p: &BoundaryProfile, k: C64, tol: f64) -> Result<EigenColumn> {
    if !in_closed_plus(k) {
        return Err(Error::WrongRegion(format!("{} ({:?})", kstr(k), classify(k))));
    }
    if p.is_zero() {
        return Ok(constant_column(p.t_trunc, k, 2, [re(0.0), re(1.0)]));
    }
    let k3 = k * k * k;
    let tr = backward(p, [8.0 * I * k3, re(0.0)], [re(0.0), re(1.0)], k, tol)?;
    Ok(reversed(tr, p.t_trunc, k, 2))
}

/// First column of T by direct integration; requires k in the closure of D-.
pub fn solve_t_col1_direct(p: &BoundaryProfile, k: C64, tol: f64) -> Result<EigenColumn> {
    if !in_closed_minus(k) {
        return Err(Error::WrongRegion(format!("{} ({:?})", kstr(k), classify(k))));
    }
    if p.is_zero() {
        return Ok(constant_column(p.t_trunc, k, 1, [re(1.0), re(0.0)]));
    }
    let k3 = k * k * k;
    let tr = backward(p, [re(0.0), -8.0 * I * k3], [re(1.0), re(0.0)], k, tol)?;
    Ok(reversed(tr, p.t_trunc, k, 1))
}

/// First column of T from the second column at conj(k) by symmetry.
pub fn solve_t_col1(p: &BoundaryProfile, k: C64, tol: f64) -> Result<EigenColumn> {
    let mut s = solve_t_col2(p, k.conj(), tol)?;
    let l = p.lambda.f();
    for v in s.values.iter_mut() {
        *v = [v[1].conj(), v[0].conj() * l];
    }
    s.k = k;
    s.column = 1;
    Ok(s)
}

/// Full U on [0, t_end] with U(0) = I.
#[derive(Clone, Debug)]
pub struct USolution {
    pub k: C64,
    pub grid: Vec<f64>,
    pub values: Vec<Mat2>,
    pub err_est: f64,
}

pub fn solve_u_to(p: &BoundaryProfile, k: C64, t_end: f64, tol: f64) -> Result<USolution> {
    if p.is_zero() {
        return Ok(USolution { k, grid: vec![0.0, t_end], values: vec![Mat2::identity(); 2], err_est: 0.0 });
    }
    let k3 = k * k * k;
    let nf = |t: f64| vm(p, t, k);
    // components without an exponential factor still oscillate like e^{8ik^3 t}
    // when the data do not vanish at t = 0; step doubling resolves that
    let n0 = steps0(t_end, k);
    let d1 = [re(0.0), 8.0 * I * k3];
    let d2 = [-8.0 * I * k3, re(0.0)];
    let c1 = integrate(d1, &nf, [re(1.0), re(0.0)], t_end, n0, tol, k)?;
    let c2 = integrate(d2, &nf, [re(0.0), re(1.0)], t_end, n0, tol, k)?;
    let (c1, c2) = if c1.tau.len() == c2.tau.len() {
        (c1, c2)
    } else {
        let n = c1.tau.len().max(c2.tau.len()) - 1;
        let f1 = integrate_fixed(d1, &nf, [re(1.0), re(0.0)], t_end, n)?;
        let f2 = integrate_fixed(d2, &nf, [re(0.0), re(1.0)], t_end, n)?;
        (Trajectory { err_est: c1.err_est, ..f1 }, Trajectory { err_est: c2.err_est, ..f2 })
    };
    let values = c1.z.iter().zip(&c2.z).map(|(a, b)| Mat2::new(a[0], b[0], a[1], b[1])).collect();
    Ok(USolution { k, grid: c1.tau.clone(), values, err_est: c1.err_est.max(c2.err_est) })
}

pub fn solve_u(p: &BoundaryProfile, k: C64, tol: f64) -> Result<USolution> {
    solve_u_to(p, k, p.t_trunc, tol)
}


/// Coefficients T_j, V_j, W_j for j = 0..=m+3 on a panel grid over [0, T].
#[derive(Clone, Debug)]
pub struct TAsymCoeffs {
    pub m: usize,
    pub grid: PanelGrid,
    pub t: Vec<Vec<Mat2>>,
    pub v: Vec<Vec<Mat2>>,
    pub w: Vec<Vec<Mat2>>,
    /// First derivative of the integrated part of T_j (diagonal), kept for checks.
    pub dt_tdiag: Vec<Vec<Mat2>>,
}

struct GJets {
    g0: JetField,
    g1: JetField,
    g02: JetField,
    cv0: JetField,
    lam: f64,
    s3: Mat2,
    sl: Mat2,
    s3sl: Mat2,
}

impl GJets {
    /// A_j = (i/8) s3 [A'_{j-3} + 4 g0 s3 sl Q_{j-1} + 2 i lam g0^2 s3 A_{j-2}
    ///                 - 2 i g1 sl Q_{j-2} - c0 s3 sl Q_{j-3}]
    fn alg(&self, da3: &JetField, q1: &JetField, a2: &JetField, q2: &JetField, q3: &JetField) -> JetField {
        let t1 = self.g0.mul(&q1.lmul(self.s3sl)).scale(re(4.0));
        let t2 = self.g02.mul(&a2.lmul(self.s3)).scale(c(0.0, 2.0 * self.lam));
        let t3 = self.g1.mul(&q2.lmul(self.sl)).scale(c(0.0, -2.0));
        let t4 = self.cv0.mul(&q3.lmul(self.s3sl)).scale(re(-1.0));
        da3.add(&t1).add(&t2).add(&t3).add(&t4).lmul(self.s3).scale(c(0.0, 0.125))
    }
}

fn scalar_jet(f: &crate::core::Profile1D, g: &PanelGrid, order: usize) -> Result<JetField> {
    let mut d = vec![Vec::with_capacity(g.len()); order + 1];
    for &t in &g.nodes {
        let j = f.jet(t, order)?;
        for (l, v) in j.iter().enumerate() {
            d[l].push(Mat2::identity() * re(*v));
        }
    }
    Ok(JetField { d })
}

/// Derivative orders of g0, g1, g2 used for expansion order m.
pub fn required_orders(m: usize) -> [usize; 3] {
    [(m + 5) / 3, (m + 4) / 3, (m + 3) / 3]
}

pub fn t_asym_coeffs(p: &BoundaryProfile, m: usize) -> Result<TAsymCoeffs> {
    let req = required_orders(m);
    for j in 0..3 {
        if p.g[j].max_deriv() < req[j] {
            return Err(Error::DerivUnavailable(req[j]));
        }
    }
    let grid = PanelGrid::new(0.0, p.t_trunc, coeff_panel(p.t_trunc), 17);
    let n = grid.len();
    let ord = p.g.iter().map(|g| g.max_deriv()).min().unwrap().min(8);
    let lam = p.lambda.f();
    let g0 = scalar_jet(&p.g[0], &grid, ord)?;
    let g1 = scalar_jet(&p.g[1], &grid, ord)?;
    let g2 = scalar_jet(&p.g[2], &grid, ord)?;
    let g02 = g0.mul(&g0);
    let g03 = g02.mul(&g0);
    let cv0 = g2.sub(&g03.scale(re(2.0 * lam)));
    let s3 = Mat2::sigma3();
    let sl = sigma_lambda(p.lambda);
    let gj = GJets { g0, g1, g02, cv0, lam, s3, sl, s3sl: s3 * sl };
    let big = ord + 2;
    let zero = JetField::zeros(n, big);
    let id = JetField::constant(n, big, Mat2::identity());
    let nj = m + 3;

    // slot j+2 holds index j (indices -2, -1 are zero)
    let mut ta = vec![zero.clone(), zero.clone(), zero.clone()];
    let mut tq = vec![zero.clone(), zero.clone(), id.clone()];
    let mut va = ta.clone();
    let mut vq = tq.clone();
    let mut wa = vec![zero.clone(); 3];
    let mut wq = vec![zero.clone(); 3];
    let mut dt_tdiag = vec![vec![Mat2::zero(); n]];

    // one step of the recursion for index j given the history
    let step = |a: &Vec<JetField>, q: &Vec<JetField>, j: usize| -> Result<(JetField, JetField)> {
        let s = j + 2;
        let d = |x: &JetField| x.try_deriv();
        let zero_ref = &zero;
        let get = |v: &Vec<JetField>, idx: isize| -> JetField {
            if idx < 0 {
                zero_ref.clone()
            } else {
                v[idx as usize].clone()
            }
        };
        let si = s as isize;
        let aj = gj.alg(&d(&get(a, si - 3))?, &get(q, si - 1), &get(a, si - 2), &get(q, si - 2), &get(q, si - 3));
        // starred terms: unknown Q_{j+1}, Q_j set to zero
        let a_p2 = gj.alg(&d(&get(a, si - 1))?, zero_ref, &aj, zero_ref, &get(q, si - 1));
        let a_p1 = gj.alg(&d(&get(a, si - 2))?, zero_ref, &get(a, si - 1), &get(q, si - 1), &get(q, si - 2));
        let dq = gj
            .g0
            .mul(&a_p2.lmul(gj.s3sl))
            .scale(re(-4.0))
            .add(&gj.g1.mul(&a_p1.lmul(gj.sl)).scale(c(0.0, 2.0)))
            .add(&gj.cv0.mul(&aj.lmul(gj.s3sl)));
        Ok((aj, dq))
    };

    for j in 1..=nj {
        let (a, dq) = step(&ta, &tq, j)?;
        dt_tdiag.push(dq.d[0].clone());
        ta.push(a);
        tq.push(dq.int_right(&grid));

        let (av, dqv) = step(&va, &vq, j)?;
        let (aw, dqw) = step(&wa, &wq, j)?;
        let qv = dqv.int_left(&grid).add_const(-aw.d[0][0]);
        let qw = dqw.int_left(&grid).add_const(-av.d[0][0]);
        va.push(av);
        vq.push(qv);
        wa.push(aw);
        wq.push(qw);
    }
    let assemble = |a: &[JetField], q: &[JetField]| -> Vec<Vec<Mat2>> {
        (2..a.len()).map(|s| a[s].d[0].iter().zip(&q[s].d[0]).map(|(x, y)| *x + *y).collect()).collect()
    };
    Ok(TAsymCoeffs { m, t: assemble(&ta, &tq), v: assemble(&va, &vq), w: assemble(&wa, &wq), grid, dt_tdiag })
}

impl TAsymCoeffs {
    pub fn zero(t_trunc: f64, m: usize) -> Self {
        let grid = PanelGrid::new(0.0, t_trunc, coeff_panel(t_trunc), 17);
        let n = grid.len();
        let mut t = vec![vec![Mat2::zero(); n]; m + 4];
        t[0] = vec![Mat2::identity(); n];
        TAsymCoeffs {
            m,
            grid,
            v: t.clone(),
            w: vec![vec![Mat2::zero(); n]; m + 4],
            t,
            dt_tdiag: vec![vec![Mat2::zero(); n]; m + 4],
        }
    }

    pub fn t_at(&self, j: usize, t: f64) -> Mat2 {
        self.grid.interp(&self.t[j], t)
    }

    /// (A_j, B_j) from T_j(0), j = 1..=m+3.
    pub fn ab_coeffs(&self) -> Vec<(C64, C64)> {
        (1..self.t.len()).map(|j| (self.t[j][0].m22(), self.t[j][0].m12())).collect()
    }
}

/// Truncated series for T at (t, k).
pub fn hat_t(co: &TAsymCoeffs, t: f64, k: C64) -> Result<Mat2> {
    if k.norm() == 0.0 {
        return Err(Error::BadParams("series needs k != 0".into()));
    }
    let mut th = Mat2::identity();
    let mut kp = re(1.0);
    for j in 1..co.t.len() {
        kp /= k;
        th += co.grid.interp(&co.t[j], t) * kp;
    }
    Ok(th)
}

/// Truncated series for U at (t, k); needs |8 t Im k^3| within the exponent range.
pub fn hat_u(co: &TAsymCoeffs, t: f64, k: C64) -> Result<Mat2> {
    if k.norm() == 0.0 {
        return Err(Error::BadParams("series needs k != 0".into()));
    }
    let k3 = k * k * k;
    let ex = 8.0 * t * k3.im;
    if ex.abs() > EXP_LIMIT {
        return Err(Error::RangeError(ex));
    }
    let mut vh = Mat2::identity();
    let mut wh = Mat2::zero();
    let mut kp = re(1.0);
    for j in 1..co.v.len() {
        kp /= k;
        vh += co.grid.interp(&co.v[j], t) * kp;
        wh += co.grid.interp(&co.w[j], t) * kp;
    }
    let e = (8.0 * I * k3 * t).exp();
    Ok(vh + wh * Mat2::diag(e, e.inv()))
}

/// Both truncated series, T-hat and U-hat, at (t, k).
pub fn hat_tu(co: &TAsymCoeffs, t: f64, k: C64) -> Result<(Mat2, Mat2)> {
    Ok((hat_t(co, t, k)?, hat_u(co, t, k)?))
}

/// Partial Picard sums for column 2 of T on [0, T].
pub fn picard_oracle_t(p: &BoundaryProfile, k: C64, l: usize) -> Result<(EigenColumn, Vec<f64>)> {
    if !in_closed_plus(k) {
        return Err(Error::WrongRegion(kstr(k)));
    }
    if l > 12 {
        return Err(Error::BadParams("Picard order at most 12".into()));
    }
    let k3 = k * k * k;
    if k3.norm() > 50.0 {
        return Err(Error::RangeError(k3.norm()));
    }
    const NP: usize = 17;
    let g = PanelGrid::new(0.0, p.t_trunc, 0.125, NP);
    let v: Vec<Mat2> = g.nodes.iter().map(|&t| build_v(p, t, k)).collect::<Result<_>>()?;
    // p(t) = -int_t^T e^{8ik^3 (t'-t)} (V psi)_1,  q(t) = -int_t^T (V psi)_2.
    // The exponential is applied panel by panel so no factor ever exceeds e^{|8k^3| h}.
    let cc = 8.0 * I * k3;
    let npan = (g.len() - 1) / (NP - 1);
    let locals: Vec<PanelGrid> =
        (0..npan).map(|j| PanelGrid::new(g.nodes[j * (NP - 1)], g.nodes[(j + 1) * (NP - 1)], 1.0, NP)).collect();
    let mut term: Vec<[C64; 2]> = vec![[re(0.0), re(1.0)]; g.len()];
    let mut sum = term.clone();
    let mut norms = vec![1.0];
    for _ in 0..l {
        let vp: Vec<[C64; 2]> = (0..g.len())
            .map(|i| {
                let m = v[i];
                [m.m11() * term[i][0] + m.m12() * term[i][1], m.m21() * term[i][0] + m.m22() * term[i][1]]
            })
            .collect();
        let fq: Vec<C64> = vp.iter().map(|x| x[1]).collect();
        let iq = g.cumint_right(&fq);
        let mut ip = vec![re(0.0); g.len()];
        let mut carry = re(0.0);
        for (j, lg) in locals.iter().enumerate().rev() {
            let off = j * (NP - 1);
            let lo = lg.nodes[0];
            let hi = lg.nodes[NP - 1];
            let f: Vec<C64> = (0..NP).map(|i| vp[off + i][0] * (cc * (lg.nodes[i] - lo)).exp()).collect();
            let r = lg.cumint_right(&f);
            for i in 0..NP {
                let t = lg.nodes[i];
                ip[off + i] = (cc * (lo - t)).exp() * r[i] + (cc * (hi - t)).exp() * carry;
            }
            carry = ip[off];
        }
        term = (0..g.len()).map(|i| [-ip[i], -iq[i]]).collect();
        for (s, t) in sum.iter_mut().zip(&term) {
            s[0] += t[0];
            s[1] += t[1];
        }
        norms.push((term[0][0].norm_sqr() + term[0][1].norm_sqr()).sqrt());
    }
    Ok((
        EigenColumn { k, column: 2, grid: g.nodes.clone(), values: sum, method: Method::Picard(l), err_est: f64::NAN },
        norms,
    ))
}

/// Partial Picard sums for U on [0, T] in the conjugated Volterra form
/// U = I + int_0^t e^{-4ik^3 (t - t') ad sigma3} (V U)(t') dt'.
pub fn picard_oracle_u(p: &BoundaryProfile, k: C64, l: usize) -> Result<(USolution, Vec<f64>)> {
    if l > 12 {
        return Err(Error::BadParams("Picard order at most 12".into()));
    }
    let k3 = k * k * k;
    if k3.norm() > 50.0 {
        return Err(Error::RangeError(k3.norm()));
    }
    const NP: usize = 17;
    let g = PanelGrid::new(0.0, p.t_trunc, 0.125, NP);
    let v: Vec<Mat2> = g.nodes.iter().map(|&t| build_v(p, t, k)).collect::<Result<_>>()?;
    let npan = (g.len() - 1) / (NP - 1);
    let locals: Vec<PanelGrid> =
        (0..npan).map(|j| PanelGrid::new(g.nodes[j * (NP - 1)], g.nodes[(j + 1) * (NP - 1)], 1.0, NP)).collect();
    // exponent per entry: (1,2) -> -8ik^3, (2,1) -> +8ik^3, diagonal 0
    let ce = [re(0.0), -8.0 * I * k3, 8.0 * I * k3, re(0.0)];
    let mut term = vec![Mat2::identity(); g.len()];
    let mut sum = term.clone();
    let mut norms = vec![1.0];
    for _ in 0..l {
        let f: Vec<Mat2> = v.iter().zip(&term).map(|(a, b)| *a * *b).collect();
        let mut next = vec![Mat2::zero(); g.len()];
        for (e, &cc) in ce.iter().enumerate() {
            let mut carry = re(0.0);
            for (j, lg) in locals.iter().enumerate() {
                let off = j * (NP - 1);
                let lo = lg.nodes[0];
                let fl: Vec<C64> = (0..NP).map(|i| f[off + i].e[e] * (cc * (lo - lg.nodes[i])).exp()).collect();
                let r = lg.cumint(&fl);
                for i in 0..NP {
                    let dt = lg.nodes[i] - lo;
                    next[off + i].e[e] = (cc * dt).exp() * (carry + r[i]);
                }
                carry = next[off + NP - 1].e[e];
            }
        }
        term = next;
        for (s, t) in sum.iter_mut().zip(&term) {
            *s += *t;
        }
        norms.push(term.iter().fold(0.0, |m: f64, x| m.max(x.norm_max())));
    }
    Ok((USolution { k, grid: g.nodes.clone(), values: sum, err_est: f64::NAN }, norms))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BigAbValue {
    pub k: C64,
    #[serde(rename = "A")]
    pub a: C64,
    #[serde(rename = "B")]
    pub b: C64,
    pub method: Method,
}

pub fn gate_series_t(p: &BoundaryProfile, co: &TAsymCoeffs, pol: SwitchPolicy) -> Result<bool> {
    for ang in [0.0, std::f64::consts::FRAC_PI_3, -std::f64::consts::FRAC_PI_2] {
        let k = C64::from_polar(pol.k_switch, ang);
        let s = solve_t_col2(p, k, pol.tol)?.first();
        let th = hat_t(co, 0.0, k)?;
        if (th.m22() - s[1]).norm() > 10.0 * pol.tol || (th.m12() - s[0]).norm() > 10.0 * pol.tol {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn spectral_big_ab(
    p: &BoundaryProfile,
    kgrid: &[C64],
    pol: SwitchPolicy,
    series: Option<&TAsymCoeffs>,
) -> Result<Vec<BigAbValue>> {
    if let Some(k) = kgrid.iter().find(|k| !in_closed_plus(**k)) {
        return Err(Error::WrongRegion(kstr(*k)));
    }
    kgrid
        .par_iter()
        .map(|&k| {
            if let Some(co) = series {
                if k.norm() > pol.k_switch {
                    let th = hat_t(co, 0.0, k)?;
                    return Ok(BigAbValue { k, a: th.m22(), b: th.m12(), method: Method::Asymptotic });
                }
            }
            let s = solve_t_col2(p, k, pol.tol)?.first();
            Ok(BigAbValue { k, a: s[1], b: s[0], method: Method::Ode })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::ProfileSpec;
    use std::f64::consts::PI;

    fn expdata(l: Lambda) -> BoundaryProfile {
        let e = ProfileSpec::preset("exponential", &[("alpha", 1.0), ("beta", 1.0)]);
        let z = ProfileSpec::zero();
        BoundaryProfile::new(l, [&e, &z, &z], 40.0).unwrap()
    }

    #[test]
    fn v_entries() {
        let k = c(0.7, -0.2);
        let v = v_matrix(Lambda::Defocusing, [0.3, -0.4, 0.9], k);
        let want12 = -4.0 * k * k * 0.3 + 2.0 * I * k * -0.4 - 2.0 * 0.027 + 0.9;
        assert!((v.m12() - want12).norm() < 1e-15);
        assert!(v.trace().norm() < 1e-15);
        assert_eq!(v_matrix(Lambda::Focusing, [0.0; 3], k), Mat2::zero());
    }

    #[test]
    fn ode_matches_picard() {
        let e = ProfileSpec::preset("exponential", &[("alpha", 0.3), ("beta", 1.0)]);
        let z = ProfileSpec::zero();
        let p = BoundaryProfile::new(Lambda::Defocusing, [&e, &z, &z], 40.0).unwrap();
        let k = C64::from_polar(1.0, PI / 6.0);
        let s = solve_t_col2(&p, k, 1e-12).unwrap().first();
        let (o, norms) = picard_oracle_t(&p, k, 12).unwrap();
        assert!(norms[12] < 1e-10, "{norms:?}");
        let v = o.values[0];
        assert!((s[0] - v[0]).norm() < 1e-9 && (s[1] - v[1]).norm() < 1e-9, "{s:?} {v:?}");
        assert!(matches!(solve_t_col2(&p, c(0.0, 1.0), 1e-12), Err(Error::WrongRegion(_))));
    }

    #[test]
    fn coefficients_match_closed_forms() {
        let p = expdata(Lambda::Defocusing);
        let co = t_asym_coeffs(&p, 4).unwrap();
        // B_1 = i g0(0)/2, A_1 = (3i/2) int g0^4 = 3i/8
        let ab = co.ab_coeffs();
        assert!((ab[0].1 - c(0.0, 0.5)).norm() < 1e-14);
        assert!((ab[0].0 - c(0.0, 0.375)).norm() < 1e-12, "{:?}", ab[0].0);
        let sl = sigma_lambda(Lambda::Defocusing);
        assert!((co.w[1][5] - sl * c(0.0, -0.5)).norm_max() < 1e-14);
        // large-k agreement with the ODE
        let k = C64::from_polar(30.0, PI / 6.0);
        let s = solve_t_col2(&p, k, 1e-13).unwrap().first();
        let th = hat_t(&co, 0.0, k).unwrap();
        assert!((th.m22() - s[1]).norm() < 1e-9, "{} {}", th.m22(), s[1]);
        assert!((th.m12() - s[0]).norm() < 1e-9);
    }

    #[test]
    fn unitarity_on_rays() {
        for lam in [Lambda::Defocusing, Lambda::Focusing] {
            let p = expdata(lam);
            for &(r, ang) in &[(0.5, 0.0), (2.0, PI / 3.0), (1.3, -PI / 3.0), (3.0, PI), (0.9, 2.0 * PI / 3.0)] {
                let k = C64::from_polar(r, ang);
                let s = solve_t_col2(&p, k, 1e-12).unwrap().first();
                let sb = solve_t_col2(&p, k.conj(), 1e-12).unwrap().first();
                let val = s[1] * sb[1].conj() - lam.f() * s[0] * sb[0].conj();
                assert!((val - 1.0).norm() < 1e-10, "{k} {val}");
                let c1 = solve_t_col1(&p, k, 1e-12).unwrap().first();
                let c1d = solve_t_col1_direct(&p, k, 1e-12).unwrap().first();
                assert!((c1[0] - c1d[0]).norm() < 1e-9 && (c1[1] - c1d[1]).norm() < 1e-9);
            }
        }
    }

    fn mixed(l: Lambda) -> BoundaryProfile {
        let g0 = ProfileSpec::preset("gaussian", &[("alpha", 0.7), ("beta", 1.0), ("x0", 1.0)]);
        let g1 = ProfileSpec::preset("gaussian", &[("alpha", -0.4), ("beta", 0.5), ("x0", 0.5)]);
        let g2 = ProfileSpec::preset("sech", &[("amp", 0.3), ("rate", 1.0), ("shift", -1.0), ("order", 0.0)]);
        BoundaryProfile::new(l, [&g0, &g1, &g2], 12.0).unwrap()
    }

    /// Fine trapezoid tables of int_t^T f on a uniform grid.
    fn tail_integral(tt: f64, n: usize, f: impl Fn(f64) -> C64) -> Vec<C64> {
        let h = tt / n as f64;
        let mut out = vec![re(0.0); n + 1];
        for i in (0..n).rev() {
            let a = i as f64 * h;
            out[i] = out[i + 1] + (f(a) + f(a + h)) * (0.5 * h);
        }
        out
    }

    #[test]
    fn first_two_coefficients_closed_form() {
        for lam in [Lambda::Defocusing, Lambda::Focusing] {
            let p = mixed(lam);
            let l = lam.f();
            let co = t_asym_coeffs(&p, 4).unwrap();
            let g = |j: usize, t: f64, d: usize| p.eval(j, t, d).unwrap();
            let n = 240_000;
            let h = 12.0 / n as f64;
            let f1 = |t: f64| re(3.0 * l * g(0, t, 0).powi(4) + g(1, t, 0).powi(2) - 2.0 * g(0, t, 0) * g(2, t, 0));
            let i1 = tail_integral(12.0, n, f1);
            // (T_1)_22 = (i lam / 2) int_t^inf F
            let t1 = |i: usize| I * (0.5 * l) * i1[i];
            let f2 = |i: usize| {
                let t = i as f64 * h;
                let (g0, g1, g2) = (g(0, t, 0), g(1, t, 0), g(2, t, 0));
                let a = t1(i);
                (g0 * (-4.0 * g2 * a + I * g(0, t, 1)) + 6.0 * l * g0.powi(4) * a + 2.0 * g1 * g1 * a) * (I * 0.25 * l)
            };
            let mut i2 = vec![re(0.0); n + 1];
            for i in (0..n).rev() {
                i2[i] = i2[i + 1] + (f2(i) + f2(i + 1)) * (0.5 * h);
            }
            let s3sl = Mat2::sigma3() * sigma_lambda(lam);
            for &t in &[0.0, 1.5, 4.0] {
                let i = (t / h).round() as usize;
                let want1 = sigma_lambda(lam) * (I * 0.5 * g(0, t, 0)) + Mat2::diag(-t1(i), t1(i));
                assert!((co.t_at(1, t) - want1).norm_max() < 1e-8, "{lam:?} T1 at {t}");
                let want2 = s3sl * ((g(1, t, 0) + 2.0 * I * g(0, t, 0) * t1(i)) * 0.25) + Mat2::identity() * i2[i];
                assert!((co.t_at(2, t) - want2).norm_max() < 1e-8, "{lam:?} T2 at {t}: {:?}", co.t_at(2, t) - want2);
            }
            // V_2 diagonal at 0 and W_1
            let g00 = g(0, 0.0, 0);
            assert!((co.v[2][0].m22() - 0.25 * l * g00 * g00).norm() < 1e-13);
            let w1 = sigma_lambda(lam) * (-I * 0.5 * g00);
            assert!(co.w[1].iter().all(|w| (*w - w1).norm_max() < 1e-13));
            assert!((1..co.v.len()).all(|j| (co.v[j][0] + co.w[j][0]).norm_max() < 1e-12));
        }
    }

    /// The diagonal derivatives from the recursion against the eliminated form
    /// written purely in lower-order coefficients.
    #[test]
    fn diagonal_elimination_identity() {
        for lam in [Lambda::Defocusing, Lambda::Focusing] {
            let p = mixed(lam);
            let l = lam.f();
            let co = t_asym_coeffs(&p, 4).unwrap();
            let sl = sigma_lambda(lam);
            let s3 = Mat2::sigma3();
            let tj = |j: isize, t: f64| if j < 0 { Mat2::zero() } else { co.t_at(j as usize, t) };
            let dto = |j: isize, t: f64| {
                let e = 1e-4;
                (tj(j, t + e).off_part() - tj(j, t - e).off_part()) * re(0.5 / e)
            };
            for &t in &[0.7, 2.3, 5.1] {
                let g0 = p.eval(0, t, 0).unwrap();
                let g1 = p.eval(1, t, 0).unwrap();
                let g2 = p.eval(2, t, 0).unwrap();
                for j in 1..=6isize {
                    let rhs = sl * dto(j - 1, t) * (I * 0.5 * g0)
                        + s3 * sl * dto(j - 2, t) * re(0.25 * g1)
                        + sl * dto(j - 3, t) * (-I * 0.125 * (g2 - l * g0.powi(3)))
                        + sl * tj(j - 1, t).off_part() * (-I * 0.5 * l * g1 * g0 * g0)
                        + s3 * tj(j - 1, t).diag_part() * (I * 0.5 * (3.0 * g0.powi(4) - 2.0 * l * g2 * g0 + l * g1 * g1))
                        + s3 * sl * tj(j - 2, t).off_part() * re(-0.25 * (l * g2 - g0.powi(3)) * g0 * g0)
                        + tj(j - 2, t).diag_part() * re(0.25 * g0.powi(3) * g1)
                        + s3 * tj(j - 3, t).diag_part() * (I * 0.125 * (g2 - l * g0.powi(3)) * (l * g2 - 2.0 * g0.powi(3)));
                    let lhs = co.grid.interp(&co.dt_tdiag[j as usize], t);
                    assert!((lhs - rhs).norm_max() < 1e-6, "{lam:?} j={j} t={t}: {:?} vs {:?}", lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn u_against_picard_and_det() {
        let e = ProfileSpec::preset("exponential", &[("alpha", 0.3), ("beta", 1.0)]);
        let z = ProfileSpec::zero();
        for lam in [Lambda::Defocusing, Lambda::Focusing] {
            let p = BoundaryProfile::new(lam, [&e, &z, &z], 6.0).unwrap();
            for k in [c(0.9, 0.0), C64::from_polar(1.1, -PI / 3.0), C64::from_polar(0.8, 2.0 * PI / 3.0)] {
                let u = solve_u(&p, k, 1e-12).unwrap();
                let (o, norms) = picard_oracle_u(&p, k, 12).unwrap();
                assert!(norms[12] < 1e-9, "{norms:?}");
                for &t in &[0.5, 2.0, 6.0] {
                    let i = u.grid.iter().position(|x| (x - t).abs() < 1e-12).unwrap_or(u.grid.len() - 1);
                    let tu = u.grid[i];
                    let j = o.grid.iter().position(|x| (x - tu).abs() < 1e-12);
                    if let Some(j) = j {
                        assert!((u.values[i] - o.values[j]).norm_max() < 1e-9, "{lam:?} {k} t={tu}");
                    }
                }
                assert!((o.values.last().unwrap().clone() - *u.values.last().unwrap()).norm_max() < 1e-9);
                assert!(u.values.iter().all(|m| (m.det() - 1.0).norm() < 1e-10));
            }
        }
        let zp = BoundaryProfile::zero(Lambda::Defocusing, 3.0);
        let u = solve_u(&zp, c(5.0, 1.0), 1e-12).unwrap();
        assert!(u.values.iter().all(|m| *m == Mat2::identity()));
    }
}
