//! x-part of the Lax pair: eigenfunctions X (normalized at the far end) and
//! Y (normalized at x = 0), the spectral functions a, b, and the large-k
//! coefficients of both.

use crate::core::expint::{integrate, Trajectory};
use crate::core::jet::JetField;
use crate::core::mat2::{c, re, Mat2, C64, I};
use crate::core::panel::PanelGrid;
use crate::core::{sigma_lambda, InitialProfile, EXP_LIMIT};
use crate::error::{kstr, Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Tolerance on Im k when checking half planes.
const HALF_PLANE_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Ode,
    Picard(usize),
    Asymptotic,
}

/// One column of an eigenfunction tabulated on an ascending grid.
#[derive(Clone, Debug)]
pub struct EigenColumn {
    pub k: C64,
    pub column: u8,
    pub grid: Vec<f64>,
    pub values: Vec<[C64; 2]>,
    pub method: Method,
    pub err_est: f64,
}

impl EigenColumn {
    pub fn first(&self) -> [C64; 2] {
        self.values[0]
    }

    pub fn last(&self) -> [C64; 2] {
        *self.values.last().unwrap()
    }

    /// Value at the grid point closest to s.
    pub fn nearest(&self, s: f64) -> (f64, [C64; 2]) {
        let i = self
            .grid
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - s).abs().partial_cmp(&(b.1 - s).abs()).unwrap())
            .unwrap()
            .0;
        (self.grid[i], self.values[i])
    }
}

/// Full 2x2 Y on an ascending x-grid.
#[derive(Clone, Debug)]
pub struct YSolution {
    pub k: C64,
    pub grid: Vec<f64>,
    pub values: Vec<Mat2>,
    pub err_est: f64,
}

fn umat(p: &InitialProfile, x: f64) -> Mat2 {
    let u = p.u0.value(x.clamp(0.0, p.l_trunc), 0).unwrap_or(0.0);
    Mat2::offdiag(re(u), re(p.lambda.f() * u))
}

fn steps0(len: f64) -> usize {
    (len.ceil() as usize).max(2)
}

pub fn default_tol() -> f64 {
    1e-12
}

fn backward(p: &InitialProfile, d: [C64; 2], z0: [C64; 2], k: C64, tol: f64) -> Result<Trajectory> {
    let l = p.l_trunc;
    let nf = |tau: f64| -umat(p, l - tau);
    integrate(d, &nf, z0, l, steps0(l), tol, k)
}

fn reversed(tr: Trajectory, l: f64, k: C64, column: u8) -> EigenColumn {
    let grid: Vec<f64> = tr.tau.iter().rev().map(|t| (l - t).max(0.0)).collect();
    let values: Vec<[C64; 2]> = tr.z.iter().rev().copied().collect();
    EigenColumn { k, column, grid, values, method: Method::Ode, err_est: tr.err_est }
}

/// Second column of X: bounded for Im k <= 0, -> (0, 1) at the far end.
pub fn solve_x_col2(p: &InitialProfile, k: C64, tol: f64) -> Result<EigenColumn> {
    if k.im > HALF_PLANE_TOL * (1.0 + k.norm()) {
        return Err(Error::WrongHalfPlane(kstr(k)));
    }
    if p.is_zero() {
        return Ok(constant_column(p.l_trunc, k, 2, [re(0.0), re(1.0)]));
    }
    // tau = L - x: p' = -2ik p - u q, q' = -lambda u p
    let tr = backward(p, [-2.0 * I * k, re(0.0)], [re(0.0), re(1.0)], k, tol)?;
    Ok(reversed(tr, p.l_trunc, k, 2))
}

/// First column of X by direct integration; bounded for Im k >= 0.
pub fn solve_x_col1_direct(p: &InitialProfile, k: C64, tol: f64) -> Result<EigenColumn> {
    if k.im < -HALF_PLANE_TOL * (1.0 + k.norm()) {
        return Err(Error::WrongHalfPlane(kstr(k)));
    }
    if p.is_zero() {
        return Ok(constant_column(p.l_trunc, k, 1, [re(1.0), re(0.0)]));
    }
    let tr = backward(p, [re(0.0), 2.0 * I * k], [re(1.0), re(0.0)], k, tol)?;
    Ok(reversed(tr, p.l_trunc, k, 1))
}

/// First column of X from the second column at conj(k) via the symmetry
/// X(k) = sigma conj(X(conj k)) sigma.
pub fn solve_x_col1(p: &InitialProfile, k: C64, tol: f64) -> Result<EigenColumn> {
    let mut s = solve_x_col2(p, k.conj(), tol)?;
    let l = p.lambda.f();
    for v in s.values.iter_mut() {
        *v = [v[1].conj(), v[0].conj() * l];
    }
    s.k = k;
    s.column = 1;
    Ok(s)
}

fn constant_column(l: f64, k: C64, column: u8, v: [C64; 2]) -> EigenColumn {
    EigenColumn { k, column, grid: vec![0.0, l], values: vec![v, v], method: Method::Ode, err_est: 0.0 }
}

/// Y on [0, x_end] with Y(0) = I.
pub fn solve_y_to(p: &InitialProfile, k: C64, x_end: f64, tol: f64) -> Result<YSolution> {
    if p.is_zero() {
        return Ok(YSolution { k, grid: vec![0.0, x_end], values: vec![Mat2::identity(); 2], err_est: 0.0 });
    }
    let nf = |x: f64| umat(p, x);
    let n0 = steps0(x_end).max((4.0 * k.norm() * x_end / 16.0).ceil() as usize);
    // col1: p' = u q, q' = -2ik q + lambda u p ; col2: p' = 2ik p + u q, q' = lambda u p
    let c1 = integrate([re(0.0), -2.0 * I * k], &nf, [re(1.0), re(0.0)], x_end, n0, tol, k)?;
    let c2 = integrate([2.0 * I * k, re(0.0)], &nf, [re(0.0), re(1.0)], x_end, n0, tol, k)?;
    // bring both columns onto the finer mesh
    let (c1, c2) = if c1.tau.len() == c2.tau.len() {
        (c1, c2)
    } else {
        let n = c1.tau.len().max(c2.tau.len()) - 1;
        let f1 = crate::core::expint::integrate_fixed([re(0.0), -2.0 * I * k], &nf, [re(1.0), re(0.0)], x_end, n)?;
        let f2 = crate::core::expint::integrate_fixed([2.0 * I * k, re(0.0)], &nf, [re(0.0), re(1.0)], x_end, n)?;
        (
            Trajectory { err_est: c1.err_est, ..f1 },
            Trajectory { err_est: c2.err_est, ..f2 },
        )
    };
    let values = c1.z.iter().zip(&c2.z).map(|(a, b)| Mat2::new(a[0], b[0], a[1], b[1])).collect();
    Ok(YSolution { k, grid: c1.tau.clone(), values, err_est: c1.err_est.max(c2.err_est) })
}

pub fn solve_y(p: &InitialProfile, k: C64, tol: f64) -> Result<YSolution> {
    solve_y_to(p, k, p.l_trunc, tol)
}

/// Large-k coefficients X_j, Z_j, W_j, j = 0..=m+1, tabulated on a panel grid.
#[derive(Clone, Debug)]
pub struct XAsymCoeffs {
    pub m: usize,
    pub grid: PanelGrid,
    pub x: Vec<Vec<Mat2>>,
    pub z: Vec<Vec<Mat2>>,
    pub w: Vec<Vec<Mat2>>,
}

fn u_jet(p: &InitialProfile, g: &PanelGrid, order: usize) -> Result<JetField> {
    let l = p.lambda.f();
    let mut d = vec![Vec::with_capacity(g.len()); order + 1];
    for &x in &g.nodes {
        let j = p.u0.jet(x, order)?;
        for (lv, v) in j.iter().enumerate() {
            d[lv].push(Mat2::offdiag(re(*v), re(l * v)));
        }
    }
    Ok(JetField { d })
}

/// Coefficients from the recursions, normalized by X_j(L) = 0 and
/// Z_j(0) + W_j(0) = 0.
/// Panel length for the coefficient tables.
pub(crate) fn coeff_panel(len: f64) -> f64 {
    (len / 128.0).clamp(1.0 / 256.0, 0.125)
}

pub fn x_asym_coeffs(p: &InitialProfile, m: usize) -> Result<XAsymCoeffs> {
    let need = m + 1;
    if p.u0.max_deriv() < need {
        return Err(Error::DerivUnavailable(need));
    }
    let g = PanelGrid::new(0.0, p.l_trunc, coeff_panel(p.l_trunc), 17);
    let n = g.len();
    let u = u_jet(p, &g, need)?;
    let half_i_s3 = |f: &JetField| f.map(|v| v.s3l() * (0.5 * I));
    // X recursion
    let mut xs = vec![JetField::constant(n, need + 1, Mat2::identity())];
    let mut zs = vec![JetField::constant(n, need + 1, Mat2::identity())];
    let mut ws = vec![JetField::zeros(n, need + 1)];
    for _ in 0..need {
        let xj = xs.last().unwrap();
        let xo = xj.map(|v| v.off_part());
        let xd = xj.map(|v| v.diag_part());
        // X_{j+1}^(o) = -(i/2) s3 (X_j^(o)' - U X_j^(d))
        let e = xo.deriv().sub(&u.mul(&xd));
        let no = half_i_s3(&e).scale(re(-1.0));
        let nd = u.mul(&no).int_right(&g);
        xs.push(no.add(&nd));

        let zj = zs.last().unwrap();
        let wj = ws.last().unwrap();
        let zo_new = {
            let zo = zj.map(|v| v.off_part());
            let zd = zj.map(|v| v.diag_part());
            half_i_s3(&zo.deriv().sub(&u.mul(&zd))).scale(re(-1.0))
        };
        // W_{j+1}^(d) = -(i/2) s3 (W_j^(d)' - U W_j^(o)); (W_{j+1}^(o))' = (i/2) s3 U (...)
        let (wd_new, dwo) = {
            let wo = wj.map(|v| v.off_part());
            let wd = wj.map(|v| v.diag_part());
            let e = wd.deriv().sub(&u.mul(&wo));
            (half_i_s3(&e).scale(re(-1.0)), half_i_s3(&u.mul(&e)))
        };
        let zd_new = u.mul(&zo_new).int_left(&g).add_const(-wd_new.d[0][0]);
        let wo_new = dwo.int_left(&g).add_const(-zo_new.d[0][0]);
        zs.push(zo_new.add(&zd_new));
        ws.push(wd_new.add(&wo_new));
    }
    let take = |v: Vec<JetField>| v.into_iter().map(|j| j.d[0].clone()).collect();
    Ok(XAsymCoeffs { m, grid: g, x: take(xs), z: take(zs), w: take(ws) })
}

impl XAsymCoeffs {
    pub fn zero(l_trunc: f64, m: usize) -> Self {
        let grid = PanelGrid::new(0.0, l_trunc, coeff_panel(l_trunc), 17);
        let n = grid.len();
        let mut x = vec![vec![Mat2::zero(); n]; m + 2];
        x[0] = vec![Mat2::identity(); n];
        XAsymCoeffs { m, grid, z: x.clone(), w: vec![vec![Mat2::zero(); n]; m + 2], x }
    }

    pub fn x_at(&self, j: usize, x: f64) -> Mat2 {
        self.grid.interp(&self.x[j], x)
    }

    pub fn z_at(&self, j: usize, x: f64) -> Mat2 {
        self.grid.interp(&self.z[j], x)
    }

    pub fn w_at(&self, j: usize, x: f64) -> Mat2 {
        self.grid.interp(&self.w[j], x)
    }

    /// (a_j, b_j) for j = 1..=m+1 from X_j(0).
    pub fn ab_coeffs(&self) -> Vec<(C64, C64)> {
        (1..=self.m + 1).map(|j| (self.x[j][0].m22(), self.x[j][0].m12())).collect()
    }
}

/// Truncated series X-hat and Y-hat.
pub fn hat_xy(co: &XAsymCoeffs, x: f64, k: C64) -> Result<(Mat2, Mat2)> {
    if k.norm() == 0.0 {
        return Err(Error::BadParams("series needs k != 0".into()));
    }
    let ex = 2.0 * (k * x).im;
    if ex.abs() > EXP_LIMIT {
        return Err(Error::RangeError(ex));
    }
    let mut xh = Mat2::identity();
    let mut zh = Mat2::identity();
    let mut wh = Mat2::zero();
    let mut kp = re(1.0);
    for j in 1..=co.m + 1 {
        kp /= k;
        xh += co.x_at(j, x) * kp;
        zh += co.z_at(j, x) * kp;
        wh += co.w_at(j, x) * kp;
    }
    let e = (-2.0 * I * k * x).exp();
    let yh = zh + wh * Mat2::diag(e, e.inv());
    Ok((xh, yh))
}

/// Partial Picard sums for column 2 of X; returns the partial sum and the
/// norms of the individual terms at x = 0.
pub fn picard_oracle_x(p: &InitialProfile, k: C64, l: usize) -> Result<(EigenColumn, Vec<f64>)> {
    if k.im > HALF_PLANE_TOL * (1.0 + k.norm()) {
        return Err(Error::WrongHalfPlane(kstr(k)));
    }
    if l > 12 {
        return Err(Error::BadParams("Picard order at most 12".into()));
    }
    let g = PanelGrid::new(0.0, p.l_trunc, 0.25, 17);
    let lam = p.lambda.f();
    let u: Vec<f64> = g.nodes.iter().map(|&x| p.u0.value(x, 0)).collect::<Result<_>>()?;
    // p(x) = -e^{2ikx} int_x^L e^{-2ikx'} u q dx',  q(x) = -int_x^L lambda u p dx'
    let ep: Vec<C64> = g.nodes.iter().map(|&x| (2.0 * I * k * x).exp()).collect();
    let mut term: Vec<[C64; 2]> = vec![[re(0.0), re(1.0)]; g.len()];
    let mut sum = term.clone();
    let mut norms = vec![1.0];
    for _ in 0..l {
        let fp: Vec<C64> = (0..g.len()).map(|i| term[i][1] * u[i] / ep[i]).collect();
        let fq: Vec<C64> = (0..g.len()).map(|i| term[i][0] * (lam * u[i])).collect();
        let ip = g.cumint_right(&fp);
        let iq = g.cumint_right(&fq);
        term = (0..g.len()).map(|i| [-ep[i] * ip[i], -iq[i]]).collect();
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

/// Partial Picard sums for Y with Y(0) = I at real k; returns the sums on
/// the oracle's panel nodes and the norms of the terms at x = L.
pub fn picard_oracle_y(p: &InitialProfile, k: C64, l: usize) -> Result<(YSolution, Vec<f64>)> {
    if k.im.abs() > HALF_PLANE_TOL * (1.0 + k.norm()) {
        return Err(Error::WrongRegion(kstr(k)));
    }
    if l > 12 {
        return Err(Error::BadParams("Picard order at most 12".into()));
    }
    let g = PanelGrid::new(0.0, p.l_trunc, 0.25, 17);
    let lam = p.lambda.f();
    let u: Vec<f64> = g.nodes.iter().map(|&x| p.u0.value(x, 0)).collect::<Result<_>>()?;
    let e: Vec<C64> = g.nodes.iter().map(|&x| (2.0 * I * k * x).exp()).collect();
    let n = g.len();
    // column 1: p = int_0^x u q,  q = e^{-2ikx} int_0^x e^{2ikx'} lambda u p
    // column 2: p = e^{2ikx} int_0^x e^{-2ikx'} u q,  q = int_0^x lambda u p
    let mut term = vec![Mat2::identity(); n];
    let mut sum = term.clone();
    let mut norms = vec![1.0];
    for _ in 0..l {
        let f = |h: &dyn Fn(usize) -> C64| g.cumint(&(0..n).map(h).collect::<Vec<C64>>());
        let p1 = f(&|i| term[i].m21() * u[i]);
        let q1 = f(&|i| term[i].m11() * (lam * u[i]) * e[i]);
        let p2 = f(&|i| term[i].m22() * u[i] / e[i]);
        let q2 = f(&|i| term[i].m12() * (lam * u[i]));
        term = (0..n).map(|i| Mat2::new(p1[i], e[i] * p2[i], q1[i] / e[i], q2[i])).collect();
        for (s, t) in sum.iter_mut().zip(&term) {
            *s += *t;
        }
        norms.push(term[n - 1].norm_max());
    }
    Ok((YSolution { k, grid: g.nodes.clone(), values: sum, err_est: f64::NAN }, norms))
}

/// a(k), b(k) at one node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbValue {
    pub k: C64,
    pub a: C64,
    pub b: C64,
    pub method: Method,
}

/// Crossover between ODE and series evaluation.
#[derive(Clone, Copy, Debug)]
pub struct SwitchPolicy {
    pub k_switch: f64,
    pub tol: f64,
}

/// Probe the series against the ODE at |k| = k_switch on three directions;
/// the series is admitted above k_switch only when all agree within 10 tol.
pub fn gate_series_x(p: &InitialProfile, co: &XAsymCoeffs, pol: SwitchPolicy) -> Result<bool> {
    for ang in [0.0, -std::f64::consts::FRAC_PI_2, -std::f64::consts::PI / 6.0] {
        let k = C64::from_polar(pol.k_switch, ang);
        let s = solve_x_col2(p, k, pol.tol)?.first();
        let (xh, _) = hat_xy(co, 0.0, k)?;
        if (xh.m22() - s[1]).norm() > 10.0 * pol.tol || (xh.m12() - s[0]).norm() > 10.0 * pol.tol {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn spectral_ab(
    p: &InitialProfile,
    kgrid: &[C64],
    pol: SwitchPolicy,
    series: Option<&XAsymCoeffs>,
) -> Result<Vec<AbValue>> {
    if let Some(k) = kgrid.iter().find(|k| k.im > HALF_PLANE_TOL * (1.0 + k.norm())) {
        return Err(Error::WrongHalfPlane(kstr(*k)));
    }
    kgrid
        .par_iter()
        .map(|&k| {
            if let Some(co) = series {
                if k.norm() > pol.k_switch {
                    let (xh, _) = hat_xy(co, 0.0, k)?;
                    return Ok(AbValue { k, a: xh.m22(), b: xh.m12(), method: Method::Asymptotic });
                }
            }
            let s = solve_x_col2(p, k, pol.tol)?.first();
            Ok(AbValue { k, a: s[1], b: s[0], method: Method::Ode })
        })
        .collect()
}

/// Closed-form leading coefficients: a_1 = -(i lambda/2) int u^2, b_1 = i u(0)/2.
pub fn leading_ab(p: &InitialProfile) -> Result<(C64, C64)> {
    let g = PanelGrid::new(0.0, p.l_trunc, 0.5, 17);
    let u2: Vec<f64> = g.nodes.iter().map(|&x| p.u0.value(x, 0).map(|v| v * v)).collect::<Result<_>>()?;
    let a1 = c(0.0, -0.5 * p.lambda.f()) * g.integral(&u2);
    Ok((a1, c(0.0, 0.5 * p.u0.value(0.0, 0)?)))
}

pub fn sigma_lambda_of(p: &InitialProfile) -> Mat2 {
    sigma_lambda(p.lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{Lambda, ProfileSpec};

    fn expo(l: Lambda) -> InitialProfile {
        InitialProfile::new(l, &ProfileSpec::preset("exponential", &[("alpha", 1.0), ("beta", 1.0)]), 40.0).unwrap()
    }

    fn gauss(l: Lambda) -> InitialProfile {
        InitialProfile::new(l, &ProfileSpec::preset("gaussian", &[("alpha", 0.8), ("beta", 1.0), ("x0", 1.0)]), 12.0)
            .unwrap()
    }

    #[test]
    fn zero_potential() {
        let p = InitialProfile::zero(Lambda::Defocusing, 5.0);
        let s = solve_x_col2(&p, c(1.0, -1.0), 1e-12).unwrap();
        assert_eq!(s.first(), [re(0.0), re(1.0)]);
        let y = solve_y(&p, c(2.0, 0.0), 1e-12).unwrap();
        assert_eq!(y.values[1], Mat2::identity());
        assert!(matches!(solve_x_col2(&p, c(0.0, 1.0), 1e-12), Err(Error::WrongHalfPlane(_))));
    }

    #[test]
    fn ode_matches_picard() {
        let p = expo(Lambda::Defocusing);
        let k = c(0.0, -1.0);
        let s = solve_x_col2(&p, k, 1e-12).unwrap().first();
        let (o, norms) = picard_oracle_x(&p, k, 12).unwrap();
        let v = o.values[0];
        assert!((s[0] - v[0]).norm() < 1e-10 && (s[1] - v[1]).norm() < 1e-10, "{s:?} {v:?}");
        // factorial decay of the terms
        assert!(norms[8] < norms[4] * 1e-3);
    }

    #[test]
    fn y_ode_matches_picard() {
        let spec = ProfileSpec::preset("gaussian", &[("alpha", 0.2), ("beta", 1.0), ("x0", 1.0)]);
        let p = InitialProfile::new(Lambda::Focusing, &spec, 8.0).unwrap();
        for kr in [0.0, 0.8, -2.0] {
            let y = solve_y(&p, re(kr), 1e-12).unwrap();
            let (o, norms) = picard_oracle_y(&p, re(kr), 12).unwrap();
            assert!(norms[12] < 1e-12, "{norms:?}");
            let want = *o.values.last().unwrap();
            assert!((*y.values.last().unwrap() - want).norm_max() < 1e-10, "k {kr}");
        }
        assert!(picard_oracle_y(&p, c(0.0, -1.0), 4).is_err());
    }

    #[test]
    fn unitarity_and_symmetry() {
        for lam in [Lambda::Defocusing, Lambda::Focusing] {
            let p = gauss(lam);
            for kr in [-3.0, -0.7, 0.0, 0.4, 2.5, 11.0] {
                let k = re(kr);
                let s = solve_x_col2(&p, k, 1e-12).unwrap().first();
                let (a, b) = (s[1], s[0]);
                assert!((a.norm_sqr() - lam.f() * b.norm_sqr() - 1.0).abs() < 1e-11);
                let m = solve_x_col2(&p, -k.conj(), 1e-12).unwrap().first();
                assert!((m[1].conj() - a).norm() < 1e-12);
                let c1 = solve_x_col1(&p, k, 1e-12).unwrap().first();
                let c1d = solve_x_col1_direct(&p, k, 1e-12).unwrap().first();
                assert!((c1[0] - c1d[0]).norm() < 1e-10 && (c1[1] - c1d[1]).norm() < 1e-10);
                assert!(((c1[0] * s[1] - c1[1] * s[0]) - 1.0).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn leading_coefficients() {
        let p = expo(Lambda::Defocusing);
        let (a1, b1) = leading_ab(&p).unwrap();
        assert!((a1 - c(0.0, -0.25)).norm() < 1e-12);
        assert!((b1 - c(0.0, 0.5)).norm() < 1e-15);
        let co = x_asym_coeffs(&p, 4).unwrap();
        let ab = co.ab_coeffs();
        assert!((ab[0].0 - a1).norm() < 1e-12 && (ab[0].1 - b1).norm() < 1e-12);
        // X_1 off-diagonal = (i u/2) sigma_lambda, W_1 = -(i u(0)/2) sigma_lambda
        let sl = sigma_lambda(p.lambda);
        for (i, &x) in co.grid.nodes.iter().enumerate().step_by(37) {
            let u = (-x).exp();
            assert!((co.x[1][i].off_part() - sl * (I * 0.5 * u)).norm_max() < 1e-14);
            assert!((co.w[1][i] - sl * (I * -0.5)).norm_max() < 1e-14);
        }
        // Z_2 diagonal at 0 equals lambda u(0)^2 / 4
        assert!((co.z[2][0].m11() - re(0.25)).norm() < 1e-14);
        // series vs ODE at large k
        let k = c(0.0, -40.0);
        let s = solve_x_col2(&p, k, 1e-13).unwrap().first();
        let (xh, _) = hat_xy(&co, 0.0, k).unwrap();
        assert!((xh.m22() - s[1]).norm() < 1e-8);
    }
}
