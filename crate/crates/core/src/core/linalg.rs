//! Dense complex LU with partial pivoting, a 1-norm condition estimator,
//! and restarted GMRES for large operators.

use super::mat2::C64;
use crate::error::{Error, Result};

/// Row-major LU factors of an n x n complex matrix.
#[derive(Clone, Debug)]
pub struct DenseLu {
    n: usize,
    lu: Vec<C64>,
    piv: Vec<usize>,
}

impl DenseLu {
    pub fn factor(mut a: Vec<C64>, n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let mut piv = vec![0; n];
        for k in 0..n {
            let (mut p, mut best) = (k, 0.0);
            for i in k..n {
                let v = a[i * n + k].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::IllConditioned(f64::INFINITY));
            }
            piv[k] = p;
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
            }
            let inv = a[k * n + k].inv();
            let (top, rest) = a.split_at_mut((k + 1) * n);
            let rowk = &top[k * n + k + 1..k * n + n];
            for i in 0..n - k - 1 {
                let row = &mut rest[i * n..(i + 1) * n];
                let l = row[k] * inv;
                row[k] = l;
                if l.re == 0.0 && l.im == 0.0 {
                    continue;
                }
                for (x, y) in row[k + 1..].iter_mut().zip(rowk) {
                    *x -= l * y;
                }
            }
        }
        Ok(DenseLu { n, lu: a, piv })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &mut [C64]) {
        let n = self.n;
        for k in 0..n {
            b.swap(k, self.piv[k]);
        }
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: C64 = row.iter().zip(&b[..i]).map(|(l, x)| l * x).sum();
            b[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s: C64 = row.iter().zip(&b[i + 1..]).map(|(u, x)| u * x).sum();
            b[i] = (b[i] - s) / self.lu[i * n + i];
        }
    }

    /// Solve A^H x = b.
    pub fn solve_adjoint(&self, b: &mut [C64]) {
        let n = self.n;
        // U^H y = b
        for i in 0..n {
            let yi = b[i] / self.lu[i * n + i].conj();
            b[i] = yi;
            for j in i + 1..n {
                let u = self.lu[i * n + j].conj();
                b[j] -= u * yi;
            }
        }
        // L^H z = y
        for i in (0..n).rev() {
            let zi = b[i];
            for j in 0..i {
                let l = self.lu[i * n + j].conj();
                b[j] -= l * zi;
            }
        }
        for k in (0..n).rev() {
            b.swap(k, self.piv[k]);
        }
    }

    /// Hager–Higham estimate of the 1-norm of the inverse.
    pub fn inv_norm1_estimate(&self) -> f64 {
        let n = self.n;
        let mut x = vec![C64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0;
        for _ in 0..5 {
            self.solve(&mut x);
            let nrm: f64 = x.iter().map(|v| v.norm()).sum();
            if nrm <= est {
                break;
            }
            est = nrm;
            let mut z: Vec<C64> =
                x.iter().map(|v| if v.norm() > 0.0 { v / v.norm() } else { C64::new(1.0, 0.0) }).collect();
            self.solve_adjoint(&mut z);
            let (mut jmax, mut zmax) = (0, 0.0);
            for (j, v) in z.iter().enumerate() {
                if v.norm() > zmax {
                    zmax = v.norm();
                    jmax = j;
                }
            }
            x = vec![C64::default(); n];
            x[jmax] = C64::new(1.0, 0.0);
        }
        est
    }
}

pub fn norm1(a: &[C64], n: usize) -> f64 {
    (0..n).map(|j| (0..n).map(|i| a[i * n + j].norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Solve a small dense system in place; returns the solution in `b`.
pub fn solve_dense(a: Vec<C64>, n: usize, b: &mut [C64]) -> Result<()> {
    DenseLu::factor(a, n)?.solve(b);
    Ok(())
}

/// Least squares for the row-major m x n system A x = b (m >= n) via
/// Householder QR.
pub fn lstsq(mut a: Vec<C64>, m: usize, n: usize, mut b: Vec<C64>) -> Result<Vec<C64>> {
    assert!(m >= n && a.len() == m * n && b.len() == m);
    for k in 0..n {
        let nx = (k..m).map(|i| a[i * n + k].norm_sqr()).sum::<f64>().sqrt();
        if nx == 0.0 {
            return Err(Error::IllConditioned(f64::INFINITY));
        }
        let x0 = a[k * n + k];
        let ph = if x0.norm() == 0.0 { C64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -ph * nx;
        let mut v: Vec<C64> = (k..m).map(|i| a[i * n + k]).collect();
        v[0] -= alpha;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let reflect = |get: &dyn Fn(usize) -> C64| -> C64 {
            v.iter().enumerate().map(|(t, vi)| vi.conj() * get(k + t)).sum::<C64>() * (2.0 / vn)
        };
        for j in k..n {
            let f = reflect(&|i| a[i * n + j]);
            for (t, vi) in v.iter().enumerate() {
                a[(k + t) * n + j] -= f * vi;
            }
        }
        let f = reflect(&|i| b[i]);
        for (t, vi) in v.iter().enumerate() {
            b[k + t] -= f * vi;
        }
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in k + 1..n {
            s -= a[k * n + j] * x[j];
        }
        if a[k * n + k].norm() == 0.0 {
            return Err(Error::IllConditioned(f64::INFINITY));
        }
        x[k] = s / a[k * n + k];
    }
    Ok(x)
}

pub struct GmresInfo {
    pub iters: usize,
    pub rel_resid: f64,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn nrm(a: &[C64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Restarted GMRES for A x = b; `x` holds the initial guess on entry.
pub fn gmres(
    matvec: &dyn Fn(&[C64], &mut [C64]),
    b: &[C64],
    x: &mut [C64],
    tol: f64,
    restart: usize,
    maxit: usize,
) -> Result<GmresInfo> {
    let n = b.len();
    let bn = nrm(b).max(1e-300);
    let mut total = 0;
    let mut r = vec![C64::default(); n];
    let mut w = vec![C64::default(); n];
    loop {
        matvec(x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let beta = nrm(&r);
        if beta / bn <= tol {
            return Ok(GmresInfo { iters: total, rel_resid: beta / bn });
        }
        if total >= maxit {
            return Err(Error::Numerical(format!("GMRES stalled at relative residual {:.3e}", beta / bn)));
        }
        let mut v: Vec<Vec<C64>> = vec![r.iter().map(|z| z / beta).collect()];
        let mut h = vec![vec![C64::default(); restart]; restart + 1];
        let (mut cs, mut sn) = (vec![C64::default(); restart], vec![C64::default(); restart]);
        let mut g = vec![C64::default(); restart + 1];
        g[0] = C64::new(beta, 0.0);
        let mut k_used = 0;
        for k in 0..restart {
            matvec(&v[k], &mut w);
            for (j, vj) in v.iter().enumerate() {
                let hjk = dot(vj, &w);
                h[j][k] = hjk;
                for i in 0..n {
                    w[i] -= hjk * vj[i];
                }
            }
            // second orthogonalization pass
            for (j, vj) in v.iter().enumerate() {
                let c = dot(vj, &w);
                h[j][k] += c;
                for i in 0..n {
                    w[i] -= c * vj[i];
                }
            }
            let hn = nrm(&w);
            h[k + 1][k] = C64::new(hn, 0.0);
            for j in 0..k {
                let t = cs[j].conj() * h[j][k] + sn[j].conj() * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let (a, bb) = (h[k][k], h[k + 1][k]);
            let d = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if d == 0.0 {
                cs[k] = C64::new(1.0, 0.0);
                sn[k] = C64::default();
            } else {
                cs[k] = a / d;
                sn[k] = bb / d;
            }
            h[k][k] = cs[k].conj() * a + sn[k].conj() * bb;
            h[k + 1][k] = C64::default();
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k].conj() * g[k];
            total += 1;
            k_used = k + 1;
            if g[k + 1].norm() / bn <= tol * 0.5 || hn == 0.0 || total >= maxit {
                break;
            }
            v.push(w.iter().map(|z| z / hn).collect());
        }
        let mut y = vec![C64::default(); k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for i in 0..n {
                x[i] += yj * v[j][i];
            }
        }
    }
}
