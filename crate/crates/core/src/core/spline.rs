//! Quintic interpolating spline in B-spline form with not-a-knot ends.
//! The collocation matrix is banded and totally positive, so it is solved
//! by band elimination without pivoting.

use crate::error::{Error, Result};

const P: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct QuinticSpline {
    knots: Vec<f64>,
    coef: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl QuinticSpline {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(Error::BadParams("table x and u lengths differ".into()));
        }
        if n < P + 1 {
            return Err(Error::BadParams(format!("table needs at least {} points", P + 1)));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) || x.iter().chain(y).any(|v| !v.is_finite()) {
            return Err(Error::BadParams("table x must be finite and strictly increasing".into()));
        }
        let mut knots = vec![x[0]; P + 1];
        knots.extend_from_slice(&x[3..n - 3]);
        knots.extend(std::iter::repeat(x[n - 1]).take(P + 1));

        // band storage: row i holds columns [i - BW, i + BW]
        const BW: usize = 6;
        let w = 2 * BW + 1;
        let mut band = vec![0.0; n * w];
        for (i, &xi) in x.iter().enumerate() {
            let span = find_span(&knots, n, xi);
            let b = basis_ders(&knots, span, xi, 0);
            for j in 0..=P {
                let col = span - P + j;
                let off = col as isize - i as isize + BW as isize;
                if off < 0 || off >= w as isize {
                    return Err(Error::Numerical("spline band overflow".into()));
                }
                band[i * w + off as usize] = b[0][j];
            }
        }
        let mut rhs = y.to_vec();
        // forward elimination
        for k in 0..n {
            let piv = band[k * w + BW];
            if piv.abs() < 1e-300 {
                return Err(Error::Numerical("singular spline collocation".into()));
            }
            for i in k + 1..(k + BW + 1).min(n) {
                let f = band[i * w + (k + BW - i)] / piv;
                if f == 0.0 {
                    continue;
                }
                for col in k..(k + BW + 1).min(n) {
                    let a = band[k * w + (col + BW - k)];
                    band[i * w + (col + BW - i)] -= f * a;
                }
                rhs[i] -= f * rhs[k];
            }
        }
        let mut coef = vec![0.0; n];
        for k in (0..n).rev() {
            let mut s = rhs[k];
            for col in k + 1..(k + BW + 1).min(n) {
                s -= band[k * w + (col + BW - k)] * coef[col];
            }
            coef[k] = s / band[k * w + BW];
        }
        Ok(QuinticSpline { knots, coef, x: x.to_vec(), y: y.to_vec() })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }

    pub fn samples(&self) -> (&[f64], &[f64]) {
        (&self.x, &self.y)
    }

    /// Derivative of order `d` (0..=5); zero outside the table.
    pub fn eval(&self, xv: f64, d: usize) -> Result<f64> {
        if d > P {
            return Err(Error::DerivUnavailable(d));
        }
        let (a, b) = self.domain();
        if xv < a || xv > b {
            return Ok(0.0);
        }
        let n = self.coef.len();
        let span = find_span(&self.knots, n, xv);
        let ders = basis_ders(&self.knots, span, xv, d);
        Ok((0..=P).map(|j| self.coef[span - P + j] * ders[d][j]).sum())
    }
}

fn find_span(t: &[f64], n: usize, x: f64) -> usize {
    if x >= t[n] {
        return n - 1;
    }
    let (mut lo, mut hi) = (P, n);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if x < t[mid] {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// Nonzero basis functions and their derivatives up to `nd` at x.
fn basis_ders(t: &[f64], span: usize, x: f64, nd: usize) -> Vec<[f64; P + 1]> {
    let mut ndu = [[0.0; P + 1]; P + 1];
    let mut left = [0.0; P + 1];
    let mut right = [0.0; P + 1];
    ndu[0][0] = 1.0;
    for j in 1..=P {
        left[j] = x - t[span + 1 - j];
        right[j] = t[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    let mut ders = vec![[0.0; P + 1]; nd + 1];
    for j in 0..=P {
        ders[0][j] = ndu[j][P];
    }
    let mut a = [[0.0; P + 1]; 2];
    for r in 0..=P {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for k in 1..=nd {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = P - k;
            if r >= k {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                d = a[s2][0] * ndu[rk as usize][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if (r as isize - 1) <= pk as isize { k - 1 } else { P - r };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut f = P as f64;
    for k in 1..=nd {
        for j in 0..=P {
            ders[k][j] *= f;
        }
        f *= (P - k) as f64;
    }
    ders
}
