//! Closed-form derivatives of the preset profile shapes.

/// Coefficients of P_n with sech^(n)(z) = sech(z) * P_n(tanh z), n = 0..=nmax.
pub fn sech_deriv_polys(nmax: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![1.0]];
    for _ in 0..nmax {
        let p = out.last().unwrap();
        // d/dz [sech P(T)] = sech (-T P + (1 - T^2) P')
        let mut q = vec![0.0; p.len() + 1];
        for (i, &a) in p.iter().enumerate() {
            q[i + 1] -= a;
            if i > 0 {
                let d = a * i as f64;
                q[i - 1] += d;
                q[i + 1] -= d;
            }
        }
        while q.len() > 1 && *q.last().unwrap() == 0.0 {
            q.pop();
        }
        out.push(q);
    }
    out
}

fn sech(z: f64) -> f64 {
    let a = z.abs();
    let e = (-a).exp();
    2.0 * e / (1.0 + e * e)
}

/// n-th derivative of sech at z.
pub fn sech_deriv(z: f64, n: usize, polys: &[Vec<f64>]) -> f64 {
    let t = z.tanh();
    let p = &polys[n];
    let mut acc = 0.0;
    for &a in p.iter().rev() {
        acc = acc * t + a;
    }
    sech(z) * acc
}

/// Sum of |coefficients|, a bound for |P_n(T)| on [-1, 1].
pub fn sech_poly_bound(n: usize, polys: &[Vec<f64>]) -> f64 {
    polys[n].iter().map(|a| a.abs()).sum()
}

/// n-th derivative of exp(-beta y^2) in y.
pub fn gauss_deriv(y: f64, beta: f64, n: usize) -> f64 {
    let sb = beta.sqrt();
    let s = sb * y;
    // physicists' Hermite H_n(s)
    let (mut h0, mut h1) = (1.0, 2.0 * s);
    let hn = if n == 0 {
        h0
    } else {
        for k in 1..n {
            let h2 = 2.0 * s * h1 - 2.0 * k as f64 * h0;
            h0 = h1;
            h1 = h2;
        }
        h1
    };
    (-sb).powi(n as i32) * hn * (-beta * y * y).exp()
}

/// Least-squares line y = a + b x; returns (b, a, R^2).
pub fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let b = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (b, my - b * mx, r2)
}
