//! Quadrature rules and composite Chebyshev–Lobatto panel grids on an interval.

use gauss_quad::legendre::GaussLegendre;
use std::collections::HashMap;
use std::ops::{Add, Mul, Sub};
use std::sync::{Arc, Mutex, OnceLock};

pub type Rule = Arc<(Vec<f64>, Vec<f64>)>;

/// Gauss–Legendre nodes (ascending) and weights on [-1, 1]; cached per size.
pub fn gauss_legendre(n: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&n) {
        return r.clone();
    }
    let rule = if n == 1 {
        (vec![0.0], vec![2.0])
    } else {
        let gl = GaussLegendre::new(n).expect("rule size >= 2");
        let mut p: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
        p.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        // enforce exact symmetry
        let m = p.len();
        for i in 0..m / 2 {
            let x = 0.5 * (p[m - 1 - i].0 - p[i].0);
            let w = 0.5 * (p[m - 1 - i].1 + p[i].1);
            p[i] = (-x, w);
            p[m - 1 - i] = (x, w);
        }
        if m % 2 == 1 {
            p[m / 2].0 = 0.0;
        }
        p.into_iter().unzip()
    };
    let r = Arc::new(rule);
    cache.lock().unwrap().insert(n, r.clone());
    r
}

/// Ascending Chebyshev–Lobatto points on [-1, 1].
pub fn lobatto_points(n: usize) -> Vec<f64> {
    let nn = (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|i| -(std::f64::consts::PI * i as f64 / nn).cos()).collect();
    for i in 0..n / 2 {
        let x = 0.5 * (v[n - 1 - i] - v[i]);
        v[i] = -x;
        v[n - 1 - i] = x;
    }
    if n % 2 == 1 {
        v[n / 2] = 0.0;
    }
    v
}

/// Barycentric weights for `lobatto_points`.
pub fn lobatto_bary(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            if i == 0 || i == n - 1 {
                0.5 * s
            } else {
                s
            }
        })
        .collect()
}

/// Lagrange basis values at xi for nodes with barycentric weights.
pub fn bary_basis(nodes: &[f64], w: &[f64], xi: f64) -> Vec<f64> {
    let mut out = vec![0.0; nodes.len()];
    for (j, &xj) in nodes.iter().enumerate() {
        if xi == xj {
            out[j] = 1.0;
            return out;
        }
    }
    let mut den = 0.0;
    for j in 0..nodes.len() {
        let t = w[j] / (xi - nodes[j]);
        out[j] = t;
        den += t;
    }
    for v in out.iter_mut() {
        *v /= den;
    }
    out
}

/// Values that can be integrated and interpolated linearly.
pub trait Lin: Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}
impl<T> Lin for T where T: Copy + Default + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> {}

/// Composite grid of Lobatto panels with shared endpoints.
#[derive(Clone, Debug)]
pub struct PanelGrid {
    pub a: f64,
    pub b: f64,
    pub npanel: usize,
    pub np: usize,
    pub nodes: Vec<f64>,
    ref_nodes: Vec<f64>,
    bary: Vec<f64>,
    /// S[i][j] = integral over [-1, xi_i] of l_j
    smat: Vec<Vec<f64>>,
}

impl PanelGrid {
    /// Panels of length at most `hmax` (node count per panel `np`).
    pub fn new(a: f64, b: f64, hmax: f64, np: usize) -> Self {
        assert!(b > a && np >= 3 && hmax > 0.0);
        let npanel = ((b - a) / hmax).ceil().max(1.0) as usize;
        let r = lobatto_points(np);
        let bary = lobatto_bary(np);
        let h = (b - a) / npanel as f64;
        let mut nodes = Vec::with_capacity(npanel * (np - 1) + 1);
        for p in 0..npanel {
            let lo = a + h * p as f64;
            let start = if p == 0 { 0 } else { 1 };
            for (i, &xi) in r.iter().enumerate().skip(start) {
                nodes.push(if i == np - 1 && p == npanel - 1 { b } else { lo + 0.5 * h * (xi + 1.0) });
            }
        }
        let g = gauss_legendre(np);
        let smat = r
            .iter()
            .map(|&xi| {
                let half = 0.5 * (xi + 1.0);
                let mut row = vec![0.0; np];
                if half == 0.0 {
                    return row;
                }
                for (q, &gq) in g.0.iter().enumerate() {
                    let s = -1.0 + half * (gq + 1.0);
                    let l = bary_basis(&r, &bary, s);
                    for j in 0..np {
                        row[j] += half * g.1[q] * l[j];
                    }
                }
                row
            })
            .collect();
        PanelGrid { a, b, npanel, np, nodes, ref_nodes: r, bary, smat }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.npanel as f64
    }

    /// F(x_i) = integral from a to x_i of f.
    pub fn cumint<T: Lin>(&self, f: &[T]) -> Vec<T> {
        assert_eq!(f.len(), self.nodes.len());
        let mut out = vec![T::default(); f.len()];
        let half = 0.5 * self.h();
        let m = self.np - 1;
        let mut base = T::default();
        for p in 0..self.npanel {
            let off = p * m;
            for i in 1..self.np {
                let mut s = T::default();
                for j in 0..self.np {
                    s = s + f[off + j] * (self.smat[i][j] * half);
                }
                out[off + i] = base + s;
            }
            base = out[off + m];
        }
        out
    }

    /// G(x_i) = integral from x_i to b of f.
    pub fn cumint_right<T: Lin>(&self, f: &[T]) -> Vec<T> {
        let fw = self.cumint(f);
        let tot = *fw.last().unwrap();
        fw.into_iter().map(|v| tot - v).collect()
    }

    pub fn integral<T: Lin>(&self, f: &[T]) -> T {
        *self.cumint(f).last().unwrap()
    }

    /// Interpolate nodal values at x in [a, b].
    pub fn interp<T: Lin>(&self, f: &[T], x: f64) -> T {
        let h = self.h();
        let p = (((x - self.a) / h).floor().max(0.0) as usize).min(self.npanel - 1);
        let lo = self.a + h * p as f64;
        let xi = 2.0 * (x - lo) / h - 1.0;
        let l = bary_basis(&self.ref_nodes, &self.bary, xi);
        let off = p * (self.np - 1);
        let mut s = T::default();
        for j in 0..self.np {
            s = s + f[off + j] * l[j];
        }
        s
    }

    /// Index of the node equal to x, if any.
    pub fn find(&self, x: f64) -> Option<usize> {
        let tol = 1e-13 * (self.b - self.a).abs().max(1.0);
        let i = self.nodes.partition_point(|&v| v < x - tol);
        (i < self.nodes.len() && (self.nodes[i] - x).abs() <= tol).then_some(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_rule_integrates_polynomials() {
        let r = gauss_legendre(8);
        let s: f64 = r.0.iter().zip(&r.1).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        assert!(r.0.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn cumulative_integral_of_exp() {
        let g = PanelGrid::new(0.0, 10.0, 0.5, 17);
        let f: Vec<f64> = g.nodes.iter().map(|x| (-x).exp()).collect();
        let fi = g.cumint(&f);
        for (x, v) in g.nodes.iter().zip(&fi) {
            assert!((v - (1.0 - (-x).exp())).abs() < 1e-14);
        }
        let r = g.cumint_right(&f);
        assert!((r[0] - (1.0 - (-10f64).exp())).abs() < 1e-14);
        assert!((g.interp(&f, 3.21) - (-3.21f64).exp()).abs() < 1e-13);
        assert_eq!(g.find(10.0), Some(g.len() - 1));
        assert_eq!(g.find(0.5), Some(16));
    }
}
