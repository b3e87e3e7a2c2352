//! Matrix-valued functions tabulated on a panel grid together with their
//! derivatives. Products follow Leibniz, differentiation drops a level and
//! integration prepends one, so recursions that alternate between the two
//! stay exact in the derivative levels.

use super::mat2::{Mat2, C64};
use super::panel::PanelGrid;
use crate::error::{Error, Result};

/// d[l][i] is the l-th derivative at node i.
#[derive(Clone, Debug)]
pub struct JetField {
    pub d: Vec<Vec<Mat2>>,
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl JetField {
    pub fn zeros(n: usize, order: usize) -> Self {
        JetField { d: vec![vec![Mat2::zero(); n]; order + 1] }
    }

    pub fn constant(n: usize, order: usize, m: Mat2) -> Self {
        let mut j = JetField::zeros(n, order);
        j.d[0] = vec![m; n];
        j
    }

    pub fn order(&self) -> usize {
        self.d.len() - 1
    }

    pub fn len(&self) -> usize {
        self.d[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.d[0].is_empty()
    }

    pub fn value(&self) -> &[Mat2] {
        &self.d[0]
    }

    pub fn truncate(mut self, order: usize) -> Self {
        self.d.truncate(order + 1);
        self
    }

    /// Apply a linear map to every derivative level.
    pub fn map(&self, f: impl Fn(&Mat2) -> Mat2) -> Self {
        JetField { d: self.d.iter().map(|lv| lv.iter().map(&f).collect()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|m| *m * s)
    }

    pub fn lmul(&self, a: Mat2) -> Self {
        self.map(|m| a * *m)
    }

    pub fn rmul(&self, a: Mat2) -> Self {
        self.map(|m| *m * a)
    }

    fn zip(&self, o: &JetField, f: impl Fn(Mat2, Mat2) -> Mat2) -> Self {
        let ord = self.order().min(o.order());
        JetField {
            d: (0..=ord)
                .map(|l| self.d[l].iter().zip(&o.d[l]).map(|(a, b)| f(*a, *b)).collect())
                .collect(),
        }
    }

    pub fn add(&self, o: &JetField) -> Self {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &JetField) -> Self {
        self.zip(o, |a, b| a - b)
    }

    /// Pointwise matrix product with Leibniz rule.
    pub fn mul(&self, o: &JetField) -> Self {
        let ord = self.order().min(o.order());
        let n = self.len();
        let mut d = vec![vec![Mat2::zero(); n]; ord + 1];
        for (l, dl) in d.iter_mut().enumerate() {
            for r in 0..=l {
                let c = binom(l, r);
                for i in 0..n {
                    dl[i] += (self.d[r][i] * o.d[l - r][i]) * c;
                }
            }
        }
        JetField { d }
    }

    pub fn deriv(&self) -> Self {
        assert!(self.order() >= 1, "jet derivative exhausted");
        JetField { d: self.d[1..].to_vec() }
    }

    pub fn try_deriv(&self) -> Result<Self> {
        if self.order() == 0 {
            return Err(Error::DerivUnavailable(1));
        }
        Ok(self.deriv())
    }

    /// F(x) = integral from a to x of self.
    pub fn int_left(&self, g: &PanelGrid) -> Self {
        let mut d = vec![g.cumint(&self.d[0])];
        d.extend(self.d.iter().cloned());
        JetField { d }
    }

    /// F(x) = -integral from x to b of self, so F(b) = 0 and F' = self.
    pub fn int_right(&self, g: &PanelGrid) -> Self {
        let r = g.cumint_right(&self.d[0]);
        let mut d = vec![r.into_iter().map(|v| -v).collect()];
        d.extend(self.d.iter().cloned());
        JetField { d }
    }

    /// Add a constant to the value level.
    pub fn add_const(mut self, m: Mat2) -> Self {
        for v in self.d[0].iter_mut() {
            *v += m;
        }
        self
    }

    pub fn at(&self, g: &PanelGrid, x: f64) -> Mat2 {
        g.interp(&self.d[0], x)
    }

    pub fn max_norm(&self) -> f64 {
        self.d[0].iter().fold(0.0, |m, v| m.max(v.norm_max()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::mat2::re;

    fn scalar_jet(g: &PanelGrid, order: usize, f: impl Fn(f64, usize) -> f64) -> JetField {
        JetField {
            d: (0..=order)
                .map(|l| g.nodes.iter().map(|&x| Mat2::identity() * re(f(x, l))).collect())
                .collect(),
        }
    }

    #[test]
    fn leibniz_and_integration() {
        let g = PanelGrid::new(0.0, 4.0, 0.5, 17);
        let s = scalar_jet(&g, 3, |x, l| match l % 4 {
            0 => x.sin(),
            1 => x.cos(),
            2 => -x.sin(),
            _ => -x.cos(),
        });
        let e = scalar_jet(&g, 3, |x, _| x.exp());
        let p = s.mul(&e);
        // (e^x sin x)''' = 2 e^x (cos x - sin x)
        let x = g.nodes[40];
        let want = 2.0 * x.exp() * (x.cos() - x.sin());
        assert!((p.d[3][40].m11().re - want).abs() < 1e-12 * want.abs().max(1.0));
        let f = e.int_right(&g);
        assert_eq!(f.order(), 4);
        assert!((f.d[0][0].m22().re + (4f64.exp() - 1.0)).abs() < 1e-12);
        let l = s.int_left(&g).deriv();
        assert!((l.d[0][7] - s.d[0][7]).norm_max() == 0.0);
    }
}
