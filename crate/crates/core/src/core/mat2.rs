use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

pub type C64 = Complex64;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Complex 2x2 matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Mat2 {
    pub e: [C64; 4],
}

impl Mat2 {
    pub const fn new(a11: C64, a12: C64, a21: C64, a22: C64) -> Self {
        Mat2 { e: [a11, a12, a21, a22] }
    }

    pub fn zero() -> Self {
        Mat2::default()
    }

    pub fn identity() -> Self {
        Mat2::diag(re(1.0), re(1.0))
    }

    pub fn diag(d1: C64, d2: C64) -> Self {
        Mat2::new(d1, C64::default(), C64::default(), d2)
    }

    pub fn offdiag(o12: C64, o21: C64) -> Self {
        Mat2::new(C64::default(), o12, o21, C64::default())
    }

    pub fn sigma1() -> Self {
        Mat2::offdiag(re(1.0), re(1.0))
    }

    pub fn sigma2() -> Self {
        Mat2::offdiag(-I, I)
    }

    pub fn sigma3() -> Self {
        Mat2::diag(re(1.0), re(-1.0))
    }

    #[inline]
    pub fn m11(&self) -> C64 {
        self.e[0]
    }
    #[inline]
    pub fn m12(&self) -> C64 {
        self.e[1]
    }
    #[inline]
    pub fn m21(&self) -> C64 {
        self.e[2]
    }
    #[inline]
    pub fn m22(&self) -> C64 {
        self.e[3]
    }

    pub fn det(&self) -> C64 {
        self.e[0] * self.e[3] - self.e[1] * self.e[2]
    }

    pub fn trace(&self) -> C64 {
        self.e[0] + self.e[3]
    }

    /// Inverse; `None` when the determinant vanishes.
    pub fn inv(&self) -> Option<Mat2> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        let r = d.inv();
        Some(Mat2::new(self.e[3] * r, -self.e[1] * r, -self.e[2] * r, self.e[0] * r))
    }

    /// Entrywise complex conjugate (no transpose).
    pub fn conj(&self) -> Mat2 {
        Mat2 { e: self.e.map(|z| z.conj()) }
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.e[0], self.e[2], self.e[1], self.e[3])
    }

    pub fn adjoint(&self) -> Mat2 {
        self.transpose().conj()
    }

    pub fn diag_part(&self) -> Mat2 {
        Mat2::diag(self.e[0], self.e[3])
    }

    pub fn off_part(&self) -> Mat2 {
        Mat2::offdiag(self.e[1], self.e[2])
    }

    pub fn scale(&self, s: C64) -> Mat2 {
        Mat2 { e: self.e.map(|z| z * s) }
    }

    pub fn scale_re(&self, s: f64) -> Mat2 {
        Mat2 { e: self.e.map(|z| z * s) }
    }

    /// Max-abs entry norm.
    pub fn norm_max(&self) -> f64 {
        self.e.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn norm_fro(&self) -> f64 {
        self.e.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.e.iter().all(|z| z.is_finite())
    }

    /// sigma3 * self, cheap.
    #[inline]
    pub fn s3l(&self) -> Mat2 {
        Mat2::new(self.e[0], self.e[1], -self.e[2], -self.e[3])
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    #[inline]
    fn add(self, o: Mat2) -> Mat2 {
        Mat2 { e: [self.e[0] + o.e[0], self.e[1] + o.e[1], self.e[2] + o.e[2], self.e[3] + o.e[3]] }
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    #[inline]
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2 { e: [self.e[0] - o.e[0], self.e[1] - o.e[1], self.e[2] - o.e[2], self.e[3] - o.e[3]] }
    }
}

impl AddAssign for Mat2 {
    #[inline]
    fn add_assign(&mut self, o: Mat2) {
        *self = *self + o;
    }
}

impl SubAssign for Mat2 {
    #[inline]
    fn sub_assign(&mut self, o: Mat2) {
        *self = *self - o;
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    #[inline]
    fn neg(self) -> Mat2 {
        Mat2 { e: self.e.map(|z| -z) }
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    #[inline]
    fn mul(self, o: Mat2) -> Mat2 {
        let a = &self.e;
        let b = &o.e;
        Mat2 {
            e: [
                a[0] * b[0] + a[1] * b[2],
                a[0] * b[1] + a[1] * b[3],
                a[2] * b[0] + a[3] * b[2],
                a[2] * b[1] + a[3] * b[3],
            ],
        }
    }
}

impl Mul<C64> for Mat2 {
    type Output = Mat2;
    #[inline]
    fn mul(self, s: C64) -> Mat2 {
        self.scale(s)
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    #[inline]
    fn mul(self, s: f64) -> Mat2 {
        self.scale_re(s)
    }
}

impl Mul<Mat2> for C64 {
    type Output = Mat2;
    #[inline]
    fn mul(self, m: Mat2) -> Mat2 {
        m.scale(self)
    }
}

impl Mul<Mat2> for f64 {
    type Output = Mat2;
    #[inline]
    fn mul(self, m: Mat2) -> Mat2 {
        m.scale_re(self)
    }
}

impl std::iter::Sum for Mat2 {
    fn sum<It: Iterator<Item = Mat2>>(iter: It) -> Mat2 {
        iter.fold(Mat2::zero(), |a, b| a + b)
    }
}
