//! Jump matrices J, v and the nilpotent factors w+-.
//!
//! w- is lower triangular and w+ upper triangular, so per node only the
//! scalars om_m = (w-)_21 and om_p = (w+)_12 are stored.

use crate::contour::{ContourGrid, RayId};
use crate::core::mat2::{re, Mat2, C64, I};
use crate::error::{Error, Result};
use crate::spectral::{RationalRegularizer, SpectralData};

/// theta = -2ikx + 8ik^3 t at k = rho * dir(ray). k^3 is real on every
/// ray, so it is formed exactly from rho^3 and the ray parity.
pub fn theta(ray: RayId, rho: f64, x: f64, t: f64) -> C64 {
    let k = ray.dir() * rho;
    let k3 = if ray.0 % 2 == 0 { rho.powi(3) } else { -rho.powi(3) };
    -2.0 * I * k * x + I * (8.0 * k3 * t)
}

/// e^z for exponents that must not grow.
pub fn exp_decaying(z: C64) -> Result<C64> {
    if z.re > 1e-9 * (1.0 + z.norm()) {
        return Err(Error::RangeError(z.re));
    }
    Ok(z.exp())
}

/// J at k = rho * dir(ray).
pub fn jump_j(sd: &SpectralData, x: f64, t: f64, ray: RayId, rho: f64) -> Result<Mat2> {
    let lam = sd.lambda.f();
    let th = theta(ray, rho, x, t);
    let one = re(1.0);
    Ok(if ray.bounds_d1() {
        Mat2::new(one, re(0.0), lam * sd.h_at(ray, rho)? * exp_decaying(th)?, one)
    } else if ray.is_real() {
        let r = sd.r_at(ray, rho)?;
        let (e, ei) = (exp_decaying(th)?, exp_decaying(-th)?);
        Mat2::new(one, -r.conj() * ei, lam * r * e, one - lam * r.norm_sqr())
    } else {
        let hb = sd.h_at(ray.conj(), rho)?.conj();
        Mat2::new(one, -hb * exp_decaying(-th)?, re(0.0), one)
    })
}

/// Off-diagonal entries (w-_21, w+_12) at one node.
pub fn jump_w(sd: &SpectralData, ha: &RationalRegularizer, x: f64, t: f64, ray: RayId, rho: f64) -> Result<(C64, C64)> {
    let lam = sd.lambda.f();
    let th = theta(ray, rho, x, t);
    let k = ray.dir() * rho;
    Ok(if ray.bounds_d1() {
        (lam * (sd.h_at(ray, rho)? - ha.eval(k)) * exp_decaying(th)?, re(0.0))
    } else if ray.is_real() {
        let r = sd.r_at(ray, rho)?;
        (lam * r * exp_decaying(th)?, -r.conj() * exp_decaying(-th)?)
    } else {
        let d = sd.h_at(ray.conj(), rho)? - ha.eval(k.conj());
        (re(0.0), -d.conj() * exp_decaying(-th)?)
    })
}

pub fn w_minus(om_m: C64) -> Mat2 {
    Mat2::new(re(0.0), re(0.0), om_m, re(0.0))
}

pub fn w_plus(om_p: C64) -> Mat2 {
    Mat2::new(re(0.0), om_p, re(0.0), re(0.0))
}

/// v = (I - w-)^{-1} (I + w+).
pub fn v_of(om_m: C64, om_p: C64) -> Mat2 {
    let lower = Mat2::new(re(1.0), re(0.0), om_m, re(1.0));
    let upper = Mat2::new(re(1.0), om_p, re(0.0), re(1.0));
    lower * upper
}

/// Factor data on a grid at one (x, t).
#[derive(Clone, Debug)]
pub struct JumpData {
    pub x: f64,
    pub t: f64,
    pub grid: ContourGrid,
    pub om_m: Vec<C64>,
    pub om_p: Vec<C64>,
}

impl JumpData {
    pub fn zero(grid: ContourGrid, x: f64, t: f64) -> Self {
        let n = grid.len();
        JumpData { x, t, grid, om_m: vec![re(0.0); n], om_p: vec![re(0.0); n] }
    }

    /// Build from a per-node function of (ray, rho).
    pub fn from_fn(grid: ContourGrid, x: f64, t: f64, f: impl Fn(RayId, f64) -> Result<(C64, C64)>) -> Result<Self> {
        let mut jd = JumpData::zero(grid, x, t);
        for i in 0..jd.grid.len() {
            let (m, p) = f(jd.grid.ray_of(i), jd.grid.radial[jd.grid.radial_index(i)])?;
            jd.om_m[i] = m;
            jd.om_p[i] = p;
        }
        Ok(jd)
    }

    /// Regularized factors from spectral data.
    pub fn build(sd: &SpectralData, ha: &RationalRegularizer, grid: ContourGrid, x: f64, t: f64) -> Result<Self> {
        JumpData::from_fn(grid, x, t, |r, rho| jump_w(sd, ha, x, t, r, rho))
    }

    pub fn w_minus(&self, i: usize) -> Mat2 {
        w_minus(self.om_m[i])
    }

    pub fn w_plus(&self, i: usize) -> Mat2 {
        w_plus(self.om_p[i])
    }

    pub fn v(&self, i: usize) -> Mat2 {
        v_of(self.om_m[i], self.om_p[i])
    }

    pub fn sup(&self) -> f64 {
        self.om_m.iter().chain(&self.om_p).fold(0.0, |m, v| m.max(v.norm()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::GridParams;
    use crate::core::mat2::c;

    #[test]
    fn factorization_and_phase() {
        for (m, p) in [(c(0.3, -0.2), c(-1.1, 0.4)), (re(0.0), re(2.0)), (c(0.0, 5.0), re(0.0))] {
            let v = v_of(m, p);
            let lhs = (Mat2::identity() - w_minus(m)) * v;
            assert!((lhs - (Mat2::identity() + w_plus(p))).norm_max() < 1e-15);
            assert!((v.det() - 1.0).norm() < 1e-14);
        }
        // |e^theta| = e^{-sqrt3 rho x} on the D1 rays, 1 on the real rays
        for r in RayId::ALL {
            let th = theta(r, 2.0, 0.7, 0.3);
            let k = r.dir() * 2.0;
            let direct = -2.0 * I * k * 0.7 + 8.0 * I * k.powi(3) * 0.3;
            assert!((th - direct).norm() < 1e-12);
            let want = if r.is_real() { 0.0 } else if r.bounds_d1() { -(3f64.sqrt()) * 1.4 } else { 3f64.sqrt() * 1.4 };
            assert!((th.re - want).abs() < 1e-12);
        }
        assert!(matches!(exp_decaying(c(3.0, 1.0)), Err(Error::RangeError(_))));
        let g = ContourGrid::build(&GridParams::default()).unwrap();
        let jd = JumpData::zero(g, 0.0, 0.0);
        assert_eq!(jd.sup(), 0.0);
        assert_eq!(jd.v(17), Mat2::identity());
    }
}
