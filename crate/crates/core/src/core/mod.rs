//! Shared primitives: 2x2 complex matrices, the sign lambda, profiles of
//! initial and boundary data, and small numerical kernels used by the
//! scattering solvers.

pub mod expint;
pub mod jet;
pub mod linalg;
pub mod mat2;
pub mod panel;
pub mod profile;
pub mod special;
pub mod spline;

pub use mat2::{c, re, Mat2, C64, I};
pub use profile::{BoundaryProfile, InitialProfile, Profile1D, ProfileSpec};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest |exponent| accepted before an exponential is declared out of range.
pub const EXP_LIMIT: f64 = 700.0;

/// +1 defocusing, -1 focusing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub enum Lambda {
    Defocusing,
    Focusing,
}

impl Lambda {
    pub fn f(self) -> f64 {
        match self {
            Lambda::Defocusing => 1.0,
            Lambda::Focusing => -1.0,
        }
    }
}

impl TryFrom<i32> for Lambda {
    type Error = String;
    fn try_from(v: i32) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Lambda::Defocusing),
            -1 => Ok(Lambda::Focusing),
            _ => Err(format!("lambda must be +1 or -1, got {v}")),
        }
    }
}

impl From<Lambda> for i32 {
    fn from(l: Lambda) -> i32 {
        if l == Lambda::Defocusing {
            1
        } else {
            -1
        }
    }
}

/// [[0, 1], [-lambda, 0]]
pub fn sigma_lambda(lambda: Lambda) -> Mat2 {
    Mat2::offdiag(re(1.0), re(-lambda.f()))
}

/// diag(e^phi, e^-phi) A diag(e^-phi, e^phi).
pub fn conj_sigma3(a: &Mat2, phi: C64) -> Result<Mat2> {
    if !phi.is_finite() {
        return Err(Error::RangeError(f64::INFINITY));
    }
    let x = 2.0 * phi.re;
    if x.abs() > EXP_LIMIT {
        return Err(Error::RangeError(x));
    }
    let e = (2.0 * phi).exp();
    Ok(Mat2::new(a.m11(), a.m12() * e, a.m21() / e, a.m22()))
}

/// Guarded complex exponential.
pub fn cexp(z: C64) -> Result<C64> {
    if !z.is_finite() || z.re > EXP_LIMIT {
        return Err(Error::RangeError(z.re));
    }
    Ok(z.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_lambda_squares_to_minus_lambda() {
        for l in [Lambda::Defocusing, Lambda::Focusing] {
            let s = sigma_lambda(l);
            let sq = s * s;
            assert_eq!(sq, Mat2::identity() * (-l.f()));
        }
        assert_eq!(sigma_lambda(Lambda::Defocusing), Mat2::offdiag(re(1.0), re(-1.0)));
        assert_eq!(sigma_lambda(Lambda::Focusing), Mat2::offdiag(re(1.0), re(1.0)));
    }

    #[test]
    fn conj_sigma3_examples() {
        let id = conj_sigma3(&Mat2::identity(), c(0.3, 1.1)).unwrap();
        assert_eq!(id, Mat2::identity());
        let a = conj_sigma3(&Mat2::offdiag(re(1.0), re(0.0)), re(2f64.ln())).unwrap();
        assert!((a.m12() - re(4.0)).norm() < 1e-14);
        let ones = Mat2::new(re(1.0), re(1.0), re(1.0), re(1.0));
        let b = conj_sigma3(&ones, c(0.0, std::f64::consts::FRAC_PI_2)).unwrap();
        let want = Mat2::new(re(1.0), re(-1.0), re(-1.0), re(1.0));
        assert!((b - want).norm_max() < 1e-15);
        assert!(matches!(conj_sigma3(&ones, re(400.0)), Err(Error::RangeError(_))));
    }

    #[test]
    fn conj_sigma3_roundtrip() {
        let a = Mat2::new(c(1.0, 2.0), c(-0.5, 0.1), c(3.0, -1.0), c(0.2, 0.2));
        let phi = c(0.7, -2.3);
        let b = conj_sigma3(&conj_sigma3(&a, phi).unwrap(), -phi).unwrap();
        assert!((a - b).norm_max() < 1e-14);
    }

    #[test]
    fn lambda_json() {
        let l: Lambda = serde_json::from_str("-1").unwrap();
        assert_eq!(l, Lambda::Focusing);
        assert!(serde_json::from_str::<Lambda>("2").is_err());
        assert_eq!(serde_json::to_string(&Lambda::Defocusing).unwrap(), "1");
    }
}
