//! Evaluable real profiles for initial data u0(x) and boundary data g_j(t).

use super::special::{gauss_deriv, sech_deriv, sech_deriv_polys, sech_poly_bound};
use super::spline::QuinticSpline;
use super::Lambda;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Highest derivative order exposed by closed-form presets.
pub const PRESET_MAX_DERIV: usize = 12;
/// Tables are quintic splines.
pub const TABLE_MAX_DERIV: usize = 5;

/// JSON descriptor of a one-dimensional profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProfileSpec {
    Preset {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
    Table { x: Vec<f64>, u: Vec<f64> },
}

impl ProfileSpec {
    pub fn zero() -> Self {
        ProfileSpec::Preset { name: "zero".into(), params: BTreeMap::new() }
    }

    pub fn preset(name: &str, params: &[(&str, f64)]) -> Self {
        ProfileSpec::Preset {
            name: name.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

#[derive(Clone, Debug)]
enum Shape {
    Zero,
    Gaussian { alpha: f64, beta: f64, x0: f64 },
    Exponential { alpha: f64, beta: f64 },
    /// amp * sech^(order)(rate*s + shift)
    Sech { amp: f64, rate: f64, shift: f64, order: usize, polys: Vec<Vec<f64>> },
    Table(QuinticSpline),
}

/// A real function of one variable on [0, inf) with derivatives.
#[derive(Clone, Debug)]
pub struct Profile1D {
    shape: Shape,
    spec: ProfileSpec,
}

fn take(params: &BTreeMap<String, f64>, allowed: &[&str], name: &str) -> Result<Vec<f64>> {
    for k in params.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::BadParams(format!("preset {name}: unknown parameter '{k}'")));
        }
    }
    allowed
        .iter()
        .map(|k| {
            params
                .get(*k)
                .copied()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::BadParams(format!("preset {name}: missing or non-finite '{k}'")))
        })
        .collect()
}

impl Profile1D {
    pub fn from_spec(spec: &ProfileSpec) -> Result<Self> {
        let shape = match spec {
            ProfileSpec::Table { x, u } => Shape::Table(QuinticSpline::new(x, u)?),
            ProfileSpec::Preset { name, params } => match name.as_str() {
                "zero" => {
                    take(params, &[], name)?;
                    Shape::Zero
                }
                "gaussian" => {
                    let v = take(params, &["alpha", "beta", "x0"], name)?;
                    if v[1] <= 0.0 {
                        return Err(Error::BadParams("gaussian: beta must be positive".into()));
                    }
                    Shape::Gaussian { alpha: v[0], beta: v[1], x0: v[2] }
                }
                "exponential" => {
                    let v = take(params, &["alpha", "beta"], name)?;
                    if v[1] <= 0.0 {
                        return Err(Error::BadParams("exponential: beta must be positive".into()));
                    }
                    Shape::Exponential { alpha: v[0], beta: v[1] }
                }
                "sech" => {
                    let v = take(params, &["amp", "rate", "shift", "order"], name)?;
                    if v[1] <= 0.0 {
                        return Err(Error::BadParams("sech: rate must be positive".into()));
                    }
                    if v[3] < 0.0 || v[3].fract() != 0.0 || v[3] > 6.0 {
                        return Err(Error::BadParams("sech: order must be an integer in 0..=6".into()));
                    }
                    let order = v[3] as usize;
                    Shape::Sech {
                        amp: v[0],
                        rate: v[1],
                        shift: v[2],
                        order,
                        polys: sech_deriv_polys(order + PRESET_MAX_DERIV + 1),
                    }
                }
                other => return Err(Error::PresetUnavailable(other.to_string())),
            },
        };
        Ok(Profile1D { shape, spec: spec.clone() })
    }

    pub fn zero() -> Self {
        Profile1D::from_spec(&ProfileSpec::zero()).unwrap()
    }

    pub fn spec(&self) -> &ProfileSpec {
        &self.spec
    }

    pub fn is_zero(&self) -> bool {
        match &self.shape {
            Shape::Zero => true,
            Shape::Gaussian { alpha, .. } | Shape::Exponential { alpha, .. } => *alpha == 0.0,
            Shape::Sech { amp, .. } => *amp == 0.0,
            Shape::Table(s) => s.samples().1.iter().all(|v| *v == 0.0),
        }
    }

    pub fn max_deriv(&self) -> usize {
        match self.shape {
            Shape::Table(_) => TABLE_MAX_DERIV,
            _ => PRESET_MAX_DERIV,
        }
    }

    /// d-th derivative at s (no domain check).
    pub fn value(&self, s: f64, d: usize) -> Result<f64> {
        if d > self.max_deriv() {
            return Err(Error::DerivUnavailable(d));
        }
        Ok(match &self.shape {
            Shape::Zero => 0.0,
            Shape::Gaussian { alpha, beta, x0 } => alpha * gauss_deriv(s - x0, *beta, d),
            Shape::Exponential { alpha, beta } => alpha * (-beta).powi(d as i32) * (-beta * s).exp(),
            Shape::Sech { amp, rate, shift, order, polys } => {
                amp * rate.powi(d as i32) * sech_deriv(rate * s + shift, order + d, polys)
            }
            Shape::Table(sp) => sp.eval(s, d)?,
        })
    }

    /// Derivatives 0..=nd at s.
    pub fn jet(&self, s: f64, nd: usize) -> Result<Vec<f64>> {
        (0..=nd).map(|d| self.value(s, d)).collect()
    }

    /// Upper estimate of the weighted tail integral of (1+s)|f(s)| over [l, inf).
    pub fn tail_bound(&self, l: f64) -> f64 {
        match &self.shape {
            Shape::Zero => 0.0,
            Shape::Gaussian { alpha, beta, x0 } => {
                // erfc(z) <= exp(-z^2) for z >= 0
                let z = (beta.sqrt() * (l - x0)).max(0.0);
                let g = (-z * z).exp();
                let c = (1.0 + x0.abs()) * 0.5 * (std::f64::consts::PI / beta).sqrt() * g;
                alpha.abs() * (c + g / (2.0 * beta))
            }
            Shape::Exponential { alpha, beta } => {
                let l = l.max(0.0);
                alpha.abs() * (-beta * l).exp() * ((1.0 + l) / beta + 1.0 / (beta * beta))
            }
            Shape::Sech { amp, rate, shift, order, polys } => {
                let b = 2.0 * amp.abs() * sech_poly_bound(*order, polys);
                b * weighted_abs_exp_tail(l.max(0.0), *rate, *shift)
            }
            Shape::Table(sp) => table_tail(sp, l),
        }
    }
}

/// Integral over [l, inf) of (1+s) exp(-|r s + q|), r > 0.
fn weighted_abs_exp_tail(l: f64, r: f64, q: f64) -> f64 {
    // antiderivative of (1+s) e^{c s} is e^{c s}((1+s)/c - 1/c^2)
    let prim = |s: f64, cc: f64, off: f64| (cc * s + off).exp() * ((1.0 + s) / cc - 1.0 / (cc * cc));
    let s0 = -q / r;
    if l >= s0 {
        -prim(l, -r, -q)
    } else {
        // rising part on [l, s0] with exp(r s + q), then decaying part
        (prim(s0, r, q) - prim(l, r, q)) - prim(s0, -r, -q)
    }
}

fn table_tail(sp: &QuinticSpline, l: f64) -> f64 {
    let (x, u) = sp.samples();
    let n = x.len();
    let end = x[n - 1];
    // beyond the table: exponential extrapolation fitted to the last samples
    let m = (n / 10).max(4).min(n);
    let (mut sx, mut sy, mut sxx, mut sxy, mut cnt) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in n - m..n {
        let a = u[i].abs();
        if a > 0.0 {
            let ly = a.ln();
            sx += x[i];
            sy += ly;
            sxx += x[i] * x[i];
            sxy += x[i] * ly;
            cnt += 1.0;
        }
    }
    let ext = if cnt < 2.0 {
        0.0
    } else {
        let den = cnt * sxx - sx * sx;
        let slope = if den.abs() > 0.0 { (cnt * sxy - sx * sy) / den } else { 0.0 };
        if slope >= 0.0 {
            return f64::INFINITY;
        }
        let beta = -slope;
        let le = l.max(end);
        u[n - 1].abs() * (-beta * (le - end)).exp() * ((1.0 + le) / beta + 1.0 / (beta * beta))
    };
    // inside the table: trapezoid on the samples from l to the end
    let mut inner = 0.0;
    for i in 0..n - 1 {
        let (a, b) = (x[i].max(l), x[i + 1]);
        if b <= a {
            continue;
        }
        let fa = (1.0 + a) * interp_abs(x[i], x[i + 1], u[i], u[i + 1], a);
        let fb = (1.0 + b) * u[i + 1].abs();
        inner += 0.5 * (fa + fb) * (b - a);
    }
    inner + ext
}

fn interp_abs(x0: f64, x1: f64, u0: f64, u1: f64, s: f64) -> f64 {
    let t = (s - x0) / (x1 - x0);
    (u0 + t * (u1 - u0)).abs()
}

/// Initial datum u0 on [0, l_trunc].
#[derive(Clone, Debug)]
pub struct InitialProfile {
    pub lambda: Lambda,
    pub u0: Profile1D,
    pub l_trunc: f64,
}

impl InitialProfile {
    pub fn new(lambda: Lambda, spec: &ProfileSpec, l_trunc: f64) -> Result<Self> {
        if !(l_trunc > 0.0 && l_trunc.is_finite()) {
            return Err(Error::BadParams("l_trunc must be positive".into()));
        }
        Ok(InitialProfile { lambda, u0: Profile1D::from_spec(spec)?, l_trunc })
    }

    pub fn zero(lambda: Lambda, l_trunc: f64) -> Self {
        InitialProfile { lambda, u0: Profile1D::zero(), l_trunc }
    }

    pub fn eval(&self, x: f64, d: usize) -> Result<f64> {
        check_domain(x, self.l_trunc)?;
        self.u0.value(x, d)
    }

    pub fn tail_bound(&self) -> f64 {
        self.u0.tail_bound(self.l_trunc)
    }

    pub fn is_zero(&self) -> bool {
        self.u0.is_zero()
    }
}

/// Boundary data g0, g1, g2 on [0, t_trunc].
#[derive(Clone, Debug)]
pub struct BoundaryProfile {
    pub lambda: Lambda,
    pub g: [Profile1D; 3],
    pub t_trunc: f64,
}

/// Minimum derivative orders required for g0, g1, g2.
pub const BOUNDARY_DERIVS: [usize; 3] = [3, 2, 2];

impl BoundaryProfile {
    pub fn new(lambda: Lambda, specs: [&ProfileSpec; 3], t_trunc: f64) -> Result<Self> {
        if !(t_trunc > 0.0 && t_trunc.is_finite()) {
            return Err(Error::BadParams("t_trunc must be positive".into()));
        }
        let g = [
            Profile1D::from_spec(specs[0])?,
            Profile1D::from_spec(specs[1])?,
            Profile1D::from_spec(specs[2])?,
        ];
        Ok(BoundaryProfile { lambda, g, t_trunc })
    }

    pub fn zero(lambda: Lambda, t_trunc: f64) -> Self {
        BoundaryProfile { lambda, g: [Profile1D::zero(), Profile1D::zero(), Profile1D::zero()], t_trunc }
    }

    pub fn eval(&self, j: usize, t: f64, d: usize) -> Result<f64> {
        if j > 2 {
            return Err(Error::BadParams(format!("boundary component g{j} does not exist")));
        }
        check_domain(t, self.t_trunc)?;
        self.g[j].value(t, d)
    }

    pub fn tail_bound(&self) -> f64 {
        self.g.iter().map(|g| g.tail_bound(self.t_trunc)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.g.iter().all(|g| g.is_zero())
    }
}

fn check_domain(s: f64, limit: f64) -> Result<()> {
    let slack = 1e-12 * limit.max(1.0);
    if !(s >= -slack && s <= limit + slack) {
        return Err(Error::OutOfDomain { point: s, limit });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_and_exponential() {
        let z = InitialProfile::new(Lambda::Defocusing, &ProfileSpec::zero(), 10.0).unwrap();
        assert_eq!(z.eval(3.0, 4).unwrap(), 0.0);
        let e = InitialProfile::new(
            Lambda::Defocusing,
            &ProfileSpec::preset("exponential", &[("alpha", 1.0), ("beta", 1.0)]),
            10.0,
        )
        .unwrap();
        assert_eq!(e.eval(0.0, 1).unwrap(), -1.0);
        assert!(matches!(e.eval(11.0, 0), Err(Error::OutOfDomain { .. })));
        assert!(matches!(e.eval(1.0, 13), Err(Error::DerivUnavailable(13))));
    }

    #[test]
    fn table_matches_analytic() {
        let x: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.01).collect();
        let u: Vec<f64> = x.iter().map(|v| (-v).exp()).collect();
        let p = InitialProfile::new(Lambda::Defocusing, &ProfileSpec::Table { x, u }, 10.0).unwrap();
        assert!((p.eval(0.5, 0).unwrap() - (-0.5f64).exp()).abs() < 1e-9);
        assert!(matches!(p.eval(0.5, 6), Err(Error::DerivUnavailable(6))));
        assert!(p.tail_bound() > 0.0 && p.tail_bound() < 1e-3);
    }

    #[test]
    fn json_roundtrip_and_rejection() {
        let s = r#"{"kind":"preset","name":"gaussian","params":{"alpha":1,"beta":2,"x0":0.5}}"#;
        let spec: ProfileSpec = serde_json::from_str(s).unwrap();
        let back: ProfileSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec, back);
        assert!(Profile1D::from_spec(&spec).is_ok());
        let t: ProfileSpec = serde_json::from_str(r#"{"kind":"table","x":[0,1],"u":[1,2]}"#).unwrap();
        assert!(matches!(t, ProfileSpec::Table { .. }));
        assert!(serde_json::from_str::<ProfileSpec>(r#"{"kind":"table","x":[],"u":[],"y":1}"#).is_err());
        let bad = ProfileSpec::preset("gaussian", &[("alpha", 1.0), ("beta", 2.0), ("x0", 0.0), ("w", 1.0)]);
        assert!(Profile1D::from_spec(&bad).is_err());
        assert!(matches!(
            Profile1D::from_spec(&ProfileSpec::preset("airy", &[])),
            Err(Error::PresetUnavailable(_))
        ));
    }

    #[test]
    fn sech_scaling() {
        let p = Profile1D::from_spec(&ProfileSpec::preset(
            "sech",
            &[("amp", 2.0), ("rate", 3.0), ("shift", 0.5), ("order", 1.0)],
        ))
        .unwrap();
        let z: f64 = 3.0 * 0.2 + 0.5;
        let want = -2.0 * z.tanh() / z.cosh();
        assert!((p.value(0.2, 0).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn tail_bounds_are_monotone() {
        let specs = [
            ProfileSpec::preset("gaussian", &[("alpha", 1.0), ("beta", 1.0), ("x0", 2.0)]),
            ProfileSpec::preset("exponential", &[("alpha", -2.0), ("beta", 0.5)]),
            ProfileSpec::preset("sech", &[("amp", 1.0), ("rate", 1.0), ("shift", -3.0), ("order", 2.0)]),
        ];
        for s in &specs {
            let p = Profile1D::from_spec(s).unwrap();
            let mut prev = f64::INFINITY;
            for i in 0..60 {
                let b = p.tail_bound(i as f64 * 0.5);
                assert!(b <= prev * (1.0 + 1e-12), "{s:?} at {i}");
                prev = b;
            }
            assert!(prev < 1e-3);
        }
    }

    #[test]
    fn sech_tail_is_exact_for_order_zero() {
        // integral of (1+s) 2 e^{-|s-1|} from 0 with numerical check
        let num: f64 = (0..200000).map(|i| {
            let s = (i as f64 + 0.5) * 1e-3;
            (1.0 + s) * (-(s - 1.0f64).abs()).exp() * 1e-3
        }).sum();
        assert!((weighted_abs_exp_tail(0.0, 1.0, -1.0) - num).abs() < 1e-5);
    }
}
