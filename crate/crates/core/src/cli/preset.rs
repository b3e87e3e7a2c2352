//! Compatible initial/boundary data with a known solution.

use crate::core::profile::{BoundaryProfile, InitialProfile, ProfileSpec};
use crate::core::special::{sech_deriv, sech_deriv_polys};
use crate::core::Lambda;
use crate::error::{Error, Result};
use rand::{rngs::StdRng, Rng, SeedableRng};
use std::collections::BTreeMap;

/// Focusing one-soliton u = c sech(c x + c^3 t + delta).
///
/// u_t - 6 u^2 u_x - u_xxx = 0 is the reflection x -> -x of
/// v_t + 6 v^2 v_x + v_xxx = 0, whose soliton travels right with speed c^2.
#[derive(Clone, Debug)]
pub struct Soliton {
    pub c: f64,
    pub delta: f64,
    polys: Vec<Vec<f64>>,
}

impl Soliton {
    pub fn new(c: f64, delta: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite() && delta.is_finite()) {
            return Err(Error::PresetUnavailable(format!("soliton needs c > 0, got c = {c}, delta = {delta}")));
        }
        Ok(Soliton { c, delta, polys: sech_deriv_polys(6) })
    }

    /// d^j u / dx^j at (x, t).
    pub fn dx(&self, x: f64, t: f64, j: usize) -> f64 {
        let c = self.c;
        c.powi(j as i32 + 1) * sech_deriv(c * x + c.powi(3) * t + self.delta, j, &self.polys)
    }

    pub fn u(&self, x: f64, t: f64) -> f64 {
        self.dx(x, t, 0)
    }

    pub fn dt(&self, x: f64, t: f64) -> f64 {
        self.c.powi(4) * sech_deriv(self.c * x + self.c.powi(3) * t + self.delta, 1, &self.polys)
    }

    /// u_t + 6 lambda u^2 u_x - u_xxx with lambda = -1.
    pub fn pde_residual(&self, x: f64, t: f64) -> f64 {
        let u = self.u(x, t);
        self.dt(x, t) - 6.0 * u * u * self.dx(x, t, 1) - self.dx(x, t, 3)
    }

    /// Largest residual over n pseudo-random points of [0, 4] x [0, 2].
    pub fn substitution_check(&self, n: usize, seed: u64) -> f64 {
        let mut rng = StdRng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let (x, t) = (rng.gen_range(0.0..4.0), rng.gen_range(0.0..2.0));
                self.pde_residual(x, t).abs()
            })
            .fold(0.0, f64::max)
    }

    fn spec(&self, amp: f64, rate: f64, order: usize) -> ProfileSpec {
        ProfileSpec::preset(
            "sech",
            &[("amp", amp), ("rate", rate), ("shift", self.delta), ("order", order as f64)],
        )
    }

    /// u(x, 0) on [0, l].
    pub fn initial(&self, l: f64) -> Result<InitialProfile> {
        InitialProfile::new(Lambda::Focusing, &self.spec(self.c, self.c, 0), l)
    }

    /// g_j(t) = d^j u / dx^j (0, t) on [0, t_trunc].
    pub fn boundary(&self, t_trunc: f64) -> Result<BoundaryProfile> {
        let c = self.c;
        let s: Vec<ProfileSpec> = (0..3).map(|j| self.spec(c.powi(j as i32 + 1), c.powi(3), j)).collect();
        BoundaryProfile::new(Lambda::Focusing, [&s[0], &s[1], &s[2]], t_trunc)
    }
}

/// Known presets with their exact solution.
pub struct Preset {
    pub initial: InitialProfile,
    pub boundary: BoundaryProfile,
    pub exact: Soliton,
}

pub const PDE_CHECK_TOL: f64 = 1e-12;

/// Build a preset; the exact solution is substituted into the PDE at 100
/// points before anything is returned.
pub fn compatible_preset(name: &str, params: &BTreeMap<String, f64>, l: f64, t_trunc: f64) -> Result<Preset> {
    if name != "soliton-focusing" {
        return Err(Error::PresetUnavailable(name.into()));
    }
    for key in params.keys() {
        if key != "c" && key != "delta" {
            return Err(Error::PresetUnavailable(format!("unknown parameter {key} for {name}")));
        }
    }
    let exact = Soliton::new(*params.get("c").unwrap_or(&1.0), *params.get("delta").unwrap_or(&1.0))?;
    let res = exact.substitution_check(100, 7);
    if !(res <= PDE_CHECK_TOL * exact.c.powi(4).max(1.0)) {
        return Err(Error::PresetUnavailable(format!("PDE residual {res:e} of the closed form")));
    }
    Ok(Preset { initial: exact.initial(l)?, boundary: exact.boundary(t_trunc)?, exact })
}
