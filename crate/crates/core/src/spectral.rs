//! Derived spectral functions c, d, h, r on the contour grid, large-k
//! coefficient arithmetic, the rational regularizer h_a, the global relation
//! diagnostic and argument-principle zero scans.

use crate::contour::{classify, ContourGrid, GridParams, RayId, Region};
use crate::core::linalg::{lstsq, solve_dense};
use crate::core::mat2::{c, re, C64};
use crate::core::{BoundaryProfile, InitialProfile, Lambda};
use crate::error::{kstr, Error, Result};
use crate::tscatter::{gate_series_t, solve_t_col2, spectral_big_ab, t_asym_coeffs};
use crate::xscatter::{gate_series_x, solve_x_col2, spectral_ab, x_asym_coeffs, SwitchPolicy};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Number of large-k coefficients carried for each function.
pub const N_COEFF: usize = 4;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    #[serde(default)]
    pub grid: GridParams,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_k_switch")]
    pub k_switch: f64,
}

fn default_tol() -> f64 {
    1e-12
}

fn default_k_switch() -> f64 {
    20.0
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig { grid: GridParams::default(), tol: default_tol(), k_switch: default_k_switch() }
    }
}

impl SpectralConfig {
    fn policy(&self) -> SwitchPolicy {
        SwitchPolicy { k_switch: self.k_switch, tol: self.tol }
    }
}

/// Values of the spectral functions along one ray, at the grid's radial
/// nodes. Which fields are present depends on the ray: a, b, c, d, h on
/// Im k <= 0 rays; A, B everywhere; r on the real rays.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct RayTable {
    pub ray: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<C64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<C64>>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub big_a: Option<Vec<C64>>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub big_b: Option<Vec<C64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<C64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<C64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<C64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<C64>>,
    /// r from conj(b(conj k))/a + h, kept next to r as a diagnostic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_alt: Option<Vec<C64>>,
}

/// Large-k coefficients, index j-1 holds the 1/k^j coefficient.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct Coefficients {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<C64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<C64>>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub big_a: Option<Vec<C64>>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub big_b: Option<Vec<C64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<C64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_fit: Option<Vec<C64>>,
}

/// a, b, A, B at k = 0.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct OriginValues {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<C64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<C64>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub big_a: Option<C64>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub big_b: Option<C64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct Diagnostics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_unitarity_residual_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_unitarity_residual_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_used_x: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_used_t: Option<bool>,
    /// sup |r - r_alt| over real nodes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_formula_gap: Option<f64>,
    /// sup |A b - B a| over the D1 boundary nodes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_relation_sup: Option<f64>,
    /// |h(0) + conj(b(0))/a(0)|, zero when the global relation holds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h0_gap: Option<f64>,
    /// max |h_j(series) - h_j(fit)|.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_fit_gap: Option<f64>,
    /// Zeros of a found in Im k < 0 and of d in D2, with min |a|, min |d|.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeros_a: Option<(i64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeros_d: Option<(i64, f64)>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpectralData {
    pub lambda: Lambda,
    pub grid: ContourGrid,
    pub rays: Vec<RayTable>,
    pub origin: OriginValues,
    pub coeffs: Coefficients,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h0: Option<C64>,
    pub diagnostics: Diagnostics,
}

/// Rays in the closed lower half plane: the real rays and the D1 boundary.
pub const LOWER_RAYS: [RayId; 4] = [RayId(0), RayId(3), RayId(4), RayId(5)];

fn missing(what: &str) -> Error {
    Error::BadParams(format!("spectral data lacks {what}"))
}

fn conj_all(v: &[C64]) -> Vec<C64> {
    v.iter().map(|z| z.conj()).collect()
}

impl SpectralData {
    pub fn empty(lambda: Lambda, grid: ContourGrid) -> Self {
        SpectralData {
            lambda,
            rays: RayId::ALL.iter().map(|r| RayTable { ray: r.0, ..Default::default() }).collect(),
            grid,
            origin: OriginValues::default(),
            coeffs: Coefficients::default(),
            h0: None,
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn ray(&self, r: RayId) -> &RayTable {
        &self.rays[r.0 as usize]
    }

    pub fn ray_k(&self, r: RayId) -> Vec<C64> {
        self.grid.radial.iter().map(|rho| r.dir() * *rho).collect()
    }

    /// Combine an x-part file (a, b) with a t-part file (A, B).
    pub fn merge(x: SpectralData, t: SpectralData) -> Result<SpectralData> {
        if x.lambda != t.lambda {
            return Err(Error::BadParams("x- and t-part data have different lambda".into()));
        }
        if x.grid != t.grid {
            return Err(Error::BadParams("x- and t-part data use different grids".into()));
        }
        let mut out = x;
        for (o, tr) in out.rays.iter_mut().zip(t.rays) {
            o.big_a = tr.big_a;
            o.big_b = tr.big_b;
        }
        out.origin.big_a = t.origin.big_a;
        out.origin.big_b = t.origin.big_b;
        out.coeffs.big_a = t.coeffs.big_a;
        out.coeffs.big_b = t.coeffs.big_b;
        out.diagnostics.max_unitarity_residual_t = t.diagnostics.max_unitarity_residual_t;
        out.diagnostics.series_used_t = t.diagnostics.series_used_t;
        Ok(out)
    }

    /// Value of a per-ray table at an arbitrary radius on that ray.
    pub fn interp(&self, r: RayId, field: impl Fn(&RayTable) -> Option<&Vec<C64>>, rho: f64) -> Result<C64> {
        let v = field(self.ray(r)).ok_or_else(|| missing(&format!("a table on ray {}", r.0)))?;
        self.grid.interp_radial(v, rho)
    }

    /// h on a D1 boundary ray or a real ray.
    pub fn h_at(&self, r: RayId, rho: f64) -> Result<C64> {
        if rho == 0.0 {
            return self.h0.ok_or_else(|| missing("h(0)"));
        }
        self.interp(r, |t| t.h.as_ref(), rho)
    }

    /// r on a real ray.
    pub fn r_at(&self, r: RayId, rho: f64) -> Result<C64> {
        if rho == 0.0 {
            return Ok(re(0.0));
        }
        self.interp(r, |t| t.r.as_ref(), rho)
    }

    /// conj(b(conj k)) / a(k) on a real ray, the reflection coefficient of
    /// the x-part alone.
    pub fn rx_at(&self, r: RayId, rho: f64) -> Result<C64> {
        let (a, b) = if rho == 0.0 {
            (self.origin.a.ok_or_else(|| missing("a(0)"))?, self.origin.b.ok_or_else(|| missing("b(0)"))?)
        } else {
            (self.interp(r, |t| t.a.as_ref(), rho)?, self.interp(r, |t| t.b.as_ref(), rho)?)
        };
        Ok(b.conj() / a)
    }

    /// Large-k coefficients rho_1..rho_4 of conj(b(conj k)) / a(k).
    pub fn rx_series(&self) -> Result<Vec<C64>> {
        let co = &self.coeffs;
        let a = ser(re(1.0), co.a.as_ref().ok_or_else(|| missing("a_j"))?);
        let b = ser(re(0.0), co.b.as_ref().ok_or_else(|| missing("b_j"))?);
        Ok(ser_mul(&conj_all(&b), &ser_inv(&a))[1..].to_vec())
    }

    /// (k, a, b, A, B) on the D1 boundary nodes.
    pub fn d1_boundary_values(&self) -> Result<Vec<(C64, C64, C64, C64, C64)>> {
        let mut out = Vec::new();
        for r in [RayId(4), RayId(5)] {
            let t = self.ray(r);
            let (a, b) = (t.a.as_ref().ok_or_else(|| missing("a"))?, t.b.as_ref().ok_or_else(|| missing("b"))?);
            let (aa, bb) =
                (t.big_a.as_ref().ok_or_else(|| missing("A"))?, t.big_b.as_ref().ok_or_else(|| missing("B"))?);
            for (i, k) in self.ray_k(r).into_iter().enumerate() {
                out.push((k, a[i], b[i], aa[i], bb[i]));
            }
        }
        Ok(out)
    }
}

fn ab_origin(ip: &InitialProfile, tol: f64) -> Result<(C64, C64)> {
    let s = solve_x_col2(ip, re(0.0), tol)?.first();
    Ok((s[1], s[0]))
}

/// a, b on the Im k <= 0 rays, their coefficients and the unitarity check.
pub fn tabulate_x(ip: &InitialProfile, cfg: &SpectralConfig) -> Result<SpectralData> {
    let grid = ContourGrid::build(&cfg.grid)?;
    let mut sd = SpectralData::empty(ip.lambda, grid);
    let co = x_asym_coeffs(ip, N_COEFF)?;
    let series = gate_series_x(ip, &co, cfg.policy())?;
    let lam = ip.lambda.f();
    let mut worst: f64 = 0.0;
    for r in LOWER_RAYS {
        let vals = spectral_ab(ip, &sd.ray_k(r), cfg.policy(), series.then_some(&co))?;
        if r.is_real() {
            for v in &vals {
                worst = worst.max((v.a.norm_sqr() - lam * v.b.norm_sqr() - 1.0).abs());
            }
        }
        let t = &mut sd.rays[r.0 as usize];
        t.a = Some(vals.iter().map(|v| v.a).collect());
        t.b = Some(vals.iter().map(|v| v.b).collect());
    }
    let (a0, b0) = ab_origin(ip, cfg.tol)?;
    sd.origin.a = Some(a0);
    sd.origin.b = Some(b0);
    let ab = co.ab_coeffs();
    sd.coeffs.a = Some(ab.iter().take(N_COEFF).map(|p| p.0).collect());
    sd.coeffs.b = Some(ab.iter().take(N_COEFF).map(|p| p.1).collect());
    sd.diagnostics.max_unitarity_residual_x = Some(worst);
    sd.diagnostics.series_used_x = Some(series);
    Ok(sd)
}

/// A, B on all six rays, their coefficients and the unitarity check.
pub fn tabulate_t(bp: &BoundaryProfile, cfg: &SpectralConfig) -> Result<SpectralData> {
    let grid = ContourGrid::build(&cfg.grid)?;
    let mut sd = SpectralData::empty(bp.lambda, grid);
    let co = t_asym_coeffs(bp, N_COEFF)?;
    let series = gate_series_t(bp, &co, cfg.policy())?;
    for r in RayId::ALL {
        let vals = spectral_big_ab(bp, &sd.ray_k(r), cfg.policy(), series.then_some(&co))?;
        let t = &mut sd.rays[r.0 as usize];
        t.big_a = Some(vals.iter().map(|v| v.a).collect());
        t.big_b = Some(vals.iter().map(|v| v.b).collect());
    }
    let lam = bp.lambda.f();
    let mut worst: f64 = 0.0;
    for r in RayId::ALL {
        let (t, tc) = (sd.ray(r), sd.ray(r.conj()));
        let (aa, bb) = (t.big_a.as_ref().unwrap(), t.big_b.as_ref().unwrap());
        let (ac, bc) = (tc.big_a.as_ref().unwrap(), tc.big_b.as_ref().unwrap());
        for i in 0..aa.len() {
            let e = aa[i] * ac[i].conj() - lam * bb[i] * bc[i].conj() - 1.0;
            worst = worst.max(e.norm());
        }
    }
    let s = solve_t_col2(bp, re(0.0), cfg.tol)?.first();
    sd.origin.big_a = Some(s[1]);
    sd.origin.big_b = Some(s[0]);
    let ab = co.ab_coeffs();
    sd.coeffs.big_a = Some(ab.iter().take(N_COEFF).map(|p| p.0).collect());
    sd.coeffs.big_b = Some(ab.iter().take(N_COEFF).map(|p| p.1).collect());
    sd.diagnostics.max_unitarity_residual_t = Some(worst);
    sd.diagnostics.series_used_t = Some(series);
    Ok(sd)
}

fn check_nonzero(v: C64, what: &str, k: C64) -> Result<()> {
    if !(v.norm() > 1e-12) {
        return Err(Error::ZeroDenominator { what: what.into(), k: kstr(k) });
    }
    Ok(())
}

/// Fill c, d, h on the Im k <= 0 rays, r on the real rays, h(0), and the
/// series coefficients of h.
pub fn derive_cdhr(mut sd: SpectralData) -> Result<SpectralData> {
    let lam = sd.lambda.f();
    let mut gap: f64 = 0.0;
    for r in LOWER_RAYS {
        let ks = sd.ray_k(r);
        let (t, tc) = (sd.ray(r), sd.ray(r.conj()));
        let a = t.a.clone().ok_or_else(|| missing("a"))?;
        let b = t.b.clone().ok_or_else(|| missing("b"))?;
        let aa = t.big_a.clone().ok_or_else(|| missing("A"))?;
        let bb = t.big_b.clone().ok_or_else(|| missing("B"))?;
        let ac = conj_all(tc.big_a.as_ref().ok_or_else(|| missing("A"))?);
        let bc = conj_all(tc.big_b.as_ref().ok_or_else(|| missing("B"))?);
        let n = ks.len();
        let (mut cv, mut dv, mut hv) = (vec![re(0.0); n], vec![re(0.0); n], vec![re(0.0); n]);
        for i in 0..n {
            check_nonzero(a[i], "a", ks[i])?;
            cv[i] = aa[i] * b[i] - bb[i] * a[i];
            dv[i] = a[i] * ac[i] - lam * b[i] * bc[i];
            check_nonzero(dv[i], "d", ks[i])?;
            hv[i] = -bc[i] / (a[i] * dv[i]);
        }
        let t = &mut sd.rays[r.0 as usize];
        if r.is_real() {
            // k real: conj(c(conj k)) = conj(c(k)), conj(b(conj k)) = conj(b(k))
            let rv: Vec<C64> = (0..n).map(|i| cv[i].conj() / dv[i]).collect();
            let ra: Vec<C64> = (0..n).map(|i| b[i].conj() / a[i] + hv[i]).collect();
            for i in 0..n {
                gap = gap.max((rv[i] - ra[i]).norm());
            }
            t.r = Some(rv);
            t.r_alt = Some(ra);
        }
        t.c = Some(cv);
        t.d = Some(dv);
        t.h = Some(hv);
    }
    let o = &sd.origin;
    let (a0, b0) = (o.a.ok_or_else(|| missing("a(0)"))?, o.b.ok_or_else(|| missing("b(0)"))?);
    let (aa0, bb0) = (o.big_a.ok_or_else(|| missing("A(0)"))?, o.big_b.ok_or_else(|| missing("B(0)"))?);
    check_nonzero(a0, "a", re(0.0))?;
    let d0 = a0 * aa0.conj() - lam * b0 * bb0.conj();
    check_nonzero(d0, "d", re(0.0))?;
    let h0 = -bb0.conj() / (a0 * d0);
    sd.h0 = Some(h0);
    sd.diagnostics.h0_gap = Some((h0 + b0.conj() / a0).norm());
    sd.diagnostics.r_formula_gap = Some(gap);
    sd.diagnostics.global_relation_sup = Some(global_relation_residual(&sd.d1_boundary_values()?).sup);
    sd.coeffs.h = Some(h_series(&sd)?);
    Ok(sd)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GrResidual {
    pub k: Vec<C64>,
    pub residual: Vec<f64>,
    pub sup: f64,
}

/// |A b - B a| per node; no thresholding.
pub fn global_relation_residual(vals: &[(C64, C64, C64, C64, C64)]) -> GrResidual {
    let residual: Vec<f64> = vals.iter().map(|(_, a, b, aa, bb)| (aa * b - bb * a).norm()).collect();
    GrResidual {
        k: vals.iter().map(|v| v.0).collect(),
        sup: residual.iter().fold(0.0, |m, v| m.max(*v)),
        residual,
    }
}

/// a, b, A, B computed directly at arbitrary points of the closed D1.
pub fn values_in_d1(
    ip: &InitialProfile,
    bp: &BoundaryProfile,
    ks: &[C64],
    tol: f64,
) -> Result<Vec<(C64, C64, C64, C64, C64)>> {
    ks.par_iter()
        .map(|&k| {
            if !matches!(classify(k), Region::D1 | Region::Origin | Region::Ray(RayId(4)) | Region::Ray(RayId(5))) {
                return Err(Error::WrongRegion(kstr(k)));
            }
            let x = solve_x_col2(ip, k, tol)?.first();
            let t = solve_t_col2(bp, k, tol)?.first();
            Ok((k, x[1], x[0], t[1], t[0]))
        })
        .collect()
}

// Power series in 1/k: s[0] + s[1]/k + ... truncated at N_COEFF.

fn ser(lead: C64, tail: &[C64]) -> Vec<C64> {
    let mut s = vec![lead];
    s.extend(tail.iter().take(N_COEFF).copied());
    s.resize(N_COEFF + 1, re(0.0));
    s
}

fn ser_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    (0..=N_COEFF).map(|n| (0..=n).map(|i| a[i] * b[n - i]).sum()).collect()
}

fn ser_inv(a: &[C64]) -> Vec<C64> {
    let mut out = vec![a[0].inv()];
    for n in 1..=N_COEFF {
        let s: C64 = (1..=n).map(|i| a[i] * out[n - i]).sum();
        out.push(-s / a[0]);
    }
    out
}

/// h_1..h_4 by formal division of -conj(B(conj k)) by a d.
fn h_series(sd: &SpectralData) -> Result<Vec<C64>> {
    let co = &sd.coeffs;
    let a = ser(re(1.0), co.a.as_ref().ok_or_else(|| missing("a_j"))?);
    let b = ser(re(0.0), co.b.as_ref().ok_or_else(|| missing("b_j"))?);
    let aa = ser(re(1.0), co.big_a.as_ref().ok_or_else(|| missing("A_j"))?);
    let bb = ser(re(0.0), co.big_b.as_ref().ok_or_else(|| missing("B_j"))?);
    let (ac, bc) = (conj_all(&aa), conj_all(&bb));
    let lam = sd.lambda.f();
    let d: Vec<C64> = ser_mul(&a, &ac).iter().zip(ser_mul(&b, &bc)).map(|(x, y)| x - lam * y).collect();
    let num: Vec<C64> = bc.iter().map(|z| -z).collect();
    let h = ser_mul(&num, &ser_inv(&ser_mul(&a, &d)));
    Ok(h[1..].to_vec())
}

/// Radii and rays used for the independent fit of the h coefficients.
pub fn h_fit_nodes(r_lo: f64, r_hi: f64, per_ray: usize) -> Vec<C64> {
    let mut ks = Vec::new();
    for r in LOWER_RAYS {
        for i in 0..per_ray {
            let s = i as f64 / (per_ray - 1).max(1) as f64;
            ks.push(r.dir() * (r_lo * (r_hi / r_lo).powf(s)));
        }
    }
    ks
}

/// h computed from the ODE solutions at the given D2-closure points.
pub fn h_samples(ip: &InitialProfile, bp: &BoundaryProfile, ks: &[C64], tol: f64) -> Result<Vec<(C64, C64)>> {
    let lam = ip.lambda.f();
    ks.par_iter()
        .map(|&k| {
            if !matches!(classify(k), Region::D2 | Region::Ray(RayId(0 | 3 | 4 | 5))) {
                return Err(Error::WrongRegion(kstr(k)));
            }
            let x = solve_x_col2(ip, k, tol)?.first();
            let tc = solve_t_col2(bp, k.conj(), tol)?.first();
            let (a, b) = (x[1], x[0]);
            let (ac, bc) = (tc[1].conj(), tc[0].conj());
            check_nonzero(a, "a", k)?;
            let d = a * ac - lam * b * bc;
            check_nonzero(d, "d", k)?;
            Ok((k, -bc / (a * d)))
        })
        .collect()
}

/// Number of terms in the least-squares model behind the fitted h_j.
const FIT_TERMS: usize = N_COEFF + 4;

/// Least-squares fit of h(k) ~ sum_j h_j / k^j to samples; returns h_1..h_4.
pub fn fit_h_coeffs(samples: &[(C64, C64)]) -> Result<Vec<C64>> {
    if samples.len() < FIT_TERMS {
        return Err(Error::BadParams("too few samples for the h fit".into()));
    }
    let kmin = samples.iter().map(|s| s.0.norm()).fold(f64::INFINITY, f64::min);
    let mut a = Vec::with_capacity(samples.len() * FIT_TERMS);
    for (k, _) in samples {
        let w = kmin / k;
        let mut p = re(1.0);
        for _ in 0..FIT_TERMS {
            p *= w;
            a.push(p);
        }
    }
    let y = lstsq(a, samples.len(), FIT_TERMS, samples.iter().map(|s| s.1).collect())?;
    Ok((0..N_COEFF).map(|j| y[j] * kmin.powi(j as i32 + 1)).collect())
}

/// Cross-check the series h_j against an independent fit; stores the fit.
pub fn expand_h_coeffs(sd: &mut SpectralData, samples: &[(C64, C64)], tol: f64) -> Result<Vec<C64>> {
    let series = sd.coeffs.h.clone().map(Ok).unwrap_or_else(|| h_series(sd))?;
    let fit = fit_h_coeffs(samples)?;
    sd.coeffs.h_fit = Some(fit.clone());
    let worst = series.iter().zip(&fit).map(|(s, f)| (s - f).norm()).fold(0.0, f64::max);
    if worst > 10.0 * tol {
        return Err(Error::FitDisagreement(format!("max |h_j series - h_j fit| = {worst:.3e}")));
    }
    sd.coeffs.h = Some(series.clone());
    Ok(series)
}

/// Rational function with poles of order three at p = rho e^{-i pi/6} and
/// -conj(p) (both in D2). In z = ik it reads
/// N(z) / (-(z^2 - rho z + rho^2))^3 with real numerator coefficients,
/// which makes h_a(k) = conj(h_a(-conj k)) hold identically.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RationalRegularizer {
    pub rho: f64,
    pub poles: [C64; 2],
    /// Numerator coefficients of z^0..z^5; z^1 is fixed to zero.
    pub numer: [f64; 6],
    /// Largest residual of the five constraints after the solve.
    pub constraint_residual: f64,
    /// Size of the parts of h0, h_j discarded by enforcing the symmetry.
    pub symmetry_defect: f64,
}

impl RationalRegularizer {
    pub fn eval(&self, k: C64) -> C64 {
        let z = I_ * k;
        let q = -(z * z - self.rho * z + self.rho * self.rho);
        let mut num = re(0.0);
        for c in self.numer.iter().rev() {
            num = num * z + c;
        }
        num / (q * q * q)
    }

    /// Large-k coefficients h_a,1..h_a,4.
    pub fn coeffs(&self) -> Vec<C64> {
        let e = inv_cube_series(self.rho);
        (1..=N_COEFF)
            .map(|n| {
                let w: f64 = (1..=n).map(|m| -self.numer[6 - m] * e[n - m]).sum();
                // w^n = (-i/k)^n
                re(w) * I_.powi(-(n as i32))
            })
            .collect()
    }
}

const I_: C64 = C64 { re: 0.0, im: 1.0 };

/// Series of (1 - rho w + rho^2 w^2)^-3 in w, first N_COEFF+1 terms.
fn inv_cube_series(rho: f64) -> Vec<f64> {
    let n = N_COEFF + 1;
    let p = [1.0, -rho, rho * rho];
    let mut inv = vec![0.0; n];
    inv[0] = 1.0;
    for k in 1..n {
        inv[k] = -(1..=k.min(2)).map(|m| p[m] * inv[k - m]).sum::<f64>();
    }
    let conv = |a: &[f64], b: &[f64]| -> Vec<f64> { (0..n).map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum()).collect() };
    conv(&conv(&inv, &inv), &inv)
}

fn try_build_ha(rho: f64, h0: f64, hw: &[f64]) -> Result<RationalRegularizer> {
    // unknowns c0, c2, c3, c4, c5; row 0: h_a(0) = c0 / (-rho^6)
    let e = inv_cube_series(rho);
    let col = |j: usize| [0usize, 2, 3, 4, 5].iter().position(|&c| c == j);
    let mut a = vec![re(0.0); 25];
    let mut rhs = vec![re(0.0); 5];
    a[0] = re(-rho.powi(-6));
    rhs[0] = re(h0);
    for n in 1..=N_COEFF {
        for m in 1..=n {
            if let Some(cix) = col(6 - m) {
                a[n * 5 + cix] += re(-e[n - m]);
            }
        }
        rhs[n] = re(hw[n - 1]);
    }
    let mut x = rhs.clone();
    solve_dense(a.clone(), 5, &mut x).map_err(|_| Error::SingularConstraintSystem)?;
    let resid = (0..5)
        .map(|i| ((0..5).map(|j| a[i * 5 + j] * x[j]).sum::<C64>() - rhs[i]).norm())
        .fold(0.0, f64::max);
    if !x.iter().all(|v| v.is_finite()) || resid > 1e-8 * (1.0 + rhs.iter().map(|v| v.norm()).fold(0.0, f64::max)) {
        return Err(Error::SingularConstraintSystem);
    }
    let numer = [x[0].re, 0.0, x[1].re, x[2].re, x[3].re, x[4].re];
    let p = C64::from_polar(rho, -PI / 6.0);
    Ok(RationalRegularizer { rho, poles: [p, -p.conj()], numer, constraint_residual: resid, symmetry_defect: 0.0 })
}

/// Build h_a with h_a(0) = h0 and large-k coefficients h_1..h_4. If the
/// constraint system is singular at `rho` it is retried once at 2 rho.
pub fn build_ha(h0: C64, hj: &[C64], rho: f64) -> Result<RationalRegularizer> {
    if hj.len() < N_COEFF || !(rho > 0.0) || !h0.is_finite() || hj.iter().any(|v| !v.is_finite()) {
        return Err(Error::BadParams("build_ha needs finite h0, h_1..h_4 and rho > 0".into()));
    }
    // with w = 1/z = -i/k the k^-n coefficient h_n becomes h_n i^n, real under the symmetry
    let hw: Vec<C64> = (0..N_COEFF).map(|j| hj[j] * I_.powi(j as i32 + 1)).collect();
    let defect = hw.iter().map(|v| v.im.abs()).fold(h0.im.abs(), f64::max);
    let hr: Vec<f64> = hw.iter().map(|v| v.re).collect();
    let mut ha = try_build_ha(rho, h0.re, &hr).or_else(|_| try_build_ha(2.0 * rho, h0.re, &hr))?;
    ha.symmetry_defect = defect;
    Ok(ha)
}

/// Region scanned by `zero_scan`, truncated at radius r_max.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ScanRegion {
    /// Closed lower half plane.
    LowerHalf { r_max: f64 },
    /// Closure of D2.
    D2 { r_max: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ZeroReport {
    pub zero_count: i64,
    /// Cells with nonzero winding: (r_lo, r_hi, theta_lo, theta_hi, winding).
    pub cells: Vec<(f64, f64, f64, f64, i64)>,
    pub min_abs: f64,
    pub argmin: C64,
    pub evaluations: usize,
}

struct Scanner<'a> {
    f: &'a (dyn Fn(C64) -> Result<C64> + Sync),
    min: f64,
    argmin: C64,
    evals: usize,
}

impl Scanner<'_> {
    fn eval(&mut self, k: C64) -> Result<C64> {
        let v = (self.f)(k)?;
        self.evals += 1;
        if v.norm() < self.min {
            self.min = v.norm();
            self.argmin = k;
        }
        Ok(v)
    }

    /// Change of arg f along the path s -> path(s), s in [0, 1], refining
    /// until consecutive samples differ by less than pi/4 in phase.
    fn darg(&mut self, path: &dyn Fn(f64) -> C64, n0: usize) -> Result<f64> {
        let mut total = 0.0;
        let mut prev = self.eval(path(0.0))?;
        for i in 0..n0 {
            let (s0, s1) = (i as f64 / n0 as f64, (i + 1) as f64 / n0 as f64);
            let (d, last) = self.segment(path, s0, s1, prev, 0)?;
            total += d;
            prev = last;
        }
        Ok(total)
    }

    fn segment(&mut self, path: &dyn Fn(f64) -> C64, s0: f64, s1: f64, f0: C64, depth: usize) -> Result<(f64, C64)> {
        let f1 = self.eval(path(s1))?;
        let d = (f1 / f0).arg();
        if d.abs() < PI / 4.0 || depth >= 14 {
            return Ok((d, f1));
        }
        let sm = 0.5 * (s0 + s1);
        let (d1, fm) = self.segment(path, s0, sm, f0, depth + 1)?;
        let (d2, fe) = self.segment(path, sm, s1, fm, depth + 1)?;
        Ok((d1 + d2, fe))
    }
}

/// Argument-principle zero count of an analytic f over polar cells of the
/// region, with the smallest |f| seen on the cell boundaries.
pub fn zero_scan(
    f: &(dyn Fn(C64) -> Result<C64> + Sync),
    region: ScanRegion,
    n_r: usize,
    n_theta: usize,
) -> Result<ZeroReport> {
    let (r_max, sectors): (f64, Vec<(f64, f64)>) = match region {
        ScanRegion::LowerHalf { r_max } => (r_max, vec![(-PI, 0.0)]),
        ScanRegion::D2 { r_max } => (r_max, vec![(-PI, -2.0 * PI / 3.0), (-PI / 3.0, 0.0)]),
    };
    if !(r_max > 0.0) || n_r == 0 || n_theta == 0 {
        return Err(Error::BadParams("zero_scan needs r_max > 0 and at least one cell".into()));
    }
    let mut sc = Scanner { f, min: f64::INFINITY, argmin: re(0.0), evals: 0 };
    let mut cells = Vec::new();
    let mut count = 0.0;
    for (t0, t1) in sectors {
        for i in 0..n_r {
            let (r0, r1) = (r_max * i as f64 / n_r as f64, r_max * (i + 1) as f64 / n_r as f64);
            for j in 0..n_theta {
                let th0 = t0 + (t1 - t0) * j as f64 / n_theta as f64;
                let th1 = t0 + (t1 - t0) * (j + 1) as f64 / n_theta as f64;
                let rad = |th: f64| move |s: f64| C64::from_polar(r0 + (r1 - r0) * s, th);
                let arc = |r: f64| move |s: f64| C64::from_polar(r, th0 + (th1 - th0) * s);
                let mut w = sc.darg(&rad(th0), 8)? + sc.darg(&arc(r1), 8)? - sc.darg(&rad(th1), 8)?;
                if r0 > 0.0 {
                    w -= sc.darg(&arc(r0), 8)?;
                }
                let wind = w / (2.0 * PI);
                count += wind;
                let wi = wind.round() as i64;
                if wi != 0 {
                    cells.push((r0, r1, th0, th1, wi));
                }
            }
        }
    }
    Ok(ZeroReport { zero_count: count.round() as i64, cells, min_abs: sc.min, argmin: sc.argmin, evaluations: sc.evals })
}

/// Closure evaluating a(k) by the ODE, for `zero_scan` over Im k <= 0.
pub fn a_function(ip: &InitialProfile, tol: f64) -> impl Fn(C64) -> Result<C64> + Sync + '_ {
    move |k: C64| Ok(solve_x_col2(ip, c(k.re, k.im.min(0.0)), tol)?.first()[1])
}

/// Closure evaluating d(k) = a conj(A(conj k)) - lambda b conj(B(conj k)) on D2.
pub fn d_function<'a>(
    ip: &'a InitialProfile,
    bp: &'a BoundaryProfile,
    tol: f64,
) -> impl Fn(C64) -> Result<C64> + Sync + 'a {
    let lam = ip.lambda.f();
    move |k: C64| {
        let x = solve_x_col2(ip, k, tol)?.first();
        let t = solve_t_col2(bp, k.conj(), tol)?.first();
        Ok(x[1] * t[1].conj() - lam * x[0] * t[0].conj())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::ProfileSpec;

    fn small_cfg() -> SpectralConfig {
        SpectralConfig {
            grid: GridParams { panels_per_ray: 8, nodes_per_panel: 8, r_max: 30.0, grading: 1.8 },
            ..Default::default()
        }
    }

    fn sech(order: f64) -> ProfileSpec {
        ProfileSpec::preset("sech", &[("amp", 1.0), ("rate", 1.0), ("shift", 1.0), ("order", order)])
    }

    fn soliton() -> (InitialProfile, BoundaryProfile) {
        let l = Lambda::Focusing;
        (
            InitialProfile::new(l, &sech(0.0), 40.0).unwrap(),
            BoundaryProfile::new(l, [&sech(0.0), &sech(1.0), &sech(2.0)], 40.0).unwrap(),
        )
    }

    /// Scattering data of sech(x + 1) on the half line, in closed form.
    fn soliton_ab(k: C64) -> (C64, C64) {
        let (th, se) = (1f64.tanh(), 1.0 / 1f64.cosh());
        let den = 2.0 * I_ * k + 1.0;
        ((2.0 * I_ * k + th) / den, -se / den)
    }

    #[test]
    fn zero_data_chain() {
        let l = Lambda::Defocusing;
        let cfg = small_cfg();
        let x = tabulate_x(&InitialProfile::zero(l, 5.0), &cfg).unwrap();
        let t = tabulate_t(&BoundaryProfile::zero(l, 5.0), &cfg).unwrap();
        let sd = derive_cdhr(SpectralData::merge(x, t).unwrap()).unwrap();
        for r in LOWER_RAYS {
            let tb = sd.ray(r);
            assert!(tb.c.as_ref().unwrap().iter().all(|v| v.norm() == 0.0));
            assert!(tb.d.as_ref().unwrap().iter().all(|v| (v - 1.0).norm() == 0.0));
            assert!(tb.h.as_ref().unwrap().iter().all(|v| v.norm() == 0.0));
        }
        assert!(sd.ray(RayId(0)).r.as_ref().unwrap().iter().all(|v| v.norm() == 0.0));
        assert!(sd.coeffs.h.as_ref().unwrap().iter().all(|v| v.norm() == 0.0));
        assert_eq!(sd.h0, Some(re(0.0)));
        let ha = build_ha(re(0.0), &[re(0.0); 4], 1.0).unwrap();
        assert_eq!(ha.eval(c(0.3, -2.0)), re(0.0));
        let z = SpectralData::merge(
            tabulate_x(&InitialProfile::zero(l, 5.0), &cfg).unwrap(),
            tabulate_t(&BoundaryProfile::zero(Lambda::Focusing, 5.0), &cfg).unwrap(),
        );
        assert!(z.is_err());
    }

    #[test]
    fn soliton_tables_match_closed_form() {
        let (ip, bp) = soliton();
        let cfg = small_cfg();
        let sd = derive_cdhr(SpectralData::merge(tabulate_x(&ip, &cfg).unwrap(), tabulate_t(&bp, &cfg).unwrap()).unwrap())
            .unwrap();
        for r in LOWER_RAYS {
            let tb = sd.ray(r);
            for (i, k) in sd.ray_k(r).into_iter().enumerate() {
                let (a, b) = soliton_ab(k);
                assert!((tb.a.as_ref().unwrap()[i] - a).norm() < 1e-10, "a at {k}");
                assert!((tb.b.as_ref().unwrap()[i] - b).norm() < 1e-10, "b at {k}");
                // the boundary data is the same soliton seen at x = 0
                assert!((tb.big_a.as_ref().unwrap()[i] - a).norm() < 1e-10, "A at {k}");
                assert!((tb.d.as_ref().unwrap()[i] - 1.0).norm() < 1e-10, "d at {k}");
                // d = 1 and B = b, so h = -conj(b(conj k)) / a
                let hb = -soliton_ab(k.conj()).1.conj() / a;
                assert!((tb.h.as_ref().unwrap()[i] - hb).norm() < 1e-10, "h at {k}");
            }
        }
        let d = &sd.diagnostics;
        assert!(d.r_formula_gap.unwrap() < 1e-9);
        assert!(d.global_relation_sup.unwrap() < 1e-10);
        assert!(d.h0_gap.unwrap() < 1e-10);
        assert!(sd.ray(RayId(0)).r.as_ref().unwrap().iter().all(|v| v.norm() < 1e-10));
        assert!(d.max_unitarity_residual_x.unwrap() < 1e-10 && d.max_unitarity_residual_t.unwrap() < 1e-10);
        // symmetries h(k) = conj(h(-conj k)) on mirrored nodes
        let (h4, h5) = (sd.ray(RayId(4)).h.as_ref().unwrap(), sd.ray(RayId(5)).h.as_ref().unwrap());
        for i in 0..h4.len() {
            assert!((h4[i] - h5[i].conj()).norm() < 1e-10);
        }
        let json = serde_json::to_string(&sd).unwrap();
        let back: SpectralData = serde_json::from_str(&json).unwrap();
        assert_eq!(back, sd);
    }

    #[test]
    fn h_coefficients_series_vs_fit() {
        let (ip, bp) = soliton();
        let cfg = small_cfg();
        let mut sd =
            derive_cdhr(SpectralData::merge(tabulate_x(&ip, &cfg).unwrap(), tabulate_t(&bp, &cfg).unwrap()).unwrap())
                .unwrap();
        // closed form: h = sech1 (1 + 2ik) / ((1 - 2ik)(2ik + tanh1)), coefficients by a contour mean
        let (th, se) = (1f64.tanh(), 1.0 / 1f64.cosh());
        let h = |k: C64| se * (1.0 + 2.0 * I_ * k) / ((1.0 - 2.0 * I_ * k) * (2.0 * I_ * k + th));
        let m = 4096;
        let exact: Vec<C64> = (1..=4)
            .map(|j| {
                (0..m)
                    .map(|n| {
                        let z = C64::from_polar(50.0, 2.0 * PI * n as f64 / m as f64);
                        h(z) * z.powi(j)
                    })
                    .sum::<C64>()
                    / m as f64
            })
            .collect();
        let series = sd.coeffs.h.clone().unwrap();
        for j in 0..4 {
            assert!((series[j] - exact[j]).norm() < 1e-9, "h_{} {} vs {}", j + 1, series[j], exact[j]);
        }
        let samples = h_samples(&ip, &bp, &h_fit_nodes(8.0, 48.0, 16), 1e-13).unwrap();
        let got = expand_h_coeffs(&mut sd, &samples, 1e-7).unwrap();
        let fit = sd.coeffs.h_fit.clone().unwrap();
        for j in 0..4 {
            assert!((fit[j] - exact[j]).norm() < 1e-6, "fit h_{}: {} vs {}", j + 1, fit[j], exact[j]);
        }
        assert_eq!(got, series);
        // leading-order division on synthetic data
        let mut syn = SpectralData::empty(Lambda::Defocusing, sd.grid.clone());
        let b1 = c(0.3, -0.7);
        syn.coeffs = Coefficients {
            a: Some(vec![re(0.0); 4]),
            b: Some(vec![re(0.0); 4]),
            big_a: Some(vec![re(0.0); 4]),
            big_b: Some(vec![b1, re(0.0), re(0.0), re(0.0)]),
            ..Default::default()
        };
        assert_eq!(h_series(&syn).unwrap()[0], -b1.conj());
    }

    #[test]
    fn regularizer_constraints_and_decay() {
        let (th, se) = (1f64.tanh(), 1.0 / 1f64.cosh());
        let h = |k: C64| se * (1.0 + 2.0 * I_ * k) / ((1.0 - 2.0 * I_ * k) * (2.0 * I_ * k + th));
        let hj = [c(0.0, 0.32402713683194273), re(0.20063854994079922), c(0.0, -0.08561099486882995), re(-0.04840636751941929)];
        for rho in [0.5, 1.0] {
            let ha = build_ha(h(re(0.0)), &hj, rho).unwrap();
            assert!(ha.constraint_residual < 1e-12);
            assert!((ha.eval(re(0.0)) - h(re(0.0))).norm() < 1e-12);
            for (x, y) in ha.coeffs().iter().zip(&hj) {
                assert!((x - y).norm() < 1e-12, "{x} vs {y}");
            }
            for p in ha.poles {
                assert_eq!(classify(p), Region::D2);
            }
            for k in [c(0.7, -0.3), c(-2.0, -5.0), c(3.0, 1.0)] {
                assert!((ha.eval(k) - ha.eval(-k.conj()).conj()).norm() < 1e-13);
            }
            // slope of |h - h_a| along the D1 boundary
            let e: Vec<f64> = [16.0, 32.0, 64.0]
                .iter()
                .map(|r| {
                    let k = C64::from_polar(*r, -PI / 3.0);
                    (h(k) - ha.eval(k)).norm()
                })
                .collect();
            let slope = (e[2] / e[0]).ln() / 4f64.ln();
            assert!(slope < -4.9, "rho {rho}: slope {slope}");
        }
        assert!(build_ha(re(f64::NAN), &hj, 1.0).is_err());
    }

    #[test]
    fn zero_scan_examples() {
        let one = |_: C64| Ok(re(1.0));
        assert_eq!(zero_scan(&one, ScanRegion::LowerHalf { r_max: 5.0 }, 2, 2).unwrap().zero_count, 0);
        let k0 = c(1.3, -0.4);
        let lin = move |k: C64| Ok(k - k0);
        let rep = zero_scan(&lin, ScanRegion::LowerHalf { r_max: 5.0 }, 4, 6).unwrap();
        assert_eq!(rep.zero_count, 1);
        assert_eq!(rep.cells.len(), 1);
        let rep = zero_scan(&lin, ScanRegion::D2 { r_max: 5.0 }, 4, 3).unwrap();
        assert_eq!(rep.zero_count, 1);
        let k1 = c(0.0, -1.0);
        let in_d1 = move |k: C64| Ok((k - k1) * (k - k0));
        assert_eq!(zero_scan(&in_d1, ScanRegion::D2 { r_max: 5.0 }, 4, 3).unwrap().zero_count, 1);
        assert_eq!(zero_scan(&in_d1, ScanRegion::LowerHalf { r_max: 5.0 }, 4, 3).unwrap().zero_count, 2);
    }

    #[test]
    fn defocusing_gaussian_a_has_no_zeros() {
        let spec = ProfileSpec::preset("gaussian", &[("alpha", 0.8), ("beta", 1.0), ("x0", 1.0)]);
        let ip = InitialProfile::new(Lambda::Defocusing, &spec, 12.0).unwrap();
        let f = a_function(&ip, 1e-10);
        let rep = zero_scan(&f, ScanRegion::LowerHalf { r_max: 6.0 }, 3, 4).unwrap();
        assert_eq!(rep.zero_count, 0);
        assert!(rep.min_abs > 0.1);
    }
}
