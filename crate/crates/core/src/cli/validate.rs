//! Validation suite: one check per acceptance criterion, grouped into
//! suites. Failures are report entries, never errors.

use super::preset::Preset;
use super::{derive_data, solve_gate, RunConfig};
use crate::contour::{classify, ContourGrid, GridParams, RayId, Region};
use crate::core::mat2::{c, re, Mat2, C64};
use crate::core::profile::{BoundaryProfile, InitialProfile, ProfileSpec};
use crate::core::special::line_fit;
use crate::core::Lambda;
use crate::error::{Error, Result};
use crate::rhsolver::cauchy::{CauchyOp, Side};
use crate::rhsolver::recover::{recover_derivatives, x_only_rh, RhProblem};
use crate::rhsolver::solve::{RhOptions, SolverKind};
use crate::spectral::{
    build_ha, derive_cdhr, tabulate_t, tabulate_x, RationalRegularizer, SpectralConfig, SpectralData,
};
use crate::{tscatter, xscatter};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::Instant;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Check {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Check {
    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("[{tag}] {:>2} {:<28} {:>7.1}s  {}", self.id, self.name, self.seconds, self.detail)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub const NAMES: [&str; 12] = [
    "zero-data identity chain",
    "unitarity",
    "mirror symmetries",
    "ODE vs Picard",
    "asymptotic orders",
    "Plemelj and residues",
    "RH self-consistency",
    "initial-data recovery",
    "boundary recovery",
    "end-to-end field",
    "negative control",
    "regularization decay",
];

/// Wall-clock budget per criterion, seconds.
const BUDGET: [f64; 12] = [5.0, 30.0, 30.0, 60.0, 120.0, 60.0, 60.0, 300.0, 300.0, 1200.0, 120.0, 60.0];

pub fn suite_ids(name: &str) -> Result<Vec<u32>> {
    Ok(match name {
        "trivial" => vec![1, 6],
        "asymptotics" => vec![2, 3, 4, 5],
        "endtoend" => vec![7, 8, 9, 10, 11, 12],
        "all" | "acceptance" => (1..=12).collect(),
        _ => return Err(Error::Config(format!("unknown suite {name:?} (trivial, asymptotics, endtoend, all)"))),
    })
}

pub fn run_suite(name: &str) -> Result<Report> {
    let checks = suite_ids(name)?.into_iter().map(criterion).collect();
    Ok(Report { suite: name.into(), checks })
}

/// Run one criterion. Shared inputs (the soliton tables) are built before
/// the clock starts and their cost is reported in the detail.
pub fn criterion(id: u32) -> Check {
    let name = NAMES.get(id as usize - 1).copied().unwrap_or("?").to_string();
    let mut setup = String::new();
    if (7..=12).contains(&id) && id != 11 {
        let t0 = Instant::now();
        let fresh = SOLITON.get().is_none();
        if let Err(e) = soliton_case() {
            return Check { id, name, passed: false, detail: format!("soliton tables: {e}"), seconds: 0.0 };
        }
        if fresh {
            setup = format!(" [soliton tables {:.1}s]", t0.elapsed().as_secs_f64());
        }
    }
    let t0 = Instant::now();
    let res = match id {
        1 => c1_zero_chain(),
        2 => c2_unitarity(),
        3 => c3_symmetry(),
        4 => c4_picard(),
        5 => c5_slopes(),
        6 => c6_plemelj(),
        7 => c7_rh_consistency(),
        8 => c8_initial(),
        9 => c9_boundary(),
        10 => c10_field(),
        11 => c11_negative(),
        12 => c12_regularization(),
        _ => Err(Error::BadParams(format!("no criterion {id}"))),
    };
    let seconds = t0.elapsed().as_secs_f64();
    let (mut passed, mut detail) = match res {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(&b) = BUDGET.get(id as usize - 1) {
        if seconds > b {
            passed = false;
            detail.push_str(&format!("; over budget ({b} s)"));
        }
    }
    detail.push_str(&setup);
    Check { id, name, passed, detail, seconds }
}

type Outcome = Result<(bool, String)>;

fn sup(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn table_dev(t: &Option<Vec<C64>>, want: C64) -> f64 {
    t.as_ref().map_or(0.0, |v| sup(v.iter().map(|z| (z - want).norm())))
}

// ---------- 1 ----------

fn c1_zero_chain() -> Outcome {
    let cfg = SpectralConfig::default();
    let mut worst_tab: f64 = 0.0;
    let mut worst_rh: f64 = 0.0;
    for lam in [Lambda::Defocusing, Lambda::Focusing] {
        let ip = InitialProfile::zero(lam, 10.0);
        let bp = BoundaryProfile::zero(lam, 10.0);
        let sd = derive_cdhr(SpectralData::merge(tabulate_x(&ip, &cfg)?, tabulate_t(&bp, &cfg)?)?)?;
        for t in &sd.rays {
            for (f, w) in [(&t.a, 1.0), (&t.b, 0.0), (&t.big_a, 1.0), (&t.big_b, 0.0), (&t.h, 0.0), (&t.r, 0.0)] {
                worst_tab = worst_tab.max(table_dev(f, re(w)));
            }
        }
        let hj = sd.coeffs.h.clone().unwrap_or_default();
        let ha = build_ha(sd.h0.unwrap_or(re(0.0)), &hj, 1.0)?;
        let p = RhProblem::new(&sd, &ha, RhOptions::default());
        for (x, t) in [(0.0, 0.0), (0.7, 0.3), (2.0, 1.0)] {
            let sol = p.solve(x, t)?;
            let mu = sup(sol.density().iter().map(|m| m.norm_max()));
            let m = sup([c(0.4, 1.3), c(-1.0, -0.5)].iter().map(|&z| sol.m_at(z).map_or(f64::INFINITY, |m| (m - Mat2::identity()).norm_max())));
            let rec = recover_derivatives(&sol, lam);
            worst_rh = worst_rh.max(mu).max(m).max(rec.u.abs()).max(rec.u_x.abs()).max(rec.u_xx.abs());
        }
    }
    let ok = worst_tab <= 1e-12 && worst_rh <= 1e-12;
    Ok((ok, format!("tables dev {worst_tab:.1e}, mu/m/u dev {worst_rh:.1e} (tol 1e-12)")))
}

// ---------- 2, 3 ----------

struct GaussCase {
    sd: SpectralData,
}

fn gauss_profiles(lam: Lambda) -> Result<(InitialProfile, BoundaryProfile)> {
    let g = ProfileSpec::preset("gaussian", &[("alpha", 1.0), ("beta", 1.0), ("x0", 1.0)]);
    let e = ProfileSpec::preset("exponential", &[("alpha", 1.0), ("beta", 1.0)]);
    let z = ProfileSpec::zero();
    Ok((InitialProfile::new(lam, &g, 12.0)?, BoundaryProfile::new(lam, [&e, &z, &z], 40.0)?))
}

fn gauss_case(lam: Lambda) -> Result<&'static GaussCase> {
    static CASES: [OnceLock<std::result::Result<GaussCase, String>>; 2] = [OnceLock::new(), OnceLock::new()];
    let slot = &CASES[(lam == Lambda::Focusing) as usize];
    slot.get_or_init(|| {
        let build = || -> Result<GaussCase> {
            let (ip, bp) = gauss_profiles(lam)?;
            let cfg = SpectralConfig {
                grid: GridParams { panels_per_ray: 7, nodes_per_panel: 16, r_max: 60.0, grading: 1.8 },
                ..Default::default()
            };
            let sd = derive_cdhr(SpectralData::merge(tabulate_x(&ip, &cfg)?, tabulate_t(&bp, &cfg)?)?)?;
            Ok(GaussCase { sd })
        };
        build().map_err(|e| e.to_string())
    })
    .as_ref()
    .map_err(|e| Error::Numerical(e.clone()))
}

fn c2_unitarity() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for lam in [Lambda::Defocusing, Lambda::Focusing] {
        let sd = &gauss_case(lam)?.sd;
        let l = lam.f();
        let g = &sd.grid;
        let (mut wx, mut nx): (f64, usize) = (0.0, 0);
        for r in [RayId(0), RayId(3)] {
            let t = sd.ray(r);
            let (a, b) = (t.a.as_ref().ok_or(Error::Numerical("a missing".into()))?, t.b.as_ref().ok_or(Error::Numerical("b missing".into()))?);
            for j in 0..g.per_ray() {
                wx = wx.max((a[j].norm_sqr() - l * b[j].norm_sqr() - 1.0).abs());
                nx += 1;
            }
        }
        // A(k) conj(A(conj k)) - lambda B(k) conj(B(conj k)) = 1 on every ray
        let (mut wt, mut nt): (f64, usize) = (0.0, 0);
        for r in RayId::ALL {
            let (t, tc) = (sd.ray(r), sd.ray(r.conj()));
            let get = |t: &crate::spectral::RayTable| -> Result<(Vec<C64>, Vec<C64>)> {
                Ok((t.big_a.clone().ok_or(Error::Numerical("A missing".into()))?, t.big_b.clone().ok_or(Error::Numerical("B missing".into()))?))
            };
            let ((a, b), (ac, bc)) = (get(t)?, get(tc)?);
            for j in 0..g.per_ray() {
                wt = wt.max((a[j] * ac[j].conj() - l * b[j] * bc[j].conj() - 1.0).norm());
                nt += 1;
            }
        }
        ok &= wx <= 1e-10 && wt <= 1e-10 && nx >= 200 && nt >= 200;
        parts.push(format!("lambda {:+}: x {wx:.1e} on {nx}, t {wt:.1e} on {nt}", l as i32));
    }
    Ok((ok, parts.join("; ")))
}

fn c3_symmetry() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for lam in [Lambda::Defocusing, Lambda::Focusing] {
        let sd = &gauss_case(lam)?.sd;
        let g = &sd.grid;
        let mut w: [f64; 6] = [0.0; 6];
        // f(k) = conj(f(-conj k)): -conj maps ray j to its mirror at the same radius
        for r in RayId::ALL {
            let (t, tm) = (sd.ray(r), sd.ray(r.mirror()));
            let fields = [(&t.a, &tm.a), (&t.b, &tm.b), (&t.big_a, &tm.big_a), (&t.big_b, &tm.big_b), (&t.h, &tm.h), (&t.r, &tm.r)];
            for (n, (f, fm)) in fields.into_iter().enumerate() {
                if let (Some(f), Some(fm)) = (f, fm) {
                    for j in 0..g.per_ray() {
                        w[n] = w[n].max((f[j] - fm[j].conj()).norm());
                    }
                }
            }
        }
        ok &= w.iter().all(|&v| v <= 1e-10);
        parts.push(format!(
            "lambda {:+}: a {:.0e} b {:.0e} A {:.0e} B {:.0e} h {:.0e} r {:.0e}",
            lam.f() as i32, w[0], w[1], w[2], w[3], w[4], w[5]
        ));
    }
    Ok((ok, parts.join("; ")))
}

// ---------- 4 ----------

fn rel(a: &[C64], b: &[C64]) -> f64 {
    let d = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let n = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    d / n.max(1e-300)
}

fn c4_picard() -> Outcome {
    const TERMS: usize = 8;
    let tol = 1e-13;
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    let mut per = Vec::new();
    for lam in [Lambda::Defocusing, Lambda::Focusing] {
        let gs = ProfileSpec::preset("gaussian", &[("alpha", 0.3), ("beta", 1.0), ("x0", 1.0)]);
        let ip = InitialProfile::new(lam, &gs, 8.0)?;
        let es = ProfileSpec::preset("exponential", &[("alpha", 0.1), ("beta", 1.0)]);
        let z = ProfileSpec::zero();
        let bp = BoundaryProfile::new(lam, [&es, &z, &z], 12.0)?;
        let mut wx: f64 = 0.0;
        for k in [re(0.5), c(-1.0, -0.5), c(2.0, -0.3)] {
            let ode = xscatter::solve_x_col2(&ip, k, tol)?.first();
            let (o, _) = xscatter::picard_oracle_x(&ip, k, TERMS)?;
            wx = wx.max(rel(&ode, &o.values[0]));
            pairs += 1;
        }
        let mut wy: f64 = 0.0;
        for k in [re(0.3), re(-1.2), re(2.5)] {
            let y = xscatter::solve_y(&ip, k, tol)?;
            let (o, _) = xscatter::picard_oracle_y(&ip, k, TERMS)?;
            wy = wy.max(rel(&y.values.last().unwrap().e, &o.values.last().unwrap().e));
            pairs += 1;
        }
        let mut wt: f64 = 0.0;
        for k in [C64::from_polar(0.6, PI / 6.0), C64::from_polar(0.8, 0.5 * PI), C64::from_polar(0.5, -PI / 2.0 - 0.3)] {
            if !crate::contour::in_closed_plus(k) {
                continue;
            }
            let ode = tscatter::solve_t_col2(&bp, k, tol)?.first();
            let (o, _) = tscatter::picard_oracle_t(&bp, k, TERMS)?;
            wt = wt.max(rel(&ode, &o.values[0]));
            pairs += 1;
        }
        let mut wu: f64 = 0.0;
        for k in [re(0.7), C64::from_polar(0.8, -PI / 3.0), C64::from_polar(0.6, 2.0 * PI / 3.0)] {
            let u = tscatter::solve_u(&bp, k, tol)?;
            let (o, _) = tscatter::picard_oracle_u(&bp, k, TERMS)?;
            wu = wu.max(rel(&u.values.last().unwrap().e, &o.values.last().unwrap().e));
            pairs += 1;
        }
        worst = worst.max(wx).max(wy).max(wt).max(wu);
        per.push(format!("lambda {:+}: X {wx:.1e} Y {wy:.1e} T {wt:.1e} U {wu:.1e}", lam.f() as i32));
    }
    let ok = worst <= 1e-6 && pairs >= 10;
    Ok((ok, format!("{pairs} pairs, {}", per.join("; "))))
}

// ---------- 5 ----------

const KS: [f64; 5] = [20.0, 40.0, 80.0, 160.0, 320.0];

fn fit(errs: &[f64]) -> (f64, f64) {
    let xs: Vec<f64> = KS.iter().map(|k| k.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.max(1e-300).ln()).collect();
    let (s, _, r2) = line_fit(&xs, &ys);
    (s, r2)
}

fn c5_slopes() -> Outcome {
    use rayon::prelude::*;
    // 1e-13 is below the roundoff floor of the t-ODE at |k| = 320
    let tol = 1e-12;
    let lam = Lambda::Focusing;
    let z = ProfileSpec::zero();
    let ip = InitialProfile::new(lam, &ProfileSpec::preset("gaussian", &[("alpha", 3.0), ("beta", 16.0), ("x0", 1.0)]), 6.0)?;
    let xco = xscatter::x_asym_coeffs(&ip, 4)?;
    let gt = ProfileSpec::preset("gaussian", &[("alpha", 3.0), ("beta", 4.0), ("x0", 2.5)]);
    let bpt = BoundaryProfile::new(lam, [&gt, &z, &z], 6.0)?;
    let tco = tscatter::t_asym_coeffs(&bpt, 4)?;
    let gu = ProfileSpec::preset("gaussian", &[("alpha", 7.0), ("beta", 700.0), ("x0", 0.25)]);
    let bpu = BoundaryProfile::new(lam, [&gu, &z, &z], 0.6)?;
    let uco = tscatter::t_asym_coeffs(&bpu, 4)?;
    let err = |which: usize, rho: f64| -> Result<f64> {
        Ok(match which {
            0 => {
                let k = c(0.0, -rho);
                let v = xscatter::solve_x_col2(&ip, k, tol)?.first();
                let h = xscatter::hat_xy(&xco, 0.0, k)?.0;
                (v[0] - h.m12()).norm().max((v[1] - h.m22()).norm())
            }
            1 => {
                let k = re(rho);
                let y = *xscatter::solve_y_to(&ip, k, 1.0, tol)?.values.last().unwrap();
                (y - xscatter::hat_xy(&xco, 1.0, k)?.1).norm_max()
            }
            2 => {
                let k = C64::from_polar(rho, PI / 6.0);
                let v = tscatter::solve_t_col2(&bpt, k, tol)?.first();
                let h = tscatter::hat_t(&tco, 0.0, k)?;
                (v[0] - h.m12()).norm().max((v[1] - h.m22()).norm())
            }
            _ => {
                let k = re(rho);
                let u = *tscatter::solve_u_to(&bpu, k, 0.5, tol)?.values.last().unwrap();
                (u - tscatter::hat_u(&uco, 0.5, k)?).norm_max()
            }
        })
    };
    let jobs: Vec<(usize, usize)> = (0..4).flat_map(|w| (0..KS.len()).map(move |i| (w, i))).collect();
    let vals: Vec<Result<f64>> = jobs.par_iter().map(|&(w, i)| err(w, KS[i])).collect();
    let mut errs = [[0.0; 5]; 4];
    for (&(w, i), v) in jobs.iter().zip(vals) {
        errs[w][i] = v?;
    }
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, e) in ["X", "Y", "T", "U"].iter().zip(&errs) {
        let (s, r2) = fit(e);
        ok &= s <= -4.5 && r2 >= 0.99;
        parts.push(format!("{name} slope {s:.2} R2 {r2:.4} ({:.1e}..{:.1e})", e[0], e[4]));
    }
    Ok((ok, parts.join("; ")))
}

// ---------- 6 ----------

fn c6_plemelj() -> Outcome {
    let grid = ContourGrid::build(&GridParams { panels_per_ray: 14, nodes_per_panel: 16, r_max: 60.0, grading: 1.6 })?;
    let op = CauchyOp::new(&grid);
    let g = &op.grid;
    // f analytic off a sector S bounded by two rays: C f = f in S (or -f
    // when S lies on the - side) and 0 outside, by residues
    let cases: [(C64, [u8; 2], f64); 3] = [(c(0.4, -1.1), [0, 3], 1.0), (c(0.3, 0.9), [4, 5], 1.0), (c(0.2, -1.3), [1, 2], -1.0)];
    let (mut plem, mut bval, mut off): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (z0, rays, sign) in cases {
        let f = |s: C64| (s - z0).powi(-6);
        let vals: Vec<Mat2> = g
            .nodes
            .iter()
            .enumerate()
            .map(|(i, s)| if rays.contains(&g.ray_of(i).0) { Mat2::identity() * f(*s) } else { Mat2::zero() })
            .collect();
        let pn = g.per_ray();
        for &r in &rays {
            for j in pn / 8..pn - pn / 8 {
                let i = g.index(RayId(r), j);
                let cp = op.cauchy_boundary(&vals, i, Side::Plus).m11();
                let cm = op.cauchy_boundary(&vals, i, Side::Minus).m11();
                plem = plem.max((cp - cm - vals[i].m11()).norm());
                let (wp, wm) = if sign > 0.0 { (f(g.nodes[i]), re(0.0)) } else { (re(0.0), -f(g.nodes[i])) };
                bval = bval.max((cp - wp).norm()).max((cm - wm).norm());
            }
        }
        for z in [c(0.5, -2.0), c(-1.5, 0.3), c(0.1, 3.0), c(-2.0, -0.6), c(2.5, 2.5), c(-0.8, -3.0)] {
            let inside = match rays[0] {
                0 => z.im > 0.0,
                4 => classify(z) == Region::D1,
                _ => classify(z) == Region::D4,
            };
            let want = if inside { f(z) * sign } else { re(0.0) };
            off = off.max((op.cauchy(&vals, z)?.m22() - want).norm());
        }
    }
    let ok = plem <= 1e-8 && bval <= 1e-8 && off <= 1e-8;
    Ok((ok, format!("C+ - C- - f {plem:.1e}, boundary values {bval:.1e}, off-contour vs residues {off:.1e}")))
}

// ---------- soliton ----------

pub struct SolitonCase {
    pub preset: Preset,
    pub sd: SpectralData,
    pub ha: RationalRegularizer,
}

static SOLITON: OnceLock<std::result::Result<SolitonCase, String>> = OnceLock::new();

/// Soliton tables through the production path: preset, tabulation of both
/// halves, derive with the h fit and zero scans.
pub fn soliton_case() -> Result<&'static SolitonCase> {
    SOLITON
        .get_or_init(|| {
            let build = || -> Result<SolitonCase> {
                let cfg = RunConfig::from_json(r#"{"preset": {"name": "soliton-focusing"}}"#)?;
                let (ip, bp) = (cfg.initial_profile()?, cfg.boundary_profile()?);
                let sc = cfg.spectral_config();
                let sd = derive_data(&cfg, tabulate_x(&ip, &sc)?, tabulate_t(&bp, &sc)?, &ip, &bp)?;
                let hj = sd.coeffs.h.clone().ok_or(Error::Numerical("h coefficients missing".into()))?;
                let ha = build_ha(sd.h0.ok_or(Error::Numerical("h(0) missing".into()))?, &hj, cfg.solve.rho_a)?;
                let preset = super::preset::compatible_preset("soliton-focusing", &Default::default(), 40.0, 40.0)?;
                Ok(SolitonCase { preset, sd, ha })
            };
            build().map_err(|e| e.to_string())
        })
        .as_ref()
        .map_err(|e| Error::Numerical(e.clone()))
}

fn opts(tail_weight: i32, tail_tol: f64) -> RhOptions {
    RhOptions { tail_weight, tail_tol, ..Default::default() }
}

fn c7_rh_consistency() -> Outcome {
    let s = soliton_case()?;
    let (x, t) = (0.5, 0.1);
    let p = RhProblem::new(&s.sd, &s.ha, opts(2, 1e-6));
    let g = p.grid_for([x, x], [t, t])?;
    let sol = p.solve_on(&g, x, t)?;
    let res = sol.diag.residual;
    let det = sup([c(0.9, 0.5), c(0.0, -2.0), c(-3.0, 1.7)].iter().map(|&z| sol.m_at(z).map_or(f64::INFINITY, |m| (m.det() - 1.0).norm())));
    let jump = sol.jump_residual();
    let mut ok = res <= 1e-10 && det <= 1e-8 && jump <= 1e-8;
    let neu = match sol.diag.neumann_gap {
        Some(gap) => {
            ok &= gap <= 1e-8;
            format!("Neumann gap {gap:.1e}")
        }
        None => format!("Neumann n/a (|C_w| ~ {:.2})", sol.diag.cw_norm_estimate),
    };
    // direct and iterative solves of the same system
    let u_of = |k: SolverKind| -> Result<(f64, String)> {
        let q = RhProblem::new(&s.sd, &s.ha, RhOptions { solver: k, ..p.opts.clone() });
        let sol = q.solve_on(&g, x, t)?;
        Ok((recover_derivatives(&sol, Lambda::Focusing).u, format!("{} {}", sol.diag.method, sol.diag.iterations)))
    };
    let ((ud, md), (ug, mg)) = (u_of(SolverKind::Direct)?, u_of(SolverKind::Gmres)?);
    let lu_gm = (ud - ug).abs();
    ok &= lu_gm <= 1e-8;
    Ok((ok, format!("mu residual {res:.1e}, det {det:.1e}, jump {jump:.1e}, {neu}, u by [{md}] vs [{mg}] {lu_gm:.1e}")))
}

fn c8_initial() -> Outcome {
    use rayon::prelude::*;
    let s = soliton_case()?;
    let p = RhProblem::new(&s.sd, &s.ha, opts(0, 1e-8));
    let xo = RhOptions::default();
    let xs: Vec<f64> = (0..31).map(|i| 0.1 * i as f64).collect();
    let rows: Vec<Result<(f64, f64, f64)>> = xs
        .par_iter()
        .map(|&x| {
            let full = recover_derivatives(&p.solve(x, 0.0)?, Lambda::Focusing).u;
            let other = x_only_rh(&s.sd, x, &xo)?.u;
            Ok((full, other, s.preset.initial.eval(x, 0)?))
        })
        .collect();
    let (mut e0, mut ex): (f64, f64) = (0.0, 0.0);
    for r in rows {
        let (full, other, u0) = r?;
        e0 = e0.max((full - u0).abs());
        ex = ex.max((full - other).abs());
    }
    Ok((e0 <= 1e-4 && ex <= 1e-6, format!("31 points: |u - u0| {e0:.1e}, full vs x-only {ex:.1e}")))
}

fn c9_boundary() -> Outcome {
    use rayon::prelude::*;
    let s = soliton_case()?;
    let p = RhProblem::new(&s.sd, &s.ha, opts(2, 1e-5));
    let ts: Vec<f64> = (0..11).map(|i| 0.05 * i as f64).collect();
    let rows: Vec<Result<[f64; 3]>> = ts
        .par_iter()
        .map(|&t| {
            let r = recover_derivatives(&p.solve(0.0, t)?, Lambda::Focusing);
            let b = &s.preset.boundary;
            Ok([(r.u - b.eval(0, t, 0)?).abs(), (r.u_x - b.eval(1, t, 0)?).abs(), (r.u_xx - b.eval(2, t, 0)?).abs()])
        })
        .collect();
    let mut e = [0.0f64; 3];
    for r in rows {
        let v = r?;
        for j in 0..3 {
            e[j] = e[j].max(v[j]);
        }
    }
    let ok = e[0] <= 1e-3 && e[1] <= 5e-3 && e[2] <= 2e-2;
    Ok((ok, format!("11 points: u {:.1e}, u_x {:.1e}, u_xx {:.1e}", e[0], e[1], e[2])))
}

fn c10_field() -> Outcome {
    use rayon::prelude::*;
    let s = soliton_case()?;
    let ex = &s.preset.exact;
    let p = RhProblem::new(&s.sd, &s.ha, opts(0, 1e-6));
    let pts: Vec<(f64, f64)> = (0..21).flat_map(|i| (0..11).map(move |j| (0.1 * i as f64, 0.05 * j as f64))).collect();
    let errs: Vec<Result<f64>> =
        pts.par_iter().map(|&(x, t)| Ok((recover_derivatives(&p.solve(x, t)?, Lambda::Focusing).u - ex.u(x, t)).abs())).collect();
    let mut e: f64 = 0.0;
    for v in errs {
        e = e.max(v?);
    }
    // PDE residual of centred differences of the reconstruction
    let (x0, t0) = (1.0, 0.25);
    let hs = [0.1, 0.05, 0.025];
    let q = RhProblem::new(&s.sd, &s.ha, opts(0, 1e-11));
    let g = q.grid_for([x0 - 2.0 * hs[0], x0 + 2.0 * hs[0]], [t0 - hs[0], t0 + hs[0]])?;
    let lam = s.sd.lambda.f();
    let mut resid = Vec::new();
    for &h in &hs {
        let st = [(0.0, 0.0), (h, 0.0), (-h, 0.0), (2.0 * h, 0.0), (-2.0 * h, 0.0), (0.0, h), (0.0, -h)];
        let v: Vec<Result<f64>> =
            st.par_iter().map(|&(dx, dt)| Ok(recover_derivatives(&q.solve_on(&g, x0 + dx, t0 + dt)?, Lambda::Focusing).u)).collect();
        let v: Vec<f64> = v.into_iter().collect::<Result<_>>()?;
        let ut = (v[5] - v[6]) / (2.0 * h);
        let ux = (v[1] - v[2]) / (2.0 * h);
        let uxxx = (v[3] - 2.0 * v[1] + 2.0 * v[2] - v[4]) / (2.0 * h * h * h);
        resid.push((ut + 6.0 * lam * v[0] * v[0] * ux - uxxx).abs());
    }
    let (slope, _, _) = line_fit(&hs.map(f64::ln), &resid.iter().map(|r| r.ln()).collect::<Vec<_>>());
    let ok = e <= 1e-3 && slope >= 1.8 && slope <= 2.5;
    Ok((
        ok,
        format!(
            "231 points sup err {e:.1e}; FD residual {:.1e} {:.1e} {:.1e} at h = 0.1, 0.05, 0.025, slope {slope:.2}",
            resid[0], resid[1], resid[2]
        ),
    ))
}

fn c11_negative() -> Outcome {
    let lam = Lambda::Focusing;
    let ip = InitialProfile::new(lam, &ProfileSpec::preset("gaussian", &[("alpha", 1.0), ("beta", 1.0), ("x0", 0.0)]), 12.0)?;
    let bp = BoundaryProfile::zero(lam, 10.0);
    let cfg = SpectralConfig {
        grid: GridParams { panels_per_ray: 8, nodes_per_panel: 16, r_max: 30.0, grading: 1.6 },
        ..Default::default()
    };
    let sd = derive_cdhr(SpectralData::merge(tabulate_x(&ip, &cfg)?, tabulate_t(&bp, &cfg)?)?)?;
    let gr = sd.diagnostics.global_relation_sup.unwrap_or(0.0);
    let refused = matches!(solve_gate(&sd, super::SolveConfig::default().gr_threshold), Err(Error::GateFailed(_)));
    Ok((gr >= 1e-2 && refused, format!("u0(0) = 1, GR sup {gr:.2e}, gate {}", if refused { "refuses" } else { "passes" })))
}

fn c12_regularization() -> Outcome {
    let s = soliton_case()?;
    let g = &s.sd.grid;
    let lo = 8.0;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in [RayId(4), RayId(5)] {
        let h = s.sd.ray(r).h.as_ref().ok_or(Error::Numerical("h missing".into()))?;
        for (j, &rho) in g.radial.iter().enumerate() {
            if rho >= lo {
                xs.push(rho.ln());
                ys.push((h[j] - s.ha.eval(r.dir() * rho)).norm().max(1e-300).ln());
            }
        }
    }
    let (sh, _, r2h) = line_fit(&xs, &ys);
    let mut ok = sh <= -4.5;
    let rmax = sup([RayId(0), RayId(3)].iter().filter_map(|&r| s.sd.ray(r).r.as_ref()).flatten().map(|v| v.norm()));
    let rpart = if rmax <= 1e-10 {
        format!("r identically zero to {rmax:.1e} (reflectionless, slope degenerate)")
    } else {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for r in [RayId(0), RayId(3)] {
            let t = s.sd.ray(r).r.as_ref().ok_or(Error::Numerical("r missing".into()))?;
            for (j, &rho) in g.radial.iter().enumerate() {
                if rho >= lo {
                    xs.push(rho.ln());
                    ys.push(t[j].norm().max(1e-300).ln());
                }
            }
        }
        let (sr, _, r2) = line_fit(&xs, &ys);
        ok &= sr <= -4.5;
        format!("r slope {sr:.2} R2 {r2:.3}")
    };
    Ok((ok, format!("|h - h_a| slope {sh:.2} R2 {r2h:.3} on rho >= {lo}; {rpart}")))
}
