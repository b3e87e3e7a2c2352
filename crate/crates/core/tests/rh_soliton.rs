//! End-to-end RH reconstruction for the focusing soliton sech(x + t + 1),
//! with spectral data taken from closed forms.

use mkdv_ut::contour::{ContourGrid, GridParams, RayId};
use mkdv_ut::core::mat2::{c, re, C64, I};
use mkdv_ut::core::Lambda;
use mkdv_ut::rhsolver::recover::{recover_derivatives, symmetry_defects, x_only_rh, RhProblem};
use mkdv_ut::rhsolver::solve::RhOptions;
use mkdv_ut::spectral::{build_ha, SpectralData};
use std::f64::consts::PI;


fn ab(k: C64) -> (C64, C64) {
    let (th, se) = (1f64.tanh(), 1.0 / 1f64.cosh());
    let den = 2.0 * I * k + 1.0;
    ((2.0 * I * k + th) / den, -se / den)
}

fn h(k: C64) -> C64 {
    let (th, se) = (1f64.tanh(), 1.0 / 1f64.cosh());
    se * (1.0 + 2.0 * I * k) / ((1.0 - 2.0 * I * k) * (2.0 * I * k + th))
}

fn coeffs(f: impl Fn(C64) -> C64) -> Vec<C64> {
    let m = 4096;
    (1..=4)
        .map(|j| {
            (0..m)
                .map(|n| {
                    let z = C64::from_polar(50.0, 2.0 * PI * n as f64 / m as f64);
                    f(z) * z.powi(j)
                })
                .sum::<C64>()
                / m as f64
        })
        .collect()
}

fn soliton_sd() -> SpectralData {
    let grid = ContourGrid::build(&GridParams::default()).unwrap();
    let mut sd = SpectralData::empty(Lambda::Focusing, grid);
    for r in [RayId(0), RayId(3), RayId(4), RayId(5)] {
        let ks = sd.ray_k(r);
        let t = &mut sd.rays[r.0 as usize];
        t.a = Some(ks.iter().map(|&k| ab(k).0).collect());
        t.b = Some(ks.iter().map(|&k| ab(k).1).collect());
        if r.is_real() {
            t.r = Some(vec![re(0.0); ks.len()]);
        } else {
            t.h = Some(ks.iter().map(|&k| h(k)).collect());
        }
    }
    sd.origin.a = Some(ab(re(0.0)).0);
    sd.origin.b = Some(ab(re(0.0)).1);
    sd.h0 = Some(h(re(0.0)));
    sd.coeffs.a = Some(coeffs(|k| ab(k).0 - 1.0));
    sd.coeffs.b = Some(coeffs(|k| ab(k).1));
    sd.coeffs.h = Some(coeffs(h));
    sd
}

fn exact(x: f64, t: f64) -> [f64; 3] {
    let s = x + t + 1.0;
    let (sh, th) = (1.0 / s.cosh(), s.tanh());
    [sh, -sh * th, sh * (2.0 * th * th - 1.0)]
}

fn problem_opts(tail_weight: i32, tail_tol: f64) -> RhOptions {
    RhOptions { tail_weight, tail_tol, ..Default::default() }
}

#[test]
fn interior_point_and_identities() {
    let sd = soliton_sd();
    let ha = build_ha(sd.h0.unwrap(), sd.coeffs.h.as_ref().unwrap(), 0.5).unwrap();
    let p = RhProblem::new(&sd, &ha, problem_opts(2, 1e-6));
    let (x, t) = (0.5, 0.1);
    let sol = p.solve(x, t).unwrap();
    let rec = recover_derivatives(&sol, Lambda::Focusing);
    let e = exact(x, t);
    assert!((rec.u - e[0]).abs() < 1e-8, "{rec:?}");
    assert!((rec.u_x - e[1]).abs() < 1e-7, "{rec:?}");
    assert!((rec.u_xx - e[2]).abs() < 1e-6, "{rec:?}");
    assert!(rec.im.iter().all(|v| v.abs() < 1e-10));
    assert!(sol.diag.residual < 1e-10);
    assert!(sol.jump_residual() < 1e-8);
    for z in [c(0.9, 0.5), c(0.0, -2.0), c(-3.0, 1.7)] {
        assert!((sol.m_at(z).unwrap().det() - 1.0).norm() < 1e-8);
        let (s2, cj) = symmetry_defects(&sol, Lambda::Focusing, z).unwrap();
        assert!(s2 < 1e-10 && cj < 1e-10, "{s2} {cj}");
    }
    // r = 0 makes the real-line jump the identity
    let g = p.grid_for([x, x], [t, t]).unwrap();
    assert!((p.positivity_check(&g, x, t).unwrap().unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn boundary_values_match_soliton() {
    let sd = soliton_sd();
    let ha = build_ha(sd.h0.unwrap(), sd.coeffs.h.as_ref().unwrap(), 0.5).unwrap();
    let p = RhProblem::new(&sd, &ha, problem_opts(2, 1e-5));
    for t in [0.2, 0.5] {
        let rec = recover_derivatives(&p.solve(0.0, t).unwrap(), Lambda::Focusing);
        let e = exact(0.0, t);
        assert!((rec.u - e[0]).abs() < 1e-5, "t {t}: {rec:?}");
        assert!((rec.u_x - e[1]).abs() < 1e-4, "t {t}: {rec:?}");
        assert!((rec.u_xx - e[2]).abs() < 1e-3, "t {t}: {rec:?}");
    }
}

#[test]
fn moment_ux_matches_finite_difference() {
    let sd = soliton_sd();
    let ha = build_ha(sd.h0.unwrap(), sd.coeffs.h.as_ref().unwrap(), 0.5).unwrap();
    let p = RhProblem::new(&sd, &ha, problem_opts(0, 1e-10));
    let (x, t, dx) = (0.8, 0.2, 1e-2);
    // one grid for the whole stencil so the quadrature error is smooth in x
    let g = p.grid_for([x - dx, x + dx], [t, t]).unwrap();
    let u = |x: f64| recover_derivatives(&p.solve_on(&g, x, t).unwrap(), Lambda::Focusing);
    let (um, u0, up) = (u(x - dx), u(x), u(x + dx));
    let fd = (up.u - um.u) / (2.0 * dx);
    let fd2 = (up.u - 2.0 * u0.u + um.u) / (dx * dx);
    assert!((fd - u0.u_x).abs() < 1e-5, "{fd} vs {}", u0.u_x);
    assert!((fd2 - u0.u_xx).abs() < 1e-4, "{fd2} vs {}", u0.u_xx);
}

#[test]
fn initial_time_cross_methods() {
    let sd = soliton_sd();
    let ha = build_ha(sd.h0.unwrap(), sd.coeffs.h.as_ref().unwrap(), 0.5).unwrap();
    let p = RhProblem::new(&sd, &ha, problem_opts(0, 1e-9));
    for x in [0.0, 0.5, 2.0] {
        let full = recover_derivatives(&p.solve(x, 0.0).unwrap(), Lambda::Focusing).u;
        let xo = x_only_rh(&sd, x, &RhOptions::default()).unwrap();
        assert!(xo.im_u.abs() < 1e-10);
        assert!((full - xo.u).abs() < 1e-6, "x {x}: {full} vs {}", xo.u);
        assert!((xo.u - exact(x, 0.0)[0]).abs() < 1e-5);
    }
}
