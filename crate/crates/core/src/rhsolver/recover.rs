//! From spectral data to u, u_x, u_xx through the RH problem.

use super::jump::{jump_j, theta, JumpData};
use super::solve::{choose_grid, Envelope, RhGrid, RhOptions, RhSolution, SolveDiagnostics};
use crate::contour::RayId;
use crate::core::mat2::{re, Mat2, C64, I};
use crate::core::Lambda;
use crate::error::{Error, Result};
use crate::spectral::{RationalRegularizer, SpectralData};
use serde::{Deserialize, Serialize};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Spectral data plus regularizer, ready to solve at any (x, t).
pub struct RhProblem<'a> {
    pub sd: &'a SpectralData,
    pub ha: &'a RationalRegularizer,
    pub opts: RhOptions,
}

fn check_xt(x: f64, t: f64) -> Result<()> {
    for v in [x, t] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::OutOfDomain { point: v, limit: 0.0 });
        }
    }
    Ok(())
}

impl<'a> RhProblem<'a> {
    pub fn new(sd: &'a SpectralData, ha: &'a RationalRegularizer, opts: RhOptions) -> Self {
        RhProblem { sd, ha, opts }
    }

    /// |w| on the spectral radial nodes without the x-decay.
    fn raw_envelope(&self) -> Result<[Vec<f64>; 6]> {
        let g = &self.sd.grid;
        let mut env: [Vec<f64>; 6] = Default::default();
        for r in [RayId(4), RayId(5)] {
            let h = self.sd.ray(r).h.as_ref().ok_or(Error::Numerical("h table missing".into()))?;
            env[r.0 as usize] = g.radial.iter().zip(h).map(|(&rho, hv)| (hv - self.ha.eval(r.dir() * rho)).norm()).collect();
            env[r.conj().0 as usize] = env[r.0 as usize].clone();
        }
        for r in [RayId(0), RayId(3)] {
            let t = self.sd.ray(r).r.as_ref().ok_or(Error::Numerical("r table missing".into()))?;
            env[r.0 as usize] = t.iter().map(|v| v.norm()).collect();
        }
        Ok(env)
    }

    /// Log-log slope of the largest undamped jump entry over the outer
    /// part of the spectral table; None when it is already negligible.
    pub fn decay_slope(&self) -> Result<Option<f64>> {
        let env = self.raw_envelope()?;
        let g = &self.sd.grid;
        let lo = g.r_max / 4.0;
        let pts: Vec<(f64, f64)> = (0..g.radial.len())
            .filter(|&i| g.radial[i] >= lo)
            .map(|i| (g.radial[i], env.iter().map(|e| e[i]).fold(0.0, f64::max)))
            .collect();
        if pts.len() < 4 || pts.iter().all(|p| p.1 < 1e-11) {
            return Ok(None);
        }
        let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1.max(1e-300).ln()).collect();
        Ok(Some(crate::core::special::line_fit(&xs, &ys).0))
    }

    /// Grid serving all x in [x_lo, x_hi] and t in [t_lo, t_hi].
    pub fn grid_for(&self, [x_lo, x_hi]: [f64; 2], [t_lo, t_hi]: [f64; 2]) -> Result<RhGrid> {
        check_xt(x_lo, t_lo)?;
        if !(x_hi >= x_lo && t_hi >= t_lo) {
            return Err(Error::BadParams(format!("empty window [{x_lo}, {x_hi}] x [{t_lo}, {t_hi}]")));
        }
        let mut env = self.raw_envelope()?;
        let g = &self.sd.grid;
        for r in [1, 2, 4, 5] {
            for (v, rho) in env[r].iter_mut().zip(&g.radial) {
                *v *= (-SQRT3 * rho * x_lo).exp();
            }
        }
        let envl = Envelope { radial: &g.radial, radial_w: &g.radial_w, env, r_cap: g.r_max };
        // x enters the phase at rate x on the D1/D4 rays, adding to the t part;
        // on the real line it enters at rate 2x with the opposite sign
        let real_on = envl.env[0].iter().chain(&envl.env[3]).any(|&v| v > self.opts.drop_below);
        choose_grid(
            &envl,
            |rho| {
                let d = 24.0 * rho * rho * t_lo + x_lo;
                if real_on {
                    d.min((24.0 * rho * rho * t_lo - 2.0 * x_hi).max(0.0))
                } else {
                    d
                }
            },
            |rho| 24.0 * rho * rho * t_hi + 2.0 * x_hi,
            &self.opts,
        )
    }

    pub fn solve_on(&self, g: &RhGrid, x: f64, t: f64) -> Result<RhSolution> {
        check_xt(x, t)?;
        if self.opts.tail_weight > 0 {
            if let Some(s) = self.decay_slope()? {
                if s > -4.0 {
                    return Err(Error::MomentDivergence(format!("jump decays like k^{s:.2}")));
                }
            }
        }
        let jd = JumpData::build(self.sd, self.ha, g.grid.clone(), x, t)?;
        RhSolution::solve(jd, &self.opts, g.r_cut, g.tail_estimate)
    }

    pub fn solve(&self, x: f64, t: f64) -> Result<RhSolution> {
        let g = self.grid_for([x, x], [t, t])?;
        self.solve_on(&g, x, t)
    }

    /// Smallest eigenvalue of the Hermitian jump on the real nodes of `g`;
    /// None for lambda = 1, where no such certificate exists.
    pub fn positivity_check(&self, g: &RhGrid, x: f64, t: f64) -> Result<Option<f64>> {
        if self.sd.lambda != Lambda::Focusing {
            return Ok(None);
        }
        let mut worst = f64::INFINITY;
        for r in [RayId(0), RayId(3)] {
            for &rho in g.grid.radial.iter() {
                let j = jump_j(self.sd, x, t, r, rho)?;
                // Re J = (J + J^H) / 2
                let h = (j + j.adjoint()) * 0.5;
                let (a, d, b) = (h.m11().re, h.m22().re, h.m12().norm());
                let tr = a + d;
                let disc = ((a - d) * (a - d) + 4.0 * b * b).sqrt();
                worst = worst.min(0.5 * (tr - disc));
            }
        }
        Ok(Some(worst))
    }
}

/// u with its derivatives, and the imaginary parts left by quadrature.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Recovered {
    pub u: f64,
    pub u_x: f64,
    pub u_xx: f64,
    pub im: [f64; 3],
    pub diag: SolveDiagnostics,
}

/// u and the size of its imaginary part.
pub fn reconstruct_u(sol: &RhSolution) -> (f64, f64) {
    let u = sol.u_complex();
    (u.re, u.im)
}

/// u, u_x, u_xx from the first three moments of m.
///
/// Matching powers of 1/k in m_x - ik[sigma3, m] = U m gives
///   u    = -2i (m1)_12
///   u_x  = 4 (m2)_12 - 2i u (m1)_22
///   u_xx = lambda u^3 + 8i (m3)_12 + 4 u (m2)_22 - 2i u_x (m1)_22
/// for both signs of lambda.
pub fn recover_derivatives(sol: &RhSolution, lambda: Lambda) -> Recovered {
    let [m1, m2, m3] = sol.moments();
    let u = -2.0 * I * m1.m12();
    let ux = 4.0 * m2.m12() - 2.0 * I * u * m1.m22();
    let uxx = lambda.f() * u * u * u + 8.0 * I * m3.m12() + 4.0 * u * m2.m22() - 2.0 * I * ux * m1.m22();
    Recovered { u: u.re, u_x: ux.re, u_xx: uxx.re, im: [u.im, ux.im, uxx.im], diag: sol.diag.clone() }
}

/// Symmetry defects of m at z: |m(z) - s m(-z) s| with s = sigma1 for
/// lambda = 1 and sigma2 for lambda = -1, and |m(z) - conj(m(-conj z))|.
pub fn symmetry_defects(sol: &RhSolution, lambda: Lambda, z: C64) -> Result<(f64, f64)> {
    let s = match lambda {
        Lambda::Defocusing => Mat2::sigma1(),
        Lambda::Focusing => Mat2::sigma2(),
    };
    let m = sol.m_at(z)?;
    let a = (m - s * sol.m_at(-z)? * s).norm_max();
    let b = (m - sol.m_at(-z.conj())?.conj()).norm_max();
    Ok((a, b))
}

/// Pole-type approximation sum_j alpha_j / (k - i rho0)^j matching the
/// first four large-k coefficients of the x reflection coefficient.
#[derive(Clone, Debug)]
pub struct XRegularizer {
    pub rho0: f64,
    pub alpha: [C64; 4],
}

impl XRegularizer {
    pub fn new(series: &[C64], rho0: f64) -> Self {
        let cc = I * rho0;
        let binom = |n: usize, k: usize| (1..=k).fold(1.0, |a, i| a * (n + 1 - i) as f64 / i as f64);
        let mut alpha = [re(0.0); 4];
        for n in 1..=4 {
            let s: C64 = (1..n).map(|j| alpha[j - 1] * binom(n - 1, n - j) * cc.powi((n - j) as i32)).sum();
            alpha[n - 1] = series[n - 1] - s;
        }
        XRegularizer { rho0, alpha }
    }

    pub fn eval(&self, k: C64) -> C64 {
        let z = (k - I * self.rho0).inv();
        let mut p = z;
        let mut s = re(0.0);
        for a in self.alpha {
            s += a * p;
            p *= z;
        }
        s
    }
}

#[derive(Clone, Debug)]
pub struct XOnlyResult {
    pub u: f64,
    pub im_u: f64,
    pub diag: SolveDiagnostics,
}

/// u(x, 0) from the RH problem on the real line built from a and b alone.
/// The rational part of the reflection coefficient extends to the lower
/// half plane, where it only touches the first column of M; it is moved
/// off the line so that the remaining jump decays like k^-5.
pub fn x_only_rh(sd: &SpectralData, x: f64, opts: &RhOptions) -> Result<XOnlyResult> {
    check_xt(x, 0.0)?;
    let lam = sd.lambda.f();
    let reg = XRegularizer::new(&sd.rx_series()?, 1.0);
    let g = &sd.grid;
    let delta = |r: RayId, rho: f64| -> Result<C64> { Ok(sd.rx_at(r, rho)? - reg.eval(r.dir() * rho)) };
    let mut env: [Vec<f64>; 6] = Default::default();
    for r in RayId::ALL {
        env[r.0 as usize] = if r.is_real() {
            g.radial.iter().map(|&rho| delta(r, rho).map(|d| d.norm())).collect::<Result<_>>()?
        } else {
            vec![0.0; g.radial.len()]
        };
    }
    let envl = Envelope { radial: &g.radial, radial_w: &g.radial_w, env, r_cap: g.r_max };
    let rg = choose_grid(&envl, |_| 2.0 * x, |_| 2.0 * x, opts)?;
    let jd = JumpData::from_fn(rg.grid.clone(), x, 0.0, |r, rho| {
        if !r.is_real() {
            return Ok((re(0.0), re(0.0)));
        }
        let th = theta(r, rho, x, 0.0);
        let d = delta(r, rho)?;
        Ok((lam * d * th.exp(), -d.conj() * (-th).exp()))
    })?;
    let sol = RhSolution::solve(jd, opts, rg.r_cut, rg.tail_estimate)?;
    let (u, im_u) = reconstruct_u(&sol);
    Ok(XOnlyResult { u, im_u, diag: sol.diag })
}
