//! Command-line pipeline: spectral-x, spectral-t -> derive -> solve, plus
//! validate and emit.

pub mod preset;
pub mod validate;

use crate::contour::{GridParams, RayId};
use crate::core::profile::{BoundaryProfile, InitialProfile, ProfileSpec};
use crate::core::Lambda;
use crate::error::{Error, Result};
use crate::rhsolver::recover::{recover_derivatives, reconstruct_u, RhProblem};
use crate::rhsolver::solve::RhOptions;
use crate::spectral::{
    a_function, build_ha, d_function, derive_cdhr, expand_h_coeffs, h_fit_nodes, h_samples, tabulate_t,
    tabulate_x, zero_scan, ScanRegion, SpectralConfig, SpectralData,
};
use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SpectralX,
    SpectralT,
    Derive,
    Solve,
    Validate,
    Emit,
}

#[derive(Parser, Debug)]
#[command(name = "mkdv-ut", version, about = "Unified transform solver for mKdV on the quarter plane")]
pub struct Args {
    /// Stage to run; falls back to "command" in the config.
    #[arg(value_enum)]
    pub command: Option<Command>,
    #[arg(long)]
    pub config: PathBuf,
    /// Run the solve even when a hypothesis gate fails.
    #[arg(long)]
    pub force: bool,
    /// validate: trivial (default), asymptotics, endtoend or all.
    #[arg(long)]
    pub suite: Option<String>,
    /// Output path of the stage, overriding the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PresetConfig {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub profile: ProfileSpec,
    #[serde(rename = "L")]
    pub l_trunc: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub g0: ProfileSpec,
    pub g1: ProfileSpec,
    pub g2: ProfileSpec,
    #[serde(rename = "T")]
    pub t_trunc: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub tol_ode: f64,
    pub tol_quad: f64,
    pub tol_solve: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { tol_ode: 1e-12, tol_quad: 1e-12, tol_solve: 1e-13 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Files {
    pub spectral_x: PathBuf,
    pub spectral_t: PathBuf,
    pub spectral: PathBuf,
    pub solution: PathBuf,
    pub report: PathBuf,
    pub tables: PathBuf,
}

impl Default for Files {
    fn default() -> Self {
        Files {
            spectral_x: "spectral_x.json".into(),
            spectral_t: "spectral_t.json".into(),
            spectral: "spectral.json".into(),
            solution: "solution.csv".into(),
            report: "report.json".into(),
            tables: "spectral_tables.csv".into(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub r_max: f64,
    pub n_r: usize,
    pub n_theta: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { r_max: 8.0, n_r: 4, n_theta: 4 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeriveConfig {
    /// Cross-check the h coefficients by a least-squares fit in D1.
    pub h_fit: bool,
    pub zero_scan: Option<ScanConfig>,
}

impl Default for DeriveConfig {
    fn default() -> Self {
        DeriveConfig { h_fit: true, zero_scan: Some(ScanConfig::default()) }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub from: f64,
    pub to: f64,
    pub n: usize,
}

impl Axis {
    pub fn points(&self) -> Vec<f64> {
        if self.n <= 1 {
            return vec![self.from];
        }
        (0..self.n).map(|i| self.from + (self.to - self.from) * i as f64 / (self.n - 1) as f64).collect()
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    pub x: Axis,
    pub t: Axis,
    /// Size the truncation for the third moment as well.
    pub derivatives: bool,
    /// Pole modulus of the rational regularizer.
    pub rho_a: f64,
    /// Largest admissible sup |A b - B a| on the D1 boundary.
    pub gr_threshold: f64,
    pub rh: RhOptions,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            x: Axis { from: 0.0, to: 2.0, n: 21 },
            t: Axis { from: 0.0, to: 0.5, n: 11 },
            derivatives: true,
            rho_a: 0.5,
            gr_threshold: 1e-4,
            rh: RhOptions { tail_tol: 1e-5, ..Default::default() },
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Option<Command>,
    /// 1 or -1; implied by a preset.
    #[serde(default)]
    pub lambda: Option<Lambda>,
    #[serde(default)]
    pub preset: Option<PresetConfig>,
    #[serde(default)]
    pub initial: Option<InitialConfig>,
    #[serde(default)]
    pub boundary: Option<BoundaryConfig>,
    #[serde(default)]
    pub grid: GridParams,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_k_switch")]
    pub k_switch: f64,
    #[serde(default)]
    pub files: Files,
    #[serde(default)]
    pub derive: DeriveConfig,
    #[serde(default)]
    pub solve: SolveConfig,
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_k_switch() -> f64 {
    20.0
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.check()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn check(&self) -> Result<()> {
        let t = &self.tolerances;
        if !(t.tol_ode > 0.0 && t.tol_quad > 0.0 && t.tol_solve > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.preset.is_some() && (self.initial.is_some() || self.boundary.is_some()) {
            return Err(Error::Config("give either a preset or explicit profiles, not both".into()));
        }
        if let (Some(l), Some(_)) = (self.lambda, &self.preset) {
            if l != Lambda::Focusing {
                return Err(Error::Config("the soliton preset is focusing (lambda = -1)".into()));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    fn lambda(&self) -> Result<Lambda> {
        if self.preset.is_some() {
            return Ok(Lambda::Focusing);
        }
        self.lambda.ok_or_else(|| Error::Config("lambda missing".into()))
    }

    pub fn spectral_config(&self) -> SpectralConfig {
        SpectralConfig { grid: self.grid.clone(), tol: self.tolerances.tol_ode, k_switch: self.k_switch }
    }

    fn preset_profiles(&self) -> Result<Option<preset::Preset>> {
        match &self.preset {
            Some(p) => Ok(Some(preset::compatible_preset(&p.name, &p.params, 40.0, 40.0)?)),
            None => Ok(None),
        }
    }

    pub fn initial_profile(&self) -> Result<InitialProfile> {
        if let Some(p) = self.preset_profiles()? {
            return Ok(p.initial);
        }
        let ic = self.initial.as_ref().ok_or_else(|| Error::Config("initial profile missing".into()))?;
        InitialProfile::new(self.lambda()?, &ic.profile, ic.l_trunc)
    }

    pub fn boundary_profile(&self) -> Result<BoundaryProfile> {
        if let Some(p) = self.preset_profiles()? {
            return Ok(p.boundary);
        }
        let bc = self.boundary.as_ref().ok_or_else(|| Error::Config("boundary profiles missing".into()))?;
        BoundaryProfile::new(self.lambda()?, [&bc.g0, &bc.g1, &bc.g2], bc.t_trunc)
    }

    pub fn rh_options(&self) -> RhOptions {
        let mut o = self.solve.rh.clone();
        o.quad_tol = self.tolerances.tol_quad;
        o.tol = self.tolerances.tol_solve;
        if self.solve.derivatives {
            o.tail_weight = o.tail_weight.max(2);
        }
        o
    }
}

/// Exit codes: 0 success, 2 config, 3 hypothesis gate, 4 numerical.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Io(_) | Error::BadParams(_) | Error::PresetUnavailable(_) => 2,
        Error::GateFailed(_) | Error::IllConditioned(_) | Error::ZeroDenominator { .. } => 3,
        _ => 4,
    }
}

fn io<E: std::fmt::Display>(path: &Path) -> impl FnOnce(E) -> Error + '_ {
    move |e| Error::Io(format!("{}: {e}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(path, s).map_err(io(path))
}

pub fn read_spectral(path: &Path) -> Result<SpectralData> {
    let s = std::fs::read_to_string(path).map_err(io(path))?;
    serde_json::from_str(&s).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Stage-tagged error, rendered by `main`.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub err: Error,
}

impl std::fmt::Display for StageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.stage, self.err)
    }
}

fn at<T>(stage: &'static str, r: Result<T>) -> std::result::Result<T, StageError> {
    r.map_err(|err| StageError { stage, err })
}

pub fn cmd_spectral_x(cfg: &RunConfig, out: &Path) -> Result<SpectralData> {
    let sd = tabulate_x(&cfg.initial_profile()?, &cfg.spectral_config())?;
    write_json(out, &sd)?;
    Ok(sd)
}

pub fn cmd_spectral_t(cfg: &RunConfig, out: &Path) -> Result<SpectralData> {
    let sd = tabulate_t(&cfg.boundary_profile()?, &cfg.spectral_config())?;
    write_json(out, &sd)?;
    Ok(sd)
}

pub fn derive_data(
    cfg: &RunConfig,
    x: SpectralData,
    t: SpectralData,
    ip: &InitialProfile,
    bp: &BoundaryProfile,
) -> Result<SpectralData> {
    let mut sd = derive_cdhr(SpectralData::merge(x, t)?)?;
    let tol = cfg.tolerances.tol_ode;
    if cfg.derive.h_fit {
        let samples = h_samples(ip, bp, &h_fit_nodes(8.0, 48.0, 16), tol)?;
        let series = sd.coeffs.h.clone();
        match expand_h_coeffs(&mut sd, &samples, 1e-6) {
            Ok(_) | Err(Error::FitDisagreement(_)) => {}
            Err(e) => return Err(e),
        }
        if let (Some(s), Some(f)) = (series, sd.coeffs.h_fit.as_ref()) {
            sd.diagnostics.h_fit_gap = Some(s.iter().zip(f).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
        }
    }
    if let Some(z) = &cfg.derive.zero_scan {
        let a = zero_scan(&a_function(ip, tol), ScanRegion::LowerHalf { r_max: z.r_max }, z.n_r, z.n_theta)?;
        let d = zero_scan(&d_function(ip, bp, tol), ScanRegion::D2 { r_max: z.r_max }, z.n_r, z.n_theta)?;
        sd.diagnostics.zeros_a = Some((a.zero_count, a.min_abs));
        sd.diagnostics.zeros_d = Some((d.zero_count, d.min_abs));
    }
    Ok(sd)
}

pub fn cmd_derive(cfg: &RunConfig, out: &Path) -> Result<SpectralData> {
    let x = read_spectral(&cfg.files.spectral_x)?;
    let t = read_spectral(&cfg.files.spectral_t)?;
    let d = derive_data(cfg, x, t, &cfg.initial_profile()?, &cfg.boundary_profile()?)?;
    write_json(out, &d)?;
    Ok(d)
}

/// Hypothesis gates on derived data; Err(GateFailed) lists every failure.
pub fn solve_gate(sd: &SpectralData, gr_threshold: f64) -> Result<()> {
    let mut fails = Vec::new();
    match sd.diagnostics.global_relation_sup {
        Some(g) if g <= gr_threshold => {}
        Some(g) => fails.push(format!("global relation residual {g:.3e} > {gr_threshold:.1e}")),
        None => fails.push("global relation residual not computed".into()),
    }
    if let Some((n, _)) = sd.diagnostics.zeros_a.filter(|z| z.0 != 0) {
        fails.push(format!("a has {n} zeros in Im k < 0"));
    }
    if let Some((n, _)) = sd.diagnostics.zeros_d.filter(|z| z.0 != 0) {
        fails.push(format!("d has {n} zeros in D2"));
    }
    if fails.is_empty() {
        Ok(())
    } else {
        Err(Error::GateFailed(fails.join("; ")))
    }
}

/// One row of the solution CSV.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SolutionRow {
    pub x: f64,
    pub t: f64,
    pub u: f64,
    pub u_x: f64,
    pub u_xx: f64,
    pub im_u_diagnostic: f64,
    pub cond_estimate: f64,
}

/// u on the tensor grid; points whose solve fails are an error unless
/// `force`, in which case they are written as NaN.
pub fn solve_grid(cfg: &RunConfig, sd: &SpectralData, force: bool) -> Result<Vec<SolutionRow>> {
    let hj = sd.coeffs.h.as_ref().ok_or_else(|| Error::Numerical("h coefficients missing".into()))?;
    let h0 = sd.h0.ok_or_else(|| Error::Numerical("h(0) missing".into()))?;
    let ha = build_ha(h0, hj, cfg.solve.rho_a)?;
    let p = RhProblem::new(sd, &ha, cfg.rh_options());
    let pts: Vec<(f64, f64)> =
        cfg.solve.x.points().into_iter().flat_map(|x| cfg.solve.t.points().into_iter().map(move |t| (x, t))).collect();
    let rows: Vec<Result<SolutionRow>> = pts
        .par_iter()
        .map(|&(x, t)| {
            let sol = p.solve(x, t)?;
            let (u, im) = reconstruct_u(&sol);
            let rec = recover_derivatives(&sol, sd.lambda);
            Ok(SolutionRow { x, t, u, u_x: rec.u_x, u_xx: rec.u_xx, im_u_diagnostic: im, cond_estimate: sol.diag.cond_estimate })
        })
        .collect();
    rows.into_iter()
        .zip(&pts)
        .map(|(r, &(x, t))| match r {
            Ok(v) => Ok(v),
            Err(e) if force => {
                eprintln!("warning: ({x}, {t}): {e}");
                Ok(SolutionRow { x, t, u: f64::NAN, u_x: f64::NAN, u_xx: f64::NAN, im_u_diagnostic: f64::NAN, cond_estimate: f64::NAN })
            }
            Err(e) => Err(e),
        })
        .collect()
}

fn f17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_solution_csv(path: &Path, rows: &[SolutionRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(io(path))?;
    w.write_record(["x", "t", "u", "u_x", "u_xx", "im_u_diagnostic", "cond_estimate"]).map_err(io(path))?;
    for r in rows {
        w.write_record([r.x, r.t, r.u, r.u_x, r.u_xx, r.im_u_diagnostic, r.cond_estimate].map(f17))
            .map_err(io(path))?;
    }
    w.flush().map_err(io(path))
}

pub fn cmd_solve(cfg: &RunConfig, force: bool, out: &Path) -> Result<Vec<SolutionRow>> {
    let sd = read_spectral(&cfg.files.spectral)?;
    if let Err(e) = solve_gate(&sd, cfg.solve.gr_threshold) {
        if !force {
            return Err(e);
        }
        eprintln!("warning: {e} (continuing, --force)");
    }
    let rows = solve_grid(cfg, &sd, force)?;
    write_solution_csv(out, &rows)?;
    Ok(rows)
}

/// Spectral tables as plot-ready CSV, one row per node.
pub fn cmd_emit(cfg: &RunConfig, out: &Path) -> Result<usize> {
    let sd = read_spectral(&cfg.files.spectral)?;
    let mut w = csv::Writer::from_path(out).map_err(io(out))?;
    let fields = ["a", "b", "A", "B", "c", "d", "h", "r"];
    let mut head = vec!["ray".to_string(), "rho".into(), "k_re".into(), "k_im".into()];
    for f in fields {
        head.push(format!("{f}_re"));
        head.push(format!("{f}_im"));
    }
    w.write_record(&head).map_err(io(out))?;
    let mut n = 0;
    for r in RayId::ALL {
        let t = sd.ray(r);
        let cols = [&t.a, &t.b, &t.big_a, &t.big_b, &t.c, &t.d, &t.h, &t.r];
        for (i, k) in sd.ray_k(r).into_iter().enumerate() {
            let mut rec = vec![r.0.to_string(), f17(sd.grid.radial[i]), f17(k.re), f17(k.im)];
            for c in cols {
                match c {
                    Some(v) => {
                        rec.push(f17(v[i].re));
                        rec.push(f17(v[i].im));
                    }
                    None => {
                        rec.push(String::new());
                        rec.push(String::new());
                    }
                }
            }
            w.write_record(&rec).map_err(io(out))?;
            n += 1;
        }
    }
    w.flush().map_err(io(out))?;
    Ok(n)
}

/// Parse arguments and run; returns the process exit code.
pub fn main_with(args: Args) -> i32 {
    let cfg = match RunConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config: {e}");
            return 2;
        }
    };
    let Some(cmd) = args.command.or(cfg.command) else {
        eprintln!("config: no command given");
        return 2;
    };
    let workers = args.workers.or(cfg.workers).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("config: worker pool: {e}");
            return 2;
        }
    };
    let res = pool.install(|| run(cmd, &cfg, &args));
    match res {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e.err)
        }
    }
}

fn run(cmd: Command, cfg: &RunConfig, args: &Args) -> std::result::Result<(), StageError> {
    let f = &cfg.files;
    let out = |p: &PathBuf| args.out.clone().unwrap_or_else(|| p.clone());
    match cmd {
        Command::SpectralX => {
            let sd = at("spectral-x", cmd_spectral_x(cfg, &out(&f.spectral_x)))?;
            println!("max unitarity residual {:?}", sd.diagnostics.max_unitarity_residual_x);
        }
        Command::SpectralT => {
            let sd = at("spectral-t", cmd_spectral_t(cfg, &out(&f.spectral_t)))?;
            println!("max unitarity residual {:?}", sd.diagnostics.max_unitarity_residual_t);
        }
        Command::Derive => {
            let sd = at("derive", cmd_derive(cfg, &out(&f.spectral)))?;
            let r = serde_json::to_string_pretty(&sd.diagnostics).unwrap_or_default();
            println!("{r}");
        }
        Command::Solve => {
            let rows = at("solve", cmd_solve(cfg, args.force, &out(&f.solution)))?;
            println!("{} points written to {}", rows.len(), out(&f.solution).display());
        }
        Command::Emit => {
            let n = at("emit", cmd_emit(cfg, &out(&f.tables)))?;
            println!("{n} nodes written to {}", out(&f.tables).display());
        }
        Command::Validate => {
            let suite = args.suite.as_deref().unwrap_or("trivial");
            let rep = at("validate", validate::run_suite(suite))?;
            for c in &rep.checks {
                println!("{}", c.line());
            }
            at("validate", write_json(&out(&f.report), &rep))?;
            println!("{} of {} checks passed", rep.checks.iter().filter(|c| c.passed).count(), rep.checks.len());
        }
    }
    Ok(())
}
