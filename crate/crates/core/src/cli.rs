//! Command-line front end: argument and config-file parsing, domain and
//! potential generators, and the pipelines behind each subcommand.
//!
//! A config file holds flat `key = value` lines (`#`/`;` comments and
//! `[section]` headers are ignored). Every key is the long name of a flag of
//! the chosen subcommand; flags given on the command line win.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::capacitary::{
    derivative_check_lambda, derivative_check_torsion, linfty_bounds_check, reference_suite, solve_measure,
    PotentialMeasure, Side,
};
use crate::error::{Error, Result};
use crate::fem::{solve_domain, solve_domain_extrapolated};
use crate::functionals::{f_q_against, kohler_jobin_exponent, BallReference, CheckKind, Tolerances, CSV_HEADER};
use crate::geometry::StarDomain;
use crate::optimizer::{
    estimate_stability, maximize_fq, q_sweep, sweep_table, with_thread_pool, OptimizerConfig, Start, StabilityOptions,
};
use crate::report::{fmt_f64, to_json, write_atomic, CsvTable};

/// Relative error accepted by `verify derivatives`.
pub const DERIVATIVE_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "shapeopt", version, about = "Torsion, eigenvalue and F_q = λT^q/|Ω|^α on planar star domains")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Output file (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of rings of the polar mesh.
    #[arg(long = "mesh-level", default_value_t = 16)]
    pub mesh_level: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum VerifyKind {
    Polya,
    FaberKrahn,
    SaintVenant,
    KohlerJobin,
    Davies,
    Derivatives,
}

#[derive(Debug, Clone, Subcommand)]
#[command(args_override_self = true)]
pub enum Command {
    /// F_q and the inequality checks for one domain.
    Compute {
        /// disk | mode:k:amp | random:K:amp | file:path
        #[arg(long, default_value = "disk")]
        domain: String,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        /// Richardson-extrapolate from levels L and 2L.
        #[arg(long)]
        extrapolate: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run one inequality or derivative battery.
    Verify {
        #[arg(value_enum)]
        check: VerifyKind,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Fourier modes of the random domains.
        #[arg(long, default_value_t = 6)]
        modes: usize,
        #[arg(long, default_value_t = 0.08)]
        amplitude: f64,
        /// Grid points per axis for the potential suite.
        #[arg(long, default_value_t = 63)]
        grid: usize,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Optimizer run for each q in start:stop:step (or a comma list).
    Sweep {
        #[arg(long, default_value = "1.1:10:0.5")]
        q: String,
        #[arg(long, default_value_t = 6)]
        modes: usize,
        #[arg(long = "max-evals", default_value_t = 100)]
        max_evals: usize,
        #[arg(long, default_value = "random:0.05")]
        start: String,
        #[command(flatten)]
        common: Common,
    },
    /// Maximize F_q over normalized star domains.
    Optimize {
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 6)]
        modes: usize,
        #[arg(long = "max-evals", default_value_t = 200)]
        max_evals: usize,
        /// ball | elongation:amp | random:amp
        #[arg(long, default_value = "ball")]
        start: String,
        #[arg(long = "simplex-scale", default_value_t = 0.05)]
        simplex_scale: f64,
        /// Reject domains with ‖φ‖∞ above this bound.
        #[arg(long = "linf-bound")]
        linf_bound: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate the stability constants of the disk.
    Stability {
        #[arg(long, value_delimiter = ',', default_value = "0.005,0.01,0.02")]
        amplitudes: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6")]
        modes: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Solve −Δ + V on a box grid.
    Capacitary {
        /// constant:c | half:left|right:v | disk:r:v0 | bump:amp:width | random:seed:amp | file:path
        #[arg(long, default_value = "disk:0.4:1e4")]
        potential: String,
        #[arg(long, default_value_t = 63)]
        grid: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0.5)]
        halfwidth: f64,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Self::Compute { common, .. }
            | Self::Verify { common, .. }
            | Self::Sweep { common, .. }
            | Self::Optimize { common, .. }
            | Self::Stability { common, .. }
            | Self::Capacitary { common, .. } => common,
        }
    }
}

/// Result of one pipeline: the rendered artifact, a one-line summary and
/// the exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: String,
    pub summary: String,
    pub status: i32,
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Usage(format!("bad {what} `{s}`")))
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| Error::Usage(format!("bad {what} `{s}`")))
}

/// Normalized domain from `disk`, `mode:k:amp`, `random:K:amp` (drawn from
/// `seed`) or `file:path` (StarDomain JSON).
pub fn generate_domain(spec: &str, seed: u64) -> Result<StarDomain> {
    let parts: Vec<&str> = spec.splitn(3, ':').collect();
    match parts.as_slice() {
        ["disk"] => Ok(StarDomain::disk()),
        ["mode", k, amp] => StarDomain::mode(parse_usize(k, "mode")?, parse_f64(amp, "amplitude")?)?.normalize(),
        ["random", k, amp] => StarDomain::random(parse_usize(k, "mode count")?, parse_f64(amp, "amplitude")?, seed),
        ["file", _] | ["file", _, _] => {
            let path = &spec["file:".len()..];
            StarDomain::from_json(&fs::read_to_string(path)?)?.normalize()
        }
        _ => Err(Error::UnknownGenerator(spec.to_string())),
    }
}

/// Potential from `constant:c`, `half:left|right:v`, `disk:r:v0`,
/// `bump:amp:width`, `random:seed:amp` or `file:path` (grid CSV).
pub fn generate_potential(spec: &str, dim: usize, halfwidth: f64, n: usize) -> Result<PotentialMeasure> {
    let parts: Vec<&str> = spec.splitn(3, ':').collect();
    match parts.as_slice() {
        ["constant", c] => PotentialMeasure::constant(dim, halfwidth, n, parse_f64(c, "constant")?),
        ["half", side, v] => {
            let side = match *side {
                "left" => Side::Left,
                "right" => Side::Right,
                other => return Err(Error::Usage(format!("half-box side must be left or right, got `{other}`"))),
            };
            PotentialMeasure::half(dim, halfwidth, n, parse_f64(v, "value")?, side)
        }
        ["disk", r, v0] => PotentialMeasure::disk_penalty(dim, halfwidth, n, parse_f64(r, "radius")?, parse_f64(v0, "penalty")?),
        ["bump", a, w] => PotentialMeasure::bump(dim, halfwidth, n, parse_f64(a, "amplitude")?, parse_f64(w, "width")?),
        ["random", s, a] => {
            let seed = s.trim().parse().map_err(|_| Error::Usage(format!("bad seed `{s}`")))?;
            PotentialMeasure::random_smooth(dim, halfwidth, n, seed, parse_f64(a, "amplitude")?, 3)
        }
        ["file", ..] => PotentialMeasure::from_csv(&fs::read_to_string(&spec["file:".len()..])?, dim, halfwidth),
        _ => Err(Error::UnknownGenerator(spec.to_string())),
    }
}

pub fn parse_start(spec: &str) -> Result<Start> {
    match spec.split_once(':') {
        None if spec == "ball" => Ok(Start::Ball),
        Some(("elongation", a)) => Ok(Start::Elongation(parse_f64(a, "amplitude")?)),
        Some(("random", a)) => Ok(Start::Random(parse_f64(a, "amplitude")?)),
        _ => Err(Error::Usage(format!("unknown start `{spec}`"))),
    }
}

/// `start:stop:step` (inclusive, ordered) or a comma-separated list.
pub fn parse_q_range(spec: &str) -> Result<Vec<f64>> {
    if spec.contains(':') {
        let p: Vec<&str> = spec.split(':').collect();
        let [a, b, s] = p.as_slice() else {
            return Err(Error::Usage(format!("q range must be start:stop:step, got `{spec}`")));
        };
        let (a, b, s) = (parse_f64(a, "q")?, parse_f64(b, "q")?, parse_f64(s, "q step")?);
        if !(s > 0.0) || b < a {
            return Err(Error::Usage(format!("q range `{spec}` is not ordered")));
        }
        let count = ((b - a) / s + 1e-9).floor() as usize;
        Ok((0..=count).map(|i| a + i as f64 * s).collect())
    } else {
        spec.split(',').map(|v| parse_f64(v, "q")).collect()
    }
}

/// Flat `key = value` config. Unknown keys surface as flag errors later.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') || line.starts_with('[') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Usage(format!("config line {}: expected key = value", i + 1)));
        };
        out.push((k.trim().to_string(), v.trim().trim_matches('"').to_string()));
    }
    Ok(out)
}

const COMMANDS: [&str; 6] = ["compute", "verify", "sweep", "optimize", "stability", "capacitary"];

/// Splices config-file values in right after the subcommand name so that
/// later (command-line) occurrences override them.
fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config: Option<PathBuf> = None;
    let mut it = args.into_iter();
    if let Some(prog) = it.next() {
        rest.push(prog);
    }
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            config = Some(it.next().ok_or_else(|| Error::Usage("--config needs a path".into()))?.into());
        } else if let Some(p) = s.strip_prefix("--config=") {
            config = Some(p.into());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let pairs = parse_config(&fs::read_to_string(&path)?)?;
    let mut flags = Vec::new();
    let mut command = None;
    let mut check = None;
    for (k, v) in pairs {
        match k.as_str() {
            "command" => command = Some(v),
            "check" => check = Some(v),
            _ if v == "true" => flags.push(OsString::from(format!("--{k}"))),
            _ if v == "false" => {}
            _ => {
                flags.push(OsString::from(format!("--{k}")));
                flags.push(OsString::from(v));
            }
        }
    }
    let pos = match rest.iter().position(|a| COMMANDS.contains(&a.to_string_lossy().as_ref())) {
        Some(p) => p,
        None => {
            let c = command.ok_or_else(|| Error::Usage("no command given on the command line or in the config".into()))?;
            rest.insert(1, OsString::from(c));
            1
        }
    };
    let is_verify = rest[pos] == "verify";
    let has_check = rest[pos + 1..].iter().any(|a| !a.to_string_lossy().starts_with('-'));
    let mut tail: Vec<OsString> = rest.split_off(pos + 1);
    if is_verify && !has_check {
        if let Some(c) = check {
            rest.push(OsString::from(c));
        }
    }
    rest.extend(flags);
    rest.append(&mut tail);
    Ok(rest)
}

fn check_writable(out: &Option<PathBuf>) -> Result<()> {
    if let Some(p) = out {
        let dir = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !dir.is_dir() {
            return Err(Error::Usage(format!("output directory {} does not exist", dir.display())));
        }
    }
    Ok(())
}

fn disk_reference(level: usize) -> Result<BallReference> {
    let d = solve_domain(&StarDomain::disk(), level)?;
    Ok(BallReference { dim: 2, torsion: d.torsion, lambda: d.lambda, volume: d.mesh_area })
}

fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut t = CsvTable::new(header.iter().copied());
    for r in rows {
        t.push(r);
    }
    t.render()
}

#[derive(Serialize)]
struct ComputeOutput<'a> {
    domain: &'a StarDomain,
    mesh_level: usize,
    extrapolated: bool,
    report: crate::functionals::FunctionalReport,
}

fn compute(domain: &str, q: f64, extrapolate: bool, c: &Common) -> Result<Outcome> {
    let dom = generate_domain(domain, c.seed)?;
    let (t, l, vol) = if extrapolate {
        let r = solve_domain_extrapolated(&dom, c.mesh_level)?;
        (r.torsion.value, r.lambda.value, dom.area()?)
    } else {
        let r = solve_domain(&dom, c.mesh_level)?;
        (r.torsion, r.lambda, r.mesh_area)
    };
    let report = f_q_against(t, l, vol, q, &BallReference::analytic(2)?, Tolerances::default())?;
    let summary = format!(
        "F_{q} = {:.6} (T = {:.6e}, lambda = {:.6}, |Omega| = {:.6}); checks {}",
        report.f_q,
        t,
        l,
        vol,
        if report.all_passed() { "pass" } else { "FAIL" }
    );
    let output = match c.format {
        Format::Json => to_json(&ComputeOutput { domain: &dom, mesh_level: c.mesh_level, extrapolated: extrapolate, report })?,
        Format::Csv => csv(&CSV_HEADER, [report.csv_row()]),
    };
    Ok(Outcome { output, summary, status: 0 })
}

#[derive(Debug, Clone, Serialize)]
struct VerifyRow {
    item: String,
    quantity: String,
    value: f64,
    bound: f64,
    margin: f64,
    tolerance: f64,
    passed: bool,
}

impl VerifyRow {
    fn csv(&self) -> Vec<String> {
        vec![
            self.item.clone(),
            self.quantity.clone(),
            fmt_f64(self.value),
            fmt_f64(self.bound),
            fmt_f64(self.margin),
            fmt_f64(self.tolerance),
            self.passed.to_string(),
        ]
    }
}

const VERIFY_HEADER: [&str; 7] = ["item", "quantity", "value", "bound", "margin", "tolerance", "passed"];

#[derive(Serialize)]
struct VerifyOutput {
    check: VerifyKind,
    total: usize,
    passed: usize,
    worst_margin: f64,
    rows: Vec<VerifyRow>,
}

/// Rows of one verification battery, in item order.
pub fn verify_rows(kind: VerifyKind, samples: usize, modes: usize, amplitude: f64, grid: usize, eps: f64, c: &Common) -> Result<Vec<Vec<String>>> {
    Ok(run_verify(kind, samples, modes, amplitude, grid, eps, c)?.into_iter().map(|r| r.csv()).collect())
}

fn run_verify(kind: VerifyKind, samples: usize, modes: usize, amplitude: f64, grid: usize, eps: f64, c: &Common) -> Result<Vec<VerifyRow>> {
    match kind {
        VerifyKind::Polya | VerifyKind::FaberKrahn | VerifyKind::SaintVenant | VerifyKind::KohlerJobin => {
            let (check, q) = match kind {
                VerifyKind::Polya => (CheckKind::Polya, 1.0),
                VerifyKind::FaberKrahn => (CheckKind::FaberKrahn, 1.0),
                VerifyKind::SaintVenant => (CheckKind::SaintVenant, 1.0),
                _ => (CheckKind::KohlerJobin, kohler_jobin_exponent(2)),
            };
            let ball = disk_reference(c.mesh_level)?;
            let seeds: Vec<u64> = (0..samples as u64).map(|i| c.seed.wrapping_add(i)).collect();
            let rows: Vec<Result<VerifyRow>> = with_thread_pool(|| {
                seeds
                    .par_iter()
                    .map(|&s| {
                        let dom = StarDomain::random(modes, amplitude, s)?;
                        let r = solve_domain(&dom, c.mesh_level)?;
                        let rep = f_q_against(r.torsion, r.lambda, r.mesh_area, q, &ball, Tolerances::default())?;
                        let ch = rep.check(check).copied().expect("battery includes the requested check");
                        Ok(VerifyRow {
                            item: format!("random:{modes}:{amplitude}@{s}"),
                            quantity: check.name().into(),
                            value: ch.value,
                            bound: ch.bound,
                            margin: ch.margin,
                            tolerance: ch.tolerance,
                            passed: ch.passed,
                        })
                    })
                    .collect()
            });
            rows.into_iter().collect()
        }
        VerifyKind::Davies => {
            let mut suite: Vec<(String, PotentialMeasure)> =
                reference_suite(grid)?.into_iter().map(|(n, m)| (n.to_string(), m)).collect();
            suite.push(("interval".into(), PotentialMeasure::constant(1, 0.5, 8 * grid + 7, 0.0)?));
            let rows: Vec<Result<Vec<VerifyRow>>> = with_thread_pool(|| {
                suite
                    .par_iter()
                    .map(|(name, m)| {
                        let d = linfty_bounds_check(&solve_measure(m)?);
                        let slack = crate::capacitary::LINFTY_SLACK;
                        Ok(vec![
                            VerifyRow {
                                item: name.clone(),
                                quantity: "davies".into(),
                                value: d.sup_u,
                                bound: d.davies_bound,
                                margin: -d.davies_violation / d.davies_bound,
                                tolerance: slack,
                                passed: d.davies_violation <= slack * d.davies_bound,
                            },
                            VerifyRow {
                                item: name.clone(),
                                quantity: "pointwise".into(),
                                value: d.pointwise_max_violation,
                                bound: 0.0,
                                margin: -d.pointwise_max_violation / d.sup_u,
                                tolerance: slack,
                                passed: d.pointwise_violations == 0,
                            },
                        ])
                    })
                    .collect()
            });
            Ok(rows.into_iter().collect::<Result<Vec<_>>>()?.concat())
        }
        VerifyKind::Derivatives => {
            let suite = reference_suite(grid)?;
            let rows: Vec<Result<Vec<VerifyRow>>> = with_thread_pool(|| {
                suite
                    .par_iter()
                    .map(|(name, m)| {
                        let row = |quantity: &str, d: crate::capacitary::DerivativeCheck| VerifyRow {
                            item: name.to_string(),
                            quantity: quantity.into(),
                            value: d.fd,
                            bound: d.formula,
                            margin: -d.rel_err,
                            tolerance: DERIVATIVE_TOLERANCE,
                            passed: d.rel_err <= DERIVATIVE_TOLERANCE,
                        };
                        Ok(vec![
                            row("torsion", derivative_check_torsion(m, eps)?),
                            row("lambda", derivative_check_lambda(m, eps)?),
                        ])
                    })
                    .collect()
            });
            Ok(rows.into_iter().collect::<Result<Vec<_>>>()?.concat())
        }
    }
}

/// 2 iff some row fails its tolerance.
fn verify_status(rows: &[VerifyRow]) -> i32 {
    if rows.iter().all(|r| r.passed) {
        0
    } else {
        2
    }
}

fn verify(kind: VerifyKind, samples: usize, modes: usize, amplitude: f64, grid: usize, eps: f64, c: &Common) -> Result<Outcome> {
    let rows = run_verify(kind, samples, modes, amplitude, grid, eps, c)?;
    let passed = rows.iter().filter(|r| r.passed).count();
    let worst = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let status = verify_status(&rows);
    let summary = format!("{kind:?}: {passed}/{} pass, worst margin {worst:.3e}", rows.len()).to_lowercase();
    let output = match c.format {
        Format::Csv => csv(&VERIFY_HEADER, rows.iter().map(VerifyRow::csv)),
        Format::Json => to_json(&VerifyOutput { check: kind, total: rows.len(), passed, worst_margin: worst, rows })?,
    };
    Ok(Outcome { output, summary, status })
}

fn optimizer_config(q: f64, modes: usize, max_evals: usize, start: &str, c: &Common) -> Result<OptimizerConfig> {
    Ok(OptimizerConfig {
        q,
        modes,
        max_evals,
        seed: c.seed,
        mesh_level: c.mesh_level,
        start: parse_start(start)?,
        ..OptimizerConfig::default()
    })
}

#[derive(Serialize)]
struct OptimizeOutput<'a> {
    result: &'a crate::optimizer::OptimizerResult,
    excess: f64,
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    check_writable(&cfg.command.common().out)?;
    match &cfg.command {
        Command::Compute { domain, q, extrapolate, common } => compute(domain, *q, *extrapolate, common),
        Command::Verify { check, samples, modes, amplitude, grid, eps, common } => {
            verify(*check, *samples, *modes, *amplitude, *grid, *eps, common)
        }
        Command::Sweep { q, modes, max_evals, start, common } => {
            let qs = parse_q_range(q)?;
            let rows = q_sweep(&qs, &optimizer_config(1.0, *modes, *max_evals, start, common)?)?;
            let best = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
            let summary = format!("{} sweep rows, largest best/ball ratio {best:.9}", rows.len());
            let output = match common.format {
                Format::Csv => sweep_table(&rows).render(),
                Format::Json => to_json(&rows)?,
            };
            Ok(Outcome { output, summary, status: 0 })
        }
        Command::Optimize { q, modes, max_evals, start, simplex_scale, linf_bound, common } => {
            let mut oc = optimizer_config(*q, *modes, *max_evals, start, common)?;
            oc.simplex_scale = *simplex_scale;
            oc.linf_bound = *linf_bound;
            let r = maximize_fq(&oc)?;
            let summary = format!(
                "best F_{q} = {:.9e}, disk {:.9e} (ratio {:.9}), {} evaluations{}",
                r.best_f_q,
                r.ball_f_q,
                r.best_f_q / r.ball_f_q,
                r.evals,
                if r.budget_exhausted { ", budget exhausted" } else { "" }
            );
            let output = match common.format {
                Format::Csv => r.trace_csv(),
                Format::Json => to_json(&OptimizeOutput { result: &r, excess: r.excess() })?,
            };
            Ok(Outcome { output, summary, status: 0 })
        }
        Command::Stability { amplitudes, modes, samples, common } => {
            let est = estimate_stability(
                amplitudes,
                modes,
                *samples,
                common.seed,
                StabilityOptions { mesh_level: common.mesh_level, ..Default::default() },
            )?;
            let summary = format!(
                "C1 = {:.6}, C2 = {:.6}, q1 = {:.4}, spreads {:.2e}/{:.2e}{}",
                est.c1_hat,
                est.c2_hat,
                est.q1_hat,
                est.c1_spread,
                est.c2_spread,
                if est.valid { "" } else { " (INVALID: non-positive ratio)" }
            );
            let output = match common.format {
                Format::Json => est.to_json() + "\n",
                Format::Csv => csv(
                    &["mode", "amplitude", "phase", "h_half_norm_sq", "torsion_deficit", "lambda_excess", "torsion_ratio", "lambda_ratio"],
                    est.samples.iter().map(|s| {
                        vec![
                            s.mode.to_string(),
                            fmt_f64(s.amplitude),
                            fmt_f64(s.phase),
                            fmt_f64(s.h_half_norm_sq),
                            fmt_f64(s.torsion_deficit),
                            fmt_f64(s.lambda_excess),
                            fmt_f64(s.torsion_ratio),
                            fmt_f64(s.lambda_ratio),
                        ]
                    }),
                ),
            };
            Ok(Outcome { output, summary, status: if est.valid { 0 } else { 2 } })
        }
        Command::Capacitary { potential, grid, dim, halfwidth, q, common } => {
            let m = generate_potential(potential, *dim, *halfwidth, *grid)?;
            let r = solve_measure(&m)?;
            let f = r.f_q(*q);
            let summary = format!(
                "T = {:.6e}, lambda = {:.6}, |A_mu| = {:.6}, F_{q} = {:.6}",
                r.torsion, r.lambda, r.a_mu_volume, f
            );
            let output = match common.format {
                Format::Json => {
                    #[derive(Serialize)]
                    struct Out<'a> {
                        potential: &'a str,
                        q: f64,
                        f_q: f64,
                        report: &'a crate::capacitary::MeasureReport,
                    }
                    to_json(&Out { potential, q: *q, f_q: f, report: &r })?
                }
                Format::Csv => csv(
                    &["potential", "q", "T", "lambda", "a_mu_volume", "F_q"],
                    [vec![potential.clone(), fmt_f64(*q), fmt_f64(r.torsion), fmt_f64(r.lambda), fmt_f64(r.a_mu_volume), fmt_f64(f)]],
                ),
            };
            Ok(Outcome { output, summary, status: 0 })
        }
    }
}

/// Full entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let merged = match merge_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let cfg = match RunConfig::try_parse_from(merged) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let started = Instant::now();
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match &cfg.command.common().out {
        Some(path) => {
            if let Err(e) = write_atomic(path, &outcome.output) {
                eprintln!("error: writing {}: {e}", path.display());
                return 1;
            }
            // Timestamps stay out of the artifact itself.
            let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            let log = format!(
                "finished_unix={stamp}\nelapsed_s={:.3}\nexit={}\nsummary={}\n",
                started.elapsed().as_secs_f64(),
                outcome.status,
                outcome.summary
            );
            let mut log_path = path.clone().into_os_string();
            log_path.push(".log");
            let _ = write_atomic(Path::new(&log_path), &log);
            println!("{}", outcome.summary);
        }
        None => {
            print!("{}", outcome.output);
            eprintln!("{}", outcome.summary);
        }
    }
    outcome.status
}
