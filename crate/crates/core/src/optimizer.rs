//! Derivative-free search for large `F_q` over normalized star domains,
//! stability constants of the disk, and `q` sweeps.
//!
//! All comparisons with the disk use the disk solved on the same polar mesh
//! level. The mesh is invariant under rotation by `π/4`, so for modes
//! `k < 8` the discretization error has no first-order component along the
//! perturbation and the disk stays a critical point of the discrete
//! functional.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{ball_fq, ball_torsion, slab_f1_limit, BallSpec};
use crate::error::{Error, Result};
use crate::fem::solve_domain;
use crate::functionals::alpha;
use crate::geometry::StarDomain;
use crate::nelder_mead::{minimize, NelderMeadOptions};
use crate::report::{fmt_f64, fmt_opt, CsvTable};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "SHAPEOPT_THREADS";

/// Runs `f` on a pool sized by `SHAPEOPT_THREADS` (all cores if unset).
pub fn with_thread_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let threads = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).unwrap_or(0);
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Start {
    Ball,
    /// `a_2 = amplitude`, everything else zero.
    Elongation(f64),
    /// Each coefficient uniform in `[−amplitude, amplitude]`, drawn from the
    /// configured seed.
    Random(f64),
    /// Explicit `(a_2..a_K, b_2..b_K)`.
    Coefficients(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub q: f64,
    /// Highest Fourier mode `K`; the search runs over `a_2..a_K, b_2..b_K`.
    pub modes: usize,
    pub max_evals: usize,
    pub seed: u64,
    pub mesh_level: usize,
    pub simplex_scale: f64,
    pub start: Start,
    /// Treat normalized domains with `‖φ‖_∞` above this as infeasible.
    pub linf_bound: Option<f64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            q: 2.0,
            modes: 6,
            max_evals: 200,
            seed: 0,
            mesh_level: 16,
            simplex_scale: 0.05,
            start: Start::Ball,
            linf_bound: None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.modes < 2 {
            return Err(Error::InvalidInput(format!("need K >= 2 Fourier modes, got {}", self.modes)));
        }
        if self.max_evals == 0 {
            return Err(Error::InvalidInput("evaluation budget must be positive".into()));
        }
        if self.mesh_level < 2 {
            return Err(Error::InvalidInput(format!("mesh level must be >= 2, got {}", self.mesh_level)));
        }
        if !(self.q > 0.0 && self.q.is_finite()) {
            return Err(Error::InvalidInput(format!("q must be positive, got {}", self.q)));
        }
        if !(self.simplex_scale > 0.0) {
            return Err(Error::InvalidInput("simplex scale must be positive".into()));
        }
        if let Start::Coefficients(c) = &self.start {
            if c.len() != self.dimension() {
                return Err(Error::InvalidInput(format!(
                    "start has {} coefficients, expected {}",
                    c.len(),
                    self.dimension()
                )));
            }
        }
        Ok(())
    }

    /// Number of search parameters, `2(K − 1)`.
    pub fn dimension(&self) -> usize {
        2 * (self.modes - 1)
    }

    fn start_point(&self) -> Vec<f64> {
        let n = self.dimension();
        match &self.start {
            Start::Ball => vec![0.0; n],
            Start::Elongation(a) => {
                let mut x = vec![0.0; n];
                x[0] = *a;
                x
            }
            Start::Random(a) => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                (0..n).map(|_| rng.gen_range(-a..=*a)).collect()
            }
            Start::Coefficients(c) => c.clone(),
        }
    }
}

/// Domain for search parameters `(a_2..a_K, b_2..b_K)` before normalization.
pub fn domain_from_params(params: &[f64], modes: usize) -> Result<StarDomain> {
    let m = modes - 1;
    let mut cos = vec![0.0, 0.0];
    cos.extend_from_slice(&params[..m]);
    let mut sin = vec![0.0];
    sin.extend_from_slice(&params[m..2 * m]);
    StarDomain::new(cos, sin)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub params: Vec<f64>,
    /// `|Ω| − π` of the normalized domain (closed form).
    pub area_residual: Option<f64>,
    pub torsion: Option<f64>,
    pub lambda: Option<f64>,
    /// Volume of the triangulated domain used in `F_q`.
    pub volume: Option<f64>,
    /// `−∞` when infeasible.
    pub f_q: f64,
}

impl Evaluation {
    fn infeasible(params: &[f64]) -> Self {
        Self { params: params.to_vec(), area_residual: None, torsion: None, lambda: None, volume: None, f_q: f64::NEG_INFINITY }
    }

    pub fn feasible(&self) -> bool {
        self.f_q.is_finite()
    }
}

/// Normalizes, meshes and solves one parameter vector.
pub fn evaluate(params: &[f64], q: f64, modes: usize, mesh_level: usize, linf_bound: Option<f64>) -> Evaluation {
    let Ok(raw) = domain_from_params(params, modes) else {
        return Evaluation::infeasible(params);
    };
    let Ok(dom) = raw.normalize() else {
        return Evaluation::infeasible(params);
    };
    if let Some(bound) = linf_bound {
        if dom.in_class(f64::INFINITY, 0.5).linf > bound {
            return Evaluation::infeasible(params);
        }
    }
    let Ok(rep) = solve_domain(&dom, mesh_level) else {
        return Evaluation::infeasible(params);
    };
    let vol = rep.mesh_area;
    Evaluation {
        params: params.to_vec(),
        area_residual: dom.area().ok().map(|a| a - PI),
        torsion: Some(rep.torsion),
        lambda: Some(rep.lambda),
        volume: Some(vol),
        f_q: (rep.lambda.ln() + q * rep.torsion.ln() - alpha(q, 2) * vol.ln()).exp(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerResult {
    pub config: OptimizerConfig,
    pub best_params: Vec<f64>,
    pub best_domain: StarDomain,
    pub best_f_q: f64,
    /// The disk on the same mesh level.
    pub ball_f_q: f64,
    /// The exact disk value.
    pub ball_f_q_exact: f64,
    pub evals: usize,
    pub converged: bool,
    pub budget_exhausted: bool,
    #[serde(skip)]
    pub trace: Vec<Evaluation>,
}

impl OptimizerResult {
    /// `best / ball − 1` on the shared mesh level.
    pub fn excess(&self) -> f64 {
        self.best_f_q / self.ball_f_q - 1.0
    }

    pub fn trace_csv(&self) -> String {
        trace_table(&self.trace, self.config.modes).render()
    }
}

pub fn trace_table(trace: &[Evaluation], modes: usize) -> CsvTable {
    let mut header = vec!["eval_index".to_string()];
    header.extend((2..=modes).map(|k| format!("a{k}")));
    header.extend((2..=modes).map(|k| format!("b{k}")));
    header.extend(["area_residual", "T", "lambda", "F_q"].map(String::from));
    let mut t = CsvTable::new(header);
    for (i, e) in trace.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(e.params.iter().map(|v| fmt_f64(*v)));
        row.extend([fmt_opt(e.area_residual), fmt_opt(e.torsion), fmt_opt(e.lambda), fmt_f64(e.f_q)]);
        t.push(row);
    }
    t
}

/// Nelder-Mead on `−log F_q`. The disk is always evaluated first, so the
/// result never falls below it.
pub fn maximize_fq(cfg: &OptimizerConfig) -> Result<OptimizerResult> {
    cfg.validate()?;
    let n = cfg.dimension();
    let mut trace = Vec::new();
    let ball = evaluate(&vec![0.0; n], cfg.q, cfg.modes, cfg.mesh_level, cfg.linf_bound);
    if !ball.feasible() {
        return Err(Error::DomainError("the disk failed to evaluate".into()));
    }
    let ball_f_q = ball.f_q;
    trace.push(ball);

    let opts = NelderMeadOptions {
        max_evals: cfg.max_evals.saturating_sub(1).max(1),
        scale: cfg.simplex_scale,
        f_tol: 1e-12,
        x_tol: 1e-7,
    };
    let nm = minimize(
        |x| {
            let e = evaluate(x, cfg.q, cfg.modes, cfg.mesh_level, cfg.linf_bound);
            let v = if e.feasible() { -e.f_q.ln() } else { f64::INFINITY };
            trace.push(e);
            v
        },
        &cfg.start_point(),
        opts,
    );

    // First occurrence of the maximum, so ties keep the disk.
    let best = trace
        .iter()
        .enumerate()
        .fold(0, |b, (i, e)| if e.f_q > trace[b].f_q { i } else { b });
    let best_params = trace[best].params.clone();
    let best_domain = domain_from_params(&best_params, cfg.modes)?.normalize()?;
    Ok(OptimizerResult {
        config: cfg.clone(),
        best_f_q: trace[best].f_q,
        best_params,
        best_domain,
        ball_f_q,
        ball_f_q_exact: ball_fq(2, cfg.q),
        evals: trace.len(),
        converged: nm.converged,
        budget_exhausted: nm.budget_exhausted,
        trace,
    })
}

/// Independent runs with seeds `cfg.seed, cfg.seed + 1, …`, in seed order.
pub fn maximize_restarts(cfg: &OptimizerConfig, restarts: usize) -> Result<Vec<OptimizerResult>> {
    let cfgs: Vec<OptimizerConfig> = (0..restarts as u64)
        .map(|r| OptimizerConfig { seed: cfg.seed.wrapping_add(r), ..cfg.clone() })
        .collect();
    with_thread_pool(|| cfgs.par_iter().map(maximize_fq).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub q: f64,
    pub best_f_q: f64,
    pub ball_f_q_mesh: f64,
    /// From the Bessel-zero oracle.
    pub ball_f_q: f64,
    pub ratio: f64,
    pub evals: usize,
    pub budget_exhausted: bool,
    /// Only on the `q = 1` row: `π²/12`.
    pub slab_limit: Option<f64>,
    /// Only on the `q = 1` row: whether `π²/12 > F_1(B_1)`.
    pub slab_beats_ball: Option<bool>,
}

pub const SWEEP_HEADER: [&str; 9] = [
    "q",
    "best_F_q",
    "ball_F_q_mesh",
    "ball_F_q",
    "ratio",
    "evals",
    "budget_exhausted",
    "slab_limit",
    "slab_beats_ball",
];

impl SweepRow {
    pub fn csv_row(&self) -> Vec<String> {
        vec![
            fmt_f64(self.q),
            fmt_f64(self.best_f_q),
            fmt_f64(self.ball_f_q_mesh),
            fmt_f64(self.ball_f_q),
            fmt_f64(self.ratio),
            self.evals.to_string(),
            self.budget_exhausted.to_string(),
            fmt_opt(self.slab_limit),
            self.slab_beats_ball.map(|b| b.to_string()).unwrap_or_default(),
        ]
    }
}

/// One optimizer run per `q`, concurrently; rows come back sorted by `q`.
pub fn q_sweep(q_values: &[f64], cfg: &OptimizerConfig) -> Result<Vec<SweepRow>> {
    let mut qs = q_values.to_vec();
    if let Some(bad) = qs.iter().find(|q| !(**q >= 1.0 && q.is_finite())) {
        return Err(Error::InvalidInput(format!("sweep exponents must be >= 1, got {bad}")));
    }
    qs.sort_by(f64::total_cmp);
    let rows: Vec<Result<SweepRow>> = with_thread_pool(|| {
        qs.par_iter()
            .map(|&q| {
                let r = maximize_fq(&OptimizerConfig { q, ..cfg.clone() })?;
                let is_one = q == 1.0;
                Ok(SweepRow {
                    q,
                    best_f_q: r.best_f_q,
                    ball_f_q_mesh: r.ball_f_q,
                    ball_f_q: r.ball_f_q_exact,
                    ratio: r.best_f_q / r.ball_f_q,
                    evals: r.evals,
                    budget_exhausted: r.budget_exhausted,
                    slab_limit: is_one.then(slab_f1_limit),
                    slab_beats_ball: is_one.then(|| slab_f1_limit() > r.ball_f_q_exact),
                })
            })
            .collect()
    });
    rows.into_iter().collect()
}

pub fn sweep_table(rows: &[SweepRow]) -> CsvTable {
    let mut t = CsvTable::new(SWEEP_HEADER);
    for r in rows {
        t.push(r.csv_row());
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityOptions {
    pub mesh_level: usize,
    /// Bound on the `C^{2,γ}` surrogate of the class.
    pub delta: f64,
    pub gamma: f64,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        Self { mesh_level: 24, delta: 5.0, gamma: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilitySample {
    pub mode: usize,
    pub amplitude: f64,
    /// Rotation applied to `amplitude · cos kθ` before normalizing.
    pub phase: f64,
    pub h_half_norm_sq: f64,
    pub torsion_deficit: f64,
    pub lambda_excess: f64,
    pub torsion_ratio: f64,
    pub lambda_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSummary {
    pub amplitude: f64,
    pub c1: f64,
    pub c2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityEstimate {
    /// Smallest sampled `(T(B_1) − T(Ω)) / ‖φ‖²_{H^{1/2}}`.
    pub c1_hat: f64,
    /// Largest sampled `(λ(Ω) − λ(B_1)) / ‖φ‖²_{H^{1/2}}`.
    pub c2_hat: f64,
    /// `2^{d+2} (C2/C1) T(B_1)`.
    pub q1_hat: f64,
    pub sample_count: usize,
    pub amplitude_range: (f64, f64),
    /// Every sampled ratio is positive.
    pub valid: bool,
    /// Relative spread `max/min − 1` of the per-amplitude extremal ratios.
    pub c1_spread: f64,
    pub c2_spread: f64,
    pub per_amplitude: Vec<AmplitudeSummary>,
    pub mesh_level: usize,
    pub samples: Vec<StabilitySample>,
}

impl StabilityEstimate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("StabilityEstimate serializes")
    }
}

fn spread(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let hi = v.clone().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.fold(f64::INFINITY, f64::min);
    hi / lo - 1.0
}

/// Samples `a cos(k(θ − ψ))`, normalized, for every amplitude `a` and mode
/// `k`. Sample 0 has `ψ = 0`; further samples draw `ψ` from `seed`.
pub fn estimate_stability(
    amplitudes: &[f64],
    modes: &[usize],
    samples: usize,
    seed: u64,
    opts: StabilityOptions,
) -> Result<StabilityEstimate> {
    if amplitudes.is_empty() || modes.is_empty() || samples == 0 {
        return Err(Error::InvalidInput("stability needs amplitudes, modes and samples".into()));
    }
    if let Some(k) = modes.iter().find(|k| **k < 2) {
        return Err(Error::InvalidInput(format!("modes must be >= 2, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jobs = Vec::new();
    for &a in amplitudes {
        for &k in modes {
            for s in 0..samples {
                let psi = if s == 0 { 0.0 } else { rng.gen_range(0.0..2.0 * PI) };
                jobs.push((k, a, psi));
            }
        }
    }
    let disk = solve_domain(&StarDomain::disk(), opts.mesh_level)?;
    let results: Vec<Result<StabilitySample>> = with_thread_pool(|| {
        jobs.par_iter()
            .map(|&(k, a, psi)| {
                let dom = StarDomain::mode(k, a)?.rotated(psi).normalize()?;
                let class = dom.in_class(opts.delta, opts.gamma);
                if !class.member {
                    return Err(Error::InvalidSample(format!(
                        "mode {k}, amplitude {a}: ‖φ‖∞ = {}, surrogate = {}",
                        class.linf, class.surrogate
                    )));
                }
                let rep = solve_domain(&dom, opts.mesh_level)?;
                let norm = dom.h_half_norm_sq();
                // Compare at equal discrete volume.
                let t = rep.torsion * (disk.mesh_area / rep.mesh_area).powi(2);
                let l = rep.lambda * (rep.mesh_area / disk.mesh_area);
                let (dt, dl) = (disk.torsion - t, l - disk.lambda);
                Ok(StabilitySample {
                    mode: k,
                    amplitude: a,
                    phase: psi,
                    h_half_norm_sq: norm,
                    torsion_deficit: dt,
                    lambda_excess: dl,
                    torsion_ratio: dt / norm,
                    lambda_ratio: dl / norm,
                })
            })
            .collect()
    });
    let samples: Vec<StabilitySample> = results.into_iter().collect::<Result<_>>()?;

    let per_amplitude: Vec<AmplitudeSummary> = amplitudes
        .iter()
        .map(|&a| {
            let of_a = samples.iter().filter(|s| s.amplitude == a);
            AmplitudeSummary {
                amplitude: a,
                c1: of_a.clone().map(|s| s.torsion_ratio).fold(f64::INFINITY, f64::min),
                c2: of_a.map(|s| s.lambda_ratio).fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect();
    let c1_hat = samples.iter().map(|s| s.torsion_ratio).fold(f64::INFINITY, f64::min);
    let c2_hat = samples.iter().map(|s| s.lambda_ratio).fold(f64::NEG_INFINITY, f64::max);
    let valid = samples.iter().all(|s| s.torsion_ratio > 0.0 && s.lambda_ratio > 0.0);
    let t_ball = ball_torsion(&BallSpec::unit(2)?);
    Ok(StabilityEstimate {
        c1_hat,
        c2_hat,
        q1_hat: 16.0 * c2_hat / c1_hat * t_ball,
        sample_count: samples.len(),
        amplitude_range: (
            amplitudes.iter().copied().fold(f64::INFINITY, f64::min),
            amplitudes.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ),
        valid,
        c1_spread: spread(per_amplitude.iter().map(|p| p.c1)),
        c2_spread: spread(per_amplitude.iter().map(|p| p.c2)),
        per_amplitude,
        mesh_level: opts.mesh_level,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichDiagnostics {
    pub torsion: f64,
    /// `2^{−(d+2)} T(B_1)`.
    pub lower: f64,
    /// `2^{d+2} T(B_1)`.
    pub upper: f64,
    pub linf: f64,
    pub inside: bool,
}

/// Checks `2^{−4} T(B_1) ≤ T(Ω) ≤ 2^4 T(B_1)`, which follows from
/// `B_{1/2} ⊂ Ω ⊂ B_2` when `‖φ‖_∞ ≤ 1/2`.
pub fn sandwich_check(dom: &StarDomain, mesh_level: usize) -> Result<SandwichDiagnostics> {
    let t_ball = ball_torsion(&BallSpec::unit(2)?);
    let rep = solve_domain(dom, mesh_level)?;
    let (lower, upper) = (t_ball / 16.0, t_ball * 16.0);
    Ok(SandwichDiagnostics {
        torsion: rep.torsion,
        lower,
        upper,
        linf: dom.in_class(f64::INFINITY, 0.5).linf,
        inside: lower <= rep.torsion && rep.torsion <= upper,
    })
}
