//! Potential-type capacitary measures `μ = V dx` on the box `[−L, L]^d`
//! (`d ∈ {1, 2}`), with `μ = ∞` outside the box.
//!
//! The operator `−Δ + V` is discretized by the standard 3-point / 5-point
//! finite-difference Laplacian on the `n^d` interior nodes of a uniform grid
//! with spacing `δ = 2L/(n+1)`; grid integrals use the weight `δ^d`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{conjugate_gradient, inverse_iteration, CgOptions, CsrMatrix, EigenOptions};

/// `A_μ` is `{w > A_MU_THRESHOLD · max w}`.
pub const A_MU_THRESHOLD: f64 = 1e-9;

/// Constant of the Davies bound `‖u‖_∞ ≤ e^{1/(8π)} λ^{d/4}`.
pub fn davies_constant() -> f64 {
    (1.0 / (8.0 * PI)).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialMeasure {
    halfwidth: f64,
    n: usize,
    dim: usize,
    values: Vec<f64>,
}

impl PotentialMeasure {
    pub fn new(dim: usize, halfwidth: f64, n: usize, values: Vec<f64>) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidInput(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        if !(halfwidth > 0.0 && halfwidth.is_finite()) {
            return Err(Error::InvalidInput(format!("box half-width must be > 0, got {halfwidth}")));
        }
        if n < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 grid points per axis, got {n}")));
        }
        if values.len() != n.pow(dim as u32) {
            return Err(Error::InvalidInput(format!(
                "potential has {} values, expected {}",
                values.len(),
                n.pow(dim as u32)
            )));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput(format!("potential must be finite and >= 0, found {v}")));
        }
        Ok(Self { halfwidth, n, dim, values })
    }

    pub fn from_fn(dim: usize, halfwidth: f64, n: usize, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let probe = Self { halfwidth, n, dim, values: vec![] };
        let values = (0..n.pow(dim as u32)).map(|k| f(&probe.coords(k))).collect();
        Self::new(dim, halfwidth, n, values)
    }

    pub fn constant(dim: usize, halfwidth: f64, n: usize, c: f64) -> Result<Self> {
        Self::from_fn(dim, halfwidth, n, |_| c)
    }

    /// `value · 1_{x_1 < 0}` (left) or `value · 1_{x_1 > 0}` (right).
    pub fn half(dim: usize, halfwidth: f64, n: usize, value: f64, side: Side) -> Result<Self> {
        Self::from_fn(dim, halfwidth, n, |x| match side {
            Side::Left if x[0] < 0.0 => value,
            Side::Right if x[0] > 0.0 => value,
            _ => 0.0,
        })
    }

    /// `v0` times the fraction of each grid cell lying outside the centered
    /// ball of the given radius (8 subsamples per axis).
    pub fn disk_penalty(dim: usize, halfwidth: f64, n: usize, radius: f64, v0: f64) -> Result<Self> {
        let delta = 2.0 * halfwidth / (n as f64 + 1.0);
        const SUB: usize = 8;
        let offsets: Vec<f64> = (0..SUB).map(|s| ((s as f64 + 0.5) / SUB as f64 - 0.5) * delta).collect();
        Self::from_fn(dim, halfwidth, n, |x| {
            let (mut outside, mut total) = (0usize, 0usize);
            match dim {
                1 => {
                    for dx in &offsets {
                        total += 1;
                        outside += usize::from((x[0] + dx).abs() > radius);
                    }
                }
                _ => {
                    for dx in &offsets {
                        for dy in &offsets {
                            total += 1;
                            outside += usize::from((x[0] + dx).hypot(x[1] + dy) > radius);
                        }
                    }
                }
            }
            v0 * outside as f64 / total as f64
        })
    }

    /// Gaussian bump `amplitude · exp(−|x|²/(2 width²))`.
    pub fn bump(dim: usize, halfwidth: f64, n: usize, amplitude: f64, width: f64) -> Result<Self> {
        Self::from_fn(dim, halfwidth, n, |x| {
            let r2: f64 = x.iter().map(|c| c * c).sum();
            amplitude * (-r2 / (2.0 * width * width)).exp()
        })
    }

    /// `amplitude · exp(g)` with `g` a seeded random trigonometric polynomial
    /// of `modes` frequencies per axis and `|g| ≤ 1`.
    pub fn random_smooth(dim: usize, halfwidth: f64, n: usize, seed: u64, amplitude: f64, modes: usize) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let count = modes.pow(dim as u32);
        let terms: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..count)
            .map(|_| {
                let freq = (0..dim).map(|_| rng.gen_range(1..=modes) as f64).collect();
                let phase = (0..dim).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
                (freq, phase, rng.gen_range(-1.0..1.0))
            })
            .collect();
        let weight: f64 = terms.iter().map(|t| t.2.abs()).sum::<f64>().max(1e-300);
        Self::from_fn(dim, halfwidth, n, |x| {
            let g: f64 = terms
                .iter()
                .map(|(f, p, c)| c * (0..dim).map(|i| (f[i] * PI * x[i] / halfwidth + p[i]).cos()).product::<f64>())
                .sum();
            amplitude * (g / weight).exp()
        })
    }

    /// Grid dump: one line per row of constant `x_2` (a single line in 1D),
    /// values separated by commas or whitespace; `#` starts a comment.
    pub fn from_csv(text: &str, dim: usize, halfwidth: f64) -> Result<Self> {
        let rows: Vec<Vec<f64>> = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<f64>().map_err(|e| Error::InvalidInput(format!("bad potential value `{s}`: {e}"))))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("potential rows have unequal lengths".into()));
        }
        if dim == 2 && rows.len() != n {
            return Err(Error::InvalidInput(format!("2D potential must be square, got {}×{n}", rows.len())));
        }
        if dim == 1 && rows.len() != 1 {
            return Err(Error::InvalidInput("1D potential must be a single row".into()));
        }
        Self::new(dim, halfwidth, n, rows.concat())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for row in self.values.chunks(self.n) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfwidth(&self) -> f64 {
        self.halfwidth
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.halfwidth / (self.n as f64 + 1.0)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn box_volume(&self) -> f64 {
        (2.0 * self.halfwidth).powi(self.dim as i32)
    }

    /// Coordinates of grid node `k`.
    pub fn coords(&self, k: usize) -> Vec<f64> {
        let delta = self.spacing();
        let at = |i: usize| -self.halfwidth + (i as f64 + 1.0) * delta;
        match self.dim {
            1 => vec![at(k)],
            _ => vec![at(k % self.n), at(k / self.n)],
        }
    }

    /// `(1 − ε) V`.
    pub fn damped(&self, eps: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| (1.0 - eps) * v).collect(),
            ..self.clone()
        }
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.n != other.n || self.halfwidth != other.halfwidth {
            return Err(Error::GridMismatch(format!(
                "(d={}, n={}, L={}) vs (d={}, n={}, L={})",
                self.dim, self.n, self.halfwidth, other.dim, other.n, other.halfwidth
            )));
        }
        Ok(())
    }

    /// The matrix of `−Δ_δ + V`.
    pub fn operator(&self) -> CsrMatrix {
        let n = self.n;
        let inv = 1.0 / (self.spacing() * self.spacing());
        let mut t = Vec::with_capacity(self.values.len() * (2 * self.dim + 1));
        for (k, v) in self.values.iter().enumerate() {
            t.push((k, k, 2.0 * self.dim as f64 * inv + v));
            let (i, j) = (k % n, k / n);
            if i > 0 {
                t.push((k, k - 1, -inv));
            }
            if i + 1 < n {
                t.push((k, k + 1, -inv));
            }
            if self.dim == 2 {
                if j > 0 {
                    t.push((k, k - n, -inv));
                }
                if j + 1 < n {
                    t.push((k, k + n, -inv));
                }
            }
        }
        CsrMatrix::from_triplets(self.values.len(), &t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureResiduals {
    pub torsion_cg: f64,
    pub torsion_cg_iterations: usize,
    pub eigen: f64,
    pub eigen_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub dim: usize,
    pub halfwidth: f64,
    pub points_per_axis: usize,
    pub cell_volume: f64,
    pub torsion: f64,
    pub lambda: f64,
    pub a_mu_volume: f64,
    pub residuals: MeasureResiduals,
    #[serde(skip)]
    pub w: Vec<f64>,
    /// Ground state with `δ^d Σ u² = 1`, nonnegative at its peak.
    #[serde(skip)]
    pub u: Vec<f64>,
}

impl MeasureReport {
    /// `λ T^q / |A_μ|^{α_q}`.
    pub fn f_q(&self, q: f64) -> f64 {
        let d = self.dim as f64;
        let alpha = (q * (d + 2.0) - 2.0) / d;
        self.lambda * self.torsion.powf(q) / self.a_mu_volume.powf(alpha)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("MeasureReport serializes")
    }
}

pub fn solve_measure(m: &PotentialMeasure) -> Result<MeasureReport> {
    let a = m.operator();
    let cell = m.cell_volume();
    let ones = vec![1.0; m.values.len()];
    let mut w = vec![0.0; ones.len()];
    let cg = conjugate_gradient(&a, &ones, &mut w, CgOptions { rel_tol: 1e-13, ..Default::default() })?;
    let torsion = cell * w.iter().sum::<f64>();
    let pair = inverse_iteration(&a, None, EigenOptions::default())?;
    let scale = cell.sqrt();
    let u: Vec<f64> = pair.vector.iter().map(|v| v / scale).collect();
    let wmax = w.iter().copied().fold(0.0, f64::max);
    // Each node stands for an equal share of the box, so a full count is |box|.
    let share = m.box_volume() / m.values.len() as f64;
    let a_mu_volume = share * w.iter().filter(|v| **v > A_MU_THRESHOLD * wmax).count() as f64;
    Ok(MeasureReport {
        dim: m.dim,
        halfwidth: m.halfwidth,
        points_per_axis: m.n,
        cell_volume: cell,
        torsion,
        lambda: pair.value,
        a_mu_volume,
        residuals: MeasureResiduals {
            torsion_cg: cg.rel_residual,
            torsion_cg_iterations: cg.iterations,
            eigen: pair.rel_residual,
            eigen_iterations: pair.iterations,
        },
        w,
        u,
    })
}

/// `d_γ(μ, ν) = ‖w_μ − w_ν‖_{L¹}` on the grid.
pub fn gamma_distance(m1: &PotentialMeasure, m2: &PotentialMeasure) -> Result<f64> {
    m1.same_grid(m2)?;
    gamma_distance_solved(&solve_measure(m1)?, &solve_measure(m2)?)
}

pub fn gamma_distance_solved(r1: &MeasureReport, r2: &MeasureReport) -> Result<f64> {
    if r1.dim != r2.dim || r1.points_per_axis != r2.points_per_axis || r1.halfwidth != r2.halfwidth {
        return Err(Error::GridMismatch("reports live on different grids".into()));
    }
    Ok(r1.cell_volume * r1.w.iter().zip(&r2.w).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// `μ_t(E) = t^{d−2} μ(E/t)`: for `μ = V dx` this is `V_t(x) = t^{−2} V(x/t)`
/// on the box of half-width `tL`, same node count.
pub fn scale_measure(m: &PotentialMeasure, t: f64) -> Result<PotentialMeasure> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("scale factor must be > 0, got {t}")));
    }
    let inv = 1.0 / (t * t);
    PotentialMeasure::new(m.dim, m.halfwidth * t, m.n, m.values.iter().map(|v| v * inv).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCheck {
    /// One-sided difference quotient along `μ_ε = (1 − ε)μ`.
    pub fd: f64,
    pub formula: f64,
    pub rel_err: f64,
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1e-2 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("derivative step must lie in (0, 1e-2], got {eps}")))
    }
}

fn relative_error(fd: f64, formula: f64) -> f64 {
    let scale = formula.abs().max(fd.abs());
    if scale == 0.0 {
        0.0
    } else {
        (fd - formula).abs() / formula.abs().max(f64::MIN_POSITIVE)
    }
}

/// Compares `(T(μ_ε) − T(μ))/ε` with `∫ w² dμ`.
pub fn derivative_check_torsion(m: &PotentialMeasure, eps: f64) -> Result<DerivativeCheck> {
    check_eps(eps)?;
    let base = solve_measure(m)?;
    let pert = solve_measure(&m.damped(eps))?;
    let fd = (pert.torsion - base.torsion) / eps;
    let formula = base.cell_volume * base.w.iter().zip(&m.values).map(|(w, v)| w * w * v).sum::<f64>();
    Ok(DerivativeCheck { fd, formula, rel_err: relative_error(fd, formula) })
}

/// Compares `(λ(μ_ε) − λ(μ))/ε` with `−∫ u² dμ`.
pub fn derivative_check_lambda(m: &PotentialMeasure, eps: f64) -> Result<DerivativeCheck> {
    check_eps(eps)?;
    let base = solve_measure(m)?;
    let pert = solve_measure(&m.damped(eps))?;
    let fd = (pert.lambda - base.lambda) / eps;
    let formula = -base.cell_volume * base.u.iter().zip(&m.values).map(|(u, v)| u * u * v).sum::<f64>();
    Ok(DerivativeCheck { fd, formula, rel_err: relative_error(fd, formula) })
}

/// Violations of `‖u‖_∞ ≤ e^{1/(8π)} λ^{d/4}` and of the pointwise
/// comparison `u ≤ e^{1/(8π)} λ^{d/4+1} w`. Positive values are violations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinftyDiagnostics {
    pub sup_u: f64,
    pub davies_bound: f64,
    pub davies_violation: f64,
    pub pointwise_max_violation: f64,
    /// Nodes where the pointwise comparison fails beyond the slack.
    pub pointwise_violations: usize,
    pub passed: bool,
}

/// Relative slack for the L∞ checks.
pub const LINFTY_SLACK: f64 = 1e-6;

pub fn linfty_bounds_check(report: &MeasureReport) -> LinftyDiagnostics {
    let d = report.dim as f64;
    let c = davies_constant();
    let sup_u = report.u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let davies_bound = c * report.lambda.powf(d / 4.0);
    let factor = c * report.lambda.powf(d / 4.0 + 1.0);
    let slack = LINFTY_SLACK * sup_u;
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    for (u, w) in report.u.iter().zip(&report.w) {
        let v = u - factor * w;
        worst = worst.max(v);
        if v > slack {
            count += 1;
        }
    }
    let davies_violation = sup_u - davies_bound;
    LinftyDiagnostics {
        sup_u,
        davies_bound,
        davies_violation,
        pointwise_max_violation: worst,
        pointwise_violations: count,
        passed: davies_violation <= LINFTY_SLACK * davies_bound && count == 0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityDiagnostics {
    pub torsion: (f64, f64),
    pub lambda: (f64, f64),
    /// `T(μ_1) ≥ T(μ_2)`.
    pub torsion_ordered: bool,
    /// `λ(μ_1) ≤ λ(μ_2)`.
    pub lambda_ordered: bool,
}

/// For `V_1 ≤ V_2` pointwise, `T` must decrease and `λ` increase.
pub fn monotonicity_check(m1: &PotentialMeasure, m2: &PotentialMeasure) -> Result<MonotonicityDiagnostics> {
    m1.same_grid(m2)?;
    if let Some(k) = m1.values.iter().zip(&m2.values).position(|(a, b)| a > b) {
        return Err(Error::NotOrdered(k));
    }
    let (r1, r2) = (solve_measure(m1)?, solve_measure(m2)?);
    // Solver noise allowance for the equal-potential case.
    let tol = 1e-10;
    Ok(MonotonicityDiagnostics {
        torsion: (r1.torsion, r2.torsion),
        lambda: (r1.lambda, r2.lambda),
        torsion_ordered: r1.torsion >= r2.torsion * (1.0 - tol),
        lambda_ordered: r1.lambda <= r2.lambda * (1.0 + tol),
    })
}

/// The five reference potentials on the unit square `[−½, ½]²`: constant,
/// half-box, Gaussian bump, penalized disk and a seeded random smooth field.
pub fn reference_suite(n: usize) -> Result<Vec<(&'static str, PotentialMeasure)>> {
    let l = 0.5;
    Ok(vec![
        ("constant", PotentialMeasure::constant(2, l, n, 10.0)?),
        ("half", PotentialMeasure::half(2, l, n, 10.0, Side::Left)?),
        ("bump", PotentialMeasure::bump(2, l, n, 50.0, 0.15)?),
        ("disk-penalty", PotentialMeasure::disk_penalty(2, l, n, 0.4, 1e4)?),
        ("random-smooth", PotentialMeasure::random_smooth(2, l, n, 7, 20.0, 3)?),
    ])
}
