//! `F_q = λ T^q / |Ω|^{α_q}` and the inequality battery around it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{ball_eigenvalue, ball_torsion, ball_volume, BallSpec};
use crate::error::{Error, Result};
use crate::report::{fmt_f64, fmt_opt};

/// `α_q = (q(d+2) − 2)/d`.
pub fn alpha(q: f64, d: usize) -> f64 {
    assert!(d >= 1, "dimension must be >= 1");
    let d = d as f64;
    (-2.0 + q * (d + 2.0)) / d
}

/// Largest exponent covered by the Kohler-Jobin inequality, `2/(d+2)`.
pub fn kohler_jobin_exponent(d: usize) -> f64 {
    2.0 / (d as f64 + 2.0)
}

/// Plain `λ T^q / vol^{α_q}`.
pub fn f_q_value(torsion: f64, lambda: f64, volume: f64, q: f64, d: usize) -> f64 {
    lambda * torsion.powf(q) / volume.powf(alpha(q, d))
}

/// Ball values the battery compares against. Any radius works since every
/// comparison is scale free; a discrete ball solved at the same resolution
/// as the test domain cancels most of the discretization error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallReference {
    pub dim: usize,
    pub torsion: f64,
    pub lambda: f64,
    pub volume: f64,
}

impl BallReference {
    pub fn analytic(dim: usize) -> Result<Self> {
        let b = BallSpec::unit(dim)?;
        Ok(Self { dim, torsion: ball_torsion(&b), lambda: ball_eigenvalue(&b), volume: ball_volume(&b) })
    }

    pub fn f_q(&self, q: f64) -> f64 {
        f_q_value(self.torsion, self.lambda, self.volume, q, self.dim)
    }

    /// `|B|^{−(d+2)/d} T(B)`.
    pub fn saint_venant_quotient(&self) -> f64 {
        saint_venant_quotient(self.torsion, self.volume, self.dim)
    }

    /// `|B|^{2/d} λ(B)`.
    pub fn faber_krahn_quotient(&self) -> f64 {
        faber_krahn_quotient(self.lambda, self.volume, self.dim)
    }
}

pub fn saint_venant_quotient(torsion: f64, volume: f64, d: usize) -> f64 {
    torsion / volume.powf((d as f64 + 2.0) / d as f64)
}

pub fn faber_krahn_quotient(lambda: f64, volume: f64, d: usize) -> f64 {
    volume.powf(2.0 / d as f64) * lambda
}

/// Relative tolerances granted to each check. A check passes when its
/// margin is `≥ −tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub polya: f64,
    pub saint_venant: f64,
    pub faber_krahn: f64,
    pub kohler_jobin: f64,
}

impl Tolerances {
    /// For closed-form inputs.
    pub fn exact() -> Self {
        Self { polya: 1e-12, saint_venant: 1e-10, faber_krahn: 1e-10, kohler_jobin: 1e-10 }
    }

    /// For P1 finite elements and grid solvers.
    pub fn discrete() -> Self {
        Self { polya: 1e-3, saint_venant: 5e-3, faber_krahn: 5e-3, kohler_jobin: 1e-3 }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::discrete()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Polya,
    SaintVenant,
    FaberKrahn,
    KohlerJobin,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Polya => "polya",
            Self::SaintVenant => "saint-venant",
            Self::FaberKrahn => "faber-krahn",
            Self::KohlerJobin => "kohler-jobin",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub kind: CheckKind,
    /// Scale-free quantity of the domain.
    pub value: f64,
    /// The bound it is compared to.
    pub bound: f64,
    /// Relative slack, positive when the inequality holds.
    pub margin: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(kind: CheckKind, value: f64, bound: f64, margin: f64, tolerance: f64) -> Self {
        Self { kind, value, bound, margin, tolerance, passed: margin >= -tolerance && value.is_finite() }
    }

    /// Violation beyond ten times the tolerance.
    pub fn hard_failure(&self) -> bool {
        self.margin < -10.0 * self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub dim: usize,
    pub q: f64,
    pub alpha_q: f64,
    pub torsion: f64,
    pub lambda: f64,
    pub volume: f64,
    pub f_q: f64,
    pub ball_f_q: f64,
    pub checks: Vec<Check>,
}

pub const CSV_HEADER: [&str; 11] = [
    "q",
    "alpha_q",
    "T",
    "lambda",
    "volume",
    "F_q",
    "ball_F_q",
    "polya_margin",
    "saint_venant_margin",
    "faber_krahn_margin",
    "kohler_jobin_margin",
];

impl FunctionalReport {
    pub fn check(&self, kind: CheckKind) -> Option<&Check> {
        self.checks.iter().find(|c| c.kind == kind)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// `λT/|Ω|`, which is `F_1`.
    pub fn polya_quotient(&self) -> f64 {
        self.lambda * self.torsion / self.volume
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("FunctionalReport serializes")
    }

    pub fn csv_row(&self) -> Vec<String> {
        let margin = |k| fmt_opt(self.check(k).map(|c| c.margin));
        vec![
            fmt_f64(self.q),
            fmt_f64(self.alpha_q),
            fmt_f64(self.torsion),
            fmt_f64(self.lambda),
            fmt_f64(self.volume),
            fmt_f64(self.f_q),
            fmt_f64(self.ball_f_q),
            margin(CheckKind::Polya),
            margin(CheckKind::SaintVenant),
            margin(CheckKind::FaberKrahn),
            margin(CheckKind::KohlerJobin),
        ]
    }
}

/// `F_q` against the analytic ball with discrete-solver tolerances.
pub fn f_q(torsion: f64, lambda: f64, volume: f64, q: f64, d: usize) -> Result<FunctionalReport> {
    f_q_against(torsion, lambda, volume, q, &BallReference::analytic(d)?, Tolerances::default())
}

/// `F_q` plus the Pólya, Saint-Venant, Faber-Krahn and (for `q ≤ 2/(d+2)`)
/// Kohler-Jobin checks relative to `ball`.
pub fn f_q_against(
    torsion: f64,
    lambda: f64,
    volume: f64,
    q: f64,
    ball: &BallReference,
    tol: Tolerances,
) -> Result<FunctionalReport> {
    for (name, v) in [("T", torsion), ("lambda", lambda), ("volume", volume), ("q", q)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")));
        }
    }
    let d = ball.dim;
    let value = f_q_value(torsion, lambda, volume, q, d);
    let ball_f_q = ball.f_q(q);

    let polya = lambda * torsion / volume;
    let sv = saint_venant_quotient(torsion, volume, d);
    let fk = faber_krahn_quotient(lambda, volume, d);
    let mut checks = vec![
        Check::new(CheckKind::Polya, polya, 1.0, 1.0 - polya, tol.polya),
        Check::new(CheckKind::SaintVenant, sv, ball.saint_venant_quotient(), 1.0 - sv / ball.saint_venant_quotient(), tol.saint_venant),
        Check::new(CheckKind::FaberKrahn, fk, ball.faber_krahn_quotient(), fk / ball.faber_krahn_quotient() - 1.0, tol.faber_krahn),
    ];
    if q <= kohler_jobin_exponent(d) + 1e-12 {
        checks.push(Check::new(CheckKind::KohlerJobin, value, ball_f_q, value / ball_f_q - 1.0, tol.kohler_jobin));
    }
    Ok(FunctionalReport {
        dim: d,
        q,
        alpha_q: alpha(q, d),
        torsion,
        lambda,
        volume,
        f_q: value,
        ball_f_q,
        checks,
    })
}

/// Relative Kohler-Jobin margin `F_q(Ω)/F_q(B) − 1`.
pub fn kohler_jobin_check(report: &FunctionalReport) -> Result<f64> {
    let max = kohler_jobin_exponent(report.dim);
    if report.q > max + 1e-12 {
        return Err(Error::ExponentOutOfRange { q: report.q, max });
    }
    Ok(report.f_q / report.ball_f_q - 1.0)
}

/// `β = (1 + c₁/c₂)^{α₁−α₂}`.
pub fn lemma_beta(c1: f64, c2: f64, alpha1: f64, alpha2: f64) -> Result<f64> {
    if !(0.0 < c1 && c1 < c2 && c2.is_finite()) {
        return Err(Error::DomainError(format!("need 0 < c1 < c2 < inf, got c1={c1}, c2={c2}")));
    }
    if !(1.0 < alpha1 && alpha1 < alpha2 && alpha2.is_finite()) {
        return Err(Error::DomainError(format!("need 1 < alpha1 < alpha2 < inf, got {alpha1}, {alpha2}")));
    }
    Ok((1.0 + c1 / c2).powf(alpha1 - alpha2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaSuite {
    pub beta: f64,
    pub samples: usize,
    pub violations: usize,
    /// Largest `lhs / (β · max)` seen; at most 1 when the bound holds.
    pub worst_ratio: f64,
}

/// Samples `(a, b, c, d)` uniformly in `(c₁, c₂)⁴` and tests
/// `(a+b)^{α₁}/(c+d)^{α₂} ≤ β max{a^{α₁}/c^{α₂}, b^{α₁}/d^{α₂}}`.
pub fn lemma_beta_suite(c1: f64, c2: f64, alpha1: f64, alpha2: f64, samples: usize, seed: u64) -> Result<LemmaSuite> {
    let beta = lemma_beta(c1, c2, alpha1, alpha2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || loop {
        let v = rng.gen_range(c1..c2);
        if v > c1 {
            return v;
        }
    };
    let (mut violations, mut worst) = (0, 0.0_f64);
    for _ in 0..samples {
        let (a, b, c, d) = (draw(), draw(), draw(), draw());
        let lhs = (a + b).powf(alpha1) / (c + d).powf(alpha2);
        let rhs = beta * (a.powf(alpha1) / c.powf(alpha2)).max(b.powf(alpha1) / d.powf(alpha2));
        let r = lhs / rhs;
        worst = worst.max(r);
        if r > 1.0 + 1e-12 {
            violations += 1;
        }
    }
    Ok(LemmaSuite { beta, samples, violations, worst_ratio: worst })
}

/// `x^q − y^q − q y^{q−1}(y − x)`, exactly as the elementary inequality is
/// usually displayed. Nonnegative whenever `x ≥ y`; negative for every
/// `x < y`.
pub fn convexity_gap(x: f64, y: f64, q: f64) -> f64 {
    x.powf(q) - y.powf(q) - q * y.powf(q - 1.0) * (y - x)
}

/// `x^q − y^q − q y^{q−1}(x − y)`, the tangent-line (convexity) form,
/// nonnegative for all `x, y ≥ 0`, `q > 1`.
pub fn tangent_gap(x: f64, y: f64, q: f64) -> f64 {
    x.powf(q) - y.powf(q) - q * y.powf(q - 1.0) * (x - y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexitySuite {
    pub samples: usize,
    /// Samples where the displayed form is negative.
    pub literal_negative: usize,
    /// Of those, how many had `x ≥ y`.
    pub literal_negative_with_x_ge_y: usize,
    /// Samples with `x < y` where the displayed form still held.
    pub literal_nonnegative_with_x_lt_y: usize,
    pub tangent_negative: usize,
}

/// Records the sign of both gaps over `x, y ∈ [0, 10]`, `q ∈ (1, 10]`.
pub fn convexity_suite(samples: usize, seed: u64) -> ConvexitySuite {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ConvexitySuite {
        samples,
        literal_negative: 0,
        literal_negative_with_x_ge_y: 0,
        literal_nonnegative_with_x_lt_y: 0,
        tangent_negative: 0,
    };
    for _ in 0..samples {
        let x: f64 = rng.gen_range(0.0..=10.0);
        let y: f64 = rng.gen_range(0.0..=10.0);
        let q: f64 = 10.0 - rng.gen_range(0.0..9.0);
        let scale = 1e-12 * (1.0 + x.powf(q) + y.powf(q));
        let lit = convexity_gap(x, y, q);
        if lit < -scale {
            out.literal_negative += 1;
            if x >= y {
                out.literal_negative_with_x_ge_y += 1;
            }
        } else if x < y {
            out.literal_nonnegative_with_x_lt_y += 1;
        }
        if tangent_gap(x, y, q) < -scale {
            out.tangent_negative += 1;
        }
    }
    out
}
