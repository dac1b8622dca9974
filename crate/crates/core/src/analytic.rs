//! Closed-form reference values for balls, boxes and thin slabs.
//!
//! Everything here is a pure function of its inputs and is used as the
//! oracle for the numerical backends.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default odd-mode cutoff for the rectangle torsion series.
pub const DEFAULT_TORSION_MODES: usize = 99;

const BESSEL_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub dim: usize,
    pub radius: f64,
}

impl BallSpec {
    pub fn new(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("ball dimension must be >= 1".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!("ball radius must be > 0, got {radius}")));
        }
        Ok(Self { dim, radius })
    }

    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(dim, 1.0)
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        Self::new(self.dim, self.radius * t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    sides: Vec<f64>,
}

impl BoxSpec {
    pub fn new(sides: Vec<f64>) -> Result<Self> {
        if sides.is_empty() {
            return Err(Error::InvalidInput("box needs at least one side".into()));
        }
        if let Some(bad) = sides.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidInput(format!("box sides must be > 0, got {bad}")));
        }
        Ok(Self { sides })
    }

    pub fn sides(&self) -> &[f64] {
        &self.sides
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn volume(&self) -> f64 {
        self.sides.iter().product()
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        Self::new(self.sides.iter().map(|a| a * t).collect())
    }
}

/// Volume of the unit ball in `R^d`, via `ω_d = ω_{d−2} · 2π/d`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        0 => 1.0,
        1 => 2.0,
        2 => PI,
        d => unit_ball_volume(d - 2) * 2.0 * PI / d as f64,
    }
}

pub fn ball_volume(spec: &BallSpec) -> f64 {
    unit_ball_volume(spec.dim) * spec.radius.powi(spec.dim as i32)
}

/// `T(B_R) = ω_d R^{d+2} / (d(d+2))`, from the radial torsion function
/// `w = (R² − |x|²)/(2d)`.
pub fn ball_torsion(spec: &BallSpec) -> f64 {
    let d = spec.dim as f64;
    unit_ball_volume(spec.dim) * spec.radius.powi(spec.dim as i32 + 2) / (d * (d + 2.0))
}

/// `λ(B_R) = j²_{d/2−1,1} / R²`.
pub fn ball_eigenvalue(spec: &BallSpec) -> f64 {
    let j = bessel_first_zero(spec.dim as f64 / 2.0 - 1.0);
    j * j / (spec.radius * spec.radius)
}

/// Bessel function of the first kind with the prefactor `(x/2)^ν / Γ(ν+1)`
/// divided out:
///
/// ```text
/// S_ν(x) = Σ_k (−x²/4)^k / (k! (ν+1)_k)
/// ```
///
/// so that `J_ν(x) = (x/2)^ν S_ν(x) / Γ(ν+1)`. For `ν > −1` and `x > 0` the
/// prefactor is positive, hence `S_ν` and `J_ν` share their positive zeros.
pub fn bessel_j_reduced(nu: f64, x: f64) -> f64 {
    let z = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= z / (k * (nu + k));
        sum += term;
        if term.abs() <= f64::EPSILON * 1e-2 * sum.abs().max(1e-300) && k > 2.0 * x {
            break;
        }
        if k > 500.0 {
            break;
        }
    }
    sum
}

/// First positive zero `j_{ν,1}` of `J_ν`, for `ν > −1`.
///
/// Bracketed on `[2, 3]` for `ν = 0`, otherwise by a forward scan from the
/// origin, then refined by bisection.
pub fn bessel_first_zero(nu: f64) -> f64 {
    assert!(nu > -1.0, "bessel_first_zero requires ν > −1");
    let f = |x: f64| bessel_j_reduced(nu, x);
    let (lo, hi) = if nu == 0.0 {
        (2.0, 3.0)
    } else {
        let step = 0.05;
        let mut a = step;
        let mut fa = f(a);
        loop {
            let b = a + step;
            let fb = f(b);
            if fa.signum() != fb.signum() {
                break (a, b);
            }
            a = b;
            fa = fb;
        }
    };
    bisect(f, lo, hi, BESSEL_TOL)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    debug_assert!(flo * f(hi) <= 0.0, "bisection bracket does not change sign");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol * mid.abs().max(1.0) {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `λ(box) = π² Σ 1/a_i²`.
pub fn box_eigenvalue(spec: &BoxSpec) -> f64 {
    PI * PI * spec.sides.iter().map(|a| 1.0 / (a * a)).sum::<f64>()
}

/// Truncated torsion series of a box with a rigorous tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorsionSeries {
    pub value: f64,
    /// Upper bound on `T − value` (all omitted terms are positive).
    pub tail_bound: f64,
    pub modes: usize,
}

/// Torsional rigidity of a box by the product sine series over odd modes,
/// truncated at `n_i ≤ modes` in every direction.
///
/// For a rectangle `(a, b)` this is
/// `Σ 64 a³b³ / (π⁶ m²n² (m²b² + n²a²))`; the general term is
/// `Π_i 8a_i/(π² n_i²) / (π² Σ_i n_i²/a_i²)`.
pub fn box_torsion(spec: &BoxSpec, modes: usize) -> Result<TorsionSeries> {
    if modes == 0 || modes.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("odd-mode cutoff must be odd and >= 1, got {modes}")));
    }
    let d = spec.dim();
    let sides = &spec.sides;
    let odd: Vec<f64> = (1..=modes).step_by(2).map(|n| n as f64).collect();
    let per_axis = odd.len();
    let total = per_axis.checked_pow(d as u32).ok_or_else(|| {
        Error::InvalidInput(format!("series with {per_axis}^{d} terms is too large"))
    })?;

    let pi2 = PI * PI;
    let mut value = 0.0;
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        let mut prod = 1.0;
        let mut lap = 0.0;
        for (i, &k) in idx.iter().enumerate() {
            let n = odd[k];
            prod *= 8.0 * sides[i] / (pi2 * n * n);
            lap += n * n / (sides[i] * sides[i]);
        }
        value += prod / (pi2 * lap);
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < per_axis {
                break;
            }
            *slot = 0;
        }
    }

    // Omitted terms have n_j > N for some axis j. Bounding the Laplacian
    // factor by its j-th term and summing the free axes exactly
    // (Σ_odd 1/n² = π²/8) leaves Σ_{n>N odd} 1/n⁴ ≤ 1/(6N³).
    let n = modes as f64;
    let tail4 = 1.0 / (6.0 * n * n * n);
    let vol = spec.volume();
    let tail_bound = sides
        .iter()
        .map(|a| vol * 8.0 * a * a / (pi2 * pi2) * tail4)
        .sum();
    Ok(TorsionSeries { value, tail_bound, modes })
}

/// `lim_{ε→0} F_1(]0,1[^{d−1} × ]0,ε[) = π²/12`.
pub fn slab_f1_limit() -> f64 {
    PI * PI / 12.0
}

/// `F_1` of the 2D slab `(1, ε)` from the series oracles. The mode cutoff
/// grows like `10/ε` so that the long direction is resolved.
pub fn slab_f1(eps: f64) -> Result<f64> {
    let spec = BoxSpec::new(vec![1.0, eps])?;
    let mut modes = ((10.0 / eps).ceil() as usize).max(DEFAULT_TORSION_MODES);
    if modes.is_multiple_of(2) {
        modes += 1;
    }
    let t = box_torsion(&spec, modes)?.value;
    Ok(box_eigenvalue(&spec) * t / spec.volume())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallF1Bound {
    pub dim: usize,
    /// `F_1(B_1) = λ(B_1)/(d(d+2))`.
    pub f1: f64,
    /// `(d+4)/(2(d+2))`, from the test function `1 − |x|²`.
    pub bound: f64,
}

impl BallF1Bound {
    pub fn holds(&self) -> bool {
        self.f1 <= self.bound
    }
}

pub fn ball_f1_bound(dim: usize) -> Result<BallF1Bound> {
    if dim < 2 {
        return Err(Error::InvalidInput(format!("ball_f1_bound needs d >= 2, got {dim}")));
    }
    let d = dim as f64;
    let ball = BallSpec::unit(dim)?;
    let f1 = ball_eigenvalue(&ball) / (d * (d + 2.0));
    let bound = (d + 4.0) / (2.0 * (d + 2.0));
    let out = BallF1Bound { dim, f1, bound };
    assert!(out.holds(), "F_1(B_1) = {f1} exceeds ({dim}+4)/(2({dim}+2)) = {bound}");
    Ok(out)
}

/// `F_q` of the unit ball (any ball, by scale invariance).
pub fn ball_fq(dim: usize, q: f64) -> f64 {
    let ball = BallSpec { dim, radius: 1.0 };
    let d = dim as f64;
    let alpha = (q * (d + 2.0) - 2.0) / d;
    ball_eigenvalue(&ball) * ball_torsion(&ball).powf(q) / ball_volume(&ball).powf(alpha)
}
