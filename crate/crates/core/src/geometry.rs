//! Star-shaped planar domains `ρ(θ) = 1 + φ(θ)` with a finite Fourier
//! boundary, and their structured polar triangulations.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of boundary samples used for positivity and sup-norm checks.
pub const BOUNDARY_SAMPLES: usize = 16_384;
const MOMENT_NODES: usize = 2048;
const HOLDER_PAIRS: usize = 2048;

/// Boundary radius `ρ(θ) = 1 + a_0 + Σ_k (a_k cos kθ + b_k sin kθ)`.
///
/// `cos` holds `a_0..a_K`, `sin` holds `b_1..b_K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarDomain {
    cos: Vec<f64>,
    sin: Vec<f64>,
    #[serde(default)]
    normalized: bool,
}

impl StarDomain {
    pub fn new(cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        let dom = Self::raw(cos, sin)?;
        dom.check_star_shaped()?;
        Ok(dom)
    }

    fn raw(mut cos: Vec<f64>, mut sin: Vec<f64>) -> Result<Self> {
        if cos.iter().chain(&sin).any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("Fourier coefficients must be finite".into()));
        }
        let order = (cos.len().max(1) - 1).max(sin.len());
        cos.resize(order + 1, 0.0);
        sin.resize(order, 0.0);
        Ok(Self { cos, sin, normalized: false })
    }

    pub fn disk() -> Self {
        Self { cos: vec![0.0], sin: vec![], normalized: true }
    }

    /// `φ = amp · cos(kθ)`.
    pub fn mode(k: usize, amp: f64) -> Result<Self> {
        let mut cos = vec![0.0; k + 1];
        cos[k] += amp;
        Self::new(cos, vec![])
    }

    /// Normalized domain with `a_k, b_k` (`2 ≤ k ≤ modes`) uniform in
    /// `[−amp, amp]`. Draws that are not star-shaped are rejected.
    pub fn random(modes: usize, amp: f64, seed: u64) -> Result<Self> {
        if modes < 2 || !(amp >= 0.0 && amp.is_finite()) {
            return Err(Error::InvalidInput(format!("random domain needs K >= 2 and amp >= 0, got {modes}, {amp}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..1000 {
            let mut cos = vec![0.0; modes + 1];
            let mut sin = vec![0.0; modes];
            for k in 2..=modes {
                cos[k] = rng.gen_range(-amp..=amp);
                sin[k - 1] = rng.gen_range(-amp..=amp);
            }
            if let Ok(d) = Self::new(cos, sin).and_then(|d| d.normalize()) {
                return Ok(d);
            }
        }
        Err(Error::InvalidInput(format!("no star-shaped draw for K = {modes}, amp = {amp}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: Self = serde_json::from_str(text)?;
        let normalized = parsed.normalized;
        let mut dom = Self::new(parsed.cos, parsed.sin)?;
        if normalized {
            dom = dom.normalize()?;
        }
        Ok(dom)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("StarDomain serializes")
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    pub fn order(&self) -> usize {
        self.sin.len()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `φ^{(n)}(θ)` for `n ∈ {0, 1, 2, 3}`.
    pub fn phi_derivative(&self, theta: f64, n: u32) -> f64 {
        let mut v = if n == 0 { self.cos[0] } else { 0.0 };
        let (s1, c1) = theta.sin_cos();
        let (mut s, mut c) = (0.0, 1.0);
        for k in 1..=self.order() {
            let kf = k as f64;
            // (cos kθ, sin kθ) by angle addition.
            (s, c) = (s * c1 + c * s1, c * c1 - s * s1);
            let (a, b) = (self.cos[k], self.sin[k - 1]);
            let scale = kf.powi(n as i32);
            v += scale
                * match n % 4 {
                    0 => a * c + b * s,
                    1 => -a * s + b * c,
                    2 => -a * c - b * s,
                    _ => a * s - b * c,
                };
        }
        v
    }

    pub fn phi(&self, theta: f64) -> f64 {
        self.phi_derivative(theta, 0)
    }

    pub fn rho(&self, theta: f64) -> f64 {
        1.0 + self.phi(theta)
    }

    pub fn boundary_point(&self, theta: f64) -> [f64; 2] {
        let r = self.rho(theta);
        [r * theta.cos(), r * theta.sin()]
    }

    pub fn check_star_shaped(&self) -> Result<()> {
        let (theta, min_rho) = (0..BOUNDARY_SAMPLES)
            .map(|i| {
                let t = TAU * i as f64 / BOUNDARY_SAMPLES as f64;
                (t, self.rho(t))
            })
            .fold((0.0, f64::INFINITY), |acc, p| if p.1 < acc.1 { p } else { acc });
        if min_rho > 0.0 {
            Ok(())
        } else {
            Err(Error::NonStarShaped { min_rho, theta })
        }
    }

    /// `½ ∫ ρ² dθ = π(1 + a_0)² + (π/2) Σ (a_k² + b_k²)`, exact.
    pub fn area(&self) -> Result<f64> {
        self.check_star_shaped()?;
        Ok(self.area_unchecked())
    }

    fn area_unchecked(&self) -> f64 {
        let a0 = 1.0 + self.cos[0];
        let rest: f64 = self.cos[1..].iter().chain(&self.sin).map(|c| c * c).sum();
        PI * a0 * a0 + 0.5 * PI * rest
    }

    /// First moment `∫_Ω x dx = ⅓ ∫ ρ³ (cos θ, sin θ) dθ`. The trapezoid rule
    /// is exact here because the integrand is a trigonometric polynomial of
    /// degree `3K + 1`, below the node count.
    pub fn barycenter(&self) -> Result<[f64; 2]> {
        self.check_star_shaped()?;
        Ok(self.moment_unchecked())
    }

    fn moment_nodes(&self) -> usize {
        MOMENT_NODES.max(4 * (3 * self.order() + 2))
    }

    fn moment_unchecked(&self) -> [f64; 2] {
        let n = self.moment_nodes();
        let w = TAU / n as f64 / 3.0;
        let mut m = [0.0; 2];
        for i in 0..n {
            let t = TAU * i as f64 / n as f64;
            let r3 = self.rho(t).powi(3);
            m[0] += r3 * t.cos();
            m[1] += r3 * t.sin();
        }
        [m[0] * w, m[1] * w]
    }

    /// Jacobian of the first moment with respect to `(a_1, b_1)`.
    fn moment_jacobian(&self) -> [[f64; 2]; 2] {
        let n = self.moment_nodes();
        let w = TAU / n as f64;
        let mut j = [[0.0; 2]; 2];
        for i in 0..n {
            let t = TAU * i as f64 / n as f64;
            let r2 = self.rho(t).powi(2);
            let (s, c) = t.sin_cos();
            j[0][0] += r2 * c * c;
            j[0][1] += r2 * c * s;
            j[1][0] += r2 * s * c;
            j[1][1] += r2 * s * s;
        }
        j.map(|row| row.map(|v| v * w))
    }

    /// Dilation `ρ → tρ`.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::InvalidInput(format!("scale factor must be > 0, got {t}")));
        }
        let mut cos: Vec<f64> = self.cos.iter().map(|a| a * t).collect();
        cos[0] = t * (1.0 + self.cos[0]) - 1.0;
        let sin = self.sin.iter().map(|b| b * t).collect();
        Ok(Self { cos, sin, normalized: false })
    }

    /// `φ(θ) → φ(θ − ψ)`.
    pub fn rotated(&self, psi: f64) -> Self {
        let mut out = self.clone();
        for k in 1..=self.order() {
            let (s, c) = (k as f64 * psi).sin_cos();
            let (a, b) = (self.cos[k], self.sin[k - 1]);
            out.cos[k] = a * c - b * s;
            out.sin[k - 1] = a * s + b * c;
        }
        out
    }

    /// `φ → −φ`.
    pub fn negated(&self) -> Result<Self> {
        Self::new(self.cos.iter().map(|a| -a).collect(), self.sin.iter().map(|b| -b).collect())
    }

    /// Rescales to area `π` and centers the barycenter at the origin.
    ///
    /// The first harmonics are removed, then re-solved by Newton's method
    /// so that the first moment vanishes; the area is fixed last by a
    /// dilation, which keeps the moment at zero.
    pub fn normalize(&self) -> Result<Self> {
        self.check_star_shaped()?;
        let mut dom = self.clone();
        if dom.order() >= 1 {
            dom.cos[1] = 0.0;
            dom.sin[0] = 0.0;
        } else {
            dom.cos.push(0.0);
            dom.sin.push(0.0);
        }
        for _ in 0..50 {
            let m = dom.moment_unchecked();
            if m[0].abs().max(m[1].abs()) <= 1e-15 {
                break;
            }
            let j = dom.moment_jacobian();
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det.abs() < 1e-300 {
                return Err(Error::DomainError("singular barycenter Jacobian".into()));
            }
            let da = (j[1][1] * m[0] - j[0][1] * m[1]) / det;
            let db = (j[0][0] * m[1] - j[1][0] * m[0]) / det;
            dom.cos[1] -= da;
            dom.sin[0] -= db;
        }
        dom.check_star_shaped()?;
        let m = dom.moment_unchecked();
        if m[0].hypot(m[1]) > 1e-10 {
            return Err(Error::DomainError(format!(
                "barycenter normalization stalled at |m| = {:e}",
                m[0].hypot(m[1])
            )));
        }
        if self.order() == 0 {
            dom.cos.truncate(1);
            dom.sin.clear();
        }
        let t = (PI / dom.area_unchecked()).sqrt();
        let mut out = dom.scaled(t)?;
        out.normalized = true;
        Ok(out)
    }

    /// `‖φ‖²_{H^{1/2}} = 2π (a_0² + ½ Σ_k (1 + k)(a_k² + b_k²))`.
    pub fn h_half_norm_sq(&self) -> f64 {
        let mut s = self.cos[0] * self.cos[0];
        for k in 1..=self.order() {
            let (a, b) = (self.cos[k], self.sin[k - 1]);
            s += 0.5 * (1.0 + k as f64) * (a * a + b * b);
        }
        TAU * s
    }

    /// Membership test for the nearly spherical class: `‖φ‖_∞ ≤ 1/2`, a
    /// sampled `C^{2,γ}` surrogate `≤ delta`, and area `π` with zero
    /// barycenter.
    pub fn in_class(&self, delta: f64, gamma: f64) -> ClassReport {
        let mut sup = [0.0_f64; 3];
        for i in 0..BOUNDARY_SAMPLES {
            let t = TAU * i as f64 / BOUNDARY_SAMPLES as f64;
            for (n, s) in sup.iter_mut().enumerate() {
                *s = s.max(self.phi_derivative(t, n as u32).abs());
            }
        }
        let mut holder: f64 = 0.0;
        for i in 0..HOLDER_PAIRS {
            let t = TAU * i as f64 / HOLDER_PAIRS as f64;
            let h = PI / f64::from(1u32 << (i % 11));
            let diff = (self.phi_derivative(t + h, 2) - self.phi_derivative(t, 2)).abs();
            holder = holder.max(diff / h.powf(gamma));
        }
        let surrogate = sup.iter().sum::<f64>() + holder;
        let area = self.area_unchecked();
        let m = self.moment_unchecked();
        let normalized = (area - PI).abs() <= 1e-10 * PI && m[0].hypot(m[1]) <= 1e-8;
        ClassReport {
            member: sup[0] <= 0.5 && surrogate <= delta && normalized,
            linf: sup[0],
            surrogate,
            normalized,
        }
    }

    /// Structured polar mesh: ring `i` (radius `i/n_radial` in the
    /// reference disk) carries `i · n_angular` nodes, the center is a fan,
    /// and `(r, θ) ↦ r ρ(θ) (cos θ, sin θ)` maps it onto the domain.
    pub fn triangulate(&self, n_radial: usize, n_angular: usize) -> Result<Mesh> {
        if n_radial < 2 {
            return Err(Error::InvalidInput(format!("n_radial must be >= 2, got {n_radial}")));
        }
        if n_angular < 8 {
            return Err(Error::InvalidInput(format!("n_angular must be >= 8, got {n_angular}")));
        }
        self.check_star_shaped()?;

        let m = n_angular;
        let ring_start = |i: usize| 1 + m * (i - 1) * i / 2;
        let n_nodes = ring_start(n_radial + 1);
        let mut nodes = Vec::with_capacity(n_nodes);
        let mut boundary = vec![false; n_nodes];
        nodes.push([0.0, 0.0]);
        for i in 1..=n_radial {
            let count = i * m;
            let r = i as f64 / n_radial as f64;
            for j in 0..count {
                let theta = TAU * j as f64 / count as f64;
                let rho = if i == n_radial { self.rho(theta) } else { r * self.rho(theta) };
                nodes.push([rho * theta.cos(), rho * theta.sin()]);
            }
        }
        for flag in boundary.iter_mut().skip(ring_start(n_radial)) {
            *flag = true;
        }

        let mut triangles = Vec::with_capacity(m * n_radial * n_radial);
        for j in 0..m {
            triangles.push([0, ring_start(1) + j, ring_start(1) + (j + 1) % m]);
        }
        for i in 2..=n_radial {
            let (inner, outer) = (ring_start(i - 1), ring_start(i));
            let (ni, no) = ((i - 1) * m, i * m);
            let (mut j, mut k) = (0usize, 0usize);
            while j < ni || k < no {
                // Advance whichever ring has the smaller next angle:
                // (k+1)/no <= (j+1)/ni, compared in integers.
                let take_outer = k < no && (j == ni || (k + 1) * ni <= (j + 1) * no);
                if take_outer {
                    triangles.push([inner + j % ni, outer + k, outer + (k + 1) % no]);
                    k += 1;
                } else {
                    triangles.push([inner + j, outer + k % no, inner + (j + 1) % ni]);
                    j += 1;
                }
            }
        }

        let mesh = Mesh::from_parts(nodes, triangles, boundary);
        if let Some((index, area)) = mesh
            .triangles
            .iter()
            .enumerate()
            .map(|(i, _)| (i, mesh.triangle_area(i)))
            .find(|&(_, a)| a <= 0.0)
        {
            return Err(Error::DegenerateTriangle { index, area });
        }
        Ok(mesh)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub member: bool,
    pub linf: f64,
    /// `‖φ‖_∞ + ‖φ′‖_∞ + ‖φ″‖_∞ + [φ″]_γ`, sampled.
    pub surrogate: f64,
    pub normalized: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<bool>,
    /// Longest edge.
    pub h: f64,
}

impl Mesh {
    pub fn from_parts(nodes: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>, boundary: Vec<bool>) -> Self {
        let mut h: f64 = 0.0;
        for t in &triangles {
            for e in 0..3 {
                let (p, q) = (nodes[t[e]], nodes[t[(e + 1) % 3]]);
                h = h.max((p[0] - q[0]).hypot(p[1] - q[1]));
            }
        }
        Self { nodes, triangles, boundary, h }
    }

    /// Signed area of triangle `i`.
    pub fn triangle_area(&self, i: usize) -> f64 {
        let [a, b, c] = self.triangles[i].map(|k| self.nodes[k]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|i| self.triangle_area(i)).sum()
    }

    /// `∫ x dx` over the polygonal mesh.
    pub fn first_moment(&self) -> [f64; 2] {
        let mut m = [0.0; 2];
        for (i, t) in self.triangles.iter().enumerate() {
            let a = self.triangle_area(i);
            for d in 0..2 {
                m[d] += a * t.iter().map(|&k| self.nodes[k][d]).sum::<f64>() / 3.0;
            }
        }
        m
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary.iter().filter(|b| **b).count()
    }

    /// Same topology, coordinates multiplied by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        Self {
            nodes: self.nodes.iter().map(|p| [p[0] * t, p[1] * t]).collect(),
            triangles: self.triangles.clone(),
            boundary: self.boundary.clone(),
            h: self.h * t,
        }
    }

    /// Returns `(interior edges, boundary edges)`, or an error if some edge
    /// is shared by more than two triangles or a boundary edge touches an
    /// interior node.
    pub fn edge_census(&self) -> Result<(usize, usize)> {
        use std::collections::HashMap;
        let mut count: HashMap<(usize, usize), u32> = HashMap::new();
        for t in &self.triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let (mut interior, mut boundary) = (0, 0);
        for (&(a, b), &c) in &count {
            match c {
                2 => interior += 1,
                1 if self.boundary[a] && self.boundary[b] => boundary += 1,
                _ => {
                    return Err(Error::InvalidInput(format!("edge ({a}, {b}) is shared by {c} triangles")));
                }
            }
        }
        Ok((interior, boundary))
    }

    /// ASCII OFF listing (`z = 0`).
    pub fn to_off(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "OFF");
        let _ = writeln!(s, "{} {} 0", self.nodes.len(), self.triangles.len());
        for p in &self.nodes {
            let _ = writeln!(s, "{:.17e} {:.17e} 0", p[0], p[1]);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Oracle for ½∫ρ² by a dense midpoint rule, independent of the
    // closed-form coefficient expression.
    fn area_by_quadrature(dom: &StarDomain) -> f64 {
        let n = 100_003;
        (0..n)
            .map(|i| dom.rho(TAU * (i as f64 + 0.5) / n as f64).powi(2))
            .sum::<f64>()
            * 0.5
            * TAU
            / n as f64
    }

    #[test]
    fn area_examples() {
        assert_relative_eq!(StarDomain::disk().area().unwrap(), PI);
        let c = StarDomain::new(vec![0.3], vec![]).unwrap();
        assert_relative_eq!(c.area().unwrap(), PI * 1.69, max_relative = 1e-14);
        let m3 = StarDomain::mode(3, 0.1).unwrap();
        assert_relative_eq!(m3.area().unwrap(), PI * 1.005, max_relative = 1e-14);
        assert_relative_eq!(m3.area().unwrap(), area_by_quadrature(&m3), max_relative = 1e-12);
        let mixed = StarDomain::new(vec![0.05, 0.1, -0.07, 0.02], vec![0.03, 0.04, -0.01]).unwrap();
        assert_relative_eq!(mixed.area().unwrap(), area_by_quadrature(&mixed), max_relative = 1e-12);
    }

    #[test]
    fn non_star_shaped_is_rejected() {
        let err = StarDomain::new(vec![-1.2], vec![]).unwrap_err();
        assert!(matches!(err, Error::NonStarShaped { .. }));
        assert!(StarDomain::mode(2, 1.5).is_err());
    }

    #[test]
    fn barycenter_examples() {
        let z = StarDomain::disk().barycenter().unwrap();
        assert!(z[0].abs() < 1e-15 && z[1].abs() < 1e-15);
        let m2 = StarDomain::mode(2, 0.1).unwrap().barycenter().unwrap();
        assert!(m2[0].abs() < 1e-15 && m2[1].abs() < 1e-15);
        let m1 = StarDomain::mode(1, 0.1).unwrap().barycenter().unwrap();
        // ⅓∫(1 + 0.1 cos θ)³ cos θ dθ = π (0.1 + 0.1³/4)
        assert_relative_eq!(m1[0], PI * (0.1 + 0.00025), max_relative = 1e-13);
        assert!(m1[0] > 0.0 && m1[1].abs() < 1e-15);
    }

    #[test]
    fn normalize_examples() {
        let d = StarDomain::disk().normalize().unwrap();
        assert_eq!(d.cos_coeffs(), &[0.0]);
        let c = StarDomain::new(vec![0.5], vec![]).unwrap().normalize().unwrap();
        assert!(c.cos_coeffs()[0].abs() < 1e-15);
        let m2 = StarDomain::mode(2, 0.1).unwrap().normalize().unwrap();
        assert_relative_eq!(m2.cos_coeffs()[2], 0.1 / 1.005f64.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(m2.area().unwrap(), PI, max_relative = 1e-12);
        assert!(m2.is_normalized());
    }

    #[test]
    fn normalize_centers_coupled_harmonics() {
        // cos 2θ · cos 3θ feeds the first moment; the projection alone leaves it nonzero.
        let dom = StarDomain::new(vec![0.0, 0.2, 0.1, 0.1], vec![0.1, 0.0, 0.05]).unwrap();
        let n = dom.normalize().unwrap();
        let m = n.barycenter().unwrap();
        assert!(m[0].hypot(m[1]) <= 1e-8, "{m:?}");
        assert_relative_eq!(n.area().unwrap(), PI, max_relative = 1e-10);
        let again = n.normalize().unwrap();
        for (a, b) in n.cos_coeffs().iter().zip(again.cos_coeffs()) {
            assert!((a - b).abs() <= 1e-12);
        }
        for (a, b) in n.sin_coeffs().iter().zip(again.sin_coeffs()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn h_half_norm_examples() {
        assert_eq!(StarDomain::disk().h_half_norm_sq(), 0.0);
        let c1 = StarDomain::raw(vec![0.0, 1.0], vec![]).unwrap();
        assert_relative_eq!(c1.h_half_norm_sq(), TAU, max_relative = 1e-15);
        let dom = StarDomain::new(vec![0.01, 0.0, 0.05], vec![0.0, 0.02]).unwrap();
        let doubled = StarDomain::new(vec![0.02, 0.0, 0.1], vec![0.0, 0.04]).unwrap();
        assert_relative_eq!(doubled.h_half_norm_sq(), 4.0 * dom.h_half_norm_sq(), max_relative = 1e-14);
    }

    #[test]
    fn class_examples() {
        let disk = StarDomain::disk().in_class(1e-6, 0.5);
        assert!(disk.member);
        assert_eq!(disk.surrogate, 0.0);
        let fat = StarDomain::new(vec![0.6], vec![]).unwrap().in_class(10.0, 0.5);
        assert!(!fat.member);
        assert!((fat.linf - 0.6).abs() < 1e-15);
        let small = StarDomain::mode(2, 1e-3).unwrap().normalize().unwrap().in_class(0.1, 0.5);
        assert!(small.member, "{small:?}");
        assert!(small.surrogate < 0.05);
    }

    #[test]
    fn disk_mesh_layout() {
        let mesh = StarDomain::disk().triangulate(2, 8).unwrap();
        assert_eq!(mesh.boundary_count(), 16);
        assert_eq!(mesh.nodes.len(), 1 + 8 + 16);
        assert_eq!(mesh.triangles.len(), 8 * 4);
        let (_, boundary_edges) = mesh.edge_census().unwrap();
        assert_eq!(boundary_edges, 16);
        for (p, b) in mesh.nodes.iter().zip(&mesh.boundary) {
            if *b {
                assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn boundary_nodes_lie_on_the_curve() {
        let dom = StarDomain::new(vec![0.0, 0.0, 0.1, 0.05], vec![0.0, 0.02, -0.04]).unwrap();
        let mesh = dom.triangulate(6, 8).unwrap();
        for (p, b) in mesh.nodes.iter().zip(&mesh.boundary) {
            if *b {
                let theta = p[1].atan2(p[0]);
                assert!((p[0].hypot(p[1]) - dom.rho(theta)).abs() < 1e-12);
            }
        }
        mesh.edge_census().unwrap();
        assert!((0..mesh.triangles.len()).all(|i| mesh.triangle_area(i) > 0.0));
    }

    #[test]
    fn mesh_area_and_moment_converge_second_order() {
        let dom = StarDomain::new(vec![0.0, 0.1, 0.12, -0.05], vec![0.06, 0.0, 0.03]).unwrap();
        let exact_a = dom.area().unwrap();
        let exact_m = dom.barycenter().unwrap();
        let levels = [4usize, 8, 16, 32];
        let errs: Vec<(f64, f64, f64)> = levels
            .iter()
            .map(|&n| {
                let m = dom.triangulate(n, 8).unwrap();
                let fm = m.first_moment();
                (m.h, (m.area() - exact_a).abs(), (fm[0] - exact_m[0]).hypot(fm[1] - exact_m[1]))
            })
            .collect();
        for w in errs.windows(2) {
            let rate_a = (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln();
            let rate_m = (w[0].2 / w[1].2).ln() / (w[0].0 / w[1].0).ln();
            assert!(rate_a >= 1.8, "area rate {rate_a}");
            assert!(rate_m >= 1.8, "moment rate {rate_m}");
        }
    }

    #[test]
    fn refinement_halves_h() {
        let disk = StarDomain::disk();
        for n in [4usize, 8, 16, 32] {
            let coarse = disk.triangulate(n, 8).unwrap();
            let fine = disk.triangulate(2 * n, 8).unwrap();
            let ratio = coarse.h / fine.h;
            assert!((ratio / 2.0 - 1.0).abs() <= 0.2, "h ratio {ratio}");
        }
    }

    #[test]
    fn rotation_preserves_norm() {
        let dom = StarDomain::new(vec![0.01, 0.0, 0.05, 0.03], vec![0.0, -0.02, 0.01]).unwrap();
        for psi in [0.3, 1.0, 2.5, -4.0] {
            assert!((dom.rotated(psi).h_half_norm_sq() - dom.h_half_norm_sq()).abs() <= 1e-12);
        }
    }

    #[test]
    fn json_roundtrip() {
        let dom = StarDomain::new(vec![0.0, 0.0, 0.1], vec![0.0, 0.02]).unwrap();
        let back = StarDomain::from_json(&dom.to_json()).unwrap();
        assert_eq!(back, dom);
        let text = r#"{"cos": [0.0, 0.0, 0.1], "sin": [0.0, 0.0], "normalized": true}"#;
        let n = StarDomain::from_json(text).unwrap();
        assert!(n.is_normalized());
        assert_relative_eq!(n.area().unwrap(), PI, max_relative = 1e-12);
    }

    #[test]
    fn off_export() {
        let off = StarDomain::disk().triangulate(2, 8).unwrap().to_off();
        let mut lines = off.lines();
        assert_eq!(lines.next(), Some("OFF"));
        assert_eq!(lines.next(), Some("25 32 0"));
        assert_eq!(off.lines().filter(|l| l.starts_with("3 ")).count(), 32);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small_domain() -> impl Strategy<Value = StarDomain> {
            (prop::collection::vec(-0.08..0.08f64, 5), prop::collection::vec(-0.08..0.08f64, 4))
                .prop_map(|(c, s)| StarDomain::new(c, s).unwrap())
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn normalize_is_idempotent(dom in small_domain()) {
                let once = dom.normalize().unwrap();
                let twice = once.normalize().unwrap();
                for (a, b) in once.cos_coeffs().iter().zip(twice.cos_coeffs()) {
                    prop_assert!((a - b).abs() <= 1e-12);
                }
                for (a, b) in once.sin_coeffs().iter().zip(twice.sin_coeffs()) {
                    prop_assert!((a - b).abs() <= 1e-12);
                }
                let m = once.barycenter().unwrap();
                prop_assert!(m[0].hypot(m[1]) <= 1e-8);
                prop_assert!((once.area().unwrap() / PI - 1.0).abs() <= 1e-10);
            }

            #[test]
            fn rotation_invariance_of_h_half(dom in small_domain(), psi in -6.3..6.3f64) {
                prop_assert!((dom.rotated(psi).h_half_norm_sq() - dom.h_half_norm_sq()).abs() <= 1e-12);
            }

            #[test]
            fn disk_is_in_every_class(delta in 1e-9..10.0f64, gamma in 0.01..0.99f64) {
                prop_assert!(StarDomain::disk().in_class(delta, gamma).member);
            }
        }
    }
}
