//! Compressed sparse row matrices, Jacobi-preconditioned conjugate
//! gradients and shift-free inverse iteration for symmetric positive
//! definite pencils.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an `n × n` matrix from `(row, col, value)` triplets; duplicate
    /// entries are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(r, c, _) in triplets {
            assert!(r < n && c < n, "triplet ({r}, {c}) outside {n}×{n}");
            counts[r + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut cursor = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            let k = cursor[r];
            cols[k] = c;
            vals[k] = v;
            cursor[r] += 1;
        }

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for r in 0..n {
            scratch.clear();
            scratch.extend((counts[r]..counts[r + 1]).map(|k| (cols[k], vals[k])));
            scratch.sort_by_key(|&(c, _)| c);
            for &(c, v) in &scratch {
                if col_idx.len() > row_ptr[r] && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { n, row_ptr, col_idx, values }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(j, _)| j == c).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yr = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.mul_vec(y))
    }

    /// Restriction to the index set `keep` (rows and columns), in the given
    /// order.
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut row_ptr = Vec::with_capacity(keep.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for &old in keep {
            for (c, v) in self.row(old) {
                if map[c] != usize::MAX {
                    col_idx.push(map[c]);
                    values.push(v);
                }
            }
            // Columns stay sorted only if `keep` is increasing; re-sort otherwise.
            let start = *row_ptr.last().unwrap();
            let mut pairs: Vec<(usize, f64)> =
                col_idx[start..].iter().copied().zip(values[start..].iter().copied()).collect();
            pairs.sort_by_key(|&(c, _)| c);
            for (k, (c, v)) in pairs.into_iter().enumerate() {
                col_idx[start + k] = c;
                values[start + k] = v;
            }
            row_ptr.push(col_idx.len());
        }
        Self { n: keep.len(), row_ptr, col_idx, values }
    }

    /// Largest `|A_ij − A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CgOptions {
    /// Stop when `‖b − Ax‖ ≤ rel_tol · ‖b‖`.
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-12, max_iter: 20_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CgStats {
    pub iterations: usize,
    /// Final `‖b − Ax‖ / ‖b‖`.
    pub rel_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for SPD `a`. `x` holds the
/// initial guess on entry and the solution on exit.
pub fn conjugate_gradient(a: &CsrMatrix, b: &[f64], x: &mut [f64], opts: CgOptions) -> Result<CgStats> {
    let n = a.dim();
    assert_eq!(b.len(), n);
    assert_eq!(x.len(), n);
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgStats { iterations: 0, rel_residual: 0.0 });
    }
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();

    let mut r = a.mul_vec(x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut rnorm = norm(&r);

    let mut it = 0;
    while rnorm > opts.rel_tol * bnorm {
        if it >= opts.max_iter {
            return Err(Error::NoConvergence {
                solver: "conjugate gradient",
                iterations: it,
                residual: rnorm / bnorm,
            });
        }
        a.mul_vec_into(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        rnorm = norm(&r);
        it += 1;
    }
    Ok(CgStats { iterations: it, rel_residual: rnorm / bnorm })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Relative eigenvalue change between consecutive iterates.
    pub rel_change: f64,
    /// Bound on `‖Ku − λMu‖ / ‖Ku‖`.
    pub rel_residual: f64,
    pub max_iter: usize,
    pub cg: CgOptions,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            rel_change: 1e-10,
            rel_residual: 1e-8,
            max_iter: 500,
            cg: CgOptions { rel_tol: 1e-13, max_iter: 20_000 },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// Normalized so that `uᵀMu = 1`, with a nonnegative entry of largest
    /// magnitude.
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub cg_iterations: usize,
    pub rel_residual: f64,
}

/// Smallest eigenpair of `K u = λ M u` by inverse iteration (shift 0). A
/// `None` mass means the identity.
pub fn inverse_iteration(k: &CsrMatrix, mass: Option<&CsrMatrix>, opts: EigenOptions) -> Result<EigenPair> {
    let n = k.dim();
    let apply_mass = |v: &[f64]| -> Vec<f64> {
        match mass {
            Some(m) => m.mul_vec(v),
            None => v.to_vec(),
        }
    };
    let m_norm = |v: &[f64]| dot(v, &apply_mass(v)).sqrt();

    let mut u = vec![1.0; n];
    let s = m_norm(&u);
    u.iter_mut().for_each(|v| *v /= s);
    let mut lambda = dot(&u, &k.mul_vec(&u));
    let mut x = vec![0.0; n];
    let mut cg_total = 0;
    let mut rel_res = f64::INFINITY;
    let mut change = 1.0_f64;

    for it in 1..=opts.max_iter {
        let rhs = apply_mass(&u);
        // Warm start: for an exact eigenvector the solution is u/λ.
        for (xi, ui) in x.iter_mut().zip(&u) {
            *xi = ui / lambda;
        }
        // Inexact solves while the iterate is still far from converged.
        let cg = CgOptions { rel_tol: (1e-3 * change).clamp(opts.cg.rel_tol, 1e-6), ..opts.cg };
        let stats = conjugate_gradient(k, &rhs, &mut x, cg)?;
        cg_total += stats.iterations;
        let s = m_norm(&x);
        for (ui, xi) in u.iter_mut().zip(&x) {
            *ui = xi / s;
        }
        let ku = k.mul_vec(&u);
        let mu = apply_mass(&u);
        let new_lambda = dot(&u, &ku);
        change = (new_lambda - lambda).abs() / new_lambda.abs();
        lambda = new_lambda;
        let res: Vec<f64> = ku.iter().zip(&mu).map(|(a, b)| a - lambda * b).collect();
        rel_res = norm(&res) / norm(&ku);
        if change <= opts.rel_change && rel_res <= opts.rel_residual {
            fix_sign(&mut u);
            return Ok(EigenPair {
                value: lambda,
                vector: u,
                iterations: it,
                cg_iterations: cg_total,
                rel_residual: rel_res,
            });
        }
    }
    Err(Error::NoConvergence {
        solver: "inverse iteration",
        iterations: opts.max_iter,
        residual: rel_res,
    })
}

fn fix_sign(u: &mut [f64]) {
    let peak = u
        .iter()
        .copied()
        .fold(0.0_f64, |best, v| if v.abs() > best.abs() { v } else { best });
    if peak < 0.0 {
        u.iter_mut().for_each(|v| *v = -*v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, &t)
    }

    #[test]
    fn triplets_are_summed_and_sorted() {
        let m = CsrMatrix::from_triplets(2, &[(0, 1, 1.0), (0, 0, 2.0), (0, 1, 3.0), (1, 0, 4.0)]);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(0, 1), 4.0);
        assert_eq!(m.get(0, 0), 2.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.row(0).map(|(c, _)| c).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(m.asymmetry(), 0.0);
    }

    #[test]
    fn submatrix_keeps_entries() {
        let a = laplacian_1d(5);
        let s = a.submatrix(&[1, 2, 3]);
        assert_eq!(s.dim(), 3);
        assert_eq!(s.get(0, 0), 2.0);
        assert_eq!(s.get(0, 1), -1.0);
        assert_eq!(s.get(2, 1), -1.0);
        assert_eq!(s.row_sums(), vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn cg_solves_tridiagonal() {
        let n = 50;
        let a = laplacian_1d(n);
        let exact: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.mul_vec(&exact);
        let mut x = vec![0.0; n];
        let stats = conjugate_gradient(&a, &b, &mut x, CgOptions::default()).unwrap();
        assert!(stats.rel_residual <= 1e-12);
        for (xi, ei) in x.iter().zip(&exact) {
            assert!((xi - ei).abs() < 1e-9);
        }
    }

    #[test]
    fn cg_reports_non_convergence() {
        let a = laplacian_1d(200);
        let b = vec![1.0; 200];
        let mut x = vec![0.0; 200];
        let err = conjugate_gradient(&a, &b, &mut x, CgOptions { rel_tol: 1e-14, max_iter: 3 }).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { iterations: 3, .. }));
    }

    #[test]
    fn inverse_iteration_finds_smallest_mode() {
        let n = 40;
        let a = laplacian_1d(n);
        let pair = inverse_iteration(&a, None, EigenOptions::default()).unwrap();
        let h = std::f64::consts::PI / (n as f64 + 1.0);
        assert_relative_eq!(pair.value, 4.0 * (h / 2.0).sin().powi(2), max_relative = 1e-12);
        assert_relative_eq!(norm(&pair.vector), 1.0, max_relative = 1e-12);
        assert!(pair.vector.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn inverse_iteration_generalized() {
        let n = 30;
        let a = laplacian_1d(n);
        let m = CsrMatrix::from_triplets(n, &(0..n).map(|i| (i, i, 2.0)).collect::<Vec<_>>());
        let plain = inverse_iteration(&a, None, EigenOptions::default()).unwrap();
        let gen = inverse_iteration(&a, Some(&m), EigenOptions::default()).unwrap();
        assert_relative_eq!(gen.value, plain.value / 2.0, max_relative = 1e-12);
        assert_relative_eq!(m.bilinear(&gen.vector, &gen.vector), 1.0, max_relative = 1e-12);
    }
}
