//! Piecewise-linear finite elements for the torsion problem `−Δw = 1` and
//! the principal Dirichlet eigenvalue on triangulated planar domains.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Mesh, StarDomain};
use crate::sparse::{conjugate_gradient, dot, inverse_iteration, CgOptions, CsrMatrix, EigenOptions};

/// Triangles with area below this are rejected at assembly.
pub const MIN_TRIANGLE_AREA: f64 = 1e-14;

/// Angular density of the polar meshes used by [`solve_domain`]: ring `i`
/// carries `i · MESH_ANGULAR` nodes.
pub const MESH_ANGULAR: usize = 8;

#[derive(Debug, Clone)]
pub struct SparseSystem {
    /// Full stiffness matrix `∫∇φ_i·∇φ_j` over all nodes.
    pub stiffness: CsrMatrix,
    /// Full consistent mass matrix `∫φ_i φ_j`.
    pub mass: CsrMatrix,
    /// Interior node indices, in increasing order.
    pub free_dofs: Vec<usize>,
    stiffness_free: CsrMatrix,
    mass_free: CsrMatrix,
    /// `M·1` restricted to the free dofs: the load vector of `−Δw = 1`.
    load: Vec<f64>,
    n_nodes: usize,
    h: f64,
}

impl SparseSystem {
    pub fn stiffness_free(&self) -> &CsrMatrix {
        &self.stiffness_free
    }

    pub fn mass_free(&self) -> &CsrMatrix {
        &self.mass_free
    }

    fn expand(&self, free: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.n_nodes];
        for (&node, &v) in self.free_dofs.iter().zip(free) {
            full[node] = v;
        }
        full
    }
}

/// Exact P1 stiffness and mass matrices of one triangle.
pub fn element_matrices(p: [[f64; 2]; 3]) -> ([[f64; 3]; 3], [[f64; 3]; 3], f64) {
    let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
    let mut b = [0.0; 3];
    let mut c = [0.0; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        b[i] = p[j][1] - p[k][1];
        c[i] = p[k][0] - p[j][0];
    }
    let mut ke = [[0.0; 3]; 3];
    let mut me = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            ke[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
            me[i][j] = area / 12.0 * if i == j { 2.0 } else { 1.0 };
        }
    }
    (ke, me, area)
}

pub fn assemble(mesh: &Mesh) -> Result<SparseSystem> {
    let n = mesh.nodes.len();
    let mut k_trip = Vec::with_capacity(9 * mesh.triangles.len());
    let mut m_trip = Vec::with_capacity(9 * mesh.triangles.len());
    for (index, tri) in mesh.triangles.iter().enumerate() {
        let (ke, me, area) = element_matrices(tri.map(|v| mesh.nodes[v]));
        if area < MIN_TRIANGLE_AREA {
            return Err(Error::DegenerateTriangle { index, area });
        }
        for i in 0..3 {
            for j in 0..3 {
                k_trip.push((tri[i], tri[j], ke[i][j]));
                m_trip.push((tri[i], tri[j], me[i][j]));
            }
        }
    }
    let stiffness = CsrMatrix::from_triplets(n, &k_trip);
    let mass = CsrMatrix::from_triplets(n, &m_trip);
    let free_dofs: Vec<usize> = (0..n).filter(|&i| !mesh.boundary[i]).collect();
    if free_dofs.is_empty() {
        return Err(Error::InvalidInput("mesh has no interior nodes".into()));
    }
    let row_sums = mass.row_sums();
    let load = free_dofs.iter().map(|&i| row_sums[i]).collect();
    Ok(SparseSystem {
        stiffness_free: stiffness.submatrix(&free_dofs),
        mass_free: mass.submatrix(&free_dofs),
        stiffness,
        mass,
        free_dofs,
        load,
        n_nodes: n,
        h: mesh.h,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorsionSolution {
    pub torsion: f64,
    /// Nodal torsion function, zero on the boundary.
    pub values: Vec<f64>,
    pub cg_iterations: usize,
    pub rel_residual: f64,
}

/// Solves `K w = M·1` on the free dofs and returns `T = 1ᵀ M w`.
pub fn solve_torsion(sys: &SparseSystem) -> Result<TorsionSolution> {
    let mut w = vec![0.0; sys.load.len()];
    let stats = conjugate_gradient(&sys.stiffness_free, &sys.load, &mut w, CgOptions { rel_tol: 1e-12, ..Default::default() })?;
    let torsion = dot(&sys.load, &w);
    Ok(TorsionSolution {
        torsion,
        values: sys.expand(&w),
        cg_iterations: stats.iterations,
        rel_residual: stats.rel_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSolution {
    pub lambda: f64,
    /// Nodal eigenfunction with `uᵀMu = 1`, zero on the boundary.
    pub values: Vec<f64>,
    pub iterations: usize,
    pub cg_iterations: usize,
    pub rel_residual: f64,
}

/// Smallest generalized eigenvalue of `K u = λ M u` on the free dofs.
pub fn solve_eigen(sys: &SparseSystem) -> Result<EigenSolution> {
    let pair = inverse_iteration(&sys.stiffness_free, Some(&sys.mass_free), EigenOptions::default())?;
    Ok(EigenSolution {
        lambda: pair.value,
        values: sys.expand(&pair.vector),
        iterations: pair.iterations,
        cg_iterations: pair.cg_iterations,
        rel_residual: pair.rel_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub torsion_cg: f64,
    pub eigen: f64,
    pub torsion_cg_iterations: usize,
    pub eigen_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub torsion: f64,
    pub lambda: f64,
    /// Area of the triangulated polygon.
    pub mesh_area: f64,
    pub h: f64,
    pub nodes: usize,
    pub triangles: usize,
    pub residuals: Residuals,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub torsion_values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigen_values: Option<Vec<f64>>,
}

impl SolveReport {
    /// Drops the nodal arrays so the JSON carries scalars only.
    pub fn without_fields(mut self) -> Self {
        self.torsion_values = None;
        self.eigen_values = None;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("SolveReport serializes")
    }
}

/// Assembles and solves both problems on `mesh`.
pub fn solve_mesh(mesh: &Mesh) -> Result<SolveReport> {
    let sys = assemble(mesh)?;
    let t = solve_torsion(&sys)?;
    let e = solve_eigen(&sys)?;
    Ok(SolveReport {
        torsion: t.torsion,
        lambda: e.lambda,
        mesh_area: mesh.area(),
        h: sys.h,
        nodes: mesh.nodes.len(),
        triangles: mesh.triangles.len(),
        residuals: Residuals {
            torsion_cg: t.rel_residual,
            eigen: e.rel_residual,
            torsion_cg_iterations: t.cg_iterations,
            eigen_iterations: e.iterations,
        },
        torsion_values: Some(t.values),
        eigen_values: Some(e.values),
    })
}

/// Meshes `dom` at `level` rings and solves.
pub fn solve_domain(dom: &StarDomain, level: usize) -> Result<SolveReport> {
    solve_mesh(&dom.triangulate(level, MESH_ANGULAR)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolated {
    pub value: f64,
    /// `|v_{h/2} − v_h| / 3`, the size of the removed `h²` term.
    pub error_estimate: f64,
}

/// Second-order Richardson extrapolation `(4 v_{h/2} − v_h) / 3`.
pub fn richardson_extrapolate(coarse: f64, fine: f64) -> Extrapolated {
    Extrapolated {
        value: (4.0 * fine - coarse) / 3.0,
        error_estimate: (fine - coarse).abs() / 3.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolatedReport {
    pub torsion: Extrapolated,
    pub lambda: Extrapolated,
    pub levels: (usize, usize),
    pub coarse: SolveReport,
    pub fine: SolveReport,
}

/// Solves at `level` and `2·level` and extrapolates `T` and `λ`.
pub fn solve_domain_extrapolated(dom: &StarDomain, level: usize) -> Result<ExtrapolatedReport> {
    let coarse = solve_domain(dom, level)?.without_fields();
    let fine = solve_domain(dom, 2 * level)?.without_fields();
    Ok(ExtrapolatedReport {
        torsion: richardson_extrapolate(coarse.torsion, fine.torsion),
        lambda: richardson_extrapolate(coarse.lambda, fine.lambda),
        levels: (level, 2 * level),
        coarse,
        fine,
    })
}
