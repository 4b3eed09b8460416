//! P1 Galerkin solve of `Δ_g u + 2ku = -1`, `u = 0` on the boundary.
//!
//! In the chart `Δ_g = λ^{-2} Δ_e`, so the weak form is
//! `∫ ∇u·∇v - 2k ∫ λ² u v = ∫ λ² v` with Euclidean gradients.

use nalgebra::DMatrix;
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::fem2d::domain::conformal_factor;
use crate::fem2d::mesh::{barycentric_point, cross, Mesh, GAUSS3};

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct FemSolution {
    pub mesh: Mesh,
    pub u: ScalarField,
    /// Normwise backward error `‖Au - b‖∞ / (‖A‖∞ ‖u‖∞ + ‖b‖∞)` of the
    /// reduced linear system.
    pub residual: f64,
    pub positive: bool,
}

struct Element {
    stiffness: [[f64; 3]; 3],
    mass: [[f64; 3]; 3],
    load: [f64; 3],
}

/// Gradients of the three barycentric basis functions and the area.
pub(crate) fn basis_gradients(p: &[[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let twice = cross(p[0], p[1], p[2]);
    let g = [
        [(p[1][1] - p[2][1]) / twice, (p[2][0] - p[1][0]) / twice],
        [(p[2][1] - p[0][1]) / twice, (p[0][0] - p[2][0]) / twice],
        [(p[0][1] - p[1][1]) / twice, (p[1][0] - p[0][0]) / twice],
    ];
    (g, 0.5 * twice)
}

pub(crate) fn corners(mesh: &Mesh, t: &[usize; 3]) -> [[f64; 2]; 3] {
    [mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]]
}

fn element(mesh: &Mesh, t: &[usize; 3]) -> Element {
    let p = corners(mesh, t);
    let (g, area) = basis_gradients(&p);
    let mut stiffness = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            stiffness[i][j] = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
        }
    }
    let mut mass = [[0.0; 3]; 3];
    let mut load = [0.0; 3];
    for bary in &GAUSS3 {
        let lam = conformal_factor(mesh.k, barycentric_point(&p, bary));
        let w = area / 3.0 * lam * lam;
        for i in 0..3 {
            load[i] += w * bary[i];
            for j in 0..3 {
                mass[i][j] += w * bary[i] * bary[j];
            }
        }
    }
    Element { stiffness, mass, load }
}

/// Full Euclidean stiffness matrix over all nodes. It does not depend on
/// `k`: the Dirichlet energy is conformally invariant in two dimensions.
pub fn stiffness_matrix(mesh: &Mesh, exec: Execution) -> CscMatrix<f64> {
    let elements = exec::map(exec, &mesh.triangles, |t| element(mesh, t).stiffness);
    let n = mesh.nodes.len();
    let mut coo = CooMatrix::new(n, n);
    for (t, ke) in mesh.triangles.iter().zip(&elements) {
        for i in 0..3 {
            for j in 0..3 {
                coo.push(t[i], t[j], ke[i][j]);
            }
        }
    }
    CscMatrix::from(&coo)
}

fn mat_vec(a: &CscMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.nrows()];
    for (i, j, v) in a.triplet_iter() {
        y[i] += v * x[j];
    }
    y
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn matrix_norm_inf(a: &CscMatrix<f64>) -> f64 {
    let mut rows = vec![0.0; a.nrows()];
    for (i, _, v) in a.triplet_iter() {
        rows[i] += v.abs();
    }
    norm_inf(&rows)
}

/// Symmetric permutation `P A Pᵀ` by an approximate minimum degree ordering,
/// which keeps the Cholesky fill near-linear on planar meshes. Returns the
/// permuted matrix and `perm`, with `perm[new] = old`.
fn permute(a: &CscMatrix<f64>) -> Result<(CscMatrix<f64>, Vec<usize>)> {
    let n = a.nrows();
    let (perm, inverse, _) = amd::order::<usize>(n, a.col_offsets(), a.row_indices(), &amd::Control::default())
        .map_err(|status| Error::SolverFailure(format!("fill-reducing ordering failed: {status:?}")))?;
    let mut coo = CooMatrix::new(n, n);
    for (i, j, v) in a.triplet_iter() {
        coo.push(inverse[i], inverse[j], *v);
    }
    Ok((CscMatrix::from(&coo), perm))
}

/// Assembles and solves on a validated mesh.
pub fn solve_poisson(mesh: &Mesh, exec: Execution) -> Result<FemSolution> {
    let k = mesh.k;
    let boundary = mesh.boundary_flags();
    let mut index = vec![usize::MAX; mesh.nodes.len()];
    let mut free = 0;
    for (v, &on_boundary) in boundary.iter().enumerate() {
        if !on_boundary {
            index[v] = free;
            free += 1;
        }
    }
    if free == 0 {
        return Err(Error::SolverFailure("mesh has no interior nodes".into()));
    }
    let elements = exec::map(exec, &mesh.triangles, |t| element(mesh, t));
    let mut coo = CooMatrix::new(free, free);
    let mut rhs = vec![0.0; free];
    // accumulate in triangle order so results do not depend on scheduling
    for (t, e) in mesh.triangles.iter().zip(&elements) {
        for i in 0..3 {
            let gi = index[t[i]];
            if gi == usize::MAX {
                continue;
            }
            rhs[gi] += e.load[i];
            for j in 0..3 {
                let gj = index[t[j]];
                if gj == usize::MAX {
                    continue;
                }
                coo.push(gi, gj, e.stiffness[i][j] - 2.0 * k * e.mass[i][j]);
            }
        }
    }
    let (a, perm) = permute(&CscMatrix::from(&coo))?;
    let rhs: Vec<f64> = perm.iter().map(|&old| rhs[old]).collect();
    let chol = CscCholesky::factor(&a).map_err(|_| {
        Error::Resonance(format!(
            "Δ + {} is not negative definite on this domain (Cholesky breakdown)",
            2.0 * k
        ))
    })?;
    let b = DMatrix::from_column_slice(free, 1, &rhs);
    let mut x: Vec<f64> = chol.solve(&b).as_slice().to_vec();
    let bn = norm_inf(&rhs);
    let an = matrix_norm_inf(&a);
    let mut residual = 0.0;
    // iterative refinement
    for _ in 0..3 {
        let ax = mat_vec(&a, &x);
        let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, y)| b - y).collect();
        residual = norm_inf(&r) / (an * norm_inf(&x) + bn);
        if residual <= 1e-15 {
            break;
        }
        let dx = chol.solve(&DMatrix::from_column_slice(free, 1, &r));
        for (xi, d) in x.iter_mut().zip(dx.as_slice()) {
            *xi += d;
        }
    }
    if !(residual <= 1e-12) {
        return Err(Error::SolverFailure(format!(
            "linear solve residual {residual:e} above 1e-12 (ill-conditioned; near resonance?)"
        )));
    }
    let mut unpermuted = vec![0.0; free];
    for (new, &old) in perm.iter().enumerate() {
        unpermuted[old] = x[new];
    }
    let mut values = vec![0.0; mesh.nodes.len()];
    for (v, &gi) in index.iter().enumerate() {
        if gi != usize::MAX {
            values[v] = unpermuted[gi];
        }
    }
    let positive = values
        .iter()
        .zip(&boundary)
        .all(|(&u, &on_boundary)| on_boundary || u > 0.0);
    Ok(FemSolution {
        mesh: mesh.clone(),
        u: ScalarField { values },
        residual,
        positive,
    })
}

/// One Gauss point of a triangle with the interpolated solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FemPoint {
    pub p: [f64; 2],
    pub u: f64,
    pub lambda: f64,
}

impl FemSolution {
    /// `∫_Ω g dA_g` with 3-point Gauss quadrature per triangle.
    pub fn volume_integral<G: Fn(&FemPoint) -> f64>(&self, g: G) -> f64 {
        let mesh = &self.mesh;
        let u = &self.u.values;
        let mut total = 0.0;
        for t in &mesh.triangles {
            let p = corners(mesh, t);
            let area = 0.5 * cross(p[0], p[1], p[2]);
            for bary in &GAUSS3 {
                let x = barycentric_point(&p, bary);
                let lambda = conformal_factor(mesh.k, x);
                let ux = bary[0] * u[t[0]] + bary[1] * u[t[1]] + bary[2] * u[t[2]];
                total += area / 3.0 * lambda * lambda * g(&FemPoint { p: x, u: ux, lambda });
            }
        }
        total
    }

    /// Euclidean gradient of the P1 solution on each triangle.
    pub fn triangle_gradients(&self) -> Vec<[f64; 2]> {
        let u = &self.u.values;
        self.mesh
            .triangles
            .iter()
            .map(|t| {
                let (g, _) = basis_gradients(&corners(&self.mesh, t));
                let mut out = [0.0; 2];
                for i in 0..3 {
                    out[0] += u[t[i]] * g[i][0];
                    out[1] += u[t[i]] * g[i][1];
                }
                out
            })
            .collect()
    }

    /// Nodal gradients by area-weighted averaging over the triangles around
    /// each node.
    pub fn averaged_gradients(&self) -> Vec<[f64; 2]> {
        let mesh = &self.mesh;
        let tg = self.triangle_gradients();
        let mut sum = vec![[0.0; 2]; mesh.nodes.len()];
        let mut weight = vec![0.0; mesh.nodes.len()];
        for (t, g) in mesh.triangles.iter().zip(&tg) {
            let area = 0.5 * cross(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]);
            for &v in t {
                sum[v][0] += area * g[0];
                sum[v][1] += area * g[1];
                weight[v] += area;
            }
        }
        sum.iter().zip(&weight).map(|(s, &w)| [s[0] / w, s[1] / w]).collect()
    }

    /// Nodal gradients by patch recovery: a linear least-squares fit of the
    /// triangle gradients, sampled at centroids, over the patch of each node,
    /// evaluated at the node. Boundary patches are widened by one layer so
    /// the fit is not one-sided in a degenerate way.
    pub fn patch_gradients(&self) -> Vec<[f64; 2]> {
        let mesh = &self.mesh;
        let tg = self.triangle_gradients();
        let nv = mesh.nodes.len();
        let mut around: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for (ti, t) in mesh.triangles.iter().enumerate() {
            for &v in t {
                around[v].push(ti);
            }
        }
        let centroid = |ti: usize| {
            let p = corners(mesh, &mesh.triangles[ti]);
            [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0]
        };
        let boundary = mesh.boundary_flags();
        let fit = |v: usize| -> [f64; 2] {
            let mut patch: Vec<usize> = around[v].clone();
            if boundary[v] {
                for &ti in &around[v] {
                    for &w in &mesh.triangles[ti] {
                        patch.extend_from_slice(&around[w]);
                    }
                }
                patch.sort_unstable();
                patch.dedup();
            }
            let x0 = mesh.nodes[v];
            // normal equations of the fit a + b (x - x0) + c (y - y0)
            let mut m = nalgebra::Matrix3::<f64>::zeros();
            let mut rhs = nalgebra::Matrix3x2::<f64>::zeros();
            let mut scale = 0.0f64;
            for &ti in &patch {
                let c = centroid(ti);
                scale = scale.max((c[0] - x0[0]).abs()).max((c[1] - x0[1]).abs());
            }
            for &ti in &patch {
                let c = centroid(ti);
                let row = nalgebra::Vector3::new(1.0, (c[0] - x0[0]) / scale, (c[1] - x0[1]) / scale);
                m += row * row.transpose();
                for d in 0..2 {
                    for r in 0..3 {
                        rhs[(r, d)] += row[r] * tg[ti][d];
                    }
                }
            }
            match m.cholesky() {
                Some(ch) => {
                    let sol = ch.solve(&rhs);
                    [sol[(0, 0)], sol[(0, 1)]]
                }
                None => {
                    let n = patch.len() as f64;
                    let mut g = [0.0; 2];
                    for &ti in &patch {
                        g[0] += tg[ti][0] / n;
                        g[1] += tg[ti][1] / n;
                    }
                    g
                }
            }
        };
        (0..nv).map(fit).collect()
    }

    /// Polynomial-preserving recovery: a quadratic least-squares fit of the
    /// nodal values over the two-ring neighborhood of each node (three rings
    /// on the boundary), differentiated at the node. Exact for quadratics.
    pub fn polynomial_gradients(&self) -> Vec<[f64; 2]> {
        let mesh = &self.mesh;
        let nv = mesh.nodes.len();
        let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for t in &mesh.triangles {
            for a in 0..3 {
                for b in 0..3 {
                    if a != b {
                        neighbors[t[a]].push(t[b]);
                    }
                }
            }
        }
        for list in neighbors.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        let boundary = mesh.boundary_flags();
        let u = &self.u.values;
        let fit = |v: usize| -> [f64; 2] {
            let layers = if boundary[v] { 3 } else { 2 };
            let mut patch = vec![v];
            let mut frontier = vec![v];
            for _ in 0..layers {
                let mut next = Vec::new();
                for &w in &frontier {
                    next.extend_from_slice(&neighbors[w]);
                }
                next.sort_unstable();
                next.dedup();
                next.retain(|w| patch.binary_search(w).is_err());
                for &w in &next {
                    let pos = patch.binary_search(&w).unwrap_err();
                    patch.insert(pos, w);
                }
                frontier = next;
            }
            let x0 = mesh.nodes[v];
            let scale = patch
                .iter()
                .map(|&w| (mesh.nodes[w][0] - x0[0]).abs().max((mesh.nodes[w][1] - x0[1]).abs()))
                .fold(0.0, f64::max);
            let mut m = nalgebra::Matrix6::<f64>::zeros();
            let mut rhs = nalgebra::Vector6::<f64>::zeros();
            for &w in &patch {
                let x = (mesh.nodes[w][0] - x0[0]) / scale;
                let y = (mesh.nodes[w][1] - x0[1]) / scale;
                let row = nalgebra::Vector6::new(1.0, x, y, x * x, x * y, y * y);
                m += row * row.transpose();
                rhs += row * u[w];
            }
            match m.cholesky() {
                Some(ch) => {
                    let c = ch.solve(&rhs);
                    [c[1] / scale, c[2] / scale]
                }
                None => [f64::NAN, f64::NAN],
            }
        };
        (0..nv).map(fit).collect()
    }

    pub fn max_value(&self) -> f64 {
        self.u.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Interpolated value at a chart point, or `None` outside the mesh.
    pub fn value_at(&self, x: [f64; 2]) -> Option<f64> {
        let mesh = &self.mesh;
        for t in &mesh.triangles {
            let p = corners(mesh, t);
            let total = cross(p[0], p[1], p[2]);
            let l0 = cross(x, p[1], p[2]) / total;
            let l1 = cross(p[0], x, p[2]) / total;
            let l2 = 1.0 - l0 - l1;
            let eps = -1e-12;
            if l0 >= eps && l1 >= eps && l2 >= eps {
                let u = &self.u.values;
                return Some(l0 * u[t[0]] + l1 * u[t[1]] + l2 * u[t[2]]);
            }
        }
        None
    }
}
