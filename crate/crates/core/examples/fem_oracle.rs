//! High-resolution reference run for the ellipse `a = 1.5, b = 1`, `k = 0`.
//!
//! Uses Jacobi-preconditioned conjugate gradients instead of the direct
//! solver, so it fits in memory at `h = 0.005` and gives an independent
//! check of the regression constants used by the acceptance suite.
//!
//! `cargo run --release -p serrin-core --example fem_oracle -- [h]`

use nalgebra_sparse::{CooMatrix, CsrMatrix};
use serrin_core::exec::Execution;
use serrin_core::fem2d::{boundary_trace, stiffness_matrix, DomainSpec, FemSolution, Mesh, ScalarField, Shape};
use serrin_core::identities::{fem_reports, FemContext, IdentityKind, Tolerances};
use serrin_core::WarpModel;

fn pcg(a: &CsrMatrix<f64>, b: &[f64], rel_tol: f64) -> (Vec<f64>, usize, f64) {
    let n = b.len();
    let mut diag = vec![0.0; n];
    for (i, j, v) in a.triplet_iter() {
        if i == j {
            diag[i] = *v;
        }
    }
    let apply = |x: &[f64], y: &mut [f64]| {
        for (i, row) in a.row_iter().enumerate() {
            y[i] = row.col_indices().iter().zip(row.values()).map(|(&j, v)| v * x[j]).sum();
        }
    };
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let bnorm = dot(b, b).sqrt();
    let mut it = 0;
    loop {
        apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        it += 1;
        let rel = dot(&r, &r).sqrt() / bnorm;
        if rel <= rel_tol || it >= 20 * n {
            return (x, it, rel);
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
}

fn main() {
    let h: f64 = std::env::args().nth(1).map(|s| s.parse().expect("h")).unwrap_or(0.005);
    let spec = DomainSpec::new(Shape::Ellipse { a: 1.5, b: 1.0 }, 0.0, h).unwrap();
    let mesh = Mesh::generate(&spec).unwrap();
    let boundary = mesh.boundary_flags();
    let mut index = vec![usize::MAX; mesh.nodes.len()];
    let mut free = 0;
    for (v, &b) in boundary.iter().enumerate() {
        if !b {
            index[v] = free;
            free += 1;
        }
    }
    let k_full = stiffness_matrix(&mesh, Execution::default());
    let mut coo = CooMatrix::new(free, free);
    for (i, j, v) in k_full.triplet_iter() {
        if index[i] != usize::MAX && index[j] != usize::MAX {
            coo.push(index[i], index[j], *v);
        }
    }
    let a = CsrMatrix::from(&coo);
    let mut load = vec![0.0; free];
    for t in &mesh.triangles {
        let p: Vec<[f64; 2]> = t.iter().map(|&v| mesh.nodes[v]).collect();
        let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
        for &v in t {
            if index[v] != usize::MAX {
                load[index[v]] += area / 3.0;
            }
        }
    }
    let (x, iterations, rel) = pcg(&a, &load, 1e-13);
    let mut values = vec![0.0; mesh.nodes.len()];
    for (v, &i) in index.iter().enumerate() {
        if i != usize::MAX {
            values[v] = x[i];
        }
    }
    let sol = FemSolution {
        mesh,
        u: ScalarField { values },
        residual: rel,
        positive: true,
    };
    let trace = boundary_trace(&sol, &spec).unwrap();
    let (min, max) = trace.u_nu_range();
    let ctx = FemContext {
        spec,
        sol,
        trace,
        model: WarpModel::space_form(2, 0.0).unwrap(),
        recovery: Default::default(),
    };
    let hk = &fem_reports(&ctx, &[IdentityKind::Hk], &Tolerances::default()).unwrap()[0];
    println!(
        "h = {h}, nodes = {}, pcg iterations = {iterations}, relative residual = {rel:.3e}",
        ctx.sol.mesh.nodes.len()
    );
    println!("u_nu max/min ratio = {:.10}", max / min);
    println!("hk gap = {:.10} (area {:.10})", hk.term("gap"), hk.term("vol"));
    println!("u(0) = {:.10}", ctx.sol.value_at([0.0, 0.0]).unwrap());
}
