//! P1 finite elements for `Δu + 2ku = -1`, `u = 0` on star-shaped domains
//! of the 2-D space forms.

pub mod boundary;
pub mod domain;
pub mod mesh;
pub mod solver;

pub use boundary::{boundary_trace, boundary_trace_with, BoundarySample, BoundaryTrace, GradientRecovery};
pub use domain::{DomainSpec, Shape};
pub use mesh::{Mesh, MeshStats};
pub use solver::{solve_poisson, stiffness_matrix, FemPoint, FemSolution, ScalarField};

use crate::error::Result;
use crate::exec::Execution;

/// Meshes `spec`, solves, and evaluates the boundary trace.
pub fn solve_domain(spec: &DomainSpec, exec: Execution) -> Result<(FemSolution, BoundaryTrace)> {
    let mesh = Mesh::generate(spec)?;
    let sol = solve_poisson(&mesh, exec)?;
    let trace = boundary_trace(&sol, spec)?;
    Ok((sol, trace))
}
