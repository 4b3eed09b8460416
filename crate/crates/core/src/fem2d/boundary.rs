//! Boundary postprocessing: normal derivative, geodesic curvature and the
//! flux of the radial conformal field at boundary edge midpoints.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem2d::domain::{conformal_factor, conformal_field_factor, conformal_field_length, DomainSpec};
use crate::fem2d::solver::FemSolution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundarySample {
    /// Polar angle of the edge midpoint.
    pub theta: f64,
    /// Riemannian length of the edge, `λ(midpoint) |edge|`.
    pub ds: f64,
    /// Outward normal derivative in the space-form metric.
    pub u_nu: f64,
    /// Geodesic curvature of the analytic boundary curve.
    pub h: f64,
    /// `<X, ν>` for `X = sn_k(r) ∂_r`.
    pub x_nu: f64,
    pub phi: f64,
}

/// How nodal gradients are recovered from the piecewise-constant P1 gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientRecovery {
    /// Area-weighted average of the triangles around a node.
    Average,
    /// Linear least-squares fit of triangle gradients over the node patch.
    Patch,
    /// Quadratic least-squares fit of nodal values; exact for quadratics.
    #[default]
    Polynomial,
}

impl GradientRecovery {
    pub fn from_name(name: &str) -> Result<GradientRecovery> {
        match name {
            "average" => Ok(GradientRecovery::Average),
            "patch" => Ok(GradientRecovery::Patch),
            "polynomial" => Ok(GradientRecovery::Polynomial),
            other => Err(Error::Usage(format!("unknown gradient recovery '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryTrace {
    pub samples: Vec<BoundarySample>,
}

/// Evaluates the boundary data of `sol` on the analytic boundary of `spec`,
/// with polynomial-preserving gradient recovery.
pub fn boundary_trace(sol: &FemSolution, spec: &DomainSpec) -> Result<BoundaryTrace> {
    boundary_trace_with(sol, spec, GradientRecovery::default())
}

/// The Euclidean gradient at an edge midpoint is the mean of the recovered
/// nodal gradients at the two endpoints, projected on the analytic outward
/// normal and divided by `λ`.
pub fn boundary_trace_with(sol: &FemSolution, spec: &DomainSpec, recovery: GradientRecovery) -> Result<BoundaryTrace> {
    if sol.mesh.k != spec.k {
        return Err(Error::Usage(format!(
            "mesh curvature {} differs from domain curvature {}",
            sol.mesh.k, spec.k
        )));
    }
    let mesh = &sol.mesh;
    let grads = match recovery {
        GradientRecovery::Average => sol.averaged_gradients(),
        GradientRecovery::Patch => sol.patch_gradients(),
        GradientRecovery::Polynomial => sol.polynomial_gradients(),
    };
    let samples = mesh
        .boundary_edges
        .iter()
        .map(|&[i, j]| {
            let (a, b) = (mesh.nodes[i], mesh.nodes[j]);
            let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            let theta = mid[1].atan2(mid[0]);
            let bp = spec.boundary_point(theta);
            let g = [0.5 * (grads[i][0] + grads[j][0]), 0.5 * (grads[i][1] + grads[j][1])];
            let len = (a[0] - b[0]).hypot(a[1] - b[1]);
            let q = bp.point;
            let qn = q[0].hypot(q[1]);
            let radial = [q[0] / qn, q[1] / qn];
            BoundarySample {
                theta,
                ds: conformal_factor(spec.k, mid) * len,
                u_nu: (g[0] * bp.normal[0] + g[1] * bp.normal[1]) / bp.lambda,
                h: bp.h,
                x_nu: conformal_field_length(spec.k, q) * (radial[0] * bp.normal[0] + radial[1] * bp.normal[1]),
                phi: conformal_field_factor(spec.k, q),
            }
        })
        .collect();
    Ok(BoundaryTrace { samples })
}

impl BoundaryTrace {
    /// `∫_{∂Ω} g ds` by the midpoint rule.
    pub fn integral<G: Fn(&BoundarySample) -> f64>(&self, g: G) -> f64 {
        self.samples.iter().map(|s| g(s) * s.ds).sum()
    }

    pub fn perimeter(&self) -> f64 {
        self.integral(|_| 1.0)
    }

    pub fn u_nu_range(&self) -> (f64, f64) {
        let mags = self.samples.iter().map(|s| s.u_nu.abs());
        let min = mags.clone().fold(f64::INFINITY, f64::min);
        let max = mags.fold(0.0, f64::max);
        (min, max)
    }

    /// `-(1/|∂Ω|) ∫ u_ν`, the mean inward flux.
    pub fn mean_flux(&self) -> f64 {
        -self.integral(|s| s.u_nu) / self.perimeter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Execution;
    use crate::fem2d::domain::Shape;
    use crate::fem2d::mesh::Mesh;
    use crate::fem2d::solver::solve_poisson;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn trace(shape: Shape, k: f64, h: f64) -> BoundaryTrace {
        let spec = DomainSpec::new(shape, k, h).unwrap();
        let sol = solve_poisson(&Mesh::generate(&spec).unwrap(), Execution::default()).unwrap();
        boundary_trace(&sol, &spec).unwrap()
    }

    #[test]
    fn disk_flux_and_curvature() {
        let t = trace(Shape::Disk { radius: 1.0 }, 0.0, 0.04);
        for s in &t.samples {
            assert!((s.u_nu + 0.5).abs() < 0.05, "{}", s.u_nu);
            assert_relative_eq!(s.h, 1.0, epsilon = 1e-12);
            assert_relative_eq!(s.x_nu, 1.0, epsilon = 1e-12);
        }
        assert!((t.perimeter() - 2.0 * PI).abs() < 1e-2);
    }

    #[test]
    fn hyperbolic_disk_curvature() {
        let t = trace(Shape::Disk { radius: 0.8 }, -1.0, 0.05);
        for s in &t.samples {
            assert_relative_eq!(s.h, 1.0 / 0.8f64.tanh(), epsilon = 1e-12);
            assert_relative_eq!(s.phi, 0.8f64.cosh(), epsilon = 1e-12);
            assert_relative_eq!(s.x_nu, 0.8f64.sinh(), epsilon = 1e-12);
        }
        let exact = 2.0 * PI * 0.8f64.sinh();
        assert!((t.perimeter() - exact).abs() < 1e-2 * exact);
    }

    #[test]
    fn ellipse_flux_is_not_constant() {
        let t = trace(Shape::Ellipse { a: 1.5, b: 1.0 }, 0.0, 0.05);
        let (min, max) = t.u_nu_range();
        assert!(max / min > 1.3);
    }
}
