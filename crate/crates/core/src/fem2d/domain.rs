//! Star-shaped domains of the 2-D space form of curvature `k`, realized in
//! the conformal disk model `g = λ² (dx² + dy²)`, `λ = 2/(1 + k|p|²)`
//! (`λ ≡ 1` for `k = 0`).
//!
//! Shapes are described by their geodesic polar radius `r(θ)` about the
//! origin; the chart boundary is `ρ(θ) = σ_k(r(θ))` with `σ_k` the
//! radial map of the model.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Disk {
        radius: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    /// `r(θ) = R (1 + ε cos mθ)`
    PerturbedDisk {
        radius: f64,
        eps: f64,
        m: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainSpec {
    pub shape: Shape,
    pub k: f64,
    /// Target maximum Euclidean edge length in the chart.
    pub h: f64,
}

/// Analytic data of the boundary curve at one angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub theta: f64,
    pub point: [f64; 2],
    /// Outward unit normal in the Euclidean chart metric.
    pub normal: [f64; 2],
    /// Euclidean curvature of the chart curve.
    pub kappa_e: f64,
    /// Geodesic curvature in the space-form metric.
    pub h: f64,
    pub lambda: f64,
}

/// Conformal factor of the chart at `p`.
pub fn conformal_factor(k: f64, p: [f64; 2]) -> f64 {
    if k == 0.0 {
        1.0
    } else {
        2.0 / (1.0 + k * (p[0] * p[0] + p[1] * p[1]))
    }
}

/// Conformal factor `φ = cs_k(r)` of the radial field `X = sn_k(r) ∂_r`.
pub fn conformal_field_factor(k: f64, p: [f64; 2]) -> f64 {
    if k == 0.0 {
        1.0
    } else {
        let q = k * (p[0] * p[0] + p[1] * p[1]);
        (1.0 - q) / (1.0 + q)
    }
}

/// `sn_k(r)` at the chart point `p`, i.e. `|X|`.
pub fn conformal_field_length(k: f64, p: [f64; 2]) -> f64 {
    conformal_factor(k, p) * (p[0] * p[0] + p[1] * p[1]).sqrt()
}

/// Chart radius `σ(r)` of geodesic radius `r`, with `σ'` and `σ''`.
pub fn chart_radius(k: f64, r: f64) -> [f64; 3] {
    if k == 0.0 {
        [r, 1.0, 0.0]
    } else if k > 0.0 {
        let s = k.sqrt();
        let t = (0.5 * s * r).tan();
        let sec2 = 1.0 + t * t;
        [t / s, 0.5 * sec2, 0.5 * s * sec2 * t]
    } else {
        let s = (-k).sqrt();
        let t = (0.5 * s * r).tanh();
        let sech2 = 1.0 - t * t;
        [t / s, 0.5 * sech2, -0.5 * s * sech2 * t]
    }
}

impl DomainSpec {
    pub fn new(shape: Shape, k: f64, h: f64) -> Result<DomainSpec> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Usage(format!("mesh size h must be positive, got {h}")));
        }
        if !k.is_finite() {
            return Err(Error::Usage("k must be finite".into()));
        }
        match shape {
            Shape::Disk { radius } if !(radius > 0.0) => {
                return Err(Error::Domain(format!("disk radius must be positive, got {radius}")))
            }
            Shape::Ellipse { a, b } if !(a > 0.0 && b > 0.0) => {
                return Err(Error::Domain(format!(
                    "ellipse semi-axes must be positive, got ({a}, {b})"
                )))
            }
            Shape::PerturbedDisk { radius, eps, m } if !(radius > 0.0) || !(eps.abs() < 1.0) || m == 0 => {
                return Err(Error::Domain(format!(
                    "perturbed disk needs R > 0, |ε| < 1 and m >= 1, got ({radius}, {eps}, {m})"
                )))
            }
            _ => {}
        }
        let spec = DomainSpec { shape, k, h };
        let r_max = spec.max_geodesic_radius();
        if !r_max.is_finite() {
            return Err(Error::Domain("domain radius must be finite".into()));
        }
        if k > 0.0 {
            let limit = std::f64::consts::FRAC_PI_2 / k.sqrt();
            if r_max >= limit {
                return Err(Error::Domain(format!(
                    "domain reaches geodesic radius {r_max} >= pi/(2 sqrt(k)) = {limit}; it must lie in an open hemisphere"
                )));
            }
        }
        let size = spec.max_chart_radius();
        let estimate = (size / h).powi(2) * 4.0;
        if estimate > 4.0e6 {
            return Err(Error::Usage(format!(
                "h = {h} would need about {estimate:.0} nodes; refusing"
            )));
        }
        Ok(spec)
    }

    pub fn max_geodesic_radius(&self) -> f64 {
        match self.shape {
            Shape::Disk { radius } => radius,
            Shape::Ellipse { a, b } => a.max(b),
            Shape::PerturbedDisk { radius, eps, .. } => radius * (1.0 + eps.abs()),
        }
    }

    pub fn max_chart_radius(&self) -> f64 {
        chart_radius(self.k, self.max_geodesic_radius())[0]
    }

    /// Geodesic polar radius `r(θ)` and its first two θ-derivatives.
    pub fn geodesic_radius(&self, theta: f64) -> [f64; 3] {
        match self.shape {
            Shape::Disk { radius } => [radius, 0.0, 0.0],
            Shape::Ellipse { a, b } => {
                let d = a * a - b * b;
                let s = theta.sin();
                let q = b * b + d * s * s;
                let q1 = d * (2.0 * theta).sin();
                let q2 = 2.0 * d * (2.0 * theta).cos();
                let ab = a * b;
                [
                    ab / q.sqrt(),
                    -0.5 * ab * q1 / q.powf(1.5),
                    ab * (0.75 * q1 * q1 / q.powf(2.5) - 0.5 * q2 / q.powf(1.5)),
                ]
            }
            Shape::PerturbedDisk { radius, eps, m } => {
                let m = m as f64;
                let (s, c) = (m * theta).sin_cos();
                [
                    radius * (1.0 + eps * c),
                    -radius * eps * m * s,
                    -radius * eps * m * m * c,
                ]
            }
        }
    }

    /// Chart polar radius `ρ(θ)` and its first two θ-derivatives.
    pub fn chart_polar(&self, theta: f64) -> [f64; 3] {
        let [r, r1, r2] = self.geodesic_radius(theta);
        let [s, s1, s2] = chart_radius(self.k, r);
        [s, s1 * r1, s2 * r1 * r1 + s1 * r2]
    }

    pub fn boundary_point(&self, theta: f64) -> BoundaryPoint {
        let [rho, rho1, rho2] = self.chart_polar(theta);
        let (s, c) = theta.sin_cos();
        let point = [rho * c, rho * s];
        let tangent = [rho1 * c - rho * s, rho1 * s + rho * c];
        let tl = tangent[0].hypot(tangent[1]);
        // the curve runs counterclockwise, so the outward normal is the
        // tangent turned clockwise
        let normal = [tangent[1] / tl, -tangent[0] / tl];
        let kappa_e = (rho * rho + 2.0 * rho1 * rho1 - rho * rho2) / tl.powi(3);
        let lambda = conformal_factor(self.k, point);
        let dlog_lambda = if self.k == 0.0 {
            0.0
        } else {
            -2.0 * self.k * (point[0] * normal[0] + point[1] * normal[1]) / (1.0 + self.k * rho * rho)
        };
        BoundaryPoint {
            theta,
            point,
            normal,
            kappa_e,
            h: (kappa_e + dlog_lambda) / lambda,
            lambda,
        }
    }

    /// Euclidean length of the chart boundary curve.
    pub fn chart_perimeter(&self) -> f64 {
        let pts: Vec<f64> = (0..=64).map(|i| std::f64::consts::TAU * i as f64 / 64.0).collect();
        quadrature::integrate_with_breakpoints(
            |t| {
                let [r, r1, _] = self.chart_polar(t);
                r.hypot(r1)
            },
            &pts,
            QuadOptions::default(),
        )
        .value
    }

    /// Riemannian perimeter of the exact domain.
    pub fn perimeter(&self) -> f64 {
        let pts: Vec<f64> = (0..=64).map(|i| std::f64::consts::TAU * i as f64 / 64.0).collect();
        quadrature::integrate_with_breakpoints(
            |t| {
                let [r, r1, _] = self.chart_polar(t);
                let p = [r * t.cos(), r * t.sin()];
                conformal_factor(self.k, p) * r.hypot(r1)
            },
            &pts,
            QuadOptions::default(),
        )
        .value
    }

    /// Riemannian area of the exact domain.
    pub fn area(&self) -> f64 {
        let pts: Vec<f64> = (0..=64).map(|i| std::f64::consts::TAU * i as f64 / 64.0).collect();
        let k = self.k;
        quadrature::integrate_with_breakpoints(
            |t| {
                let rho = self.chart_polar(t)[0];
                // ∫_0^ρ λ(s)² s ds in closed form
                if k == 0.0 {
                    0.5 * rho * rho
                } else {
                    2.0 * rho * rho / (1.0 + k * rho * rho)
                }
            },
            &pts,
            QuadOptions::default(),
        )
        .value
    }
}
